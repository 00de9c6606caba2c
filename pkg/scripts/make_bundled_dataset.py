"""Regenerate the bundled mixture-strength CSV (fixed seed, 1030 rows).

The table imitates a materials-testing benchmark: mixture proportions plus
curing age, and a compressive-strength response whose noise grows with the
signal level. Run from the repository root:

    python scripts/make_bundled_dataset.py
"""

from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "cqr_bench" / "datasets" / "mixtures_1030.csv"
N = 1030
SEED = 20240817

AGES = np.array([1, 3, 7, 14, 28, 56, 90, 180, 365], dtype=float)
AGE_WEIGHTS = np.array([0.05, 0.10, 0.18, 0.12, 0.30, 0.10, 0.08, 0.04, 0.03])


def main() -> None:
    rng = np.random.default_rng(SEED)
    binder = rng.uniform(100.0, 550.0, N)
    slag = np.where(rng.random(N) < 0.45, 0.0, rng.uniform(15.0, 360.0, N))
    fly_ash = np.where(rng.random(N) < 0.50, 0.0, rng.uniform(20.0, 200.0, N))
    water = rng.uniform(120.0, 250.0, N)
    plasticizer = np.where(rng.random(N) < 0.35, 0.0, rng.uniform(1.0, 32.0, N))
    coarse = rng.uniform(800.0, 1150.0, N)
    fine = rng.uniform(590.0, 995.0, N)
    age = rng.choice(AGES, size=N, p=AGE_WEIGHTS / AGE_WEIGHTS.sum())

    wb = water / (binder + 0.55 * slag + 0.35 * fly_ash + 1.0)
    maturity = 0.30 + 0.70 * (age / (age + 9.0))
    signal = (
        (14.0 + 105.0 * np.exp(-2.4 * wb)) * maturity
        + 0.28 * plasticizer
        - 0.006 * (coarse - 975.0)
        - 0.004 * (fine - 790.0)
    )
    noise_sd = 1.6 + 0.085 * np.abs(signal)
    strength = signal + rng.standard_normal(N) * noise_sd
    strength = np.maximum(strength, 0.5 + rng.random(N))

    header = "cement,slag,fly_ash,water,superplasticizer,coarse_aggregate,fine_aggregate,age_days,strength"
    rows = np.column_stack([binder, slag, fly_ash, water, plasticizer, coarse, fine, age, strength])
    with OUT.open("w") as fh:
        fh.write(header + "\n")
        for row in rows:
            cells = [f"{v:.2f}" for v in row[:7]] + [f"{row[7]:.0f}", f"{row[8]:.2f}"]
            fh.write(",".join(cells) + "\n")
    print(f"wrote {OUT} ({N} rows)")


if __name__ == "__main__":
    main()
