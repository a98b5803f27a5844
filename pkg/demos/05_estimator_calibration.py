"""Max/min contrast estimator on Poisson fringes at the measured count
levels: bias, scatter and the propagated sigma.
    python3 demos/05_estimator_calibration.py
"""
import numpy as np

from fransonsim import analysis
from fransonsim.analysis import FringeScan

rng = np.random.default_rng(1)
x = np.linspace(0, np.pi / 2, 180)
print(" peak      V    mean     scatter   mean sigma  ratio")
for peak in (50, 150, 700, 5000):
    for v in (0.80, 0.94):
        c, s = [], []
        for _ in range(400):
            counts = rng.poisson(peak / (1 + v) * (1 + v * np.cos(6 * x + rng.uniform(0, 2 * np.pi))))
            sing = np.full(x.size, 50_000)
            r = analysis.contrast(FringeScan(x, counts, sing, sing, 10.0))
            c.append(r.contrast)
            s.append(r.uncertainty)
        c, s = np.array(c), np.array(s)
        print(f"{peak:5d}  {v:.2f}  {c.mean():.4f}   {c.std():.4f}    {s.mean():.4f}     {c.std() / s.mean():.2f}")
