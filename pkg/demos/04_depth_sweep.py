"""Skim-milk thickness sweep at fixed coupling: rates fall as exp(-2 mu_t z)
while the fringe contrast stays put.
    python3 demos/04_depth_sweep.py
"""
import math

from fransonsim import runner

base = runner.override(runner.load_preset("skim_milk_133um"), steps=60, integration=5.0)
mu_t = base.medium.attenuation(810.0)
rows = runner.sweep_thickness(base, [0.0, 133.6, 400.0, 794.0, 1200.0, 1556.0])
ref = rows[1]["max_coinc"]
print("z (um)   peak coinc/s   ratio to 133.6 um   exp(-2 mu_t dz)   contrast")
for r in rows:
    pred = math.exp(-2 * mu_t * (r["thickness_um"] - 133.6) * 1e-4)
    c = "-" if r["contrast"] != r["contrast"] else f"{100 * r['contrast']:.1f}({100 * r['sigma']:.1f})"
    print(f"{r['thickness_um']:7.1f}  {r['max_coinc']:12.2f}   {r['max_coinc'] / ref:16.3f}   {pred:15.3f}   {c}")
