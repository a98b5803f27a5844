"""Every shipped preset through the full chain, printed as a results table.

    python3 demos/03_sample_table.py           # reduced: 60 steps per scan
    python3 demos/03_sample_table.py --full    # 180 steps, as shipped (about 2 min)
"""
import sys

from fransonsim import runner

full = "--full" in sys.argv
rows = []
for name in runner.preset_names():
    s = runner.load_preset(name)
    if not full:
        s = runner.override(s, steps=60)
    r = runner.run_scenario(s)
    rows.append(r.report)
    print(f"{name:22s} contrast {r.report['contrast'] or '-':>8s}  expected {runner.expected_contrast(s):.3f}  "
          f"{r.status}", file=sys.stderr)
sys.stdout.write(runner.format_report(rows))
