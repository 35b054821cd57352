"""Random switching trajectories against the certified envelope.

A thousand random dwell-admissible signals drive random initial states
for 100 steps.  Every normalized trajectory should stay below
c e^{-lambda t}.  The mean and worst normalized norms are printed at a
few times and written as CSV and SVG.

Run:  python3 demos/04_monte_carlo.py [output-dir]
"""
import sys
from pathlib import Path

import numpy as np

from dwellcert import certify, example_family
from dwellcert.reporting import atomic_write_text, norms_svg
from dwellcert.switching_sim import compute_basis_c, monte_carlo, write_trajectory_csv

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
fam = example_family()
cert = certify(fam, 2)
c = compute_basis_c(fam, 2, cert.lam, cert.m)

summary = monte_carlo(fam, 2, trials=1000, horizon=100, seed=7, c=c, lam=cert.lam)
ratios = np.array([r.norms / r.norms[0] for r in summary.records])
print(f"lambda={cert.lam:.5f}  c={c:.4f}  violations={summary.violations}")
for t in (0, 5, 10, 25, 50, 100):
    print(f"t={t:3d}  mean {ratios[:, t].mean():.3e}  max {ratios[:, t].max():.3e}  "
          f"bound {summary.bound[t]:.3e}")

write_trajectory_csv(summary.records, out / "trajectories.csv")
atomic_write_text(out / "norms.svg", norms_svg(ratios.mean(axis=0), ratios.max(axis=0)))
print(f"wrote {out / 'trajectories.csv'} and {out / 'norms.svg'}")
