"""Unimodular level sets and boundary values near the singular set.

Over a torus pair (t1, t2) the level set {phi = lam} is the graph
t3 = arg Psi_lam(t1, t2) unless q_lam = lam p1 - p2_tilde vanishes there,
in which case the whole vertical line {(t1, t2)} x T belongs to it. This
script locates those lines for ex_curve, checks that every level set passes
through the singular curves, and classifies boundary values on and off the
vertical line of ex_curve2. CSV files for 3D scatter plots go to
``levelsets_demo/``.

Run with ``python3 demos/03_level_sets_and_boundary.py`` (under a minute).
"""

from pathlib import Path

import numpy as np

from rif_forge.boundary import boundary_value
from rif_forge.catalog import catalog
from rif_forge.levelsets import level_set_sample, verify_cl_equals_ll
from rif_forge.scan import singular_scan


def main():
    out = Path("levelsets_demo")
    out.mkdir(exist_ok=True)
    r = catalog("ex_curve")
    scan = singular_scan(r)
    print(f"ex_curve: {len(scan)} singular components of dimensions {scan.dimensions}")
    for k in range(1, 8, 2):
        lam = np.exp(2j * np.pi * k / 8)
        s = level_set_sample(r, lam, grid=128)
        lines = ", ".join(f"({a:+.6f}, {b:+.6f})" for a, b in s.vertical_lines)
        pred = np.angle([1, -lam, -lam, 1]).reshape(2, 2)
        print(f"  lam = exp(2 pi i {k}/8): vertical lines at {lines}")
        print(f"    predicted (1, -lam), (-lam, 1): {np.round(pred, 6).tolist()}")
        worst = max(e["distance"] for e in verify_cl_equals_ll(r, lam, scan, grid=256))
        print(f"    farthest singular point from the level set: {worst:.2e}")
        s.to_csv(out / f"ex_curve_{k}.csv")

    r2 = catalog("ex_curve2")
    print("\nex_curve2 boundary values:")
    print(f"  off the line  (0.5, 1, 0): {boundary_value(r2, (0.5, 1.0, 0.0)).case}")
    rep = boundary_value(r2, (0.0, 0.0, "pi"))
    print(f"  on the line   (0, 0, t3): case {rep.case}, mu = {rep.mu:.2e}")
    for lam in (1j, -1, np.exp(0.3j)):
        t3 = rep.tau3_for(lam)
        print(f"    value {complex(lam):.3f} is taken once, at t3 = {t3:+.6f} "
              f"(arg of -lam: {np.angle(-lam):+.6f})")
    rc = boundary_value(catalog("remark_c1"), (0.0, 0.0, 1.0))
    print(f"\nremark example on its line: case {rc.case}, value {rc.value:.6f}, "
          f"outliers {rc.outliers}")
    print(f"\nCSV files written to {out}/")


if __name__ == "__main__":
    main()
