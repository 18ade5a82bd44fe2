"""Exact Taylor coefficients of the density and what they predict.

For degree (m, n, 1) models the z3 derivative is integrable to the power p
exactly when rho**(1 - p) is integrable near the zeros of the density
rho = 1 - |p2_tilde / p1_tilde|**2 on the 2-torus. The Newton polygon of
the Taylor series of rho decides that exponent in most cases.

Run with ``python3 demos/02_newton_polygon.py`` (a few seconds).
"""

from rif_forge.catalog import catalog
from rif_forge.errors import VerticalLineAtCenter
from rif_forge.newton import greenblatt_classify, rho_series


def show(name, center=(0, 0), order=6):
    try:
        s = rho_series(catalog(name), center, order)
    except VerticalLineAtCenter as exc:
        print(f"{name}: not analysable at {center}: {exc}\n")
        return
    terms = ", ".join(f"c{k}{l}={v}" for (k, l), v in sorted(s.nonzero().items())
                      if k + l <= 4)
    rep = greenblatt_classify(s)
    print(f"{name} at {center}")
    print(f"  low-order terms: {terms}")
    print(f"  polygon vertices: {rep.polygon_vertices}, diagonal hit: {rep.diagonal_kind}, "
          f"Newton distance {rep.delta}")
    print(f"  verdict: {rep.verdict}\n")


def main():
    # a positive definite quadratic: the generic isolated singularity
    show("ex_iso1")
    # a perfect square quadratic, so the polygon alone is not sharp
    show("ex_lifted")
    # no quadratic part; the quartic decides and Z counts repeated edge roots
    show("ex_curveiso2")
    # the curve through (0, 0) leaves only a mixed vertex
    show("ex_curve")
    # a vertical line through the center makes rho discontinuous there
    show("ex_vl2")


if __name__ == "__main__":
    main()
