"""Built-in worked examples of rational inner functions.

Each entry stores the denominator ``p`` exactly; the numerator is always
``reflect(p, degree)``. Models are built lazily and cached.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .errors import UnknownExample
from .poly import MultiPoly, parse_poly
from .rif import RIFModel, make_rif

__all__ = ["CatalogEntry", "catalog", "catalog_denominator", "catalog_entries", "catalog_names",
           "glued_denominator", "phi_d_numerator"]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    nvars: int
    degree: tuple
    denominator: str
    family: str
    summary: str
    listed: bool = True


def _phi_d_text(d: int) -> str:
    return f"{d} - " + " - ".join(f"z{k}" for k in range(1, d + 1))


_ENTRIES = [
    CatalogEntry("phi_d(3)", 3, (1, 1, 1), _phi_d_text(3), "canonical",
                 "symmetric family d - sum z_k, isolated singularity at (1,...,1)"),
    CatalogEntry("ex_vl1", 3, (1, 1, 1),
                 "(2 - z1 - z2) + z3*1/2*(2*z1*z2 - z1 - z2)", "vertical-line",
                 "vertical line {(1,1)} x T with |psi0| = 1/2"),
    CatalogEntry("ex_vl2", 3, (1, 2, 1),
                 "5 - z1 - 4*z2 - 2*z1*z2 + z2^2 + z1*z2^2 + 3*z3 - z1*z3 - 2*z2*z3"
                 " + z2^2*z3 - z1*z2^2*z3", "vertical-line",
                 "vertical line at (1,1) with discontinuous density"),
    CatalogEntry("ex_iso1", 3, (1, 1, 1), "3 - z1 - z2 - z3", "isolated",
                 "isolated singularity at (1,1,1)"),
    CatalogEntry("ex_lifted", 3, (1, 1, 1), "2 - z1*z3 - z2*z3", "curve",
                 "two-variable example lifted to three variables; curve of singularities"),
    CatalogEntry("ex_curve", 3, (2, 1, 1),
                 "4 - z3 - 2*z1*z3 - z1^2*z3 + z2*z3 - 2*z1*z2*z3 + z1^2*z2*z3", "curve",
                 "three intersecting curves of singularities"),
    CatalogEntry("ex_curve2", 3, (2, 1, 1),
                 "4 - z1 + z1^2 - z2 - z1*z2 - 2*z1^2*z2 + z3 - z1*z3 - z1*z2*z3"
                 " + z1^2*z2*z3", "vertical-line",
                 "vertical line {(1,1)} x T crossing a second curve"),
    CatalogEntry("ex_curveiso", 3, (6, 2, 1),
                 "192 + 48*z3 - 72*z1*z3 + 27*z1^2*z3 - 24*z1^3*z3 + 18*z1^4*z3"
                 " + 3*z1^6*z3 + 32*z2*z3 + 48*z1*z2*z3 + 18*z1^2*z2*z3"
                 " + 16*z1^3*z2*z3 + 12*z1^4*z2*z3 + 2*z1^6*z2*z3 + 16*z2^2*z3"
                 " + 24*z1*z2^2*z3 + 9*z1^2*z2^2*z3 + 8*z1^3*z2^2*z3"
                 " + 6*z1^4*z2^2*z3 + z1^6*z2^2*z3", "mixed",
                 "isolated point (1,1,-1) plus the curve (-1, t, -1)"),
    CatalogEntry("ex_curveiso2", 3, (2, 2, 2),
                 "54 - 30*z1 - 30*z2 - 30*z3 + 4*z1^2 + 8*z1*z2 + 8*z1*z3 + 4*z2^2"
                 " + 8*z2*z3 + 4*z3^2 + 2*z1^2*z2^2 + 4*z1^2*z2*z3 + 2*z1^2*z3^2"
                 " + 4*z1*z2^2*z3 + 4*z1*z2*z3^2 + 2*z2^2*z3^2 - 6*z1^2*z2^2*z3"
                 " - 6*z1^2*z2*z3^2 - 6*z1*z2^2*z3^2", "isolated",
                 "degree (2,2,2) glued from ex_iso1, isolated singularity at (1,1,1)"),
    CatalogEntry("remark_c1", 3, (2, 1, 1),
                 "(2 - z1 - z2) + z3*1/2*(1 + z1)*(2*z1*z2 - z1 - z2)", "vertical-line",
                 "vertical line at (1,1) with unimodular radial limit", listed=False),
    # Coefficients as printed for the glued example. They do not come out of
    # the gluing construction and give a different quartic density term;
    # kept for comparison only (see glued_denominator).
    CatalogEntry("ex_curveiso2_printed", 3, (2, 2, 2),
                 "36 - 18*z1 + 2*z1^2 - 18*z2 + 4*z1*z2 + 2*z2^2 - 6*z3 - 6*z1*z3"
                 " + 2*z1^2*z3 - 6*z2*z3 + 4*z1*z2*z3 + 2*z1^2*z2*z3 + 2*z2^2*z3"
                 " + 2*z1*z2^2*z3 + 2*z1^2*z2^2*z3 - 2*z3^2 + 2*z1*z3^2"
                 " + 2*z1^2*z3^2 + 2*z2*z3^2 + 4*z1*z2*z3^2 - 4*z1^2*z2*z3^2"
                 " + 2*z2^2*z3^2 - 4*z1*z2^2*z3^2 - 6*z1^2*z2^2*z3^2", "isolated",
                 "printed coefficients of the glued example", listed=False),
]

_BY_NAME = {e.name: e for e in _ENTRIES}
_PHI_D = re.compile(r"phi_d\((\d+)\)$")


def _lookup(name: str) -> CatalogEntry:
    key = name.strip()
    if key in _BY_NAME:
        return _BY_NAME[key]
    m = _PHI_D.match(key)
    if m:
        d = int(m.group(1))
        if d < 2:
            raise UnknownExample(f"phi_d needs d >= 2, got {d}")
        return CatalogEntry(f"phi_d({d})", d, (1,) * d, _phi_d_text(d), "canonical",
                            "symmetric family d - sum z_k")
    raise UnknownExample(f"unknown example {name!r}; known: {', '.join(catalog_names())}")


def catalog_names() -> list[str]:
    return [e.name for e in _ENTRIES if e.listed]


def catalog_entries(include_hidden: bool = False) -> list[CatalogEntry]:
    return [e for e in _ENTRIES if e.listed or include_hidden]


def catalog_denominator(name: str) -> MultiPoly:
    e = _lookup(name)
    return parse_poly(e.denominator, e.nvars, e.degree)


@lru_cache(maxsize=None)
def catalog(name: str) -> RIFModel:
    """Exact model for a catalog name such as ``"ex_iso1"`` or ``"phi_d(4)"``.

    Raises
    ------
    UnknownExample
    """
    e = _lookup(name)
    return make_rif(parse_poly(e.denominator, e.nvars, e.degree), e.degree, name=e.name)


def glued_denominator(p: MultiPoly, degree) -> MultiPoly:
    """Denominator of the glued RIF built from ``phi = p_tilde / p``.

    With ``r = p**2 + p_tilde**2`` the numerator is the Euler operator
    ``sum_j z_j dr/dz_j`` and the denominator its reflection at twice the
    degree of ``p``.
    """
    from .poly import partial_derivative, reflect

    pt = reflect(p, degree)
    r = p * p + pt * pt
    num = MultiPoly(p.nvars)
    for j in range(1, p.nvars + 1):
        num = num + MultiPoly.variable(j, p.nvars) * partial_derivative(r, j)
    return reflect(num, tuple(2 * n for n in degree))


def phi_d_numerator(d: int) -> MultiPoly:
    """``d * prod z_k - sum of all (d-1)-fold products``, built directly."""
    z = [MultiPoly.variable(k, d) for k in range(1, d + 1)]
    prod = MultiPoly.constant(1, d)
    for zk in z:
        prod = prod * zk
    out = prod * d
    for combo in combinations(range(d), d - 1):
        term = MultiPoly.constant(1, d)
        for k in combo:
            term = term * z[k]
        out = out - term
    return out
