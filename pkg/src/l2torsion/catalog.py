"""Built-in knot exteriors with Thurston norms and fibration data."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import sympy

from .fkdet import laurent_det
from .foxcalc import square_matrix_boundary
from .fpgroup import CohomClass, Presentation, abelianize
from .groupring import MultiLaurent


class UnknownEntryError(KeyError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    presentation: Presentation
    x_unit: Fraction  # Thurston norm of the generator of H^1
    fibered: bool
    expected_degree: Fraction
    boundary: bool = True
    dilatation: Optional[float] = None
    excluded: bool = False
    notes: str = ""

    def thurston_x(self, phi: CohomClass) -> Fraction:
        if phi.dim != 1:
            raise ValueError("catalog entries have b_1 = 1")
        return self.x_unit * abs(phi.weights[0])

    def to_json(self) -> dict:
        return {"name": self.name, "presentation": self.presentation.to_json(),
                "boundary": self.boundary, "thurston_x": str(self.x_unit),
                "fibered": self.fibered, "dilatation": self.dilatation,
                "excluded": self.excluded, "expected_degree": str(self.expected_degree),
                "alexander": alexander_polynomial(self.presentation).format(),
                "notes": self.notes}


def _two_bridge_relator(p: int, q: int) -> str:
    """Relator ``a w B w^-1`` of the 2-bridge knot b(p, q)."""
    letters = []
    for i in range(1, p):
        sign = (-1) ** ((i * q) // p)
        base = "b" if i % 2 else "a"
        letters.append(base if sign > 0 else base.upper())
    w = " ".join(letters)
    winv = " ".join(x.swapcase() for x in reversed(letters))
    return f"a {w} B {winv}"


def _torus(p: int, q: int) -> Presentation:
    return Presentation.from_strings(["x", "y"], [f"x^{p} y^-{q}"])


def _entries():
    golden = (3 + math.sqrt(5)) / 2
    return [
        CatalogEntry("s1xd2", Presentation.from_strings(["x"], []), Fraction(0), True,
                     Fraction(1), excluded=True,
                     notes="solid torus; fibered by disks, so x = 0 while the degree is 1"),
        CatalogEntry("trefoil", Presentation.from_strings(["a", "b"], [_two_bridge_relator(3, 1)]),
                     Fraction(1), True, Fraction(-1), dilatation=1.0,
                     notes="T(2,3); genus-one fiber, periodic monodromy"),
        CatalogEntry("t2_5", _torus(2, 5), Fraction(3), True, Fraction(-3), dilatation=1.0,
                     notes="T(2,5); graph manifold, rho = min(0, -3 ln t)"),
        CatalogEntry("t3_4", _torus(3, 4), Fraction(5), True, Fraction(-5), dilatation=1.0,
                     notes="T(3,4); x = pq - p - q"),
        CatalogEntry("figure8", Presentation.from_strings(["a", "b"], [_two_bridge_relator(5, 3)]),
                     Fraction(1), True, Fraction(-1), dilatation=golden,
                     notes="2-bridge 5/3; pseudo-Anosov monodromy with dilatation (3+sqrt5)/2"),
        CatalogEntry("5_2", Presentation.from_strings(["a", "b"], [_two_bridge_relator(7, 3)]),
                     Fraction(1), False, Fraction(-1),
                     notes="2-bridge 7/3; genus one, not fibered; Alexander polynomial 2z^2-3z+2"),
    ]


CATALOG = {e.name: e for e in _entries()}
ALIASES = {"s1xd2": "s1xd2", "solid_torus": "s1xd2", "3_1": "trefoil", "4_1": "figure8",
           "figure-8": "figure8", "T(2,3)": "trefoil", "T(2,5)": "t2_5", "T(3,4)": "t3_4",
           "5_1": "t2_5"}


def get(name: str) -> CatalogEntry:
    key = ALIASES.get(name, name)
    try:
        return CATALOG[key]
    except KeyError:
        raise UnknownEntryError(f"unknown catalog entry {name!r}; known: {sorted(CATALOG)}") from None


def thurston_oracle(entry, phi: CohomClass, sheets: int = 1) -> Fraction:
    """x_M(phi) by table lookup and scaling; pulled back to an n-sheeted cover it is n times larger."""
    if isinstance(entry, str):
        entry = get(entry)
    return entry.thurston_x(phi) * sheets


def alexander_polynomial(p: Presentation) -> MultiLaurent:
    """Delta = det(A) (z - 1) / (z^w - 1), w the weight of the deleted generator.

    Normalized to start at z^0 with positive leading coefficient.
    """
    abel = abelianize(p)
    if abel.rank != 1:
        raise ValueError("b_1 = 1 required")
    m = square_matrix_boundary(p, abel=abel)
    w = abs(abel.word_weight(m.s)[0])
    if m.size == 0:
        det = MultiLaurent.constant(1, 1)
    else:
        det = laurent_det(m.A.map(lambda x: x.abelianize(abel.weights)), 1)
    _, coeffs = det.coeffs_1var()
    z = sympy.Symbol("z")
    num = sympy.Poly(list(reversed(coeffs)), z) * sympy.Poly(z - 1, z)
    quo, rem = sympy.div(num, sympy.Poly(z ** w - 1, z))
    if not rem.is_zero:
        raise ValueError("Fox determinant is not divisible by (z^w - 1)/(z - 1)")
    out = [int(c) for c in reversed(quo.all_coeffs())]
    while out and out[0] == 0:
        out.pop(0)
    sign = 1 if out[-1] > 0 else -1
    return MultiLaurent.from_coeffs([sign * c for c in out])


def export_json() -> list:
    return [e.to_json() for e in CATALOG.values()]
