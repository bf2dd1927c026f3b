"""Degree of rho, break thresholds, Thurston-norm comparison and quotient towers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import intlinalg as il
from ._parallel import pmap
from .fkdet import laurent_det, mahler_sliced, one_var_data
from .groupring import GRMatrix, MultiLaurent
from .torsion import TorsionSamples, TorsionSetup


@dataclass(frozen=True)
class DegreeResult:
    slope0: Fraction
    slope_inf: Fraction
    T0: Optional[float]
    Tinf: Optional[float]
    exact: bool
    degree: Fraction = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "degree", self.slope_inf - self.slope0)

    def to_json(self) -> dict:
        def num(x):
            if isinstance(x, Fraction):
                return int(x) if x.denominator == 1 else str(x)
            return x
        return {"degree": num(self.degree), "slope0": num(self.slope0),
                "slopeInf": num(self.slope_inf), "T0": self.T0, "TInf": self.Tinf,
                "exact": self.exact}


def degree_exact(setup: TorsionSetup) -> DegreeResult:
    """Slopes read off the Newton polytope of the restricted determinant.

    For a univariate determinant ``c z^r prod(z - a_i)`` with weight ``w > 0``
    this gives slope ``w r`` at 0 and ``w (r + s)`` at infinity.
    """
    eta_inf = sum(setup.eta_exponents, Fraction(0))
    res = setup.residual_phi
    if setup.matrix.size == 0:
        return DegreeResult(res, eta_inf + res, 1.0, 1.0, True)
    det = setup.determinant
    ld0, ldinf = det.slopes()
    t0 = tinf = None
    if det.exact:
        _, wg, data = det.one_var()
        t0, tinf = data.thresholds(wg)
    return DegreeResult(res - ld0, eta_inf - ldinf + res, t0, tinf, True)


def _slope(x, y) -> float:
    return float(np.polyfit(x, y, 1)[0])


def degree_numeric(samples: TorsionSamples, min_points: int = 10, tol: float = 1e-7) -> DegreeResult:
    """Least-squares slopes over the outermost decade on each side."""
    order = np.argsort(samples.grid)
    t = np.asarray(samples.grid)[order]
    y = np.asarray(samples.values)[order]
    lt = np.log(t)
    if math.log10(t[-1] / t[0]) < 4:
        raise ValueError("grid must span at least four decades")
    lo = max(int(np.searchsorted(t, t[0] * 10, side="right")), min_points)
    hi = min(int(np.searchsorted(t, t[-1] / 10, side="left")), len(t) - min_points)
    if lo > len(t) // 2 or hi < len(t) // 2:
        raise ValueError(f"need at least {min_points} samples in each outer decade")
    s0 = _slope(lt[:lo], y[:lo])
    sinf = _slope(lt[hi:], y[hi:])
    c0 = float(np.mean(y[:lo] - s0 * lt[:lo]))
    cinf = float(np.mean(y[hi:] - sinf * lt[hi:]))
    off0 = np.abs(y - (c0 + s0 * lt)) > tol
    offinf = np.abs(y - (cinf + sinf * lt)) > tol
    # thresholds: last t still on the low tail, first t already on the high tail
    t0 = float(t[np.argmax(off0) - 1]) if off0.any() and np.argmax(off0) > 0 else float(t[-1])
    last_off = len(t) - 1 - int(np.argmax(offinf[::-1])) if offinf.any() else -1
    tinf = float(t[last_off + 1]) if last_off + 1 < len(t) else float(t[-1])
    return DegreeResult(Fraction(s0).limit_denominator(10**6),
                        Fraction(sinf).limit_denominator(10**6), t0, tinf, False)


def compare_thurston(result: DegreeResult, x, excluded: bool = False, tol: float = 1e-6) -> dict:
    x = Fraction(x)
    deg = float(result.degree)
    if excluded:
        verdict = "N/A"
    elif abs(deg + float(x)) < tol:
        verdict = "EQUAL"
    elif deg >= -float(x) - tol:
        verdict = "LOWER-BOUND-OK"
    else:
        verdict = "VIOLATION"
    return {"x": int(x) if x.denominator == 1 else str(x), "verdict": verdict,
            "excluded": excluded}


# --- towers ----------------------------------------------------------------

@dataclass
class TowerReport:
    grid: list
    levels: list
    limit: list
    limit_error: list
    limit_kernel_dimension: Fraction
    violations: list
    tolerance: float

    @property
    def final_gap(self) -> list:
        last = self.levels[-1]["values"]
        return [lim - v for lim, v in zip(self.limit, last)]

    def to_json(self) -> dict:
        return {"grid": self.grid,
                "levels": [{**lv, "kernel_dimension": str(lv["kernel_dimension"])}
                           for lv in self.levels],
                "limit": self.limit, "limit_error": self.limit_error,
                "limit_kernel_dimension": str(self.limit_kernel_dimension),
                "final_gap": self.final_gap, "violations": self.violations,
                "tolerance": self.tolerance}

    def to_csv(self) -> str:
        rows = ["level,t,value"]
        for lv in self.levels:
            for t, v in zip(self.grid, lv["values"]):
                rows.append(f"{lv['index']},{t:.17g},{v:.17g}")
        for t, v in zip(self.grid, self.limit):
            rows.append(f"limit,{t:.17g},{v:.17g}")
        return "\n".join(rows) + "\n"


def _kernel_frame(phi: Sequence[int]):
    """Unimodular basis (gamma, kappa_1, ...) of Z^d with kappa_j spanning ker phi."""
    d = len(phi)
    _, _, v = il.smith_normal_form([list(phi)])
    cols = [[v[i][j] for i in range(d)] for j in range(d)]
    return cols[0], cols[1:], il.inverse_unimodular([list(r) for r in zip(*cols)])


def _specialize(p: MultiLaurent, vinv, char_of):
    """Specialize the kernel variables of ``p`` by a character; returns a univariate polynomial."""
    terms = {}
    for e, c in p.terms.items():
        coords = [sum(e[i] * vinv[i][j] for i in range(p.nvars)) for j in range(p.nvars)]
        key = (coords[0],)
        terms[key] = terms.get(key, 0) + complex(c) * char_of(coords[1:])
    scale = max((abs(c) for c in terms.values()), default=0.0)
    return MultiLaurent(1, {e: c for e, c in terms.items() if abs(c) > 1e-12 * max(scale, 1.0)})


def tower_study(a: GRMatrix, phi: Sequence[int], chain: Sequence[Sequence[Sequence[int]]],
                grid, ineq_tol: float = 1e-6, limit_tol: float = 1e-8) -> TowerReport:
    """Levels G/G_i for a matrix over C[Z^d], with G_i inside ker(phi).

    ``chain[i - 1]`` is a basis of G_i, given as vectors in Z^d.

    Each level value is ln det over N(G/G_i), the average over characters of
    K/G_i of univariate Mahler measures. The limit is ln det over N(Z^d),
    computed numerically.
    """
    grid = [float(t) for t in grid]
    m = a.shape[0]
    d = a[0, 0].nvars
    phi = [int(x) for x in phi]
    if len(phi) != d or not any(phi):
        raise ValueError("phi must be a nonzero integer vector of the right dimension")
    gamma, kappa, vinv = _kernel_frame(phi)
    wg = sum(x * y for x, y in zip(phi, gamma))
    det = laurent_det(a, d)

    levels, prev = [], None
    for idx, basis in enumerate(chain, start=1):
        kc = []
        for vec in basis:
            if sum(x * y for x, y in zip(phi, vec)):
                raise ValueError(f"level {idx}: {vec} is not in ker(phi)")
            c = [sum(vec[i] * vinv[i][j] for i in range(d)) for j in range(d)]
            kc.append(c[1:])
        lat = il.echelon_basis(kc, d - 1)
        if len(lat) != d - 1:
            raise ValueError(f"level {idx}: infinite index in ker(phi)")
        if prev is not None:
            for row in lat:
                try:
                    il.lattice_coordinates(prev, row)
                except ValueError:
                    raise ValueError(f"level {idx} is not contained in level {idx - 1}") from None
        prev = lat
        _, dm, v = il.smith_normal_form(lat)
        divs = il.diagonal(dm)
        labels = list(np.ndindex(*divs))

        def level_poly(lab, v=v, divs=divs):
            def char_of(x):
                y = [sum(x[i] * v[i][j] for i in range(d - 1)) for j in range(d - 1)]
                return np.exp(2j * np.pi * sum(a_ * y_ / dv for a_, y_, dv in zip(lab, y, divs)))
            return _specialize(det, vinv, char_of)

        polys = [level_poly(lab) for lab in labels]
        zeros = sum(1 for p in polys if not p)
        if zeros and m > 1:
            raise ValueError(f"level {idx}: specialized determinant vanishes for a {m}x{m} matrix")
        vals = np.zeros(len(grid))
        for p in polys:
            if p:
                vals += one_var_data(p).log_det(np.array(grid), wg)
        vals /= len(polys)
        levels.append({"index": idx, "description": f"Z x K/G_{idx}, |K/G_{idx}| = {len(polys)}",
                       "order": len(polys), "values": vals.tolist(),
                       "kernel_dimension": Fraction(zeros, len(polys))})

    if det:
        lim = pmap(lambda t: mahler_sliced(det, phi, t, limit_tol), grid)
        limit, lerr, kdim = [v for v, _ in lim], [e for _, e in lim], Fraction(0)
    else:
        limit, lerr, kdim = [0.0] * len(grid), [0.0] * len(grid), Fraction(m)
    violations = []
    for lv in levels:
        for t, v, lim in zip(grid, lv["values"], limit):
            if v > lim + ineq_tol:
                violations.append({"level": lv["index"], "t": t, "level_value": v,
                                   "limit": lim, "excess": v - lim})
    return TowerReport(grid, levels, limit, lerr, kdim, violations, ineq_tol)


def lawton_demo(levels: int = 7, grid=(0.5, 1.0, 2.0), **kw) -> TowerReport:
    """A = [1 + z + w], phi = (1, 0), G_i = {0} x 2^i Z for i = 1..levels."""
    p = MultiLaurent(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1})
    chain = [[(0, 2 ** i)] for i in range(1, levels + 1)]
    return tower_study(GRMatrix([[p]]), (1, 0), chain, grid, **kw)
