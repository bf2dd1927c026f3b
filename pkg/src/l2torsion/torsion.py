"""The twisted L2-torsion function rho(t) = eta(t) - ln det(A twisted by t).

Also hosts the property checks: scaling, symmetry, Spin^c dependence,
pinching, and the norm bounds for determinants of ``f0 + t*f1``.
"""
from __future__ import annotations

import csv
import io
import math
import threading
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .fkdet import (DeterminantData, NonAcyclicError, determinant_data, laurent_det,
                    log_det_over_lattice, one_var_data)
from .foxcalc import SquareMatrixData, square_matrix_boundary, spinc_shift
from .fpgroup import (AbelianizationData, CohomClass, Presentation, QuotientHom, Word,
                      abelianize, check_large, pair)
from .groupring import GRMatrix, MultiLaurent, norm1


def parse_grid(spec: str) -> np.ndarray:
    """``"log:a:b:n"`` -> ``n`` points ``10^a .. 10^b``, log-spaced."""
    parts = spec.split(":")
    if len(parts) != 4 or parts[0] != "log":
        raise ValueError(f"grid spec must look like log:a:b:n, got {spec!r}")
    a, b, n = float(parts[1]), float(parts[2]), int(parts[3])
    if n < 2 or not a < b:
        raise ValueError("grid needs n >= 2 and a < b")
    return np.logspace(a, b, n)


DEFAULT_GRID = "log:-3:3:121"


class TorsionSetup:
    """The data (A, s, s', mu, phi) defining rho, with the determinant cached.

    The determinant data are computed on first use under a lock, so a setup may
    be shared between threads.
    """

    def __init__(self, matrix: SquareMatrixData, hom: QuotientHom, phi: CohomClass,
                 numeric_tol: float = 1e-6, seed: int = 0):
        self.matrix = matrix
        self.hom = hom
        self.phi = phi
        self.numeric_tol = numeric_tol
        self.seed = seed
        self.abel: AbelianizationData = abelianize(matrix.presentation)
        if phi.dim != self.abel.rank:
            raise ValueError(f"phi has dimension {phi.dim}, b_1 = {self.abel.rank}")
        if not check_large(hom, self.abel):
            raise ValueError("the homomorphism is not large: H_1_f does not factor through it")
        self._det: Optional[DeterminantData] = None
        self._lock = threading.Lock()

    @classmethod
    def from_presentation(cls, p: Presentation, hom: Optional[QuotientHom] = None,
                          phi: Optional[CohomClass] = None, **kw) -> "TorsionSetup":
        abel = abelianize(p)
        hom = hom or QuotientHom.abelian(p, abel)
        phi = phi or CohomClass((1,) * abel.rank)
        return cls(square_matrix_boundary(p, abel=abel), hom, phi, **kw)

    def with_phi(self, phi: CohomClass) -> "TorsionSetup":
        return TorsionSetup(self.matrix, self.hom, phi, self.numeric_tol, self.seed)

    def with_matrix(self, matrix: SquareMatrixData) -> "TorsionSetup":
        return TorsionSetup(matrix, self.hom, self.phi, self.numeric_tol, self.seed)

    @property
    def eta_exponents(self) -> tuple:
        return tuple(abs(pair(self.phi, w, self.abel)) for w in self.matrix.eta_words())

    @property
    def residual_phi(self) -> Fraction:
        off = self.matrix.residual_offset or (0,) * self.abel.rank
        return self.phi.on_vector(off)

    @property
    def determinant(self) -> DeterminantData:
        with self._lock:
            if self._det is None:
                self._det = determinant_data(self.matrix.A, self.hom, self.phi, self.abel,
                                             seed=self.seed)
            return self._det

    @property
    def exact(self) -> bool:
        return self.matrix.size == 0 or self.determinant.exact

    def log_det(self, t):
        """``(ln det, error)`` arrays; the empty matrix has determinant 1."""
        t = np.asarray(t, dtype=float)
        if self.matrix.size == 0:
            return np.zeros_like(t), np.zeros_like(t)
        return self.determinant.log_det(t, self.numeric_tol)


def eta(setup: TorsionSetup, t):
    lt = np.log(np.asarray(t, dtype=float))
    out = np.zeros_like(lt)
    for e in setup.eta_exponents:
        out = out + np.maximum(0.0, float(e) * lt)
    return out


@dataclass(frozen=True)
class TorsionSamples:
    grid: np.ndarray
    values: np.ndarray
    exact: bool
    unit_ambiguity: int
    errors: np.ndarray = field(default=None)

    def __post_init__(self):
        if len(self.grid) != len(self.values):
            raise ValueError("grid and values differ in length")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite torsion values")
        if self.errors is None:
            object.__setattr__(self, "errors", np.zeros_like(self.values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "rho", "exact"])
        for t, v in zip(self.grid, self.values):
            w.writerow([f"{t:.17g}", f"{v:.17g}", "true" if self.exact else "false"])
        return buf.getvalue()

    def shifted(self, e) -> "TorsionSamples":
        """Add ``e * ln t``; the degree is unchanged."""
        return replace(self, values=self.values + float(e) * np.log(self.grid))


def rho_values(setup: TorsionSetup, t):
    t = np.asarray(t, dtype=float)
    ld, err = setup.log_det(t)
    return eta(setup, t) - ld + float(setup.residual_phi) * np.log(t), err


def rho_eval(setup: TorsionSetup, grid) -> TorsionSamples:
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0):
        raise ValueError("grid points must be positive")
    vals, err = rho_values(setup, grid)
    amb = 0
    if setup.matrix.size and setup.determinant.exact:
        amb = setup.determinant.univariate[2].order
    return TorsionSamples(grid, vals, setup.exact, amb, err)


def _tol(setup: TorsionSetup, err, exact_tol: float) -> float:
    return exact_tol if setup.exact else max(exact_tol, 3 * float(np.max(err, initial=0.0)))


def check_scaling(setup: TorsionSetup, r, grid, tol: float = 1e-8) -> dict:
    """Compare rho for r*phi at t with rho for phi at t^r.

    For r < 0 the correction term uses |phi(s)|, so the two sides agree only up
    to a multiple of ln t; that multiple is fitted and must be an integer.
    """
    r = Fraction(r)
    if r == 0:
        raise ValueError("r must be nonzero")
    grid = np.asarray(grid, dtype=float)
    scaled = setup.with_phi(setup.phi * r)
    lhs, e1 = rho_values(scaled, grid)
    rhs, e2 = rho_values(setup, grid ** float(r))
    diff = lhs - rhs
    report = {"check": "scaling", "r": str(r)}
    if r < 0:
        lt = np.log(grid)
        m = float(diff @ lt / (lt @ lt))
        diff = diff - m * lt
        report["log_multiple"] = m
        integral = abs(m - round(m)) < 1e-6
    else:
        integral = True
    dev = float(np.max(np.abs(diff)))
    limit = _tol(setup, np.concatenate([e1, e2]), tol)
    report.update({"max_deviation": dev, "tolerance": limit,
                   "passed": bool(dev < limit and integral)})
    return report


def check_symmetry(setup: TorsionSetup, grid, tol: float = 1e-8):
    """Fit ``rho(1/t) - rho(t) = e ln t``; e should be an integer."""
    grid = np.asarray(grid, dtype=float)
    grid = grid[grid != 1.0]
    a, e1 = rho_values(setup, 1.0 / grid)
    b, e2 = rho_values(setup, grid)
    lt = np.log(grid)
    d = a - b
    e = float(d @ lt / (lt @ lt))
    resid = float(np.max(np.abs(d - e * lt)))
    limit = _tol(setup, np.concatenate([e1, e2]), tol)
    near = abs(e - round(e)) < 1e-6
    report = {"check": "symmetry", "e": e, "e_int": int(round(e)), "residual": resid,
              "tolerance": limit, "passed": bool(resid < limit and near)}
    return int(round(e)), report


def check_spinc(setup: TorsionSetup, h: Sequence[int], g: Word, grid, tol: float = 1e-9) -> dict:
    """rho after the Spin^c action of h minus rho before should be phi(h) ln t."""
    grid = np.asarray(grid, dtype=float)
    shifted = setup.with_matrix(spinc_shift(setup.matrix, h, g, setup.abel))
    a, e1 = rho_values(shifted, grid)
    b, e2 = rho_values(setup, grid)
    ph = float(setup.phi.on_vector(h))
    dev = float(np.max(np.abs(a - b - ph * np.log(grid))))
    e0, _ = check_symmetry(setup, grid)
    e1s, _ = check_symmetry(shifted, grid)
    limit = _tol(setup, np.concatenate([e1, e2]), tol)
    return {"check": "spinc", "h": list(h), "phi_h": ph, "max_deviation": dev,
            "tolerance": limit, "e_before": e0, "e_after": e1s,
            "passed": bool(dev < limit and e1s == e0 - 2 * round(ph))}


def pinching_constants(setup: TorsionSetup):
    a = setup.matrix.A
    m = setup.matrix.size
    phimax = max((abs(pair(setup.phi, w, setup.abel)) for row in a.entries for x in row
                  for w in x.terms), default=Fraction(0))
    c = m * phimax + sum(setup.eta_exponents) + abs(setup.residual_phi)
    d = m * max(0.0, math.log(2 * norm1(a) + 1)) if m else 0.0
    return c, d


def check_pinching(setup: TorsionSetup, grid):
    """|rho(t)| <= C |ln t| + D on the grid."""
    grid = np.asarray(grid, dtype=float)
    c, d = pinching_constants(setup)
    vals, err = rho_values(setup, grid)
    lt = np.abs(np.log(grid))
    bound = float(c) * lt + d
    slack = bound - np.abs(vals) + 3 * err
    worst = int(np.argmin(slack))
    return float(c), d, {"check": "pinching", "C": str(c), "D": d,
                         "min_slack": float(slack[worst]), "witness_t": float(grid[worst]),
                         "passed": bool(np.all(slack >= -1e-12))}


def check_norm_bound(a: GRMatrix, w: Optional[Sequence] = None) -> dict:
    """exp(ln det at t=1) <= norm1(A)^m for a square matrix over C[Z^d]."""
    m = a.shape[0]
    nv = a[0, 0].nvars
    det = laurent_det(a, nv)
    if not det:
        return {"check": "norm_bound", "passed": True, "degenerate": True}
    ld = float(log_det_over_lattice(a, w or (0,) * nv, 1.0, nv))
    bound = m * math.log(norm1(a)) if norm1(a) > 0 else -math.inf
    return {"check": "norm_bound", "log_det": ld, "log_bound": bound,
            "passed": bool(ld <= bound + 1e-9)}


def _log_det_1var(mat: GRMatrix) -> Optional[float]:
    det = laurent_det(mat, 1)
    if not det:
        return None
    data = one_var_data(det)
    return float(data.log_det(1.0, 0.0))


def bound_lemma32(f0: GRMatrix, k: int, grid, gamma: int = 0) -> dict:
    """Two-regime upper bound for ln det(f0 + t*f1), f1 = z^gamma * (id_k + 0).

    ``f0`` is an m x m matrix over C[Z] (univariate Laurent entries).
    """
    m = f0.shape[0]
    if not 0 <= k <= m:
        raise ValueError("need 0 <= k <= m")
    mono = MultiLaurent.monomial((gamma,))
    zero = MultiLaurent(1)
    f1 = GRMatrix([[mono if (i == j and i < k) else zero for j in range(m)] for i in range(m)])
    n0, n1 = norm1(f0), norm1(f1)
    lo_bound = m * max(0.0, math.log(n0 + n1)) if n0 + n1 > 0 else 0.0
    hi_const = m * max(0.0, math.log(2 * n0 + n1)) if 2 * n0 + n1 > 0 else 0.0
    worst, witness, skipped = math.inf, None, 0
    for t in np.asarray(grid, dtype=float):
        ft = GRMatrix([[f0[i, j] + f1[i, j] * float(t) for j in range(m)] for i in range(m)])
        ld = _log_det_1var(ft)
        if ld is None:
            skipped += 1
            continue
        bound = lo_bound if t <= 1 else k * math.log(t) + hi_const
        slack = bound - ld
        if slack < worst:
            worst, witness = slack, float(t)
    return {"check": "lemma32", "m": m, "k": k, "norm_f0": n0, "norm_f1": n1,
            "min_slack": worst, "witness_t": witness, "skipped": skipped,
            "passed": bool(worst >= -1e-9)}


def samples_json(s: TorsionSamples) -> dict:
    return {"t": s.grid.tolist(), "rho": s.values.tolist(), "exact": s.exact,
            "unit_ambiguity": s.unit_ambiguity, "error": s.errors.tolist()}


__all__ = ["TorsionSetup", "TorsionSamples", "eta", "rho_eval", "rho_values", "check_scaling",
           "check_symmetry", "check_spinc", "check_pinching", "check_norm_bound",
           "bound_lemma32", "pinching_constants", "parse_grid", "DEFAULT_GRID",
           "NonAcyclicError", "samples_json"]
