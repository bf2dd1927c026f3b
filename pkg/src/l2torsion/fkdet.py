"""Twisted Fuglede-Kadison determinants over virtually free-abelian quotients.

A matrix over Z[pi] is pushed to Q in H x Z^k and rewritten as a larger matrix
over C[Lambda], where Lambda = {v : (1, v) in Q}. Over a free abelian group the
Fuglede-Kadison determinant is the Mahler measure of the commutative
determinant, and the t-twist rescales the torus.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
import sympy

from . import intlinalg as il
from ._parallel import pmap
from .fpgroup import (AbelianizationData, CohomClass, QuotientHom, abelian_factorization,
                      abelianize, perm_identity, perm_mul)
from .groupring import GRMatrix, MultiLaurent

DEFAULT_MAX_FIBER = 5040


class NonAcyclicError(ArithmeticError):
    """The restricted commutative determinant vanishes identically."""

    def __init__(self, message: str, certificate: dict):
        super().__init__(message)
        self.certificate = certificate


class ConvergenceError(ArithmeticError):
    pass


class InterpolationError(ArithmeticError):
    pass


# --- lattice restriction --------------------------------------------------

@dataclass(frozen=True)
class LatticeRestriction:
    """Right multiplication by A over Q, rewritten over C[Lambda].

    Row/column ``a * fiber_size + i`` corresponds to matrix index ``a`` and
    transversal element ``i``. ``lattice_basis`` rows span Lambda inside Z^k;
    exponents of ``restricted`` are coordinates in that basis.
    """
    fiber_size: int
    lattice_basis: tuple
    transversal: tuple
    restricted: GRMatrix
    reweighted_phi: tuple
    phi_q: tuple
    size: int

    @property
    def rank(self) -> int:
        return len(self.lattice_basis)

    def twisted(self, t: float) -> GRMatrix:
        return self.restricted.map(lambda x: x.scale(self.reweighted_phi, t))

    def diagnostics(self) -> dict:
        return {"fiber_size": self.fiber_size,
                "lattice_basis": [list(r) for r in self.lattice_basis],
                "transversal": [[list(h), list(v)] for h, v in self.transversal],
                "reweighted_phi": [str(x) for x in self.reweighted_phi]}


def build_restriction(a: GRMatrix, h: QuotientHom, phi: CohomClass,
                      abel: Optional[AbelianizationData] = None,
                      max_fiber: int = DEFAULT_MAX_FIBER) -> LatticeRestriction:
    if not a.is_square:
        raise ValueError(f"square matrix required, got {a.shape}")
    abel = abel or abelianize(h.presentation)
    if phi.dim != abel.rank:
        raise ValueError(f"phi has dimension {phi.dim}, b_1 = {abel.rank}")
    nu = abelian_factorization(h, abel)
    k = h.rank
    phi_q = tuple(sum((phi.weights[i] * nu[i][j] for i in range(abel.rank)), Fraction(0))
                  for j in range(k))

    gens = range(h.presentation.ngens)
    ident = perm_identity(h.finite.degree) if h.finite is not None else ()
    gimg = [h.finite.images[g] if h.finite is not None else () for g in gens]
    index = {ident: 0}
    trans = [(ident, (0,) * k)]
    schreier = []
    pos = 0
    while pos < len(trans):
        hp, vp = trans[pos]
        for g in gens:
            h2 = perm_mul(hp, gimg[g]) if h.finite is not None else ()
            v2 = tuple(x + y for x, y in zip(vp, h.weights[g]))
            if h2 not in index:
                if len(trans) >= max_fiber:
                    raise ValueError(f"finite projection exceeds {max_fiber} elements")
                index[h2] = len(trans)
                trans.append((h2, v2))
            else:
                vj = trans[index[h2]][1]
                schreier.append(tuple(x - y for x, y in zip(v2, vj)))
        pos += 1
    basis = il.echelon_basis(schreier, k)
    r = len(basis)
    w = tuple(sum((phi_q[j] * row[j] for j in range(k)), Fraction(0)) for row in basis)
    if any(phi_q) and not any(w):
        raise ValueError("phi vanishes on Lambda but not on Q")

    n = len(trans)
    m = a.shape[0]
    cache = {}
    cells = [[{} for _ in range(m * n)] for _ in range(m * n)]
    for ra in range(m):
        for cb in range(m):
            for word, c in a[ra, cb].terms.items():
                if word not in cache:
                    cache[word] = h.evaluate(word)
                hq, vq = cache[word]
                for i, (hi, vi) in enumerate(trans):
                    j = index[perm_mul(hi, hq)] if h.finite is not None else 0
                    lam = tuple(x + y - z for x, y, z in zip(vi, vq, trans[j][1]))
                    e = tuple(il.lattice_coordinates(basis, lam))
                    cell = cells[ra * n + i][cb * n + j]
                    cell[e] = cell.get(e, 0) + c
    restricted = GRMatrix([[MultiLaurent(r, c) for c in row] for row in cells])
    return LatticeRestriction(n, tuple(tuple(b) for b in basis), tuple(trans), restricted,
                              w, phi_q, m * n)


def restrict_to_sublattice(mat: GRMatrix, w: Sequence, sub_basis: Sequence[Sequence[int]],
                           nvars: Optional[int] = None):
    """Re-restrict a matrix over C[Z^r] to a finite-index sublattice L'.

    Returns ``(matrix over C[L'], weights in the L' basis, index [Z^r : L'])``.
    """
    r = nvars if nvars is not None else (mat[0, 0].nvars if mat.shape[0] else len(w))
    basis = il.echelon_basis(sub_basis, r)
    if len(basis) != r:
        raise ValueError("sublattice must have full rank")
    _, dm, v = il.smith_normal_form(basis)
    divs = il.diagonal(dm)
    vinv = il.inverse_unimodular(v)
    labels = list(itertools.product(*(range(d) for d in divs)))
    reps = [tuple(sum(y[i] * vinv[i][j] for i in range(r)) for j in range(r)) for y in labels]
    label_index = {y: i for i, y in enumerate(labels)}

    def label(vec):
        return tuple(sum(vec[i] * v[i][j] for i in range(r)) % divs[j] for j in range(r))

    n = len(reps)
    m = mat.shape[0]
    cells = [[{} for _ in range(m * n)] for _ in range(m * n)]
    for ra in range(m):
        for cb in range(m):
            for e, c in mat[ra, cb].terms.items():
                for i, vi in enumerate(reps):
                    tgt = tuple(x + y for x, y in zip(vi, e))
                    j = label_index[label(tgt)]
                    lam = tuple(x - y for x, y in zip(tgt, reps[j]))
                    coords = tuple(il.lattice_coordinates(basis, lam))
                    cell = cells[ra * n + i][cb * n + j]
                    cell[coords] = cell.get(coords, 0) + c
    w2 = tuple(sum((Fraction(w[j]) * row[j] for j in range(r)), Fraction(0)) for row in basis)
    return GRMatrix([[MultiLaurent(r, c) for c in row] for row in cells]), w2, n


# --- commutative determinant -----------------------------------------------

def _perm_sign(p) -> int:
    sign, seen = 1, [False] * len(p)
    for i in range(len(p)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def _leibniz(mat: GRMatrix, nvars: int) -> MultiLaurent:
    n = mat.shape[0]
    total = MultiLaurent(nvars)
    for p in itertools.permutations(range(n)):
        term = MultiLaurent.constant(nvars, _perm_sign(p))
        for i in range(n):
            x = mat[i, p[i]]
            if not x:
                break
            term = term * x
        else:
            total = total + term
    return total


def _evaluate_grid(mat: GRMatrix, points: Sequence[np.ndarray]) -> np.ndarray:
    n = mat.shape[0]
    shape = np.broadcast(*points).shape if points else ()
    vals = np.zeros((*shape, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            if mat[i, j]:
                vals[..., i, j] = mat[i, j](*points)
    return vals


def laurent_det(mat: GRMatrix, nvars: Optional[int] = None, seed: int = 0) -> MultiLaurent:
    """Commutative determinant of a square matrix over C[Z^d]."""
    if not mat.is_square:
        raise ValueError(f"square matrix required, got {mat.shape}")
    n = mat.shape[0]
    if nvars is None:
        if n == 0:
            raise ValueError("nvars required for an empty matrix")
        nvars = mat[0, 0].nvars
    if n == 0:
        return MultiLaurent.constant(nvars, 1)
    if n <= 4:
        return _leibniz(mat, nvars)

    integral = all(x.is_integral() for row in mat.entries for x in row)
    lo, hi = [0] * nvars, [0] * nvars
    for j in range(n):
        bounds = [x.exponent_bounds() for x in mat.column(j) if x]
        if not bounds:
            return MultiLaurent(nvars)
        for v in range(nvars):
            lo[v] += min(b[0][v] for b in bounds)
            hi[v] += max(b[1][v] for b in bounds)
    sizes = [h - l + 1 for l, h in zip(lo, hi)]
    rng = np.random.default_rng(seed)
    for attempt in range(2):
        if math.prod(sizes) > 4_000_000:
            raise InterpolationError(f"interpolation grid {sizes} too large")
        axes = [np.exp(2j * np.pi * np.arange(s) / s) for s in sizes]
        points = np.meshgrid(*axes, indexing="ij") if nvars else []
        f = np.linalg.det(_evaluate_grid(mat, points))
        g = f
        for v in range(nvars):
            shift = np.exp(-2j * np.pi * np.arange(sizes[v]) * lo[v] / sizes[v])
            g = g * shift.reshape([-1 if u == v else 1 for u in range(nvars)])
        coeffs = np.fft.fftn(g) / g.size if nvars else np.asarray(g)
        terms = {}
        scale = max(float(np.abs(coeffs).max()), 1.0)
        for idx in zip(*np.nonzero(np.abs(coeffs) > 1e-9 * scale)) if nvars else [()]:
            c = complex(coeffs[idx])
            e = tuple(int(i) + l for i, l in zip(idx, lo))
            if integral:
                c = int(round(c.real))
            terms[e] = c
        poly = MultiLaurent(nvars, terms)
        theta = rng.uniform(0, 2 * np.pi, size=nvars)
        z = [np.exp(1j * x) for x in theta]
        direct = np.linalg.det(_evaluate_grid(mat, z))
        if abs(complex(poly(*z)) - direct) <= 1e-7 * max(1.0, poly.norm1()):
            return poly
        sizes = [2 * s for s in sizes]
    raise InterpolationError("determinant interpolation failed verification after enlarging the grid")


# --- Mahler measures -------------------------------------------------------

@dataclass(frozen=True)
class OneVarDetData:
    """``p = c * z^r * prod(z - a_i)`` with all ``a_i`` nonzero."""
    leading_abs: float
    order: int
    roots: tuple
    count: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "count", len(self.roots))

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(np.asarray(self.roots, dtype=complex))

    def log_det(self, t, w) -> np.ndarray:
        """ln det of ``p(t^w z)``, vectorized over ``t``."""
        ls = float(w) * np.log(np.asarray(t, dtype=float))
        lr = np.log(self.magnitudes) if self.count else np.zeros(0)
        tail = np.maximum(0.0, lr[None, :] - np.atleast_1d(ls)[:, None]).sum(axis=1)
        out = (self.order + self.count) * np.atleast_1d(ls) + math.log(self.leading_abs) + tail
        return out.reshape(np.shape(ls))

    def thresholds(self, w) -> tuple:
        """(T0, Tinf): the t-values of the smallest and largest root magnitudes."""
        if not self.count or w == 0:
            return 1.0, 1.0
        mags = self.magnitudes ** (1.0 / abs(float(w)))
        return float(mags.min()), float(mags.max())

    def reconstruct(self) -> np.ndarray:
        return self.leading_abs * np.poly(np.asarray(self.roots, dtype=complex)) if self.count \
            else np.array([self.leading_abs])


def _roots_integral(coeffs: Sequence[int]):
    z = sympy.Symbol("z")
    poly = sympy.Poly(list(reversed(coeffs)), z)
    _, factors = sympy.sqf_list(poly)
    roots = []
    for f, mult in factors:
        deg = f.degree()
        if deg == 0:
            continue
        r = np.roots(np.array([float(c) for c in f.all_coeffs()]))
        roots.extend(list(r) * mult)
    return roots


def one_var_data(p: MultiLaurent) -> OneVarDetData:
    if not p:
        raise NonAcyclicError("zero polynomial", {"reason": "determinant vanishes"})
    lo, coeffs = p.coeffs_1var()
    k = next(i for i, c in enumerate(coeffs) if c != 0)
    coeffs = coeffs[k:]
    lead = coeffs[-1]
    if len(coeffs) == 1:
        roots = []
    elif p.is_integral():
        roots = _roots_integral([int(c) for c in coeffs])
    else:
        roots = list(np.roots(np.array([complex(c) for c in reversed(coeffs)])))
    return OneVarDetData(float(abs(complex(lead))), lo + k, tuple(complex(r) for r in roots))


def mahler_exact_1var(p: MultiLaurent, w, t):
    """Returns ``(OneVarDetData, ln det of p(t^w z))``."""
    if p.nvars != 1:
        raise ValueError("univariate polynomial required")
    data = one_var_data(p)
    return data, data.log_det(t, w)


def _max_doublings(d: int) -> int:
    return {1: 14, 2: 4, 3: 2}.get(d, 1)


def mahler_numeric(p: MultiLaurent, w: Sequence, t: float, tol: float = 1e-6,
                   start: int = 64, max_doublings: Optional[int] = None):
    """Torus average of ``log|p|`` on the scaled torus, midpoint tensor grid.

    Doubles the grid until successive estimates differ by less than ``tol``.
    Returns ``(estimate, last difference)``.
    """
    if not p:
        raise NonAcyclicError("zero polynomial", {"reason": "determinant vanishes"})
    d = p.nvars
    if len(w) != d:
        raise ValueError(f"weight has dimension {len(w)}, polynomial {d}")
    if d == 0:
        return math.log(abs(complex(p.terms[()]))), 0.0
    q = p.scale(w, t)
    exps = np.array(list(q.terms), dtype=np.int64)
    cs = np.array([complex(c) for c in q.terms.values()])
    max_doublings = _max_doublings(d) if max_doublings is None else max_doublings
    n, prev = start, None
    for _ in range(max_doublings + 1):
        est = _grid_mean_log(exps, cs, d, n)
        if prev is not None and abs(est - prev) < tol:
            return est, abs(est - prev)
        prev, n = est, 2 * n
    raise ConvergenceError(
        f"torus average did not settle to {tol} after {max_doublings} doublings "
        f"(last estimate {prev:.12g}); likely a log singularity on the torus")


def _grid_mean_log(exps: np.ndarray, cs: np.ndarray, d: int, n: int) -> float:
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    if d == 1:
        z = np.exp(1j * theta)
        vals = (cs[None, :] * z[:, None] ** exps[None, :, 0]).sum(axis=1)
        return float(np.log(np.maximum(np.abs(vals), 1e-300)).mean())
    # accumulate over the first axis in chunks to keep memory bounded
    z = np.exp(1j * theta)
    total = 0.0
    rest = np.meshgrid(*([z] * (d - 1)), indexing="ij")
    for z0 in z:
        vals = np.zeros(rest[0].shape, dtype=complex)
        for e, c in zip(exps, cs):
            term = c * z0 ** e[0]
            for ax, k in zip(rest, e[1:]):
                term = term * ax ** k
            vals += term
        total += np.log(np.maximum(np.abs(vals), 1e-300)).sum()
    return float(total / n ** d)


def mahler_sliced(p: MultiLaurent, w: Sequence, t: float, tol: float = 1e-8,
                  start: int = 64, max_doublings: int = 12):
    """Torus average with the last variable integrated exactly by Jensen's formula.

    The remaining variables use the midpoint grid. The sliced integrand is
    continuous even where ``p`` has zeros on the torus, so this converges much
    faster than the full tensor grid.
    """
    if not p:
        raise NonAcyclicError("zero polynomial", {"reason": "determinant vanishes"})
    d = p.nvars
    if d <= 1:
        if d == 0:
            return math.log(abs(complex(p.terms[()]))), 0.0
        return float(mahler_exact_1var(p, w[0], t)[1]), 0.0
    q = p.scale(w, t)
    lo = min(e[-1] for e in q.terms)
    deg = max(e[-1] for e in q.terms) - lo
    n, prev = start, None
    for _ in range(max_doublings + 1):
        theta = 2 * np.pi * (np.arange(n) + 0.5) / n
        pts = np.meshgrid(*([np.exp(1j * theta)] * (d - 1)), indexing="ij")
        coeff = np.zeros((*pts[0].shape, deg + 1), dtype=complex)
        for e, c in q.terms.items():
            term = complex(c)
            for ax, k in zip(pts, e[:-1]):
                term = term * ax ** k
            coeff[..., e[-1] - lo] += term
        est = float(_jensen_batch(coeff.reshape(-1, deg + 1)).mean())
        if prev is not None and abs(est - prev) < tol:
            return est, abs(est - prev)
        prev, n = est, 2 * n
    raise ConvergenceError(f"sliced torus average did not settle to {tol}")


def _jensen_batch(coeff: np.ndarray) -> np.ndarray:
    """Mahler measure of each row (ascending coefficients) via companion eigenvalues."""
    out = np.empty(coeff.shape[0])
    deg = coeff.shape[1] - 1
    lead = coeff[:, -1]
    good = np.abs(lead) > 1e-12 * np.maximum(1.0, np.abs(coeff).max(axis=1))
    if deg == 0:
        return np.log(np.abs(lead))
    if good.any():
        monic = coeff[good, :-1] / lead[good, None]
        comp = np.zeros((monic.shape[0], deg, deg), dtype=complex)
        comp[:, 0, :] = -monic[:, ::-1]
        comp[:, np.arange(1, deg), np.arange(deg - 1)] = 1.0
        roots = np.linalg.eigvals(comp)
        out[good] = np.log(np.abs(lead[good])) + np.log(np.maximum(np.abs(roots), 1.0)).sum(axis=1)
    for i in np.nonzero(~good)[0]:
        row = coeff[i]
        nz = np.nonzero(np.abs(row) > 1e-14 * max(1.0, np.abs(row).max()))[0]
        if len(nz) == 0:
            out[i] = -np.inf
            continue
        row = row[nz[0]:nz[-1] + 1]
        val = math.log(abs(row[-1]))
        if len(row) > 1:
            val += float(np.log(np.maximum(np.abs(np.roots(row[::-1])), 1.0)).sum())
        out[i] = val
    return out


# --- assembled determinant ----------------------------------------------------

def _collinear_reduction(p: MultiLaurent):
    """Write ``p = z^v0 * q(z^g)`` with ``q`` univariate when the support is collinear."""
    supp = p.support()
    v0 = supp[0]
    diffs = [tuple(a - b for a, b in zip(v, v0)) for v in supp]
    basis = il.echelon_basis(diffs, p.nvars)
    if len(basis) > 1:
        return None
    if not basis:
        return v0, (0,) * p.nvars, MultiLaurent(1, {(0,): p.terms[v0]})
    g = basis[0]
    q = {(il.lattice_coordinates([g], dv)[0],): p.terms[v] for v, dv in zip(supp, diffs)}
    return v0, tuple(g), MultiLaurent(1, q)


@dataclass(frozen=True)
class DeterminantData:
    """Restriction plus commutative determinant, reusable across many t."""
    restriction: LatticeRestriction
    det: MultiLaurent
    univariate: Optional[tuple]  # (v0, g, OneVarDetData)

    @property
    def exact(self) -> bool:
        return self.univariate is not None

    @property
    def fiber_size(self) -> int:
        return self.restriction.fiber_size

    @property
    def weights(self) -> tuple:
        return self.restriction.reweighted_phi

    def one_var(self):
        """``(shift weight w.v0, direction weight w.g, OneVarDetData)`` on the exact path."""
        if self.univariate is None:
            raise ValueError("determinant is not univariate")
        v0, g, data = self.univariate
        w = [float(x) for x in self.weights]
        return sum(a * b for a, b in zip(w, v0)), sum(a * b for a, b in zip(w, g)), data

    def log_det(self, t, tol: float = 1e-6):
        """ln det over N(Q); returns ``(value, error estimate)`` arrays over ``t``."""
        t = np.asarray(t, dtype=float)
        if self.exact:
            shift, wg, data = self.one_var()
            val = (shift * np.log(t) + data.log_det(t, wg)) / self.fiber_size
            return val, np.zeros_like(val)
        res = pmap(lambda x: mahler_numeric(self.det, self.weights, float(x), tol), t.reshape(-1))
        vals = np.array([v for v, _ in res]) / self.fiber_size
        errs = np.array([e for _, e in res]) / self.fiber_size
        return vals.reshape(t.shape), errs.reshape(t.shape)

    def slopes(self):
        """Asymptotic slopes of ln det in ln t at t -> 0 and t -> infinity (exact)."""
        w = self.weights
        vals = [sum((Fraction(a) * b for a, b in zip(w, v)), Fraction(0)) for v in self.det.terms]
        return min(vals) / self.fiber_size, max(vals) / self.fiber_size


def determinant_data(a: GRMatrix, h: QuotientHom, phi: CohomClass,
                     abel: Optional[AbelianizationData] = None, seed: int = 0,
                     max_fiber: int = DEFAULT_MAX_FIBER) -> DeterminantData:
    res = build_restriction(a, h, phi, abel, max_fiber)
    det = laurent_det(res.restricted, res.rank, seed=seed)
    if not det:
        raise NonAcyclicError(
            "restricted determinant vanishes: the twisted complex is not L2-acyclic",
            {"reason": "laurent_det == 0", "restricted_size": res.size,
             "fiber_size": res.fiber_size, "lattice_rank": res.rank,
             "kernel_dimension": str(_kernel_dim(res, 1.0, seed))})
    return DeterminantData(res, det, _reduce_univariate(det))


def _reduce_univariate(det: MultiLaurent):
    red = _collinear_reduction(det)
    if red is None:
        return None
    v0, g, q = red
    return v0, g, one_var_data(q)


def fk_log_det(a: GRMatrix, h: QuotientHom, phi: CohomClass, t, tol: float = 1e-6) -> float:
    val, _ = determinant_data(a, h, phi).log_det(t, tol)
    return float(val) if np.ndim(val) == 0 else val


def _kernel_dim(res: LatticeRestriction, t: float, seed: int, samples: int = 5) -> Fraction:
    n = res.size
    if n == 0:
        return Fraction(0)
    rng = np.random.default_rng(seed)
    scale = [float(t) ** float(x) for x in res.reweighted_phi]
    ranks = []
    for _ in range(samples):
        z = [s * np.exp(1j * th) for s, th in zip(scale, rng.uniform(0, 2 * np.pi, res.rank))]
        vals = _evaluate_grid(res.restricted, z)
        ranks.append(int(np.linalg.matrix_rank(vals, tol=1e-8 * max(1.0, np.abs(vals).max()))))
    rank = max(set(ranks), key=ranks.count)
    return Fraction(n - rank, res.fiber_size)


def kernel_dimension(a: GRMatrix, h: QuotientHom, phi: CohomClass, t: float = 1.0,
                     seed: int = 0) -> Fraction:
    """von Neumann dimension of the kernel, from the generic rank of the restriction."""
    return _kernel_dim(build_restriction(a, h, phi), t, seed)


def log_det_over_lattice(mat: GRMatrix, w: Sequence, t, nvars: Optional[int] = None,
                         tol: float = 1e-6):
    """ln det over Z^r of a matrix already written over C[Z^r]."""
    det = laurent_det(mat, nvars)
    if not det:
        raise NonAcyclicError("determinant vanishes", {"reason": "laurent_det == 0"})
    red = _collinear_reduction(det)
    t = np.asarray(t, dtype=float)
    if red is not None:
        v0, g, q = red
        wf = [float(x) for x in w]
        shift = sum(a * b for a, b in zip(wf, v0))
        wg = sum(a * b for a, b in zip(wf, g))
        return shift * np.log(t) + one_var_data(q).log_det(t, wg)
    return np.array([mahler_numeric(det, w, float(x), tol)[0] for x in t.reshape(-1)]).reshape(t.shape)
