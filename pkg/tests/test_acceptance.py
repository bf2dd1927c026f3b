"""Acceptance gate: one test per criterion, at the stated tolerances."""
import itertools
import math
import time

import mpmath
import numpy as np
import pytest
import sympy

from l2torsion import catalog
from l2torsion.degree import compare_thurston, degree_exact, lawton_demo
from l2torsion.fkdet import (build_restriction, log_det_over_lattice, mahler_exact_1var,
                             mahler_numeric, restrict_to_sublattice)
from l2torsion.fpgroup import CohomClass, QuotientHom, word_of_weight
from l2torsion.groupring import GRMatrix, MultiLaurent
from l2torsion.torsion import (TorsionSetup, bound_lemma32, check_norm_bound, check_pinching,
                               check_scaling, check_spinc, check_symmetry, parse_grid, rho_eval)

GOLDEN = (3 + math.sqrt(5)) / 2
PHI1 = CohomClass((1,))


def setup_for(name, hom=None):
    return TorsionSetup.from_presentation(catalog.get(name).presentation, hom, PHI1)


def rel_close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def test_c01_solid_torus(criterion):
    criterion(1, "S1 x D2: rho = max(0, ln t), degree 1, x = 0")
    start = time.perf_counter()
    s = setup_for("s1xd2")
    grid = parse_grid("log:-2:2:81")
    samples = rho_eval(s, grid)
    err = np.max(np.abs(samples.values - np.maximum(0.0, np.log(grid))))
    deg = degree_exact(s)
    x = catalog.thurston_oracle("s1xd2", PHI1)
    elapsed = time.perf_counter() - start
    print(f"c1: max error {err:.3e}, degree {deg.degree}, x {x}, {elapsed:.3f}s")
    assert samples.exact
    assert err < 1e-12
    assert deg.degree == 1 and x == 0
    assert compare_thurston(deg, x, excluded=True)["verdict"] == "N/A"
    assert elapsed < 1.0


def test_c02_trefoil(criterion):
    criterion(2, "trefoil: Delta = z^2 - z + 1, rho = -max(0, ln t), degree -1")
    start = time.perf_counter()
    s = setup_for("trefoil")
    delta = catalog.alexander_polynomial(catalog.get("trefoil").presentation)
    grid = parse_grid("log:-3:3:121")
    samples = rho_eval(s, grid)
    lt = np.log(grid)
    diff = samples.values - (-np.maximum(0.0, lt))
    e = float(diff @ lt / (lt @ lt))
    resid = np.max(np.abs(diff - round(e) * lt))
    deg = degree_exact(s)
    rho1 = float(rho_eval(s, [1.0]).values[0])
    elapsed = time.perf_counter() - start
    print(f"c2: Delta {delta.format()}, residual {resid:.3e} (e={e:.3g}), rho(1) {rho1:.3e}, "
          f"degree {deg.degree}, {elapsed:.3f}s")
    assert delta == MultiLaurent.from_coeffs([1, -1, 1])
    assert resid < 1e-12
    assert deg.degree == -1 == -catalog.thurston_oracle("trefoil", PHI1)
    assert abs(rho1) < 1e-12
    assert elapsed < 1.0


def test_c03_figure_eight(criterion):
    criterion(3, "figure-8: rho(1) = -ln((3+sqrt5)/2), degree -1, thresholds")
    start = time.perf_counter()
    s = setup_for("figure8")
    rho1 = float(rho_eval(s, [1.0]).values[0])
    det = s.determinant.det
    numeric, _ = mahler_numeric(det, s.determinant.weights, 1.0, 1e-8)
    rho1_numeric = -numeric / s.determinant.fiber_size
    deg = degree_exact(s)
    elapsed = time.perf_counter() - start
    print(f"c3: rho(1) {rho1:.15f} exact, {rho1_numeric:.15f} numeric, degree {deg.degree}, "
          f"T0 {deg.T0:.15f}, Tinf {deg.Tinf:.15f}, {elapsed:.3f}s")
    assert abs(rho1 + math.log(GOLDEN)) < 1e-10
    assert abs(rho1_numeric + math.log(GOLDEN)) < 1e-4
    assert deg.degree == -1 == -catalog.thurston_oracle("figure8", PHI1)
    assert abs(deg.T0 * deg.Tinf - 1) < 1e-9
    assert abs(deg.Tinf - GOLDEN) < 1e-9
    assert abs(deg.Tinf - catalog.get("figure8").dilatation) < 1e-9
    assert elapsed < 5.0


def test_c04_torus_knot_2_5(criterion):
    criterion(4, "T(2,5): rho = min(0, -3 ln t), degree -3")
    start = time.perf_counter()
    s = setup_for("t2_5")
    grid = parse_grid("log:-3:3:121")
    samples = rho_eval(s, grid)
    ref = np.minimum(0.0, -3 * np.log(grid))
    err = np.max(np.abs(samples.values - ref) / np.maximum(1.0, np.abs(ref)))
    deg = degree_exact(s)
    elapsed = time.perf_counter() - start
    print(f"c4: max error {err:.3e}, degree {deg.degree}, {elapsed:.3f}s")
    assert samples.exact
    assert err < 1e-12
    assert deg.degree == -3 == -catalog.thurston_oracle("t2_5", PHI1)
    assert elapsed < 1.0


def test_c05_property_suite(criterion):
    criterion(5, "property suite (scaling, symmetry, Spin^c, pinching) on the catalog")
    start = time.perf_counter()
    grid = parse_grid("log:-3:3:121")
    failures = []
    for name in catalog.CATALOG:
        s = setup_for(name)
        for r in ("2", "3", "1/2"):
            rep = check_scaling(s, r, grid)
            if not (rep["passed"] and rep["max_deviation"] < 1e-8):
                failures.append((name, rep))
        e, rep = check_symmetry(s, grid)
        if not (rep["passed"] and rep["residual"] < 1e-8):
            failures.append((name, rep))
        for h in (1, -2):
            g = word_of_weight(s.abel, (h,))
            rep = check_spinc(s, (h,), g, grid)
            if not (rep["passed"] and rep["max_deviation"] < 1e-9 and rep["e_after"] == e - 2 * h):
                failures.append((name, rep))
        _, _, rep = check_pinching(s, grid)
        if not rep["passed"]:
            failures.append((name, rep))
    elapsed = time.perf_counter() - start
    print(f"c5: {len(catalog.CATALOG)} entries, {len(failures)} failures, {elapsed:.3f}s")
    assert not failures, failures
    assert elapsed < 30.0


def _random_laurent(rng, max_deg=3):
    deg = int(rng.integers(0, max_deg + 1))
    coeffs = [int(c) for c in rng.integers(-4, 5, size=deg + 1)]
    if not any(coeffs):
        coeffs[0] = 1
    return MultiLaurent.from_coeffs(coeffs, int(rng.integers(-2, 3)))


def test_c06_bounds_suite(criterion):
    criterion(6, "norm bound and two-regime bound on 200 random instances")
    start = time.perf_counter()
    rng = np.random.default_rng(20240601)
    grid = np.logspace(-2, 2, 9)
    violations, checked = [], 0
    for i in range(200):
        m = int(rng.integers(1, 4))
        f0 = GRMatrix([[_random_laurent(rng) for _ in range(m)] for _ in range(m)])
        nb = check_norm_bound(f0)
        lb = bound_lemma32(f0, int(rng.integers(0, m + 1)), grid, gamma=int(rng.integers(-1, 2)))
        checked += not nb.get("degenerate", False)
        for rep in (nb, lb):
            if not rep["passed"]:
                violations.append((i, rep))
    elapsed = time.perf_counter() - start
    print(f"c6: 200 instances ({checked} nondegenerate), {len(violations)} violations, {elapsed:.3f}s")
    assert not violations, violations[:3]
    assert elapsed < 30.0


def test_c07_power_law(criterion):
    criterion(7, "index-k refinement multiplies ln det by k")
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        p = _random_laurent(rng, 4)
        w = int(rng.integers(1, 4))
        mat = GRMatrix([[p]])
        for k in (2, 3):
            sub, w2, index = restrict_to_sublattice(mat, (w,), [(k,)])
            assert index == k
            for t in (0.5, 1.0, 2.0):
                base = float(log_det_over_lattice(mat, (w,), t))
                refined = float(log_det_over_lattice(sub, w2, t))
                worst = max(worst, abs(refined - k * base) / max(1.0, abs(k * base)))
    elapsed = time.perf_counter() - start
    print(f"c7: worst relative deviation {worst:.3e}, {elapsed:.3f}s")
    assert worst < 1e-9
    assert elapsed < 10.0


def smyth_constant():
    """m(1 + z + w) = 3 sqrt(3) / (4 pi) * L(chi_-3, 2)."""
    mpmath.mp.dps = 30
    lval = (mpmath.zeta(2, mpmath.mpf(1) / 3) - mpmath.zeta(2, mpmath.mpf(2) / 3)) / 9
    return float(3 * mpmath.sqrt(3) / (4 * mpmath.pi) * lval)


def test_c08_lawton_tower(criterion):
    criterion(8, "Lawton tower: levels <= limit + 1e-6, final gap < 1e-2")
    start = time.perf_counter()
    report = lawton_demo(7, (0.5, 1.0, 2.0))
    oracle = smyth_constant()
    fine, _ = mahler_numeric(MultiLaurent(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1}), (1, 0), 1.0,
                             1e-7, start=256)
    i1 = report.grid.index(1.0)
    gap = oracle - report.levels[-1]["values"][i1]
    elapsed = time.perf_counter() - start
    print(f"c8: limit {report.limit[i1]:.12f}, Smyth {oracle:.12f}, grid {fine:.9f}; "
          f"gap at i=7 {gap:.3e}; {len(report.violations)} per-level violations; {elapsed:.3f}s")
    for v in report.violations:
        print(f"    level {v['level']} t={v['t']}: exceeds limit by {v['excess']:.3e}")
    assert abs(report.limit[i1] - oracle) < 1e-7
    assert abs(fine - oracle) < 1e-5
    assert abs(gap) < 1e-2
    assert elapsed < 60.0
    worst = max((v["excess"] for v in report.violations), default=0.0)
    assert not report.violations, (
        f"{len(report.violations)} level values exceed the limit by more than 1e-6 "
        f"(largest excess {worst:.3e})")


def _s3_trefoil_hom():
    p = catalog.get("trefoil").presentation
    return QuotientHom.from_json(p, {"weights": {"a": 1, "b": 1},
                                     "finite": {"type": "perm", "degree": 3,
                                                "images": {"a": [2, 1, 3], "b": [1, 3, 2]}}})


def _dense_oracle(setup, ts):
    """Independent 6x6 matrix over Z[x], x = z^2, with transversal (h, parity(h))."""
    p = setup.matrix.presentation
    hom = setup.hom
    perms = list(itertools.permutations(range(3)))

    def parity(h):
        return sum(1 for i in range(3) for j in range(i + 1, 3) if h[i] > h[j]) % 2

    x = sympy.Symbol("x")
    entry = setup.matrix.A[0, 0]
    mat = sympy.zeros(6, 6)
    for word, c in entry.terms.items():
        hq, (vq,) = hom.evaluate(word)
        for i, hi in enumerate(perms):
            hj = tuple(hq[k] for k in hi)
            j = perms.index(hj)
            lam = parity(hi) + vq - parity(hj)
            assert lam % 2 == 0
            mat[i, j] += c * x ** (lam // 2)
    det = sympy.Poly(sympy.factor(sympy.together(mat.det() * x ** 12)), x)
    coeffs = det.all_coeffs()
    low = 12
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
        low -= 1
    roots = []
    for factor, mult in sympy.Poly(coeffs, x).sqf_list()[1]:
        roots += [complex(r) for r in factor.nroots(n=30, maxsteps=200)] * mult
    lead = abs(float(coeffs[0]))
    out = []
    for t in ts:
        sigma = t ** 2  # phi(x) = 2
        val = (-low + len(roots)) * math.log(sigma) + math.log(lead)
        val += sum(max(0.0, math.log(abs(r)) - math.log(sigma)) for r in roots)
        out.append(val / 6)
    return out


def test_c09_s3_trefoil(criterion):
    criterion(9, "S3-enriched trefoil: 6x6 restriction agrees with a dense oracle")
    start = time.perf_counter()
    hom = _s3_trefoil_hom()
    s = TorsionSetup.from_presentation(catalog.get("trefoil").presentation, hom, PHI1)
    res = build_restriction(s.matrix.A, hom, PHI1)
    ts = [0.5, 1.0, 2.0]
    ours = [float(v) for v in s.log_det(ts)[0]]
    oracle = _dense_oracle(s, ts)
    deg = degree_exact(s)
    verdict = compare_thurston(deg, catalog.thurston_oracle("trefoil", PHI1))["verdict"]
    elapsed = time.perf_counter() - start
    print(f"c9: restricted {res.size}x{res.size}, ours {ours}, oracle {oracle}, "
          f"degree {deg.degree}, verdict {verdict}, {elapsed:.3f}s")
    assert res.size == 6 and res.fiber_size == 6
    assert max(abs(a - b) for a, b in zip(ours, oracle)) < 1e-6
    assert verdict in ("EQUAL", "LOWER-BOUND-OK")
    assert elapsed < 30.0


def test_c10_continuity(criterion):
    criterion(10, "continuity: perturbing z^2 - 3z + 1 by eps moves the t=1 value by <= 10 eps")
    start = time.perf_counter()
    base = [1.0, -3.0, 1.0]
    ref = float(mahler_exact_1var(MultiLaurent.from_coeffs(base), 1, 1.0)[1])
    worst = 0.0
    for eps in (1e-3, 1e-4, 1e-5):
        for signs in itertools.product((-1, 0, 1), repeat=3):
            if not any(signs):
                continue
            coeffs = [c + s * eps for c, s in zip(base, signs)]
            val = float(mahler_exact_1var(MultiLaurent.from_coeffs(coeffs), 1, 1.0)[1])
            ratio = abs(val - ref) / eps
            worst = max(worst, ratio)
            assert abs(val - ref) <= 10 * eps, (eps, signs, val - ref)
    elapsed = time.perf_counter() - start
    print(f"c10: worst |change|/eps = {worst:.4f}, {elapsed:.3f}s")
    assert elapsed < 5.0
