import math

import numpy as np
import pytest
import sympy

from l2torsion import catalog
from l2torsion.fkdet import (NonAcyclicError, build_restriction, determinant_data,
                             kernel_dimension, laurent_det, mahler_exact_1var, mahler_numeric,
                             mahler_sliced, one_var_data)
from l2torsion.fpgroup import CohomClass, Presentation, QuotientHom, abelianize, generator
from l2torsion.groupring import GRMatrix, GroupRingElt, MultiLaurent

PHI1 = CohomClass((1,))
SMYTH = 0.3230659472194505


def _sympy_det(mat, nvars):
    zs = sympy.symbols(f"z0:{nvars}")
    m = sympy.Matrix([[sum(c * sympy.prod([z ** e for z, e in zip(zs, ex)])
                           for ex, c in x.terms.items()) for x in row] for row in mat.entries])
    return sympy.expand(m.det()), zs


@pytest.mark.parametrize("size", [2, 5, 6])
def test_laurent_det_matches_sympy(size):
    rng = np.random.default_rng(size)
    mat = GRMatrix([[MultiLaurent(2, {(int(a), int(b)): int(c) for a, b, c in
                                      rng.integers(-1, 2, size=(2, 3))})
                     for _ in range(size)] for _ in range(size)])
    det = laurent_det(mat, 2)
    ref, zs = _sympy_det(mat, 2)
    z = (0.8 + 0.3j, -1.1 + 0.2j)
    assert complex(det(*z)) == pytest.approx(complex(ref.subs(dict(zip(zs, z)))), rel=1e-9)


def test_exact_vs_numeric_univariate():
    rng = np.random.default_rng(3)
    for _ in range(10):
        coeffs = [int(c) for c in rng.integers(-5, 6, size=4)]
        coeffs[-1] = coeffs[-1] or 1
        p = MultiLaurent.from_coeffs(coeffs)
        for t in (0.5, 1.0, 3.0):
            exact = float(mahler_exact_1var(p, 1, t)[1])
            numeric, _ = mahler_numeric(p, (1,), t, 1e-6)
            assert numeric == pytest.approx(exact, abs=1e-4)


def test_one_var_data_structure():
    data = one_var_data(MultiLaurent.from_coeffs([0, 1, -3, 1]))
    assert data.order == 1 and data.count == 2
    t0, tinf = data.thresholds(1)
    assert t0 * tinf == pytest.approx(1.0)


def test_two_variable_mahler():
    p = MultiLaurent(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1})
    val, err = mahler_numeric(p, (1, 0), 1.0, 1e-6)
    assert val == pytest.approx(SMYTH, abs=1e-4)
    assert mahler_sliced(p, (1, 0), 1.0)[0] == pytest.approx(SMYTH, abs=1e-7)


def _s3(relabel):
    p = catalog.get("trefoil").presentation
    a, b = [2, 1, 3], [1, 3, 2]
    if relabel:
        a, b = [1, 3, 2], [3, 2, 1]
    return p, QuotientHom.from_json(p, {"weights": {"a": 1, "b": 1},
                                        "finite": {"degree": 3, "images": {"a": a, "b": b}}})


def test_transversal_independence():
    from l2torsion.foxcalc import square_matrix_boundary
    vals = []
    for relabel in (False, True):
        p, h = _s3(relabel)
        m = square_matrix_boundary(p)
        d = determinant_data(m.A, h, PHI1)
        vals.append(d.log_det(np.array([0.5, 1.0, 2.0]))[0])
    np.testing.assert_allclose(vals[0], vals[1], atol=1e-10)
    np.testing.assert_allclose(vals[0], [0.0, 0.0, 2 * math.log(2)], atol=1e-10)


def test_restriction_shape():
    from l2torsion.foxcalc import square_matrix_boundary
    p, h = _s3(False)
    res = build_restriction(square_matrix_boundary(p).A, h, PHI1)
    assert res.fiber_size == 6 and res.size == 6 and res.rank == 1


def test_kernel_dimension_example():
    p = Presentation.from_strings(["x", "w"], ["w"])
    w = GroupRingElt.of(generator(1))
    a = GRMatrix([[w - GroupRingElt.scalar(1)]])
    h = QuotientHom(p, ((1,), (0,)))
    assert kernel_dimension(a, h, PHI1) == 1
    with pytest.raises(NonAcyclicError) as info:
        determinant_data(a, h, PHI1)
    assert info.value.certificate["kernel_dimension"] == "1"
    x = GroupRingElt.of(generator(0))
    assert kernel_dimension(GRMatrix([[x - GroupRingElt.scalar(1)]]), h, PHI1) == 0
