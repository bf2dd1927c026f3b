import random

import pytest

from l2torsion import catalog
from l2torsion.foxcalc import (SquareMatrixData, fox_derivative, fox_matrix, spinc_shift,
                               square_matrix_boundary)
from l2torsion.fpgroup import IDENTITY, Presentation, abelianize, generator, reduce, word_of_weight
from l2torsion.groupring import GroupRingElt


def test_fundamental_identity():
    rng = random.Random(20240601)
    one = GroupRingElt.scalar(1)
    for _ in range(1000):
        n = rng.randint(1, 3)
        w = reduce([(rng.randrange(n), rng.choice([-2, -1, 1, 2])) for _ in range(rng.randint(0, 10))])
        total = GroupRingElt()
        for j in range(n):
            total = total + fox_derivative(w, j) * (GroupRingElt.of(generator(j)) - one)
        assert total == GroupRingElt.of(w) - one


def test_derivative_examples():
    x = generator(0)
    assert fox_derivative(generator(0, 3), 0) == GroupRingElt({IDENTITY: 1, x: 1, generator(0, 2): 1})
    assert fox_derivative(generator(0, -1), 0) == GroupRingElt({x.inverse(): -1})
    assert fox_derivative(generator(1), 0) == GroupRingElt()


def test_boundary_square_matrix():
    p = catalog.get("trefoil").presentation
    m = square_matrix_boundary(p)
    assert m.boundary_case and m.size == 1
    assert fox_matrix(p).shape == (1, 2)
    assert SquareMatrixData.from_json(m.to_json()).A == m.A


def test_deleted_column_has_nonzero_weight():
    p = Presentation.from_strings(["u", "x"], ["x u X U"])
    m = square_matrix_boundary(p)
    abel = abelianize(p)
    assert any(abel.word_weight(m.s))


def test_spinc_shift_offsets():
    p = catalog.get("t2_5").presentation
    abel = abelianize(p)
    m = square_matrix_boundary(p, abel=abel)
    g = word_of_weight(abel, (1,))
    shifted = spinc_shift(m, (1,), g, abel)
    assert shifted.size == m.size
    with pytest.raises(ValueError):
        spinc_shift(m, (2,), g, abel)
