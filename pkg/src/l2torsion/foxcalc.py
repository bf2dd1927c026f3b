"""Fox free differential calculus and the square matrix A with its correction elements.

For a deficiency-one presentation the Fox matrix (rows = relators, columns =
generators) loses the column of one generator ``s`` of nonzero weight in
H_1(pi)_f. The resulting square matrix, together with ``s``, determines the
torsion function up to a multiple of ``ln t``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .fpgroup import (IDENTITY, AbelianizationData, Presentation, Word, _word_to_json,
                      abelianize, generator)
from .groupring import GRMatrix, GroupRingElt


class FoxError(ValueError):
    pass


def fox_derivative(w: Word, gen: int) -> GroupRingElt:
    """d w / d x_gen, using d(uv) = du + u dv."""
    out = {}
    prefix = IDENTITY
    for g, e in w.letters:
        if g == gen:
            if e > 0:
                # d(x^e) = 1 + x + ... + x^(e-1)
                for k in range(e):
                    p = prefix * generator(g, k)
                    out[p] = out.get(p, 0) + 1
            else:
                # d(x^-n) = -(x^-1 + ... + x^-n)
                for k in range(1, -e + 1):
                    p = prefix * generator(g, -k)
                    out[p] = out.get(p, 0) - 1
        prefix = prefix * generator(g, e)
    return GroupRingElt(out)


def fox_matrix(p: Presentation) -> GRMatrix:
    return GRMatrix([[fox_derivative(r, j) for j in range(p.ngens)] for r in p.relators])


@dataclass(frozen=True)
class SquareMatrixData:
    """The square matrix A, the elements s (and s') and the Spin^c bookkeeping.

    ``residual_offset`` collects Spin^c shifts that could not be absorbed into
    a column because A is empty; it shifts rho by ``phi(residual) ln t``.
    """
    presentation: Presentation
    A: GRMatrix
    s: Word
    s_prime: Optional[Word] = None
    spinc_offset: tuple = ()
    residual_offset: tuple = ()
    deleted_column: Optional[int] = None
    deleted_row: Optional[int] = None

    def __post_init__(self):
        if not self.A.is_square:
            raise FoxError(f"A must be square, got {self.A.shape}")

    @property
    def boundary_case(self) -> bool:
        return self.s_prime is None

    @property
    def size(self) -> int:
        return self.A.shape[0]

    def eta_words(self):
        return (self.s,) if self.s_prime is None else (self.s, self.s_prime)

    def to_json(self) -> dict:
        p = self.presentation

        def elt(x: GroupRingElt):
            return [[_word_to_json(w, p.generators), c] for w, c in
                    sorted(x.terms.items(), key=lambda kv: kv[0].letters)]

        return {
            "presentation": p.to_json(),
            "A": [[elt(x) for x in row] for row in self.A.entries],
            "s": _word_to_json(self.s, p.generators),
            "s_prime": None if self.s_prime is None else _word_to_json(self.s_prime, p.generators),
            "boundary_case": self.boundary_case,
            "spinc_offset": list(self.spinc_offset),
            "residual_offset": list(self.residual_offset),
            "deleted_column": self.deleted_column,
            "deleted_row": self.deleted_row,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SquareMatrixData":
        p = Presentation.from_json(data["presentation"])

        def elt(terms):
            return GroupRingElt({p.parse_word(w): int(c) for w, c in terms})

        sp = data.get("s_prime")
        return cls(p, GRMatrix([[elt(x) for x in row] for row in data["A"]]),
                   p.parse_word(data["s"]), None if sp is None else p.parse_word(sp),
                   tuple(data.get("spinc_offset", ())), tuple(data.get("residual_offset", ())),
                   data.get("deleted_column"), data.get("deleted_row"))


def _zero_offset(abel: AbelianizationData) -> tuple:
    return (0,) * abel.rank


def square_matrix_boundary(p: Presentation, column: Optional[int] = None,
                           abel: Optional[AbelianizationData] = None) -> SquareMatrixData:
    """Fox matrix minus the column of ``s``, the first generator of nonzero weight.

    ``column`` overrides the choice; it must still have nonzero weight.
    """
    if p.deficiency != 1:
        raise FoxError(f"deficiency-one presentation required, got {p.deficiency}")
    abel = abel or abelianize(p)
    if abel.rank == 0:
        raise FoxError("b_1 = 0: every generator is torsion in H_1")
    admissible = [i for i, w in enumerate(abel.weights) if any(w)]
    if not admissible:
        raise FoxError("every generator is torsion in H_1")
    if column is None:
        column = admissible[0]
    elif column not in admissible:
        raise FoxError(f"generator {p.generators[column]} has zero weight in H_1_f")
    a = fox_matrix(p).delete(col=column)
    return SquareMatrixData(p, a, generator(column), None, _zero_offset(abel),
                            _zero_offset(abel), column, None)


def square_matrix_closed(p: Presentation, f: GRMatrix, s_gens: Sequence[Word],
                         s_prime_gens: Sequence[Word], i: Optional[int] = None,
                         j: Optional[int] = None,
                         abel: Optional[AbelianizationData] = None) -> SquareMatrixData:
    """Delete column ``i`` and row ``j`` of a user-supplied a x a matrix F.

    ``s_gens`` index the columns and ``s_prime_gens`` the rows. Defaults pick
    the first marker of nonzero weight on each side.
    """
    if not f.is_square:
        raise FoxError(f"F must be square, got {f.shape}")
    n = f.shape[0]
    if len(s_gens) != n or len(s_prime_gens) != n:
        raise FoxError("one marker per column and per row required")
    abel = abel or abelianize(p)

    def nonzero(w):
        return any(abel.word_weight(w))

    cols = [k for k, w in enumerate(s_gens) if nonzero(w)]
    rows = [k for k, w in enumerate(s_prime_gens) if nonzero(w)]
    if i is None:
        if not cols:
            raise FoxError("no column marker with nonzero weight")
        i = cols[0]
    elif i not in cols:
        raise FoxError(f"column marker {i} has zero weight")
    if j is None:
        if not rows:
            raise FoxError("no row marker with nonzero weight")
        j = rows[0]
    elif j not in rows:
        raise FoxError(f"row marker {j} has zero weight")
    return SquareMatrixData(p, f.delete(row=j, col=i), s_gens[i], s_prime_gens[j],
                            _zero_offset(abel), _zero_offset(abel), i, j)


def spinc_shift(m: SquareMatrixData, h: Sequence[int], g: Word,
                abel: Optional[AbelianizationData] = None) -> SquareMatrixData:
    """Act by h in H_1: the first column of A is right-multiplied by ``g^-1``.

    This changes ln det by ``-phi(h) ln t``, so rho moves by ``+phi(h) ln t``.
    """
    abel = abel or abelianize(m.presentation)
    h = tuple(int(x) for x in h)
    if len(h) != abel.rank:
        raise FoxError(f"h has dimension {len(h)}, b_1 = {abel.rank}")
    if abel.word_weight(g) != h:
        raise FoxError(f"word weight {abel.word_weight(g)} does not equal h = {h}")
    offset = tuple(a + b for a, b in zip(m.spinc_offset or _zero_offset(abel), h))
    if not g:
        return replace(m, spinc_offset=offset)
    if m.size == 0:
        residual = tuple(a + b for a, b in zip(m.residual_offset or _zero_offset(abel), h))
        return replace(m, spinc_offset=offset, residual_offset=residual)
    ginv = GroupRingElt.of(g.inverse())
    rows = [[x * ginv if j == 0 else x for j, x in enumerate(row)] for row in m.A.entries]
    return replace(m, A=GRMatrix(rows), spinc_offset=offset)
