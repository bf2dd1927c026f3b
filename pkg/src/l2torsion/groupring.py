"""Group rings over free-group words, Laurent polynomial rings, and matrices over both.

Coefficients stay exact (``int`` or ``Fraction``) until a twist introduces
real powers of ``t``; after that they are Python ``complex``/``float``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Callable, Mapping, Sequence

import numpy as np

from .fpgroup import IDENTITY, AbelianizationData, CohomClass, Word, pair


def _clean(terms: Mapping) -> dict:
    return {k: v for k, v in terms.items() if v != 0}


def _is_integral(c) -> bool:
    if isinstance(c, (int, np.integer)):
        return True
    if isinstance(c, Fraction):
        return c.denominator == 1
    return False


class GroupRingElt:
    """A finite sum ``sum lambda_g * g`` over freely reduced words."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Word, Number] = None):
        self.terms = _clean(dict(terms or {}))

    @classmethod
    def of(cls, w: Word, c: Number = 1) -> "GroupRingElt":
        return cls({w: c})

    @classmethod
    def scalar(cls, c: Number) -> "GroupRingElt":
        return cls({IDENTITY: c})

    def __eq__(self, other):
        if isinstance(other, Number):
            other = GroupRingElt.scalar(other)
        return isinstance(other, GroupRingElt) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        if isinstance(other, Number):
            other = GroupRingElt.scalar(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return GroupRingElt(out)

    __radd__ = __add__

    def __neg__(self):
        return GroupRingElt({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return GroupRingElt({w: c * other for w, c in self.terms.items()})
        out = {}
        for u, a in self.terms.items():
            for v, b in other.terms.items():
                w = u * v
                out[w] = out.get(w, 0) + a * b
        return GroupRingElt(out)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def norm1(self) -> float:
        return sum(abs(c) for c in self.terms.values())

    def support(self):
        return list(self.terms)

    def is_integral(self) -> bool:
        return all(_is_integral(c) for c in self.terms.values())

    def map_words(self, f: Callable[[Word], Word]) -> "GroupRingElt":
        out = {}
        for w, c in self.terms.items():
            k = f(w)
            out[k] = out.get(k, 0) + c
        return GroupRingElt(out)

    def abelianize(self, weights: Sequence[Sequence[int]]) -> "MultiLaurent":
        """Image in C[Z^k] under ``generator i -> z^weights[i]``."""
        k = len(weights[0]) if weights else 0
        out = {}
        for w, c in self.terms.items():
            e = [0] * k
            for g, p in w.letters:
                for j, x in enumerate(weights[g]):
                    e[j] += p * x
            e = tuple(e)
            out[e] = out.get(e, 0) + c
        return MultiLaurent(k, out)

    def format(self, names) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w, c in sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0].letters)):
            word = w.format(names)
            if word == "1":
                parts.append(f"{c}")
            elif c == 1:
                parts.append(word)
            elif c == -1:
                parts.append(f"-{word}")
            else:
                parts.append(f"{c}*{word}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        n = 1 + max((g for w in self.terms for g, _ in w.letters), default=0)
        return f"GroupRingElt({self.format([f'x{i}' for i in range(n)])})"


class MultiLaurent:
    """Sparse Laurent polynomial in ``nvars`` variables.

    ``terms`` maps exponent tuples to coefficients.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple, Number] = None):
        self.nvars = int(nvars)
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != self.nvars:
                raise ValueError(f"exponent {e} has wrong length for {self.nvars} variables")
            if c != 0:
                clean[e] = clean.get(e, 0) + c
        self.terms = _clean(clean)

    @classmethod
    def constant(cls, nvars: int, c: Number) -> "MultiLaurent":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def monomial(cls, exps: Sequence[int], c: Number = 1) -> "MultiLaurent":
        return cls(len(exps), {tuple(exps): c})

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[Number], low: int = 0) -> "MultiLaurent":
        """Univariate ``sum coeffs[i] * z^(low + i)``."""
        return cls(1, {(low + i,): c for i, c in enumerate(coeffs)})

    def __eq__(self, other):
        if isinstance(other, Number):
            other = MultiLaurent.constant(self.nvars, other)
        return isinstance(other, MultiLaurent) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def _coerce(self, other) -> "MultiLaurent":
        if isinstance(other, Number):
            return MultiLaurent.constant(self.nvars, other)
        if other.nvars != self.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
        return other

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return MultiLaurent(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiLaurent(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        out = {}
        for e1, a in self.terms.items():
            for e2, b in other.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, 0) + a * b
        return MultiLaurent(self.nvars, out)

    __rmul__ = __mul__

    def is_integral(self) -> bool:
        return all(_is_integral(c) for c in self.terms.values())

    def norm1(self) -> float:
        return sum(abs(c) for c in self.terms.values())

    def support(self) -> list:
        return sorted(self.terms)

    def exponent_bounds(self):
        """Per-variable (min, max) exponents; ``None`` for the zero polynomial."""
        if not self.terms:
            return None
        exps = np.array(list(self.terms), dtype=np.int64).reshape(len(self.terms), self.nvars)
        return exps.min(axis=0).tolist(), exps.max(axis=0).tolist()

    def __call__(self, *z):
        """Evaluate at complex points; arguments broadcast as numpy arrays."""
        if len(z) != self.nvars:
            raise ValueError(f"expected {self.nvars} arguments")
        z = [np.asarray(x, dtype=complex) for x in z]
        shape = np.broadcast(*z).shape if z else ()
        out = np.zeros(shape, dtype=complex)
        for e, c in self.terms.items():
            term = complex(c)
            for x, k in zip(z, e):
                term = term * x ** k
            out = out + term
        return out

    def scale(self, w: Sequence, t: float) -> "MultiLaurent":
        """``p(t^w1 z1, ..., t^wd zd)``: the monomial ``z^v`` gains ``t^(w.v)``."""
        if len(w) != self.nvars:
            raise ValueError(f"weight has dimension {len(w)}, polynomial {self.nvars}")
        wf = [float(x) for x in w]
        return MultiLaurent(self.nvars, {
            e: c * float(t) ** sum(a * b for a, b in zip(wf, e)) for e, c in self.terms.items()})

    def substitute(self, m: Sequence[Sequence[int]]) -> "MultiLaurent":
        """Monomial change of variables ``z^e -> z'^(e @ m)`` with ``m`` a nvars x n' matrix."""
        n2 = len(m[0]) if m else 0
        out = {}
        for e, c in self.terms.items():
            e2 = tuple(sum(e[i] * m[i][j] for i in range(self.nvars)) for j in range(n2))
            out[e2] = out.get(e2, 0) + c
        return MultiLaurent(n2, out)

    def coeffs_1var(self):
        """``(low, coeffs)`` with ``p = z^low * sum coeffs[i] z^i``; univariate only."""
        if self.nvars != 1:
            raise ValueError("univariate polynomial required")
        if not self.terms:
            return 0, []
        lo = min(e[0] for e in self.terms)
        hi = max(e[0] for e in self.terms)
        out = [0] * (hi - lo + 1)
        for e, c in self.terms.items():
            out[e[0] - lo] = c
        return lo, out

    def format(self, names: Sequence[str] = None) -> str:
        if not self.terms:
            return "0"
        names = names or (["z"] if self.nvars == 1 else [f"z{i + 1}" for i in range(self.nvars)])
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            if not mono:
                parts.append(f"{c}")
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"MultiLaurent({self.format()})"


@dataclass(frozen=True)
class GRMatrix:
    """Rectangular matrix with entries in one ring (GroupRingElt or MultiLaurent)."""
    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        if len({len(r) for r in rows}) > 1:
            raise ValueError("ragged matrix")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def empty(cls) -> "GRMatrix":
        return cls(())

    @property
    def shape(self):
        return len(self.entries), (len(self.entries[0]) if self.entries else 0)

    @property
    def is_square(self) -> bool:
        r, c = self.shape
        return r == c

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other: "GRMatrix") -> "GRMatrix":
        r, k = self.shape
        k2, c = other.shape
        if k != k2:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for i in range(r):
            row = []
            for j in range(c):
                acc = self.entries[i][0] * other.entries[0][j]
                for m in range(1, k):
                    acc = acc + self.entries[i][m] * other.entries[m][j]
                row.append(acc)
            out.append(row)
        return GRMatrix(out)

    def map(self, f) -> "GRMatrix":
        return GRMatrix([[f(x) for x in row] for row in self.entries])

    def column(self, j):
        return [row[j] for row in self.entries]

    def delete(self, row: int = None, col: int = None) -> "GRMatrix":
        return GRMatrix([[x for j, x in enumerate(r) if j != col]
                         for i, r in enumerate(self.entries) if i != row])

    def format(self, names=None) -> str:
        return "\n".join("[" + ", ".join(x.format(names) for x in row) + "]" for row in self.entries)


def norm1(a: GRMatrix) -> float:
    """``r * s * max_ij |a_ij|_1``, an upper bound for the norm of right multiplication."""
    r, s = a.shape
    if r == 0 or s == 0:
        return 0
    return r * s * max(x.norm1() for row in a.entries for x in row)


def twist(a: GRMatrix, phi: CohomClass, t: float, abel: AbelianizationData) -> GRMatrix:
    """Replace each term ``lambda * g`` by ``lambda * t^phi(g) * g``."""
    if t <= 0:
        raise ValueError("t must be positive")
    t = float(t)

    def tw(x: GroupRingElt) -> GroupRingElt:
        return GroupRingElt({w: c * t ** float(pair(phi, w, abel)) for w, c in x.terms.items()})

    return a.map(tw)


def symbolic_twist_weights(a: GRMatrix, w: Sequence) -> Callable[[float], GRMatrix]:
    """For a matrix over ``C[Z^d]``, return ``t -> A`` with ``z^v`` scaled by ``t^(w.v)``."""
    if not isinstance(w, (list, tuple)):
        w = list(w)
    for row in a.entries:
        for x in row:
            if x.nvars != len(w):
                raise ValueError(f"weight has dimension {len(w)}, entries {x.nvars}")

    def at(t: float) -> GRMatrix:
        if t <= 0:
            raise ValueError("t must be positive")
        return a.map(lambda x: x.scale(w, t))

    return at
