"""Finitely presented groups, free-group words and homomorphisms to H x Z^k.

Words are freely reduced tuples of ``(generator, exponent)`` letters. Generators
are integer indices; names are kept only for input and output.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import intlinalg as il


class PresentationError(ValueError):
    """Malformed presentation, word or homomorphism data."""


class NotLargeError(ValueError):
    """The projection onto H_1(pi)_f does not factor through the homomorphism."""


class RankMismatchError(NotLargeError):
    pass


class WeightMismatchError(NotLargeError):
    pass


@dataclass(frozen=True, order=True)
class Word:
    letters: tuple = ()

    def __mul__(self, other: "Word") -> "Word":
        return _concat(self.letters, other.letters)

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.letters)))

    def __len__(self):
        return sum(abs(e) for _, e in self.letters)

    def __bool__(self):
        return bool(self.letters)

    def exponent_sums(self, ngens: int) -> list:
        out = [0] * ngens
        for g, e in self.letters:
            out[g] += e
        return out

    def format(self, names: Sequence[str]) -> str:
        if not self.letters:
            return "1"
        parts = []
        for g, e in self.letters:
            parts.append(names[g] if e == 1 else f"{names[g]}^{e}")
        return "*".join(parts)

    def __repr__(self):
        return f"Word({self.format([f'x{i}' for i in range(1 + max((g for g, _ in self.letters), default=0))])})"


IDENTITY = Word()


def _concat(a: tuple, b: tuple) -> Word:
    out = list(a)
    for g, e in b:
        if out and out[-1][0] == g:
            e2 = out[-1][1] + e
            out.pop()
            if e2:
                out.append((g, e2))
        else:
            out.append((g, e))
    return Word(tuple(out))


def reduce(letters, ngens: Optional[int] = None) -> Word:
    """Freely reduce a raw sequence of ``(generator, exponent)`` letters."""
    out = []
    for g, e in letters:
        g, e = int(g), int(e)
        if g < 0 or (ngens is not None and g >= ngens):
            raise PresentationError(f"unknown generator index {g}")
        if e == 0:
            continue
        if out and out[-1][0] == g:
            e2 = out[-1][1] + e
            out.pop()
            if e2:
                out.append((g, e2))
        else:
            out.append((g, e))
    return Word(tuple(out))


def generator(i: int, power: int = 1) -> Word:
    return Word(((i, power),)) if power else IDENTITY


@dataclass(frozen=True)
class Presentation:
    generators: tuple
    relators: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "relators", tuple(self.relators))
        if len(set(self.generators)) != len(self.generators):
            raise PresentationError("duplicate generator names")
        n = len(self.generators)
        for r in self.relators:
            if any(g < 0 or g >= n for g, _ in r.letters):
                raise PresentationError(f"relator {r} uses an undeclared generator")

    @property
    def ngens(self) -> int:
        return len(self.generators)

    @property
    def deficiency(self) -> int:
        return len(self.generators) - len(self.relators)

    def index(self, name: str) -> int:
        try:
            return self.generators.index(name)
        except ValueError:
            raise PresentationError(f"unknown generator {name!r}") from None

    def parse_word(self, text: str) -> Word:
        """Parse ``"a b a B A B"`` (uppercase = inverse) or ``"a^2 b^-3"``."""
        letters = []
        for tok in text.replace("*", " ").split():
            if "^" in tok:
                name, _, power = tok.partition("^")
                p = int(power)
            else:
                name, p = tok, 1
            if name in self.generators:
                letters.append((self.index(name), p))
            elif name.swapcase() in self.generators and name != name.swapcase():
                letters.append((self.index(name.swapcase()), -p))
            elif name == "1":
                continue
            else:
                raise PresentationError(f"unknown generator {name!r}")
        return reduce(letters, self.ngens)

    def format_word(self, w: Word) -> str:
        return w.format(self.generators)

    @classmethod
    def from_strings(cls, generators, relators) -> "Presentation":
        p = cls(tuple(generators), ())
        return cls(tuple(generators), tuple(p.parse_word(r) for r in relators))

    @classmethod
    def from_json(cls, data: dict) -> "Presentation":
        try:
            return cls.from_strings(data["generators"], data.get("relators", []))
        except KeyError as exc:
            raise PresentationError(f"missing field {exc}") from None

    def to_json(self) -> dict:
        return {"generators": list(self.generators),
                "relators": [_word_to_json(r, self.generators) for r in self.relators]}


def _word_to_json(w: Word, names) -> str:
    toks = []
    for g, e in w.letters:
        sym = names[g] if e > 0 else names[g].swapcase()
        toks.extend([sym] * abs(e))
    return " ".join(toks)


@dataclass(frozen=True)
class AbelianizationData:
    """H_1 of a presentation: free rank, torsion and per-generator images.

    ``weights[i]`` is the image of generator ``i`` in H_1(pi)_f = Z^d and
    ``torsion_parts[i]`` its image in the torsion summand (residues modulo
    ``torsion``).
    """
    rank: int
    torsion: tuple
    weights: tuple
    torsion_parts: tuple

    def word_weight(self, w: Word) -> tuple:
        out = [0] * self.rank
        for g, e in w.letters:
            for k, x in enumerate(self.weights[g]):
                out[k] += e * x
        return tuple(out)


def abelianize(p: Presentation) -> AbelianizationData:
    """Smith normal form of the exponent-sum relation matrix.

    The free basis is normalized so that, for each basis vector, the first
    generator with a nonzero coordinate has a positive coordinate.
    """
    n = p.ngens
    rel = [r.exponent_sums(n) for r in p.relators]
    if not rel:
        rel_rank, divisors, v = 0, [], il.identity(n)
    else:
        _, d, v = il.smith_normal_form(rel)
        divisors = [x for x in il.diagonal(d) if x]
        rel_rank = len(divisors)
    # generator i maps to row i of V; columns >= rel_rank are free coordinates
    free_cols = list(range(rel_rank, n))
    weights = [[v[i][c] for c in free_cols] for i in range(n)]
    for k in range(len(free_cols)):
        first = next((weights[i][k] for i in range(n) if weights[i][k]), 0)
        if first < 0:
            for i in range(n):
                weights[i][k] = -weights[i][k]
    tors_idx = [j for j, x in enumerate(divisors) if x > 1]
    torsion = tuple(divisors[j] for j in tors_idx)
    tparts = tuple(tuple(v[i][j] % divisors[j] for j in tors_idx) for i in range(n))
    return AbelianizationData(len(free_cols), torsion, tuple(tuple(w) for w in weights), tparts)


# --- finite permutation quotients ---------------------------------------

def perm_identity(n: int) -> tuple:
    return tuple(range(n))


def perm_mul(p: tuple, q: tuple) -> tuple:
    """Product ``p*q`` acting on the right: first ``p``, then ``q``."""
    return tuple(q[i] for i in p)


def perm_inv(p: tuple) -> tuple:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def perm_pow(p: tuple, e: int) -> tuple:
    base = p if e >= 0 else perm_inv(p)
    out = perm_identity(len(p))
    for _ in range(abs(e)):
        out = perm_mul(out, base)
    return out


@dataclass(frozen=True)
class FiniteGroupRep:
    degree: int
    images: tuple  # per generator, 0-based image tuple

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(tuple(int(x) for x in im) for im in self.images))
        for im in self.images:
            if sorted(im) != list(range(self.degree)):
                raise PresentationError(f"{im} is not a permutation of {self.degree} points")

    def evaluate(self, w: Word) -> tuple:
        out = perm_identity(self.degree)
        for g, e in w.letters:
            out = perm_mul(out, perm_pow(self.images[g], e))
        return out


@dataclass(frozen=True)
class QuotientHom:
    """A homomorphism pi -> H x Z^k given on generators.

    ``weights[i]`` is the Z^k-part of generator ``i``; ``finite`` the optional
    permutation representation of H.
    """
    presentation: Presentation
    weights: tuple
    finite: Optional[FiniteGroupRep] = None

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(tuple(int(x) for x in w) for w in self.weights))
        p = self.presentation
        if len(self.weights) != p.ngens:
            raise PresentationError("one weight vector per generator required")
        if len({len(w) for w in self.weights}) > 1:
            raise PresentationError("weight vectors of unequal length")
        if self.finite is not None and len(self.finite.images) != p.ngens:
            raise PresentationError("one permutation per generator required")
        for r in p.relators:
            h, v = self.evaluate(r)
            if any(v) or (self.finite is not None and h != perm_identity(self.finite.degree)):
                raise PresentationError(
                    f"relator {p.format_word(r)} does not map to the identity")

    @property
    def rank(self) -> int:
        return len(self.weights[0]) if self.weights else 0

    def evaluate(self, w: Word):
        v = [0] * self.rank
        for g, e in w.letters:
            for k, x in enumerate(self.weights[g]):
                v[k] += e * x
        h = self.finite.evaluate(w) if self.finite is not None else ()
        return h, tuple(v)

    @property
    def is_large(self) -> bool:
        return check_large(self)

    @classmethod
    def abelian(cls, p: Presentation, abel: Optional[AbelianizationData] = None) -> "QuotientHom":
        abel = abel or abelianize(p)
        return cls(p, abel.weights)

    @classmethod
    def from_json(cls, p: Presentation, data: dict) -> "QuotientHom":
        raw = data.get("weights", {})
        weights = []
        for name in p.generators:
            w = raw.get(name, 0)
            weights.append(tuple(w) if isinstance(w, (list, tuple)) else (w,))
        finite = None
        if data.get("finite"):
            f = data["finite"]
            if f.get("type", "perm") != "perm":
                raise PresentationError(f"unsupported finite quotient type {f.get('type')!r}")
            deg = int(f["degree"])
            images = []
            for name in p.generators:
                im = f["images"].get(name, list(range(1, deg + 1)))
                images.append(tuple(int(x) - 1 for x in im))
            finite = FiniteGroupRep(deg, tuple(images))
        return cls(p, tuple(weights), finite)


def abelian_factorization(h: QuotientHom, abel: Optional[AbelianizationData] = None):
    """Integer matrix ``N`` (d x k) with ``N @ weights_Q(g) == weights_H1f(g)``.

    This is the map nu: H x Z^k -> H_1(pi)_f through which the projection
    factors (nu kills the finite part). Raises :class:`RankMismatchError` when
    the Z^k-image has rank below d and :class:`WeightMismatchError` when no
    integral factorization exists.
    """
    abel = abel or abelianize(h.presentation)
    n, k, d = h.presentation.ngens, h.rank, abel.rank
    vq = [[h.weights[g][j] for g in range(n)] for j in range(k)]  # k x n
    wf = [[abel.weights[g][j] for g in range(n)] for j in range(d)]  # d x n
    if d == 0:
        return []
    if k == 0 or il.rank(vq) < d:
        raise RankMismatchError(
            f"quotient weights have rank {il.rank(vq) if k else 0} < b_1 = {d}")
    u, dm, y = il.smith_normal_form(vq)
    divs = il.diagonal(dm)
    wy = il.matmul(wf, y)
    mrow = []
    for row in wy:
        out = [0] * k
        for j, x in enumerate(row):
            dj = divs[j] if j < len(divs) else 0
            if dj == 0:
                if x:
                    raise WeightMismatchError("H_1 weights are not a function of the quotient weights")
            else:
                q, r = divmod(x, dj)
                if r:
                    raise WeightMismatchError(
                        f"factorization needs denominator {dj}: quotient image has finite index")
                out[j] = q
        mrow.append(out)
    return il.matmul(mrow, u)


def check_large(h: QuotientHom, abel: Optional[AbelianizationData] = None) -> bool:
    try:
        abelian_factorization(h, abel)
    except NotLargeError:
        return False
    return True


@dataclass(frozen=True)
class CohomClass:
    """phi in Hom(H_1(pi)_f, Q), as rational weights on the free basis."""
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(Fraction(x) for x in self.weights))

    @property
    def dim(self) -> int:
        return len(self.weights)

    def __mul__(self, r) -> "CohomClass":
        r = Fraction(r)
        return CohomClass(tuple(r * x for x in self.weights))

    __rmul__ = __mul__

    def on_vector(self, v) -> Fraction:
        if len(v) != self.dim:
            raise PresentationError(f"dimension mismatch: class has {self.dim}, vector {len(v)}")
        return sum((x * int(y) for x, y in zip(self.weights, v)), Fraction(0))

    @classmethod
    def parse(cls, text: str) -> "CohomClass":
        return cls(tuple(Fraction(x.strip()) for x in str(text).split(",") if x.strip()))


def pair(phi: CohomClass, w: Word, abel: AbelianizationData) -> Fraction:
    """phi(w), computed through the free part of H_1."""
    if phi.dim != abel.rank:
        raise PresentationError(f"dimension mismatch: phi has {phi.dim}, b_1 = {abel.rank}")
    return phi.on_vector(abel.word_weight(w))



def word_of_weight(abel: AbelianizationData, h: Sequence[int]) -> Word:
    """A product of generator powers whose H_1_f weight is ``h``."""
    n, d = len(abel.weights), abel.rank
    if len(h) != d:
        raise PresentationError(f"h has dimension {len(h)}, b_1 = {d}")
    if d == 0:
        return IDENTITY
    wt = [[abel.weights[g][j] for g in range(n)] for j in range(d)]
    u, dm, v = il.smith_normal_form(wt)
    uh = [sum(u[i][j] * int(h[j]) for j in range(d)) for i in range(d)]
    divs = il.diagonal(dm)
    y = [0] * n
    for i in range(d):
        q, r = divmod(uh[i], divs[i]) if divs[i] else (0, uh[i])
        if r:
            raise PresentationError(f"{tuple(h)} is not in the image of the generators")
        y[i] = q
    x = [sum(v[g][i] * y[i] for i in range(n)) for g in range(n)]
    return reduce([(g, e) for g, e in enumerate(x)], n)
