"""Exact arithmetic in the universal step-2 group G0(d) and general step-2 groups.

Coordinates of G0(d) are indexed by Y_d = {(l1, l2): 0 <= l2 < l1 <= d} in
lexicographic order, e.g. for d = 2 the order is (1,0), (2,0), (2,1).  The
group law is

    [x.y]_{l1,0}  = x_{l1,0} + y_{l1,0}
    [x.y]_{l1,l2} = x_{l1,l2} + y_{l1,l2} + x_{l1,0} * y_{l2,0}   (l2 >= 1)

All coordinate routines only use ``+``, ``-`` and ``*`` so they work over any
commutative ring: Python ints, ``Fraction`` and the polynomial class of
:mod:`nilradon.polyseq` alike.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Any, Sequence


class DimensionError(ValueError):
    """Operands live in groups of different dimension."""


@dataclass(frozen=True)
class IndexSet:
    d: int
    pairs: tuple[tuple[int, int], ...] = field(init=False, repr=False, compare=False)
    position: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        pairs = tuple((l1, l2) for l1 in range(1, self.d + 1) for l2 in range(l1))
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "position", {p: i for i, p in enumerate(pairs)})

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def linear(self) -> tuple[int, ...]:
        """Positions of the (l1, 0) coordinates, ordered by l1."""
        return tuple(self.position[(l1, 0)] for l1 in range(1, self.d + 1))

    @property
    def central(self) -> tuple[int, ...]:
        return tuple(i for i, (_, l2) in enumerate(self.pairs) if l2 >= 1)

    @property
    def weights(self) -> tuple[int, ...]:
        """Homogeneity l1 + l2 of each coordinate."""
        return tuple(l1 + l2 for l1, l2 in self.pairs)


@lru_cache(maxsize=None)
def index_set(d: int) -> IndexSet:
    return IndexSet(d)


# --- coordinate-level law (ring generic) ------------------------------------

def mul_coords(idx: IndexSet, x: Sequence, y: Sequence) -> tuple:
    pos = idx.position
    out = []
    for (l1, l2), i in pos.items():
        v = x[i] + y[i]
        if l2:
            v = v + x[pos[(l1, 0)]] * y[pos[(l2, 0)]]
        out.append(v)
    return tuple(out)


def inv_coords(idx: IndexSet, x: Sequence) -> tuple:
    pos = idx.position
    out = []
    for (l1, l2), i in pos.items():
        if l2:
            out.append(x[pos[(l1, 0)]] * x[pos[(l2, 0)]] - x[i])
        else:
            out.append(-x[i])
    return tuple(out)


# --- G0(d) elements ---------------------------------------------------------

@dataclass(frozen=True)
class GroupElement:
    index: IndexSet
    coords: tuple

    def __post_init__(self) -> None:
        if len(self.coords) != len(self.index):
            raise DimensionError(
                f"expected {len(self.index)} coordinates for d={self.index.d}, "
                f"got {len(self.coords)}")

    @property
    def d(self) -> int:
        return self.index.d

    def __getitem__(self, pair: tuple[int, int]):
        return self.coords[self.index.position[pair]]

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def is_identity(self) -> bool:
        return all(c == 0 for c in self.coords)

    def is_central(self) -> bool:
        return all(self.coords[i] == 0 for i in self.index.linear)


def element(d: int, coords: Sequence) -> GroupElement:
    return GroupElement(index_set(d), tuple(coords))


def identity(d: int) -> GroupElement:
    return element(d, (0,) * len(index_set(d)))


def generator(d: int, m: int) -> GroupElement:
    """The generator g_m: 1 in coordinate (m, 0), zero elsewhere."""
    idx = index_set(d)
    c = [0] * len(idx)
    c[idx.position[(m, 0)]] = 1
    return GroupElement(idx, tuple(c))


def _check(x: GroupElement, y: GroupElement) -> None:
    if x.index.d != y.index.d:
        raise DimensionError(f"mismatched dimensions d={x.index.d} and d={y.index.d}")


def multiply(x: GroupElement, y: GroupElement) -> GroupElement:
    _check(x, y)
    return GroupElement(x.index, mul_coords(x.index, x.coords, y.coords))


def inverse(x: GroupElement) -> GroupElement:
    return GroupElement(x.index, inv_coords(x.index, x.coords))


def commutator(x: GroupElement, y: GroupElement) -> GroupElement:
    """x . y . x^-1 . y^-1 (always central)."""
    return multiply(multiply(multiply(x, y), inverse(x)), inverse(y))


def power(x: GroupElement, k: int) -> GroupElement:
    out = identity(x.d)
    base = x if k >= 0 else inverse(x)
    for _ in range(abs(k)):
        out = multiply(out, base)
    return out


def dilate(lam, x: GroupElement) -> GroupElement:
    """Anisotropic dilation lam o x = (lam^(l1+l2) x_{l1 l2})."""
    if lam <= 0:
        raise ValueError(f"dilation parameter must be positive, got {lam}")
    return GroupElement(
        x.index, tuple(lam ** w * c for w, c in zip(x.index.weights, x.coords)))


def homogeneous_norm(x: GroupElement):
    return sum(abs(c) for c in x.coords)


def in_ball(x: GroupElement, lam) -> bool:
    """Membership in D_lam = {x : |(1/lam) o x| < 1}."""
    if lam <= 0:
        raise ValueError(f"ball radius must be positive, got {lam}")
    inv = Fraction(1) / lam if isinstance(lam, Rational) else 1.0 / lam
    return homogeneous_norm(dilate(inv, x)) < 1


def to_json(x: GroupElement) -> str:
    return json.dumps({"d": x.d, "coords": [str(c) for c in x.coords]})


def _parse_scalar(s: str):
    f = Fraction(s)
    return f.numerator if f.denominator == 1 else f


def from_json(text: str) -> GroupElement:
    obj = json.loads(text)
    return element(int(obj["d"]), [_parse_scalar(c) for c in obj["coords"]])


class UniversalGroup:
    """G0(d) viewed as a group object acting on raw coordinate tuples."""

    def __init__(self, d: int):
        self.index = index_set(d)
        self.d = d
        self.dim = len(self.index)

    def identity(self) -> tuple:
        return (0,) * self.dim

    def multiply(self, a: Sequence, b: Sequence) -> tuple:
        return mul_coords(self.index, a, b)

    def inverse(self, a: Sequence) -> tuple:
        return inv_coords(self.index, a)

    def __eq__(self, other) -> bool:
        return isinstance(other, UniversalGroup) and other.d == self.d

    def __hash__(self) -> int:
        return hash(("G0", self.d))

    def __repr__(self) -> str:
        return f"UniversalGroup(d={self.d})"


# --- general step-2 groups ---------------------------------------------------

@dataclass(frozen=True)
class Step2Group:
    """(x, y) . (x', y') = (x + x', y + y' + R(x, x')) with R bilinear.

    ``bilinear[k][i][j]`` is the coefficient of x_i x'_j in the k-th central
    coordinate.  Elements are flat tuples (x_1..x_d1, y_1..y_d2).
    """

    dim1: int
    dim2: int
    bilinear: tuple

    def __post_init__(self) -> None:
        mats = tuple(
            tuple(tuple(Fraction(v) for v in row) for row in mat) for mat in self.bilinear)
        if len(mats) != self.dim2 or any(
                len(m) != self.dim1 or any(len(row) != self.dim1 for row in m) for m in mats):
            raise DimensionError("bilinear form must be dim2 matrices of shape dim1 x dim1")
        object.__setattr__(self, "bilinear", mats)

    @property
    def dim(self) -> int:
        return self.dim1 + self.dim2

    def identity(self) -> tuple:
        return (0,) * self.dim

    def form(self, x: Sequence, xp: Sequence) -> tuple:
        out = []
        for mat in self.bilinear:
            acc = 0
            for i, row in enumerate(mat):
                for j, c in enumerate(row):
                    if c:
                        acc = acc + c * x[i] * xp[j]
            out.append(acc)
        return tuple(out)

    def _split(self, a: Sequence) -> tuple[tuple, tuple]:
        if len(a) != self.dim:
            raise DimensionError(f"expected {self.dim} coordinates, got {len(a)}")
        return tuple(a[:self.dim1]), tuple(a[self.dim1:])

    def multiply(self, a: Sequence, b: Sequence) -> tuple:
        x, y = self._split(a)
        xp, yp = self._split(b)
        r = self.form(x, xp)
        return tuple(u + v for u, v in zip(x, xp)) + tuple(
            u + v + w for u, v, w in zip(y, yp, r))

    def inverse(self, a: Sequence) -> tuple:
        x, y = self._split(a)
        r = self.form(x, x)
        return tuple(-u for u in x) + tuple(w - v for v, w in zip(y, r))

    def power(self, a: Sequence, k: Any) -> tuple:
        """a^k via (k x, k y + k(k-1)/2 R(x, x)); k may be a polynomial."""
        x, y = self._split(a)
        r = self.form(x, x)
        half = (k * k - k) * Fraction(1, 2)
        return tuple(k * u for u in x) + tuple(k * v + half * w for v, w in zip(y, r))

    def commutator(self, a: Sequence, b: Sequence) -> tuple:
        m = self.multiply
        return m(m(m(a, b), self.inverse(a)), self.inverse(b))

    # constructors

    @classmethod
    def abelian(cls, dim1: int, dim2: int) -> "Step2Group":
        zero = tuple(tuple(0 for _ in range(dim1)) for _ in range(dim1))
        return cls(dim1, dim2, tuple(zero for _ in range(dim2)))

    @classmethod
    def heisenberg(cls) -> "Step2Group":
        """d1 = 2, d2 = 1, R(x, x') = x_1 x'_2."""
        return cls(2, 1, (((0, 1), (0, 0)),))

    @classmethod
    def random(cls, rng, dim1: int, dim2: int, height: int = 3) -> "Step2Group":
        def entry():
            return Fraction(int(rng.integers(-height, height + 1)),
                            int(rng.integers(1, height + 1)))
        return cls(dim1, dim2, tuple(
            tuple(tuple(entry() for _ in range(dim1)) for _ in range(dim1))
            for _ in range(dim2)))
