"""Polynomial sequences Z -> G, group differencing, and the transference morphism.

A polynomial sequence is stored as one exact polynomial per coordinate.  The
group laws in :mod:`nilradon.group` are ring generic, so the difference
operator D A(n) = A(n)^-1 A(n+1) is computed by running the group law directly
on polynomial coordinates; no sampling or interpolation is involved.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .group import (GroupElement, Step2Group, UniversalGroup, element, index_set,
                    _parse_scalar)


def _frac(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


def _plain(c: Fraction):
    return c.numerator if c.denominator == 1 else c


class Poly:
    """Univariate polynomial with exact rational coefficients, ascending degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def monomial(cls, k: int, c=1) -> "Poly":
        return cls([0] * k + [c])

    @classmethod
    def var(cls) -> "Poly":
        return cls([0, 1])

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __call__(self, n):
        acc = Fraction(0) if isinstance(n, (int, Fraction)) else 0
        for c in reversed(self.coeffs):
            acc = acc * n + c
        return _plain(acc) if isinstance(acc, Fraction) else acc

    @staticmethod
    def _lift(other) -> "Poly":
        return other if isinstance(other, Poly) else Poly([other])

    def __add__(self, other) -> "Poly":
        o = self._lift(other).coeffs
        s = self.coeffs
        n = max(len(s), len(o))
        return Poly((s[i] if i < len(s) else 0) + (o[i] if i < len(o) else 0)
                    for i in range(n))

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other) -> "Poly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Poly":
        return self._lift(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = _frac(other)
            return Poly(c * a for a in self.coeffs)
        if self.is_zero() or other.is_zero():
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly([1])
        for _ in range(k):
            out = out * self
        return out

    def compose(self, inner: "Poly") -> "Poly":
        acc = Poly()
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def shift(self, h: int = 1) -> "Poly":
        """n -> p(n + h)."""
        return self.compose(Poly([h, 1]))

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly([other]).coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({[str(c) for c in self.coeffs]})"


@dataclass(frozen=True)
class GroupPolySequence:
    """n -> A(n) with A(n) given coordinatewise by exact polynomials."""

    group: object
    coords: tuple

    def __post_init__(self) -> None:
        if len(self.coords) != self.group.dim:
            raise ValueError(f"{self.group!r} needs {self.group.dim} coordinate polynomials")
        object.__setattr__(self, "coords", tuple(Poly._lift(p) for p in self.coords))

    def __call__(self, n) -> tuple:
        return tuple(p(n) for p in self.coords)

    def at(self, n) -> GroupElement:
        if not isinstance(self.group, UniversalGroup):
            raise TypeError("at() returns G0 elements; use __call__ for other groups")
        return element(self.group.d, self(n))

    def is_identity(self) -> bool:
        return all(p.is_zero() for p in self.coords)

    def starts_at_identity(self) -> bool:
        return all(p.coeff(0) == 0 for p in self.coords)

    @property
    def degree(self) -> int:
        return max((p.degree for p in self.coords), default=-1)


def polynomial_sequence(group, coords: Sequence, check: bool = True) -> GroupPolySequence:
    seq = GroupPolySequence(group, tuple(coords))
    if check and not seq.starts_at_identity():
        raise ValueError("a polynomial sequence must satisfy A(0) = identity")
    return seq


def a0_sequence(d: int) -> GroupPolySequence:
    """[A0(n)]_{l1,0} = n^l1, all central coordinates zero."""
    G = UniversalGroup(d)
    return GroupPolySequence(
        G, tuple(Poly.monomial(l1) if l2 == 0 else Poly() for l1, l2 in G.index.pairs))


def difference(A: GroupPolySequence) -> GroupPolySequence:
    """Symbolic D A(n) = A(n)^-1 . A(n+1); DA(0) need not be the identity."""
    G = A.group
    shifted = tuple(p.shift(1) for p in A.coords)
    return GroupPolySequence(G, G.multiply(G.inverse(A.coords), shifted))


def nilpotency_degree(A: GroupPolySequence, kmax: int) -> int | None:
    """Smallest k0 <= kmax with D^k0 A identically 1 (D^0 A = A); None if none."""
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    cur = A
    for k in range(kmax + 1):
        if cur.is_identity():
            return k
        cur = difference(cur)
    return None


def seq_to_json(A: GroupPolySequence) -> str:
    if isinstance(A.group, UniversalGroup):
        head = {"d": A.group.d}
    else:
        head = {"dim1": A.group.dim1, "dim2": A.group.dim2}
    return json.dumps({**head, "coords": [[str(c) for c in p.coeffs] for p in A.coords]})


def seq_from_json(text: str, group=None) -> GroupPolySequence:
    obj = json.loads(text)
    if group is None:
        group = UniversalGroup(int(obj["d"]))
    return GroupPolySequence(group, tuple(Poly(Fraction(c) for c in cs) for cs in obj["coords"]))


# --- transference morphism ---------------------------------------------------

class ConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class MorphismSpec:
    """Morphism T: G0(d) -> target fixed by the images h_l = T(g_l).

    ``central_images[(l1, l2)]`` caches h_l1 h_l2 h_l1^-1 h_l2^-1.  It is
    computed from ``images`` at construction; editing ``images`` afterwards
    without rebuilding leaves T inconsistent, which is exactly what
    :func:`verify_homomorphism` is designed to catch.
    """

    target: Step2Group
    d3: int
    d: int
    images: tuple
    alpha: tuple = ()
    beta: tuple = ()
    gamma: tuple = ()
    rho: tuple = ()
    central_images: dict = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.central_images is None:
            object.__setattr__(self, "central_images", _commutator_table(self.target, self.images))
        # integer tables over the common denominator 2L (the 2 absorbs C(k, 2))
        G = self.target
        lin = [h[:G.dim1] for h in self.images]
        cross = {(i, j): G.form(lin[i], lin[j])
                 for i in range(len(lin)) for j in range(i, len(lin))}
        cen = {key: h[G.dim1:] for key, h in self.central_images.items()}
        vals = [v for h in self.images for v in h] + [v for r in cross.values() for v in r] + \
            [v for c in cen.values() for v in c]
        L = math.lcm(*(_frac(v).denominator for v in vals)) if vals else 1

        def ints(vec, s):
            return tuple(int(_frac(v) * s) for v in vec)
        object.__setattr__(self, "_scale", 2 * L)
        object.__setattr__(self, "_images", [ints(h, 2 * L) for h in self.images])
        # diagonal entries carry C(k, 2) = (k^2 - k) / 2, so they are stored at scale L
        object.__setattr__(self, "_cross", {(i, j): ints(r, L if i == j else 2 * L)
                                            for (i, j), r in cross.items() if any(r)})
        object.__setattr__(self, "_central", {k: ints(c, 2 * L) for k, c in cen.items()})

    def __call__(self, x: GroupElement | Sequence) -> tuple:
        """prod_l h_l^(x_l0) . prod c_(l1 l2)^(x_l1l2), expanded in closed form:
        in a step-2 group prod_l (u_l, v_l)^k_l has linear part sum k_l u_l and
        central part sum k_l v_l + sum_l C(k_l, 2) R(u_l, u_l) + sum_(i<j) k_i k_j R(u_i, u_j)."""
        coords = x.coords if isinstance(x, GroupElement) else tuple(x)
        if all(isinstance(c, int) for c in coords):
            den = 1
        else:
            coords = [_frac(c) for c in coords]
            den = math.lcm(*(c.denominator for c in coords))
        G = self.target
        idx = index_set(self.d)
        k = [int(coords[idx.position[(l, 0)]] * den) for l in range(1, self.d + 1)]
        # accumulate integers; the result is out / (scale * den^2)
        out = [0] * G.dim
        for kl, h in zip(k, self._images):
            if kl:
                for a in range(G.dim):
                    out[a] += kl * den * h[a]
        for (i, j), r in self._cross.items():
            c = k[i] * k[i] - k[i] * den if i == j else k[i] * k[j]
            if c:
                for b in range(G.dim2):
                    out[G.dim1 + b] += c * r[b]
        for (l1, l2), i in idx.position.items():
            if l2 and coords[i]:
                c = self._central[(l1, l2)]
                m = int(coords[i] * den * den)
                for b in range(G.dim2):
                    out[G.dim1 + b] += m * c[b]
        total = self._scale * den * den
        return tuple(_plain(Fraction(v, total)) for v in out)

    def rebuilt(self) -> "MorphismSpec":
        return replace(self, central_images=None)


def _commutator_table(G: Step2Group, images: Sequence) -> dict:
    return {(l1, l2): G.commutator(images[l1 - 1], images[l2 - 1])
            for l1 in range(1, len(images) + 1) for l2 in range(1, l1)}


def build_morphism(target: Step2Group, A_target: GroupPolySequence,
                   d: int | None = None) -> MorphismSpec:
    """Morphism T: G0(d) -> target with T(A0(n)) = A_target(n) identically.

    With d3 the maximal coordinate degree of A_target and d = 2*d3, set
    T(g_l) = (alpha_l, gamma_l) for l <= d3 and (0, gamma_l) otherwise, where
    alpha_l is the n^l coefficient of the linear part.  Expanding
    g_1^n ... g_d^(n^d) symbolically with gamma = 0 gives the central
    polynomial rho(n); the gamma_l are then read off degree by degree from
    beta - rho.
    """
    if A_target.group != target:
        raise ValueError("sequence does not live in the target group")
    if not A_target.starts_at_identity():
        raise ValueError("A_target(0) must be the identity")
    d1, d2 = target.dim1, target.dim2
    d3 = max(A_target.degree, 0)
    if d is None:
        d = max(2 * d3, 1)
    if d < 2 * d3:
        raise ConstructionError(f"d={d} too small for degree {d3}")

    lin, cen = A_target.coords[:d1], A_target.coords[d1:]
    alpha = tuple(tuple(p.coeff(i) for p in lin) for i in range(1, d3 + 1))
    beta = tuple(tuple(p.coeff(i) for p in cen) for i in range(1, d + 1))

    zero1, zero2 = (Fraction(0),) * d1, (Fraction(0),) * d2
    bare = [(alpha[l - 1] if l <= d3 else zero1) + zero2 for l in range(1, d + 1)]
    n = Poly.var()
    prod = target.identity()
    for l in range(1, d + 1):
        prod = target.multiply(prod, target.power(bare[l - 1], n ** l))
    for p, q in zip(prod[:d1], lin):
        if Poly._lift(p) != q:
            raise ConstructionError("linear part of T(A0(n)) disagrees with A_target")
    rho_polys = [Poly._lift(p) for p in prod[d1:]]
    if any(p.degree > d for p in rho_polys):
        raise ConstructionError("rho has degree exceeding d")
    rho = tuple(tuple(p.coeff(i) for p in rho_polys) for i in range(1, d + 1))
    if any(p.coeff(0) != 0 for p in rho_polys):
        raise ConstructionError("rho has a constant term")

    gamma = tuple(tuple(b - r for b, r in zip(beta[i], rho[i])) for i in range(d))
    images = tuple(bare[l][:d1] + gamma[l] for l in range(d))
    T = MorphismSpec(target, d3, d, images, alpha, beta, gamma, rho)

    check = symbolic_image(T)
    if any(Poly._lift(p) != q for p, q in zip(check, A_target.coords)):
        raise ConstructionError("T(A0(n)) != A_target(n) after the gamma solve")
    return T


def symbolic_image(T: MorphismSpec) -> tuple:
    """Coordinates of T(A0(n)) as polynomials in n."""
    G = T.target
    n = Poly.var()
    out = G.identity()
    for l in range(1, T.d + 1):
        out = G.multiply(out, G.power(T.images[l - 1], n ** l))
    return tuple(Poly._lift(p) for p in out)


@dataclass
class HomomorphismReport:
    ok: bool
    checked: int
    witness: tuple | None = None


def verify_homomorphism(T: Callable, pairs: Iterable[tuple[GroupElement, GroupElement]],
                        target: Step2Group | None = None) -> HomomorphismReport:
    """Check T(x.y) == T(x).T(y) exactly on the given pairs."""
    G = target if target is not None else T.target
    checked = 0
    for x, y in pairs:
        checked += 1
        if T(x * y) != G.multiply(T(x), T(y)):
            return HomomorphismReport(False, checked, (x, y))
    return HomomorphismReport(True, checked)


def random_target(rng, dim1: int = 2, dim2: int = 2, degree: int = 3,
                  height: int = 4) -> tuple[Step2Group, GroupPolySequence]:
    """Random rational step-2 group with a random integer polynomial sequence."""
    G = Step2Group.random(rng, dim1, dim2)
    coords = []
    for _ in range(G.dim):
        cs = [0] + [int(rng.integers(-height, height + 1)) for _ in range(degree)]
        coords.append(Poly(cs))
    if all(p.degree < degree for p in coords):
        coords[0] = coords[0] + Poly.monomial(degree)
    return G, GroupPolySequence(G, tuple(coords))


def parse_scalar(s: str):
    return _parse_scalar(s)
