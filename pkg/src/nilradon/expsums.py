"""Multilinear polynomials D, D~ and the exponential sums built from them.

D(x, y) = A0(x_1)^-1 A0(y_1) ... A0(x_r)^-1 A0(y_r) and
D~(x, y) = A0(x_1) A0(y_1)^-1 ... A0(x_r) A0(y_r)^-1, written out in closed
form.  Complete sums S(a/q) are evaluated from the exact histogram of
D(v, w) . a mod q, so the only floating point step is the final
root-of-unity accumulation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Mapping, Sequence

import numpy as np
from fractions import Fraction

from .group import index_set, inv_coords, mul_coords
from .kernels import QuadratureError, _gl, eta0, eta0_prime


class BudgetError(RuntimeError):
    """Requested enumeration exceeds the configured budget."""

    def __init__(self, message: str, cost: float):
        super().__init__(f"{message} (estimated cost {cost:.3g})")
        self.cost = cost


# --- D and D~ ------------------------------------------------------------------

def D_poly(x: Sequence, y: Sequence, d: int) -> list:
    """Closed form of D(x, y); entries may be ints, Fractions, floats or arrays.

    [D]_{l1,0} = sum_j (y_j^l1 - x_j^l1);  for l2 >= 1
    [D]_{l1,l2} = sum_{j1<j2} (y_j1^l1 - x_j1^l1)(y_j2^l2 - x_j2^l2)
                  + sum_j (x_j^(l1+l2) - x_j^l1 y_j^l2).
    """
    if len(x) != len(y):
        raise ValueError("x and y must have the same length r")
    r = len(x)
    a = {l: [y[j] ** l - x[j] ** l for j in range(r)] for l in range(1, d + 1)}
    out = []
    for l1, l2 in index_set(d).pairs:
        if l2 == 0:
            out.append(sum(a[l1]) if r else 0)
            continue
        cross, prefix = 0, 0
        for j in range(r):
            if j:
                cross = cross + prefix * a[l2][j]
            prefix = prefix + a[l1][j]
        diag = sum(x[j] ** (l1 + l2) - x[j] ** l1 * y[j] ** l2 for j in range(r))
        out.append(cross + diag)
    return out


def Dtilde_poly(x: Sequence, y: Sequence, d: int) -> list:
    """Closed form of D~(x, y): the formula of D_poly with x and y exchanged in
    the differences and y^(l1+l2) - x^l1 y^l2 on the diagonal."""
    return _Dtilde(x, y, d)


def _Dtilde(x, y, d):
    idx = index_set(d)
    r = len(x)
    if len(y) != r:
        raise ValueError("x and y must have the same length r")
    b = {l: [x[j] ** l - y[j] ** l for j in range(r)] for l in range(1, d + 1)}
    out = []
    for l1, l2 in idx.pairs:
        if l2 == 0:
            out.append(sum(b[l1]) if r else 0)
            continue
        cross, prefix = 0, 0
        for j in range(r):
            if j:
                cross = cross + prefix * b[l2][j]
            prefix = prefix + b[l1][j]
        diag = sum(y[j] ** (l1 + l2) - x[j] ** l1 * y[j] ** l2 for j in range(r))
        out.append(cross + diag)
    return out


def _a0(idx, n):
    return tuple(n ** l1 if l2 == 0 else 0 * n for l1, l2 in idx.pairs)


def D_group(x: Sequence, y: Sequence, d: int, tilde: bool = False) -> list:
    """D or D~ by multiplying out the group product (oracle for the closed forms)."""
    idx = index_set(d)
    acc = tuple(0 for _ in idx.pairs)
    for xj, yj in zip(x, y):
        ax, ay = _a0(idx, xj), _a0(idx, yj)
        if tilde:
            step = mul_coords(idx, ax, inv_coords(idx, ay))
        else:
            step = mul_coords(idx, inv_coords(idx, ax), ay)
        acc = mul_coords(idx, acc, step)
    return list(acc)


# --- fractions and complete sums -------------------------------------------------

@dataclass(frozen=True)
class MultiFraction:
    """a/q with Y_d-indexed numerators in {1, ..., q} and gcd(a, q) = 1."""

    q: int
    a: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ValueError("q must be positive")
        if any(not 1 <= ai <= self.q for ai in self.a):
            raise ValueError("numerators must lie in {1, ..., q}")
        if math.gcd(self.q, *self.a) != 1:
            raise ValueError(f"{self.a}/{self.q} is not irreducible")

    def in_S(self, R: float) -> bool:
        return self.q <= R

    def negated(self) -> "MultiFraction":
        return MultiFraction(self.q, tuple((-ai) % self.q or self.q for ai in self.a))


def fractions(d: int, q: int):
    """All irreducible a/q over Y_d (only the joint gcd with q is constrained)."""
    k = len(index_set(d))
    for a in product(range(1, q + 1), repeat=k):
        if math.gcd(q, *a) == 1:
            yield MultiFraction(q, a)


DEFAULT_BUDGET = 10 ** 9


@lru_cache(maxsize=64)
def _residue_table(d: int, r: int, q: int, tilde: bool, offset: int) -> tuple[np.ndarray, np.ndarray]:
    """Distinct residues D(v, w) mod q over v, w in Z_q^r and their multiplicities."""
    reps = np.arange(offset, offset + q, dtype=np.int64)
    grids = np.meshgrid(*([reps] * (2 * r)), indexing="ij")
    v = [g.ravel() for g in grids[:r]]
    w = [g.ravel() for g in grids[r:]]
    vals = (_Dtilde(v, w, d) if tilde else D_poly(v, w, d))
    res = np.stack([np.mod(c, q) for c in vals], axis=1)
    uniq, counts = np.unique(res, axis=0, return_counts=True)
    return uniq, counts


def phase_histogram(frac: MultiFraction, r: int, variant: str = "D", d: int | None = None,
                    budget: int = DEFAULT_BUDGET, offset: int = 1) -> np.ndarray:
    """E[k] = #{(v, w) in Z_q^2r : D(v, w) . a = k mod q}, exact integers.

    ``offset`` selects the representatives {offset, ..., offset + q - 1} of Z_q.
    """
    if d is None:
        d = _d_from_len(len(frac.a))
    q = frac.q
    cost = float(q) ** (2 * r)
    if cost > budget:
        raise BudgetError(f"q^(2r) = {q}^{2 * r} exceeds budget {budget}", cost)
    uniq, counts = _residue_table(d, r, q, variant == "Dtilde", offset)
    k = (uniq @ np.asarray(frac.a, dtype=np.int64)) % q
    return _weighted_count(k, counts, q)


def _weighted_count(k: np.ndarray, counts: np.ndarray, q: int) -> np.ndarray:
    out = np.zeros(q, dtype=np.int64)
    np.add.at(out, k, counts)
    return out


def _d_from_len(n: int) -> int:
    d = int((math.isqrt(8 * n + 1) - 1) // 2)
    if d * (d + 1) // 2 != n:
        raise ValueError(f"{n} is not |Y_d| for any d")
    return d


def roots_of_unity(q: int) -> np.ndarray:
    k = np.arange(q)
    return np.exp(-2j * np.pi * k / q)


def _fsum_complex(z: np.ndarray) -> complex:
    return complex(math.fsum(z.real), math.fsum(z.imag))


def S_aq(frac: MultiFraction, r: int, variant: str = "D", budget: int = DEFAULT_BUDGET) -> complex:
    """q^-2r sum_{v, w in Z_q^r} exp(-2 pi i D(v, w) . a / q)."""
    E = phase_histogram(frac, r, variant, budget=budget)
    return _fsum_complex(E * roots_of_unity(frac.q)) / float(frac.q) ** (2 * r)


@lru_cache(maxsize=None)
def cyclotomic(q: int) -> tuple[int, ...]:
    """Integer coefficients (ascending) of the q-th cyclotomic polynomial."""
    num = [-1] + [0] * (q - 1) + [1]  # x^q - 1
    for dd in range(1, q):
        if q % dd == 0:
            num = _polydiv_exact(num, list(cyclotomic(dd)))
    return tuple(num)


def _polydiv_exact(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        out[i] = c
        for k, dc in enumerate(den):
            num[i + k] -= c * dc
    if any(num[:len(den) - 1]):
        raise ArithmeticError("inexact cyclotomic division")
    return out


def is_zero_in_cyclotomic_field(E: Sequence[int]) -> bool:
    """Whether sum_k E[k] zeta_q^k vanishes, zeta_q a primitive q-th root of unity."""
    q = len(E)
    rem = [int(c) for c in E]
    phi = cyclotomic(q)
    deg = len(phi) - 1
    for i in range(len(rem) - 1, deg - 1, -1):
        c = rem[i]
        if c:
            for k, pc in enumerate(phi):
                rem[i - deg + k] -= c * pc
    return not any(rem[:deg])


def S_aq_is_zero(frac: MultiFraction, r: int, variant: str = "D") -> bool:
    return is_zero_in_cyclotomic_field(phase_histogram(frac, r, variant))


@dataclass
class DecayRow:
    q: int
    max_abs_S: float
    max_abs_Stilde: float
    argmax_a: tuple


def saq_decay_table(d: int, r: int, qmax: int, qs: Sequence[int] | None = None,
                    budget: int = DEFAULT_BUDGET) -> list[DecayRow]:
    """max over irreducible a of |S(a/q)| and |S~(a/q)| for each q."""
    rows = []
    for q in (qs if qs is not None else range(1, qmax + 1)):
        if float(q) ** (2 * r) > budget:
            raise BudgetError(f"q^(2r) = {q}^{2 * r} exceeds budget", float(q) ** (2 * r))
        best, best_t, arg = -1.0, -1.0, None
        roots = roots_of_unity(q)
        tabs = {t: _residue_table(d, r, q, t, 1) for t in (False, True)}
        fr = list(fractions(d, q))
        A = np.array([f.a for f in fr], dtype=np.int64).reshape(len(fr), -1)
        for tilde, (uniq, counts) in tabs.items():
            K = (uniq @ A.T) % q  # (cells, fractions)
            vals = np.empty(len(fr))
            for i in range(len(fr)):
                E = _weighted_count(K[:, i], counts, q)
                vals[i] = abs(_fsum_complex(E * roots)) / float(q) ** (2 * r)
            i = int(np.argmax(vals))
            if tilde:
                best_t = float(vals[i])
            else:
                best, arg = float(vals[i]), fr[i].a
        rows.append(DecayRow(q, best, best_t, arg))
    return rows


def write_decay_table(rows: Sequence[DecayRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["q", "max_abs_S", "max_abs_Stilde", "argmax_a"])
        for row in rows:
            w.writerow([row.q, f"{row.max_abs_S:.17g}", f"{row.max_abs_Stilde:.17g}",
                        " ".join(map(str, row.argmax_a))])


# --- Weyl sums -------------------------------------------------------------------

@dataclass(frozen=True)
class PhasePoint:
    """Y_d-indexed frequencies, reduced to [0, 1).

    Fractions are kept exact so that integer phases can be reduced mod q
    before the single floating point multiplication.
    """

    theta: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", tuple(
            t % 1 if isinstance(t, Fraction) else float(t) % 1.0 for t in self.theta))

    @classmethod
    def zero(cls, d: int) -> "PhasePoint":
        return cls((0.0,) * len(index_set(d)))

    @classmethod
    def single(cls, d: int, pair: tuple[int, int], value: float) -> "PhasePoint":
        idx = index_set(d)
        th = [0.0] * len(idx)
        th[idx.position[pair]] = value
        return cls(tuple(th))


@dataclass(frozen=True)
class CutoffPair:
    """phi_P^(j), psi_P^(j) for j = 1..r (each a vectorised callable)."""

    P: int
    phi: tuple
    psi: tuple
    admissible: bool = True
    label: str = ""

    @property
    def r(self) -> int:
        return len(self.phi)

    def values(self, j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = np.arange(-self.P, self.P + 1)
        t = n.astype(float)
        return n, np.asarray(self.phi[j](t), float), np.asarray(self.psi[j](t), float)

    def check(self, samples: int = 20001) -> tuple[float, float]:
        """Sampled sup of |phi| + |psi| off [-P, P] excess and total variation."""
        t = np.linspace(-2.0 * self.P, 2.0 * self.P, samples)
        inside = np.abs(t) <= self.P
        sup_excess, tv = 0.0, 0.0
        for f, g in zip(self.phi, self.psi):
            s = np.abs(f(t)) + np.abs(g(t))
            sup_excess = max(sup_excess, float(np.max(s - inside)))
            tv = max(tv, float(np.sum(np.abs(np.diff(f(t)))) + np.sum(np.abs(np.diff(g(t))))))
        return sup_excess, tv


DEFAULT_AMPLITUDE = 0.25


def plateau_cutoffs(P: int, r: int, amplitude: float = DEFAULT_AMPLITUDE) -> CutoffPair:
    """phi = psi = amplitude * eta0(2t/P): smooth, supported in [-P, P].

    eta0 rises once and falls once, so the total variation of phi plus psi is
    4 * amplitude; amplitude 1/4 is the largest admissible value.
    """
    def f(t):
        return amplitude * eta0(2.0 * np.asarray(t, float) / P)
    ok = 4 * amplitude <= 1 + 1e-15
    return CutoffPair(P, (f,) * r, (f,) * r, ok, f"plateau({amplitude:g})")


def unit_cutoffs(P: int, r: int) -> CutoffPair:
    """Amplitude-one plateau (violates the total-variation constraint)."""
    c = plateau_cutoffs(P, r, 1.0)
    return CutoffPair(P, c.phi, c.psi, False, "plateau(1)")


def box_cutoffs(P: int, r: int) -> CutoffPair:
    """Sharp indicator of [-P, P]; not C^1 and flagged as non-admissible."""
    def f(t):
        return (np.abs(np.asarray(t, float)) <= P).astype(float)
    return CutoffPair(P, (f,) * r, (f,) * r, False, "box")


def _step_table(theta, d: int, j_cut: CutoffPair, j: int, tilde: bool, L: list[int]):
    """Aggregate (n, m) pairs of one step by the integers that drive the coupling."""
    idx = index_set(d)
    n1, ph, _ = j_cut.values(j)
    _, _, ps = j_cut.values(j)
    n = np.repeat(n1, len(n1))
    m = np.tile(n1, len(n1))
    w = np.repeat(ph, len(n1)) * np.tile(ps, len(n1))
    keep = w != 0
    n, m, w = n[keep], m[keep], w[keep]
    if tilde:  # D~(x, y) = D(y, x) up to the diagonal, handled explicitly
        b = {l: n ** l - m ** l for l in range(1, d + 1)}
    else:
        b = {l: m ** l - n ** l for l in range(1, d + 1)}
    phase = np.zeros(len(n))
    for (l1, l2), i in idx.position.items():
        th = theta[i]
        if not th:
            continue
        if l2 == 0:
            phase += float(th) * _reduce(b[l1], _period(th))
        elif tilde:
            phase += float(th) * _reduce(m ** (l1 + l2) - n ** l1 * m ** l2, _period(th))
        else:
            phase += float(th) * _reduce(n ** (l1 + l2) - n ** l1 * m ** l2, _period(th))
    val = w * np.exp(-2j * np.pi * phase)
    lvals = sorted({l2 for (l1, l2), i in idx.position.items() if l2 and theta[i]})
    keys = np.stack([b[l] for l in L] + [b[l] for l in lvals], axis=1) if (L or lvals) else \
        np.zeros((len(n), 0), dtype=np.int64)
    if keys.shape[1]:
        uk, inv = np.unique(keys, axis=0, return_inverse=True)
        agg = np.zeros(len(uk), complex)
        np.add.at(agg, inv.ravel(), val)
    else:
        uk, agg = keys[:1], np.array([val.sum()])
    return uk[:, :len(L)], uk[:, len(L):], lvals, agg


def _period(th) -> int:
    """Exact period of k -> th * k mod 1 for rational th; no reduction otherwise."""
    if isinstance(th, Fraction):
        return th.denominator
    return 0


def _reduce(k, period: int):
    return k % period if period else k


def weyl_sum(theta: PhasePoint, P: int, r: int, d: int, cutoffs: CutoffPair | None = None,
             variant: str = "D", budget: int = DEFAULT_BUDGET) -> complex:
    """sum_{n, m in Z^r} exp(-2 pi i D(n, m) . theta) prod_j phi(n_j) psi(m_j).

    Evaluated as a transfer recursion over j: the only coupling between steps
    is through the cross terms sum_{j1<j2} b_j1^(l1) b_j2^(l2), so the running
    sums p_l1 = sum_{j1<j} b_j1^(l1) of the coordinates with theta_{l1 l2} != 0
    form a finite state.
    """
    cutoffs = cutoffs or plateau_cutoffs(P, r)
    if cutoffs.r != r or cutoffs.P != P:
        raise ValueError("cutoffs do not match (P, r)")
    idx = index_set(d)
    th = theta.theta
    if len(th) != len(idx):
        raise ValueError("phase point has the wrong dimension")
    tilde = variant == "Dtilde"
    L = sorted({l1 for (l1, l2), i in idx.position.items() if l2 and th[i]})
    # states: integer rows (len(L)) with complex weights
    states = np.zeros((1, len(L)), dtype=np.int64)
    F = np.ones(1, complex)
    coef = {(l1, l2): th[i] for (l1, l2), i in idx.position.items() if l2 and th[i]}
    for j in range(r):
        sl, sv, lvals, agg = _step_table(th, d, cutoffs, j, tilde, L)
        cost = float(len(states)) * len(agg)
        if cost > budget:
            raise BudgetError("Weyl recursion exceeds budget", cost)
        if not L:
            F = F * agg.sum()
            continue
        new_keys, new_vals = [], []
        chunk = max(1, int(4e6 // max(1, len(agg))))
        for s0 in range(0, len(states), chunk):
            p = states[s0:s0 + chunk]
            ph = np.zeros((len(p), len(agg)))
            # cross phase sum_{l1, l2} theta_{l1 l2} p_l1 b^(l2)
            for (l1, l2), c in coef.items():
                k = _reduce(np.outer(p[:, L.index(l1)], sv[:, lvals.index(l2)]), _period(c))
                ph += np.mod(float(c) * k, 1.0)
            contrib = F[s0:s0 + chunk, None] * np.exp(-2j * np.pi * ph) * agg[None, :]
            keys = (p[:, None, :] + sl[None, :, :]).reshape(-1, len(L))
            new_keys.append(keys)
            new_vals.append(contrib.ravel())
        keys = np.concatenate(new_keys)
        vals = np.concatenate(new_vals)
        states, inv = np.unique(keys, axis=0, return_inverse=True)
        F = np.zeros(len(states), complex)
        np.add.at(F, inv.ravel(), vals)
    return _fsum_complex(F)


def weyl_sum_bruteforce(theta: PhasePoint, P: int, r: int, d: int,
                        cutoffs: CutoffPair | None = None, variant: str = "D") -> complex:
    """Direct evaluation over all (2P+1)^2r tuples (small cases only)."""
    cutoffs = cutoffs or plateau_cutoffs(P, r)
    vals = np.arange(-P, P + 1)
    total = []
    for tup in product(vals, repeat=2 * r):
        x, y = tup[:r], tup[r:]
        w = 1.0
        for j in range(r):
            w *= float(cutoffs.phi[j](float(x[j]))) * float(cutoffs.psi[j](float(y[j])))
        if w == 0:
            continue
        D = Dtilde_poly(x, y, d) if variant == "Dtilde" else D_poly(x, y, d)
        ph = math.fsum(float(t) * _reduce(int(c), _period(t)) for t, c in zip(theta.theta, D) if t)
        total.append(w * complex(math.cos(2 * math.pi * ph), -math.sin(2 * math.pi * ph)))
    return _fsum_complex(np.array(total, complex)) if total else 0j


def _nearest_prime(x: float) -> int:
    def is_prime(k):
        return k >= 2 and all(k % p for p in range(2, math.isqrt(k) + 1))
    k = max(2, round(x))
    for off in range(0, 10 ** 6):
        for c in (k - off, k + off):
            if is_prime(c):
                return c
    raise ArithmeticError("no prime found")


GOLDEN = (math.sqrt(5) - 1) / 2


def minor_arc_fraction(pair: tuple[int, int], P: int, eps: float) -> tuple[int, int]:
    """(a, q) with q the prime nearest P^(l1+l2-eps) and a/q near the golden ratio."""
    q = _nearest_prime(P ** (pair[0] + pair[1] - eps))
    a = max(1, round(q * GOLDEN))
    while math.gcd(a, q) != 1:
        a += 1
    return a, q


@dataclass
class ArcRow:
    theta_desc: str
    P: int
    r: int
    value: float
    ratio: float
    relative: float


def minor_arc_scan(d: int, r: int, P: int, eps: float, cutoffs: CutoffPair | None = None,
                   major_q: int = 3, variant: str = "D", budget: int = DEFAULT_BUDGET) -> list[ArcRow]:
    """|S_{P,r}| / (2P+1)^2r at theta = 0, a major arc a/3 and a minor arc a/q with
    q ~ P^(l1+l2-eps), one coordinate at a time.  ``relative`` divides by theta = 0."""
    cutoffs = cutoffs or plateau_cutoffs(P, r)
    norm = float(2 * P + 1) ** (2 * r)
    rows = []
    s0 = abs(weyl_sum(PhasePoint.zero(d), P, r, d, cutoffs, variant, budget))
    rows.append(ArcRow("zero", P, r, s0, s0 / norm, 1.0))
    for pair in index_set(d).pairs:
        for kind, (a, q) in (("major", (1, major_q)), ("minor", minor_arc_fraction(pair, P, eps))):
            th = PhasePoint.single(d, pair, Fraction(a, q))
            v = abs(weyl_sum(th, P, r, d, cutoffs, variant, budget))
            rows.append(ArcRow(f"{kind}:{pair[0]}{pair[1]}:{a}/{q}", P, r, v, v / norm,
                               v / s0 if s0 else float("nan")))
    return rows


def write_arc_scan(rows: Sequence[ArcRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta_desc", "P", "r", "ratio", "relative_to_zero"])
        for row in rows:
            w.writerow([row.theta_desc, row.P, row.r, f"{row.ratio:.17g}", f"{row.relative:.17g}"])


# --- oscillatory integral --------------------------------------------------------

def default_window(t):
    """One-dimensional factor eta0(2t) of the default product window on [-1, 1]."""
    return eta0(2.0 * np.asarray(t, float))


WINDOW_BREAKS = (-1.0, -0.5, 0.5, 1.0)


def _nodes(n: int, breaks=WINDOW_BREAKS):
    x, w = _gl(n)
    xs, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        xs.append(0.5 * (b - a) * x + 0.5 * (b + a))
        ws.append(0.5 * (b - a) * w)
    return np.concatenate(xs), np.concatenate(ws)


@dataclass
class OscResult:
    value: complex
    order: int
    trace: list  # (order, value)
    ratios: list  # Cauchy ratios |I_4n - I_2n| / |I_2n - I_n| above the noise floor


def _osc_fixed(beta, r, d, n, window, variant):
    x, w = _nodes(n)
    w1 = w * window(x)
    keep = w1 != 0
    x, w1 = x[keep], w1[keep]
    idx = index_set(d)
    beta = np.asarray(beta, float)
    fn = Dtilde_poly if variant == "Dtilde" else D_poly
    if r == 1:
        X, Y = np.meshgrid(x, x, indexing="ij")
        W = np.outer(w1, w1)
        D = fn([X], [Y], d)
        ph = sum(b * c for b, c in zip(beta, D))
        return complex(np.sum(W * np.exp(-2j * np.pi * ph)))
    if r == 2 and d <= 2:
        return _osc_r2(beta, d, x, w1, variant)
    # generic blocked tensor sum
    grids = np.meshgrid(*([x] * (2 * r)), indexing="ij")
    W = np.ones_like(grids[0])
    for g in range(2 * r):
        W = W * w1[np.indices(grids[0].shape)[g]]
    D = fn(list(grids[:r]), list(grids[r:]), d)
    ph = sum(b * c for b, c in zip(beta, D))
    return complex(np.sum(W * np.exp(-2j * np.pi * ph)))


def _osc_r2(beta, d, x, w1, variant):
    """r = 2, d <= 2: the steps couple only through beta_21 * u1 * v2 (scalar)."""
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w1, w1)
    idx = index_set(d)
    pos = idx.position
    sgn = -1.0 if variant == "Dtilde" else 1.0

    def single(Xa, Ya):  # per-step separable phase
        ph = 0.0
        for (l1, l2), i in pos.items():
            if l2 == 0:
                ph = ph + beta[i] * sgn * (Ya ** l1 - Xa ** l1)
            elif variant == "Dtilde":
                ph = ph + beta[i] * (Ya ** (l1 + l2) - Xa ** l1 * Ya ** l2)
            else:
                ph = ph + beta[i] * (Xa ** (l1 + l2) - Xa ** l1 * Ya ** l2)
        return ph

    f = (W * np.exp(-2j * np.pi * single(X, Y))).ravel()
    if d == 1 or beta[pos[(2, 1)]] == 0:
        s = f.sum()
        return complex(s * s)
    b21 = beta[pos[(2, 1)]]
    u = (sgn * (Y ** 2 - X ** 2)).ravel()  # step-1 factor, in [-1, 1]
    v = (sgn * (Y - X)).ravel()  # step-2 factor, in [-2, 2]
    # G(s) = sum_k f_k exp(-2 pi i s v_k) is entire in s; interpolate on [-1, 1]
    deg = int(8 + 4 * math.pi * abs(b21) * 2 + 40)
    cheb = np.cos(np.pi * (np.arange(deg) + 0.5) / deg)
    G = np.exp(-2j * np.pi * b21 * np.outer(cheb, v)) @ f
    coef = np.polynomial.chebyshev.chebfit(cheb, G.real, deg - 1) + \
        1j * np.polynomial.chebyshev.chebfit(cheb, G.imag, deg - 1)
    Gu = np.polynomial.chebyshev.chebval(u, coef)
    return complex(np.sum(f * Gu))


def osc_integral(beta: Sequence[float], r: int, d: int, window: Callable | None = None,
                 variant: str = "D", n0: int | None = None, nmax: int = 1024,
                 tol: float = 1e-8, noise: float = 1e-12) -> OscResult:
    """int_{[-1,1]^2r} Phi(x, y) exp(-2 pi i D(x, y) . beta) dx dy with
    Phi(x, y) = prod_j w(x_j) w(y_j), by composite Gauss-Legendre split at the
    window breakpoints; the order doubles until successive values differ by < tol.

    The default starting order, the power of two above 2(1 + max|beta|),
    resolves the phase on each panel, so the reported Cauchy ratios describe
    the asymptotic regime rather than the pre-resolution transient.
    """
    if r > 2:
        raise ValueError("r <= 2 supported")
    window = window or default_window
    if n0 is None:
        bmax = max((abs(float(b)) for b in beta), default=0.0)
        n0 = max(8, 1 << math.ceil(math.log2(2 * (1 + bmax))))
    trace = []
    n = n0
    while n <= nmax:
        trace.append((n, _osc_fixed(beta, r, d, n, window, variant)))
        if len(trace) >= 3 and abs(trace[-1][1] - trace[-2][1]) < tol:
            break
        n *= 2
    else:
        raise QuadratureError(f"oscillatory integral did not converge; trace {trace}")
    vals = [v for _, v in trace]
    diffs = [abs(b - a) for a, b in zip(vals, vals[1:])]
    scale = max(1.0, max(abs(v) for v in vals))
    ratios = [diffs[k + 1] / diffs[k] for k in range(len(diffs) - 1)
              if diffs[k] > noise * scale]
    return OscResult(vals[-1], trace[-1][0], trace, ratios)


# --- zero counting -----------------------------------------------------------------

def poly_degree(poly: Mapping[tuple[int, ...], object]) -> int:
    nz = [sum(e) for e, c in poly.items() if c != 0]
    return max(nz) if nz else -1


def poly_eval(poly: Mapping[tuple[int, ...], object], point: Sequence) -> object:
    total = 0
    for e, c in poly.items():
        term = c
        for xi, k in zip(point, e):
            term = term * xi ** k
        total = total + term
    return total


def count_zeros_bound(poly: Mapping[tuple[int, ...], object], A: Sequence, s: int
                      ) -> tuple[int, int, bool]:
    """Brute-force #{x in A^s : P(x) = 0} against deg(P) |A|^(s-1)."""
    if poly_degree(poly) < 0:
        raise ValueError("polynomial is identically zero")
    if any(len(e) != s for e in poly):
        raise ValueError("exponent tuples must have length s")
    A = list(dict.fromkeys(A))
    count = sum(1 for pt in product(A, repeat=s) if poly_eval(poly, pt) == 0)
    bound = poly_degree(poly) * len(A) ** (s - 1)
    return count, bound, count <= bound


def random_poly(rng, s: int, deg: int, height: int = 3, terms: int = 4) -> dict:
    """Random non-zero integer polynomial in s variables of total degree <= deg."""
    exps = [e for e in product(range(deg + 1), repeat=s) if sum(e) <= deg]
    while True:
        poly = {}
        for _ in range(terms):
            e = exps[int(rng.integers(len(exps)))]
            poly[e] = poly.get(e, 0) + int(rng.integers(-height, height + 1))
        poly = {e: c for e, c in poly.items() if c}
        if poly:
            return poly
