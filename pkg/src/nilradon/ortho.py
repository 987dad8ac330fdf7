"""Almost-orthogonality quantities for finite families of matrices.

For S_1..S_K with |S_m| <= 1 and the convention S_{m,0} = S_m, S_{m,1} = 0,
every quantity below is a supremum over on/off patterns of the spectral norm
of an explicitly formed matrix:

    B_p       sup |S_1^p + ... + S_K^p|
    gamma_m,p sup |S_m (S_{m+1}^p + ... + S_K^p)|
    D_p       sup |(S_1 S_1*)^p + ... |          (D~_p with S* S)
    mu_m,p    sup |(S_m S_m*)[(S_{m+1} S_{m+1}*)^p + ...]|
    nu_m      sup |S_m* [(S_{m+1} S_{m+1}*) + ...]|
    Q         sup_m 2^(delta m / 4) |S_m (S_{m+1}^(p/2) + ...)|

Patterns are enumerated exactly for K <= 16; larger families use a greedy
bit-flip search whose result is only a lower bound.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

EXACT_MAX_K = 16
DENSE_MAX_N = 512


class PatternLimitError(ValueError):
    """Exact pattern enumeration requested beyond EXACT_MAX_K."""


# --- spectral norms ------------------------------------------------------------

def spectral_norm(M: np.ndarray, tol: float = 1e-12, maxiter: int = 10000, seed: int = 0) -> float:
    """Largest singular value: dense SVD for n <= 512, power iteration on M*M above."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    if max(M.shape[-2:]) <= DENSE_MAX_N:
        return float(np.linalg.svd(M, compute_uv=False)[0])
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[1]) + 1j * rng.standard_normal(M.shape[1])
    prev = 0.0
    for _ in range(maxiter):
        w = M.conj().T @ (M @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        est = math.sqrt(nw / np.linalg.norm(v))
        v = w / nw
        if abs(est - prev) <= tol * est:
            break
        prev = est
    return float(np.linalg.norm(M @ v))


def batched_norms(Ms: np.ndarray) -> np.ndarray:
    """Spectral norms of a stack of matrices (..., n, n)."""
    if Ms.shape[0] == 0:
        return np.zeros(0)
    return np.linalg.svd(Ms, compute_uv=False)[..., 0]


# --- families ----------------------------------------------------------------

@dataclass
class OperatorFamily:
    ops: list
    label: str = ""
    selfadjoint: bool = field(init=False)

    def __post_init__(self) -> None:
        self.ops = [np.asarray(S, complex) for S in self.ops]
        if not self.ops:
            raise ValueError("empty family")
        n = self.ops[0].shape[0]
        if any(S.shape != (n, n) for S in self.ops):
            raise ValueError("operators must be square and of one size")
        norms = [spectral_norm(S) for S in self.ops]
        if max(norms) > 1 + 1e-10:
            raise ValueError(f"|S_m| <= 1 violated: max norm {max(norms):.6g}")
        self.selfadjoint = all(np.allclose(S, S.conj().T, atol=1e-13) for S in self.ops)

    @property
    def K(self) -> int:
        return len(self.ops)

    @property
    def n(self) -> int:
        return self.ops[0].shape[0]

    def prefix(self, K: int) -> "OperatorFamily":
        return OperatorFamily(self.ops[:K], self.label)

    def gram(self, which: str) -> "OperatorFamily":
        """{S S*} ("ss*") or {S* S} ("s*s"): self-adjoint, norm <= 1."""
        if which == "ss*":
            ops = [S @ S.conj().T for S in self.ops]
        else:
            ops = [S.conj().T @ S for S in self.ops]
        return OperatorFamily([(X + X.conj().T) / 2 for X in ops], f"{self.label}:{which}")


def _mpow(S: np.ndarray, p: int) -> np.ndarray:
    return np.linalg.matrix_power(S, p)


def _patterns(k: int) -> np.ndarray:
    """All 0/1 inclusion vectors of length k (1 = operator present)."""
    if k == 0:
        return np.zeros((1, 0))
    return ((np.arange(2 ** k)[:, None] >> np.arange(k)[None, :]) & 1).astype(float)


def _sup_sum(terms: Sequence[np.ndarray], left: np.ndarray | None = None,
             mode: str = "exact", restarts: int = 50, seed: int = 0) -> tuple[float, np.ndarray]:
    """sup over subsets of |left @ sum(terms[subset])| (left = I if None)."""
    k = len(terms)
    if k == 0:
        return 0.0, np.zeros(0, bool)
    T = np.stack(terms)
    if left is not None:
        T = np.einsum("ij,kjl->kil", left, T)
    if mode == "exact":
        if k > EXACT_MAX_K:
            raise PatternLimitError(f"K = {k} exceeds exact enumeration limit {EXACT_MAX_K}")
        pats = _patterns(k)
        best, arg = -1.0, None
        step = max(1, 2 ** 20 // (T.shape[1] ** 2))
        for s in range(0, len(pats), step):
            P = pats[s:s + step]
            sums = np.tensordot(P, T, axes=(1, 0))
            norms = batched_norms(sums)
            i = int(np.argmax(norms))
            if norms[i] > best:
                best, arg = float(norms[i]), P[i].astype(bool)
        return best, arg
    return _greedy(T, restarts, seed)


def _greedy(T: np.ndarray, restarts: int, seed: int) -> tuple[float, np.ndarray]:
    """Single bit-flip ascent from all-present plus random restarts (lower bound)."""
    k = len(T)
    rng = np.random.default_rng(seed)
    best, arg = -1.0, None
    starts = [np.ones(k, bool)] + [rng.random(k) < 0.5 for _ in range(restarts - 1)]
    for pat in starts:
        pat = pat.copy()
        cur = spectral_norm(np.tensordot(pat.astype(float), T, axes=(0, 0)))
        while True:
            trials = np.repeat(pat[None, :], k, axis=0)
            trials[np.arange(k), np.arange(k)] ^= True
            vals = batched_norms(np.tensordot(trials.astype(float), T, axes=(1, 0)))
            i = int(np.argmax(vals))
            if vals[i] <= cur + 1e-15:
                break
            pat, cur = trials[i], float(vals[i])
        if cur > best:
            best, arg = cur, pat
    return best, arg


# --- the quantities --------------------------------------------------------------

def quantity_B(fam: OperatorFamily, p: int, mode: str = "exact") -> float:
    return _sup_sum([_mpow(S, p) for S in fam.ops], mode=mode)[0]


def quantity_gamma(fam: OperatorFamily, m: int, p: int, mode: str = "exact") -> float:
    """m is 1-based; the pattern i_m = 1 gives 0, so S_m is always present."""
    tail = [_mpow(S, p) for S in fam.ops[m:]]
    return _sup_sum(tail, left=fam.ops[m - 1], mode=mode)[0]


def _ss(fam: OperatorFamily, star_first: bool) -> list[np.ndarray]:
    return [S.conj().T @ S if star_first else S @ S.conj().T for S in fam.ops]


def quantity_D(fam: OperatorFamily, p: int, tilde: bool = False, mode: str = "exact") -> float:
    return _sup_sum([_mpow(X, p) for X in _ss(fam, tilde)], mode=mode)[0]


def quantity_mu(fam: OperatorFamily, m: int, p: int, tilde: bool = False,
                mode: str = "exact") -> float:
    G = _ss(fam, tilde)
    return _sup_sum([_mpow(X, p) for X in G[m:]], left=G[m - 1], mode=mode)[0]


def quantity_nu(fam: OperatorFamily, m: int, tilde: bool = False, mode: str = "exact") -> float:
    """nu_m = sup |S_m* [sum S S*]|; nu~_m = sup |S_m [sum S* S]|."""
    G = _ss(fam, tilde)
    S = fam.ops[m - 1]
    left = S if tilde else S.conj().T
    return _sup_sum(G[m:], left=left, mode=mode)[0]


def quantity_Q(fam: OperatorFamily, p0: int, delta0: float, mode: str = "exact") -> float:
    """sup_m 2^(delta0 m / 4) gamma_{m, p0/2}."""
    if p0 < 2:
        raise ValueError("Q needs p0 >= 2")
    return max((2 ** (delta0 * m / 4) * quantity_gamma(fam, m, p0 // 2, mode)
                for m in range(1, fam.K)), default=0.0)


def quantity_Qtilde(fam: OperatorFamily, p0: int, delta0: float, mode: str = "exact") -> float:
    """Q for the adjoint family {S_m*}."""
    return quantity_Q(OperatorFamily([S.conj().T for S in fam.ops]), p0, delta0, mode)


def tail_sum_left(fam: OperatorFamily, m: int, p0: int, mode: str = "exact") -> float:
    """sup |S_m* [(S_{m+1} S_{m+1}*)^p0 + ...]|."""
    G = _ss(fam, False)
    return _sup_sum([_mpow(X, p0) for X in G[m:]], left=fam.ops[m - 1].conj().T, mode=mode)[0]


def tail_sum_right(fam: OperatorFamily, m: int, p0: int, mode: str = "exact") -> float:
    """sup |S_m [(S*_{m+1} S_{m+1})^p0 + ...]|."""
    G = _ss(fam, True)
    return _sup_sum([_mpow(X, p0) for X in G[m:]], left=fam.ops[m - 1], mode=mode)[0]


# --- hypothesis checking ------------------------------------------------------------

@dataclass
class HypothesisReport:
    p0: int
    A: float
    delta0: float
    K: int
    norms: list
    line2: list  # per m: value of the second line
    line3: list
    margin2: list  # A 2^(-delta0 m) - value
    margin3: list
    passed: list  # three flags
    B: dict = field(default_factory=dict)
    gamma: dict = field(default_factory=dict)
    D: dict = field(default_factory=dict)
    Dtilde: dict = field(default_factory=dict)
    mu: dict = field(default_factory=dict)
    mutilde: dict = field(default_factory=dict)
    nu: list = field(default_factory=list)
    nutilde: list = field(default_factory=list)
    Q: float | None = None
    Qtilde: float | None = None
    implicit_form: dict = field(default_factory=dict)  # gamma vs B and mu vs D bounds, evaluated as stated
    mode: str = "exact"

    @property
    def ok(self) -> bool:
        return all(self.passed)

    def worst_margin(self, line: int) -> float:
        vals = self.margin2 if line == 2 else self.margin3
        return min(vals) if vals else float("inf")

    def to_json(self) -> str:
        def conv(x):
            if isinstance(x, dict):
                return {str(k): conv(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [conv(v) for v in x]
            if isinstance(x, (np.floating, float)):
                return float(x)
            if isinstance(x, (np.integer,)):
                return int(x)
            return x
        return json.dumps(conv(asdict(self)), indent=1, sort_keys=True)


def check_decay_hypotheses(fam: OperatorFamily, p0: int, A: float, delta0: float,
                          mode: str | None = None, full: bool = False) -> HypothesisReport:
    """The three lines of the simplified hypothesis, with per-m margins.

    With ``full`` the report also carries B, gamma, D, mu, nu, Q tables at
    p = 1 and p0, and the implicit gamma <= A 2^(-delta0 m)(B + 1) and mu <= A 2^(-delta0 m)(D + 1) bounds evaluated as stated (both sides reported).
    """
    mode = mode or ("exact" if fam.K <= EXACT_MAX_K else "greedy")
    norms = [spectral_norm(S) for S in fam.ops]
    l2, l3, m2, m3 = [], [], [], []
    for m in range(1, fam.K):
        v2, v3 = tail_sum_left(fam, m, p0, mode), tail_sum_right(fam, m, p0, mode)
        bound = A * 2.0 ** (-delta0 * m)
        l2.append(v2)
        l3.append(v3)
        m2.append(bound - v2)
        m3.append(bound - v3)
    passed = [max(norms) <= 1 + 1e-10, all(x >= -1e-12 for x in m2), all(x >= -1e-12 for x in m3)]
    rep = HypothesisReport(p0, A, delta0, fam.K, norms, l2, l3, m2, m3, passed, mode=mode)
    if full:
        ps = sorted({1, p0, 2 * p0})
        rep.B = {p: quantity_B(fam, p, mode) for p in ps}
        rep.gamma = {p: [quantity_gamma(fam, m, p, mode) for m in range(1, fam.K)] for p in ps}
        rep.D = {p: quantity_D(fam, p, False, mode) for p in ps}
        rep.Dtilde = {p: quantity_D(fam, p, True, mode) for p in ps}
        rep.mu = {p: [quantity_mu(fam, m, p, False, mode) for m in range(1, fam.K)] for p in ps}
        rep.mutilde = {p: [quantity_mu(fam, m, p, True, mode) for m in range(1, fam.K)]
                       for p in ps}
        rep.nu = [quantity_nu(fam, m, False, mode) for m in range(1, fam.K)]
        rep.nutilde = [quantity_nu(fam, m, True, mode) for m in range(1, fam.K)]
        if p0 >= 2:
            rep.Q = quantity_Q(fam, p0, delta0, mode)
            rep.Qtilde = quantity_Qtilde(fam, p0, delta0, mode)
        gb = [(g, A * 2.0 ** (-delta0 * m) * (rep.B[p0] + 1))
               for m, g in enumerate(rep.gamma[p0], start=1)]
        md = [(u, A * 2.0 ** (-delta0 * m) * (rep.D[p0] + 1))
                for m, u in enumerate(rep.mu[p0], start=1)]
        md_t = [(u, A * 2.0 ** (-delta0 * m) * (rep.Dtilde[p0] + 1))
                 for m, u in enumerate(rep.mutilde[p0], start=1)]
        rep.implicit_form = {
            "gamma_vs_B": {"pairs": gb, "holds": all(a <= b + 1e-12 for a, b in gb),
                    "applies": fam.selfadjoint},
            "mu_vs_D": {"pairs": md + md_t,
                      "holds": all(a <= b + 1e-12 for a, b in md + md_t)},
        }
    return rep


# --- internal inequalities ----------------------------------------------------------

@dataclass
class InequalityReport:
    label: str
    worst_square: float  # min over p of rhs - lhs
    worst_gamma_square: float
    worst_nu: float
    worst_selfadjoint: float  # |D_p - B_2p| on self-adjoint families (0 otherwise)

    @property
    def ok(self) -> bool:
        return min(self.worst_square, self.worst_gamma_square, self.worst_nu) >= -1e-8 and \
            self.worst_selfadjoint <= 1e-8


def _square_checks(fam: OperatorFamily, ps: Sequence[int], mode: str) -> tuple[float, float]:
    worst5 = worst51 = float("inf")
    B = {p: quantity_B(fam, p, mode) for p in set(ps) | {2 * p for p in ps}}
    G = {p: [quantity_gamma(fam, m, p, mode) for m in range(1, fam.K)]
         for p in set(ps) | {2 * p for p in ps}}
    for p in ps:
        worst5 = min(worst5, B[2 * p] + 2 * sum(G[p]) - B[p] ** 2)
        for m in range(1, fam.K):
            rhs = B[p] * G[p][m - 1] + 2 * sum(G[p][m:])
            worst51 = min(worst51, rhs - G[2 * p][m - 1])
    return worst5, worst51


def check_internal_inequalities(fam: OperatorFamily, ps: Sequence[int] = (1, 2),
                                mode: str = "exact") -> InequalityReport:
    """B_2p + 2 sum_m gamma_{m,p} >= B_p^2 and
    gamma_{m,2p} <= B_p gamma_{m,p} + 2 sum_{k>m} gamma_{k,p}, on the family
    itself when self-adjoint, else on {S S*} and {S* S}; nu_m^2 <= D_1 mu_{m,1}
    and its mirror on the family itself."""
    targets = [fam] if fam.selfadjoint else [fam.gram("ss*"), fam.gram("s*s")]
    w5 = w51 = float("inf")
    for t in targets:
        a, b = _square_checks(t, ps, mode)
        w5, w51 = min(w5, a), min(w51, b)
    wnu = float("inf")
    for tilde in (False, True):
        D1 = quantity_D(fam, 1, tilde, mode)
        for m in range(1, fam.K):
            nu = quantity_nu(fam, m, tilde, mode)
            mu = quantity_mu(fam, m, 1, tilde, mode)
            wnu = min(wnu, D1 * mu - nu ** 2)
    wsa = 0.0
    if fam.selfadjoint:
        for p in ps:
            wsa = max(wsa, abs(quantity_D(fam, p, False, mode) - quantity_B(fam, 2 * p, mode)))
    return InequalityReport(fam.label, w5, w51, wnu, wsa)


# --- sums and baselines -------------------------------------------------------------

def sum_norm(fam: OperatorFamily) -> float:
    return spectral_norm(sum(fam.ops))


def cotlar_stein_bound(fam: OperatorFamily) -> float:
    """sqrt(sup_j sum_k |S_j* S_k|^(1/2) * sup_j sum_k |S_j S_k*|^(1/2))."""
    ops = fam.ops
    K = len(ops)
    a = np.zeros((K, K))
    b = np.zeros((K, K))
    for j in range(K):
        for k in range(j, K):
            a[j, k] = a[k, j] = math.sqrt(spectral_norm(ops[j].conj().T @ ops[k]))
            b[j, k] = b[k, j] = math.sqrt(spectral_norm(ops[j] @ ops[k].conj().T))
    return math.sqrt(a.sum(axis=1).max() * b.sum(axis=1).max())


@dataclass
class GrowthRow:
    K: int
    sum_norm: float
    sum_of_norms: float
    cotlar_stein: float
    worst_margin_line2: float
    worst_margin_line3: float


def sum_norm_growth(generator: Callable[[int], OperatorFamily], K_list: Sequence[int],
                    p0: int = 2, A: float = 2.0, delta0: float = 0.5) -> list[GrowthRow]:
    rows = []
    for K in K_list:
        fam = generator(K)
        rep = check_decay_hypotheses(fam, p0, A, delta0)
        rows.append(GrowthRow(K, sum_norm(fam), sum(rep.norms), cotlar_stein_bound(fam),
                              rep.worst_margin(2), rep.worst_margin(3)))
    return rows


def write_growth(rows: Sequence[GrowthRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["K", "sum_norm", "worst_margin_line2", "worst_margin_line3",
                    "sum_of_norms", "cotlar_stein"])
        for r in rows:
            w.writerow([r.K, f"{r.sum_norm:.17g}", f"{r.worst_margin_line2:.17g}",
                        f"{r.worst_margin_line3:.17g}", f"{r.sum_of_norms:.17g}",
                        f"{r.cotlar_stein:.17g}"])


# --- generators -------------------------------------------------------------------

def random_unitary(n: int, rng) -> np.ndarray:
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def projection_family(K: int, n: int = 64, seed: int = 0, decay: float = 0.0) -> OperatorFamily:
    """Orthogonal projections onto disjoint coordinate blocks, conjugated by one
    random unitary; optionally scaled by 2^(-decay m)."""
    if K > n:
        raise ValueError("need K <= n")
    U = random_unitary(n, np.random.default_rng(seed))
    edges = np.linspace(0, n, K + 1).astype(int)
    ops = []
    for m in range(K):
        P = np.zeros((n, n))
        P[edges[m]:edges[m + 1], edges[m]:edges[m + 1]] = np.eye(edges[m + 1] - edges[m])
        ops.append(2.0 ** (-decay * (m + 1)) * (U @ P @ U.conj().T))
    return OperatorFamily(ops, "projections")


def unitary_family(K: int, n: int = 64, seed: int = 0, decay: float = 1.0,
                   fixed: bool = False) -> OperatorFamily:
    """2^(-decay m) U_m with U_m random Hermitian unitaries (one shared U if fixed)."""
    rng = np.random.default_rng(seed)

    def herm_unitary():
        V = random_unitary(n, rng)
        s = rng.choice([-1.0, 1.0], size=n)
        return (V * s) @ V.conj().T

    U0 = herm_unitary()
    ops = [2.0 ** (-decay * (m + 1)) * (U0 if fixed else herm_unitary()) for m in range(K)]
    return OperatorFamily(ops, "unitaries")


def radon_family(K: int, n: int = 64, kernel_name: str = "hilbert", kappa: float = 0.25,
                 J0: int = 1) -> OperatorFamily:
    """Windowed d = 1 block sums S_m = sum_{j in [J(1 - kappa), J]} H_j, J = J0 + m - 1,
    as Toeplitz matrices T[y, x] = w(y - x) on a window of n points.  Windowing
    destroys the exact operator identities; these matrices only serve as test
    inputs.  All blocks share one normalisation so that |S_m| <= 1."""
    from .kernels import DyadicKernel, kernel
    from .transform import block_range, block_weights
    dk = DyadicKernel(kernel(kernel_name))
    mats = []
    for m in range(K):
        lo, hi = block_range(J0 + m, kappa)
        w = block_weights(dk, lo, hi)
        T = np.zeros((n, n), complex)
        for k, v in zip(w.n, w.w):
            if abs(k) < n:
                T += v * np.eye(n, k=-int(k))
        mats.append(T)
    scale = max(spectral_norm(T) for T in mats)
    return OperatorFamily([T / scale for T in mats], f"radon:{kernel_name}")


def near_orthogonal_family(K: int, n: int = 64, seed: int = 0,
                           rate: float = 0.75) -> OperatorFamily:
    """Rank-one projections onto u_m = (e_m + a_m z) / |.|, a_m = 2^(-rate m) U[0.5, 1],
    z = e_(n-1).  Cross terms <u_j, u_k> ~ 2^(-rate (j+k)) decay, while each
    |S_m| = 1, so the sum of norms grows linearly in K."""
    if K >= n:
        raise ValueError("need K < n")
    rng = np.random.default_rng(seed)
    a = 2.0 ** (-rate * np.arange(1, n)) * rng.uniform(0.5, 1.0, size=n - 1)
    ops = []
    for m in range(K):
        u = np.zeros(n, complex)
        u[m] = 1.0
        u[n - 1] = a[m]
        u /= np.linalg.norm(u)
        ops.append(np.outer(u, u.conj()))
    return OperatorFamily(ops, "near-orthogonal")


GENERATORS = {
    "projections": projection_family,
    "unitaries": unitary_family,
    "radon": radon_family,
    "near-orthogonal": near_orthogonal_family,
}
