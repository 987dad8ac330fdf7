"""Calderon-Zygmund kernels on R and their dyadic decomposition.

The bump eta0 is the even C^2 quintic smoothstep: 1 on [-1, 1], 0 outside
[-2, 2], and s(u) = 1 - u^3 (10 - 15u + 6u^2), u = |t| - 1, in between.  Its
integral is exactly 3.  The dyadic pieces are

    K_j = K eta_j + c_j 2^-j eta_j - c_{j+1} 2^-j-1 eta_{j+1},
    c_j = 2 (int K eta0(2^-(j-1) t) dt) / (int eta0),

which have mean zero and telescope to K (eta0(2^-j t) - eta0(t)) plus two
boundary bumps.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

ETA0_INTEGRAL = 3.0


class QuadratureError(RuntimeError):
    pass


# --- bump functions ----------------------------------------------------------

def eta0(t):
    a = np.abs(np.asarray(t, dtype=float))
    u = np.clip(a - 1.0, 0.0, 1.0)
    return 1.0 - u ** 3 * (10.0 - 15.0 * u + 6.0 * u ** 2)


def eta0_prime(t):
    t = np.asarray(t, dtype=float)
    u = np.clip(np.abs(t) - 1.0, 0.0, 1.0)
    return -np.sign(t) * 30.0 * u ** 2 * (1.0 - u) ** 2


def eta_j(j: int, t):
    """eta_j(t) = eta0(2^-j t) - eta0(2^(1-j) t) for j >= 1; eta_0 = eta0."""
    if j == 0:
        return eta0(t)
    t = np.asarray(t, dtype=float)
    return eta0(t * 2.0 ** -j) - eta0(t * 2.0 ** (1 - j))


def eta_j_prime(j: int, t):
    if j == 0:
        return eta0_prime(t)
    t = np.asarray(t, dtype=float)
    s = 2.0 ** -j
    return s * eta0_prime(t * s) - 2 * s * eta0_prime(2 * t * s)


def eta_leq(lam: float, x, weights) -> float:
    """prod over Y_d of eta0(x_{l1 l2} / 2^(lam (l1 + l2)))."""
    if lam < 1:
        raise ValueError("lam must be >= 1")
    x = np.asarray(x, dtype=float)
    w = np.asarray(weights, dtype=float)
    return float(np.prod(eta0(x / 2.0 ** (lam * w))))


# --- quadrature ----------------------------------------------------------------

@lru_cache(maxsize=None)
def _gl(n: int):
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre(f: Callable, a: float, b: float, n: int) -> float:
    x, w = _gl(n)
    half = 0.5 * (b - a)
    return float(half * np.dot(w, f(half * x + 0.5 * (a + b))))


def integrate(f: Callable, knots, tol: float = 1e-14, n0: int = 16, nmax: int = 2048) -> float:
    """Integral of a vectorised f over [knots[0], knots[-1]].

    Each sub-interval between consecutive knots is integrated with Gauss-Legendre
    of doubling order until successive values agree to ``tol`` (relative to the
    piece magnitude, absolute below 1).
    """
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        if b <= a:
            continue
        n = n0
        prev = gauss_legendre(f, a, b, n)
        while True:
            n *= 2
            cur = gauss_legendre(f, a, b, n)
            if abs(cur - prev) <= tol * max(1.0, abs(cur)):
                break
            if n >= nmax:
                raise QuadratureError(
                    f"no convergence on [{a}, {b}]: |I_{n} - I_{n // 2}| = {abs(cur - prev):.3e}")
            prev = cur
        total += cur
    return total


def dyadic_knots(lo_exp: int, hi_exp: int) -> list[float]:
    """0, 2^lo_exp, ..., 2^hi_exp."""
    return [0.0] + [2.0 ** k for k in range(lo_exp, hi_exp + 1)]


# --- kernels -----------------------------------------------------------------

def _hilbert_shape(t):
    return t / (1.0 + t * t)


def _hilbert_shape_prime(t):
    t2 = t * t
    return (1.0 - t2) / (1.0 + t2) ** 2


def _osc_shape(t):
    q = 1.0 + t * t
    return np.cos(0.5 * np.log(q)) / np.sqrt(q)


def _osc_shape_prime(t):
    q = 1.0 + t * t
    u = 0.5 * np.log(q)
    return -t * (np.sin(u) + np.cos(u)) / q ** 1.5


def _bad_shape(t):
    return 1.0 / (1.0 + np.abs(t))


def _bad_shape_prime(t):
    return -np.sign(t) / (1.0 + np.abs(t)) ** 2


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=float))


# Normalisations fixed by dense maximisation (scripts/calibrate_kernels.py):
# the largest 6-digit constant for which the unit shape passes verify_cz.
HILBERT_C0 = 0.402073
OSCILLATING_C1 = 0.296481

_SHAPES = {
    "hilbert": (_hilbert_shape, _hilbert_shape_prime, HILBERT_C0),
    "oscillating": (_osc_shape, _osc_shape_prime, OSCILLATING_C1),
    "harmonic": (_bad_shape, _bad_shape_prime, 10.0),
    "zero": (_zero, _zero, 0.0),
}


@dataclass(frozen=True, eq=False)
class CZKernel:
    name: str
    scale: float
    shape: Callable = field(repr=False)
    shape_prime: Callable = field(repr=False)

    def __call__(self, t):
        return self.scale * self.shape(np.asarray(t, dtype=float))

    def derivative(self, t):
        return self.scale * self.shape_prime(np.asarray(t, dtype=float))

    def even_part(self, t):
        t = np.asarray(t, dtype=float)
        return self(t) + self(-t)


def kernel(name: str, scale: float | None = None) -> CZKernel:
    """Library kernel by name: hilbert, oscillating, harmonic (not CZ), zero.

    ``hilbert`` is c0 t / (1 + t^2); ``oscillating`` is
    c1 cos(log sqrt(1 + t^2)) / sqrt(1 + t^2); ``harmonic`` is 10 / (1 + |t|),
    whose truncated integrals diverge.
    """
    try:
        shape, prime, default = _SHAPES[name]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; choose from {sorted(_SHAPES)}") from None
    return CZKernel(name, default if scale is None else float(scale), shape, prime)


KERNEL_NAMES = tuple(_SHAPES)


# --- dyadic decomposition ------------------------------------------------------

class DyadicKernel:
    """The pair (K, {K_j}) with the coefficients c_j cached on first use."""

    def __init__(self, K: CZKernel):
        self.K = K
        self._c: dict[int, float] = {}
        self._full: dict[int, float] = {}

    def _piece(self, k: int) -> float:
        # integral of K(t) + K(-t) over [2^(k-1), 2^k] (k = 0 means [0, 1])
        if k not in self._full:
            a = 0.0 if k == 0 else 2.0 ** (k - 1)
            self._full[k] = integrate(self.K.even_part, [a, 2.0 ** k])
        return self._full[k]

    def c(self, j: int) -> float:
        if j < 1:
            raise ValueError("j must be >= 1")
        if j not in self._c:
            L = 2.0 ** (j - 1)
            inner = sum(self._piece(k) for k in range(j))
            K = self.K
            edge = integrate(lambda t: K.even_part(t) * eta0(t / L), [L, 2 * L])
            self._c[j] = 2.0 * (inner + edge) / ETA0_INTEGRAL
        return self._c[j]

    def piece(self, j: int) -> "DyadicPiece":
        return DyadicPiece(self.K, j, self.c(j), self.c(j + 1))

    def c_table(self, jmax: int) -> list[tuple[int, float]]:
        return [(j, self.c(j)) for j in range(1, jmax + 1)]

    def write_c_table(self, path, jmax: int) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["j", "c_j"])
            for j, c in self.c_table(jmax):
                w.writerow([j, f"{c:.17g}"])

    def partial_sum(self, j: int, t):
        """sum_{j'=1}^{j} K_j'(t), evaluated piece by piece."""
        t = np.asarray(t, dtype=float)
        return sum(self.piece(i)(t) for i in range(1, j + 1))

    def telescoped(self, j: int, t):
        """Closed form of the partial sum: K eta0(2^-j t) - K eta0(t) + boundary bumps."""
        t = np.asarray(t, dtype=float)
        K = self.K(t)
        return (K * eta0(t * 2.0 ** -j) - K * eta0(t) + self.c(1) * 0.5 * eta_j(1, t)
                - self.c(j + 1) * 2.0 ** (-j - 1) * eta_j(j + 1, t))


def cj_coefficient(K: CZKernel, j: int) -> float:
    return DyadicKernel(K).c(j)


@dataclass(frozen=True, eq=False)
class DyadicPiece:
    K: CZKernel
    j: int
    cj: float
    cj1: float

    @property
    def support(self) -> tuple[float, float]:
        """Closed interval outside which K_j vanishes."""
        r = 2.0 ** (self.j + 2)
        return (-r, r)

    @property
    def knots(self) -> list[float]:
        pos = [2.0 ** (self.j - 1 + i) for i in range(4)]
        return [-p for p in reversed(pos)] + pos

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        j = self.j
        ej, ej1 = eta_j(j, t), eta_j(j + 1, t)
        return self.K(t) * ej + self.cj * 2.0 ** -j * ej - self.cj1 * 2.0 ** (-j - 1) * ej1

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        j = self.j
        ej, dej, dej1 = eta_j(j, t), eta_j_prime(j, t), eta_j_prime(j + 1, t)
        return (self.K.derivative(t) * ej + self.K(t) * dej + self.cj * 2.0 ** -j * dej
                - self.cj1 * 2.0 ** (-j - 1) * dej1)

    def integral(self) -> float:
        k = self.knots
        return integrate(self, [k[0], k[1], k[2], k[3], k[4], k[5], k[6], k[7]])

    def at_integers(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer n with K_j(n) != 0 and the values K_j(n)."""
        r = 2 ** (self.j + 2)
        n = np.arange(-r, r + 1)
        v = self(n.astype(float))
        keep = v != 0
        return n[keep], v[keep]

    def scaled_sup(self, samples: int = 20001) -> tuple[float, float]:
        """sup 2^j |K_j| and sup 2^2j |K_j'| on a fine grid over the support."""
        lo, hi = self.support
        t = np.linspace(lo, hi, samples)
        return (float(2.0 ** self.j * np.max(np.abs(self(t)))),
                float(4.0 ** self.j * np.max(np.abs(self.derivative(t)))))


def dyadic_piece(K: CZKernel, j: int) -> DyadicPiece:
    return DyadicKernel(K).piece(j)


# --- Calderon-Zygmund verification ---------------------------------------------

@dataclass
class CZReport:
    size_max: float
    size_argmax: float
    cancel_max: float
    cancel_argmax: float
    passed: bool


def _size_profile(K: CZKernel, t):
    a = np.abs(t)
    return (1 + a) * np.abs(K(t)) + (1 + a) ** 2 * np.abs(K.derivative(t))


def _refine_max(f: Callable, grid: np.ndarray, vals: np.ndarray) -> tuple[float, float]:
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    best_t, best = float(grid[i]), float(vals[i])
    if hi > lo:
        res = minimize_scalar(lambda s: -f(s), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13 * max(1.0, abs(hi))})
        if -res.fun > best:
            best_t, best = float(res.x), float(-res.fun)
    return best_t, best


def truncated_integral(K: CZKernel, N: float) -> float:
    """int_{-N}^{N} K, split at the dyadic points below N."""
    if N <= 0:
        return 0.0
    knots = [0.0] + [2.0 ** k for k in range(0, 64) if 2.0 ** k < N] + [float(N)]
    return integrate(K.even_part, knots)


def verify_cz(K: CZKernel, max_exp: int = 40, per_octave: int = 64,
              tol: float = 1e-9) -> CZReport:
    """Check both bounds of the Calderon-Zygmund condition on dense grids."""
    near = np.linspace(-4.0, 4.0, 16001)
    far = np.logspace(0, max_exp * math.log10(2), max_exp * per_octave * 4)
    grid = np.unique(np.concatenate([near, far, -far]))
    prof = _size_profile(K, grid)
    st, smax = _refine_max(lambda s: float(_size_profile(K, np.array([s]))[0]), grid, prof)

    # cumulative integral of the even part over octaves, sampled inside each octave
    Ns, vals, acc = [], [], 0.0
    for k in range(-1, max_exp):
        a = 0.0 if k < 0 else 2.0 ** k
        b = 1.0 if k < 0 else 2.0 ** (k + 1)
        pts = np.linspace(a, b, per_octave + 1)[1:]
        x, w = _gl(48)
        for p in pts:
            half = 0.5 * (p - a)
            vals.append(acc + half * float(np.dot(w, K.even_part(half * x + 0.5 * (p + a)))))
            Ns.append(p)
        acc = vals[-1]
    Ns, vals = np.array(Ns), np.abs(np.array(vals))
    ct, cmax = _refine_max(lambda s: abs(truncated_integral(K, s)), Ns, vals)
    passed = smax <= 1 + tol and cmax <= 1 + tol
    return CZReport(smax, st, cmax, ct, passed)
