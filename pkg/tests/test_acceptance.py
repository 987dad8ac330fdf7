"""The fifteen acceptance criteria, each at its stated size and tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import json
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from nilradon import group, polyseq
from nilradon.expsums import (D_group, D_poly, Dtilde_poly, MultiFraction, S_aq, S_aq_is_zero,
                              count_zeros_bound, fractions, minor_arc_scan, osc_integral,
                              phase_histogram, random_poly, saq_decay_table)
from nilradon.kernels import DyadicKernel, kernel, verify_cz
from nilradon.ortho import (check_decay_hypotheses, check_internal_inequalities,
                            near_orthogonal_family, projection_family, radon_family, spectral_norm,
                            sum_norm, unitary_family)
from nilradon.transform import (Factor, OperatorChain, SparseFunction, apply_adjoint,
                                apply_chain, apply_radon, exact_composition_kernel, norm_sweep,
                                piece_weights)

ANCHORS = Path(__file__).parent / "data" / "decay_d2_r2.json"


def test_01_group_axioms(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    fails = 0
    for d in (1, 2, 3):
        G = group.UniversalGroup(d)
        e, m, inv = G.identity(), G.multiply, G.inverse
        X = rng.integers(-1000, 1001, size=(10 ** 4, 3, G.dim))
        for x, y, z in X.tolist():
            x, y, z = tuple(x), tuple(y), tuple(z)
            comm = m(m(x, y), inv(m(y, x)))
            fails += (m(m(x, y), z) != m(x, m(y, z))) + (m(x, e) != x) + (m(e, x) != x) \
                + (m(x, inv(x)) != e) + (m(comm, z) != m(z, comm))
    dt = time.perf_counter() - t0
    ok = fails == 0 and dt < 5
    record(1, ok, f"3 x 10^4 triples, failures={fails}, {dt:.2f}s")
    assert ok


def test_02_closed_forms_vs_group_products(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    tuples, bad = 0, 0
    for d in (1, 2, 3):
        for r in (1, 2, 3):
            N = 12000
            x = [rng.integers(-5, 6, N) for _ in range(r)]
            y = [rng.integers(-5, 6, N) for _ in range(r)]
            for fn, tilde in ((D_poly, False), (Dtilde_poly, True)):
                want = D_group(x, y, d, tilde=tilde)
                got = fn(x, y, d)
                bad += int(sum(np.count_nonzero(np.asarray(a) != np.asarray(b))
                               for a, b in zip(got, want)))
            tuples += N
    dt = time.perf_counter() - t0
    ok = bad == 0 and tuples >= 10 ** 5 and dt < 30
    record(2, ok, f"{tuples} tuples x (D, D~), mismatches={bad}, {dt:.2f}s")
    assert ok


def test_03_kernel_identities(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst_mean, worst_tel, cz = 0.0, 0.0, []
    for name in ("hilbert", "oscillating"):
        K = kernel(name)
        dk = DyadicKernel(K)
        for j in range(1, 21):
            worst_mean = max(worst_mean, abs(dk.piece(j).integral()))
            t = rng.uniform(-2.0 ** (j + 3), 2.0 ** (j + 3), 500)
            worst_tel = max(worst_tel, float(np.max(np.abs(dk.partial_sum(j, t)
                                                           - dk.telescoped(j, t)))))
        cz.append(verify_cz(K).passed)
    dt = time.perf_counter() - t0
    ok = worst_mean < 1e-10 and worst_tel < 1e-12 and all(cz) and dt < 10
    record(3, ok, f"max|int K_j|={worst_mean:.2e}, telescoping err={worst_tel:.2e} "
                  f"on 2 x 10^4 samples, CZ={cz}, {dt:.2f}s")
    assert ok


def test_04_nilpotency(record):
    t0 = time.perf_counter()
    degs = {d: polyseq.nilpotency_degree(polyseq.a0_sequence(d), 40) for d in (1, 2, 3, 4)}
    dt = time.perf_counter() - t0
    ok = all(v is not None for v in degs.values()) and degs[1] == 2 and dt < 5
    record(4, ok, f"degrees {degs}, {dt:.2f}s")
    assert ok


def test_05_morphism_intertwining(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    inter, homs = 0, 0
    for _ in range(20):
        G, A = polyseq.random_target(rng, degree=int(rng.integers(1, 4)))
        T = polyseq.build_morphism(G, A)
        A0 = polyseq.a0_sequence(T.d)
        inter += all(T(A0(n)) == A(n) for n in range(-20, 21))
        dim = len(group.index_set(T.d))

        def draw():
            return group.element(T.d, [int(v) for v in rng.integers(-50, 51, dim)])
        homs += polyseq.verify_homomorphism(T, [(draw(), draw()) for _ in range(1000)]).ok
    dt = time.perf_counter() - t0
    ok = inter == 20 and homs == 20 and dt < 20
    record(5, ok, f"intertwining {inter}/20, homomorphism {homs}/20 (10^3 pairs each), "
                  f"{dt:.2f}s")
    assert ok


def test_06_operator_oracle_equivalence(record):
    t0 = time.perf_counter()
    e_fail = 0
    for d in (1, 2):
        dk = DyadicKernel(kernel("oscillating"))
        for j in range(1, 9):
            for k in range(1, 9):
                chain = OperatorChain([Factor("H_j*", j=j), Factor("H_j", j=k)],
                                      "oscillating", d=d, _dk=dk)
                got = apply_chain(SparseFunction.delta(d), chain)
                want = exact_composition_kernel([j, k], d, "D", "oscillating", dk=dk)
                e_fail += not got.equals(want)
    dt = time.perf_counter() - t0
    ok = e_fail == 0 and dt < 60
    record(6, ok, f"128 (j, k, d) cases, bitwise mismatches={e_fail}, {dt:.2f}s")
    assert ok


def test_07_adjointness(record):
    rng = np.random.default_rng(7)
    worst = 0.0
    for name in ("hilbert", "oscillating"):
        w = piece_weights(DyadicKernel(kernel(name)), 3)
        for d in (1, 2, 3):
            A = polyseq.a0_sequence(d)
            for _ in range(1000):
                f, h = SparseFunction.random(d, rng), SparseFunction.random(d, rng)
                lhs = apply_radon(f, w, A).inner(h)
                rhs = f.inner(apply_adjoint(h, w, A))
                worst = max(worst, abs(lhs - rhs))
    ok = worst < 1e-12
    record(7, ok, f"2 kernels x 3 sequences x 10^3 pairs, max |<Hf,h>-<f,H*h>|={worst:.2e}")
    assert ok


def test_08_exponential_sums(record):
    t0 = time.perf_counter()
    trivial = all(S_aq(MultiFraction(1, (1,) * k), r) == 1 for k in (1, 3, 6) for r in (1, 2))
    vanish = all(S_aq_is_zero(f, 1) for q in range(2, 51) for f in fractions(1, q))
    vanish &= all(S_aq_is_zero(f, 2) for q in range(2, 21) for f in fractions(1, q))
    worst = max(max(row.max_abs_S, row.max_abs_Stilde)
                for r in (1, 2) for row in saq_decay_table(2, r, 20))
    conj = all(np.array_equal(phase_histogram(f.negated(), 2),
                              np.roll(phase_histogram(f, 2)[::-1], 1))
               for q in range(2, 13) for f in fractions(2, q))
    dt = time.perf_counter() - t0
    ok = trivial and vanish and worst <= 1 + 1e-12 and conj and dt < 120
    record(8, ok, f"S(a/1)=1 {trivial}, d=1 exact zeros {vanish}, max|S|={worst:.15g} "
                  f"(d=2, r<=2, q<=20), conjugation {conj}, {dt:.2f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="q = 2 gives |S| = 1 for a = (1, 1, 0) at every r")
def test_09_decay_trend(record):
    rows = {row.q: row for row in saq_decay_table(2, 2, 20)}
    primes = {q: rows[q].max_abs_S for q in (2, 3, 5, 7, 11, 13)}
    below = all(v < 1 for v in primes.values())
    hi = max(rows[q].max_abs_S for q in range(8, 21))
    lo = max(rows[q].max_abs_S for q in range(2, 8))
    ok = below and hi < lo
    record(9, ok, f"prime maxima {({q: round(v, 6) for q, v in primes.items()})}, "
                  f"max q in [8,20]={hi:.6f} < max q in [2,7]={lo:.6f}: {hi < lo}; "
                  f"witness a={rows[2].argmax_a}/2 has S=1")
    assert ok


def test_09_decay_regression_anchors():
    anchors = json.loads(ANCHORS.read_text())
    rows = saq_decay_table(2, 2, 20)
    for row, want in zip(rows, anchors["rows"]):
        assert row.q == want["q"]
        assert row.max_abs_S == pytest.approx(want["max_abs_S"], abs=1e-13)
        assert row.max_abs_Stilde == pytest.approx(want["max_abs_Stilde"], abs=1e-13)


def test_10_minor_arc_contrast(record):
    t0 = time.perf_counter()
    rows = minor_arc_scan(2, 4, 32, 0.25, budget=10 ** 9)
    minor = {row.theta_desc: row.relative for row in rows if row.theta_desc.startswith("minor")}
    dt = time.perf_counter() - t0
    ok = all(v < 0.5 for v in minor.values()) and dt < 600
    record(10, ok, "relative to theta=0: " +
           ", ".join(f"{k}={v:.3g}" for k, v in minor.items()) + f", {dt:.1f}s")
    assert ok


def test_11_oscillatory_integrals(record):
    rng = np.random.default_rng(11)
    worst_ratio, worst_decay = 0.0, 0.0
    for d in (1, 2):
        n = len(group.index_set(d))
        dirs = [np.eye(n)[k] for k in range(n)] + [np.ones(n) / np.sqrt(n)]
        dirs += [v / np.linalg.norm(v) for v in rng.standard_normal((2, n))]
        for r in (1, 2):
            base = abs(osc_integral([0.0] * n, r, d).value)
            for u in dirs:
                for mag in (2.5, 5.0, 10.0):
                    res = osc_integral(list(mag * u), r, d)
                    worst_ratio = max([worst_ratio] + res.ratios)
                    if mag == 10.0:
                        worst_decay = max(worst_decay, abs(res.value) / base)
    ok = worst_ratio < 1e-2 and worst_decay < 0.5
    record(11, ok, f"worst Cauchy ratio {worst_ratio:.2e}, max |I(10u)|/|I(0)| "
                   f"{worst_decay:.3f} (d<=2, r<=2)")
    assert ok


def test_12_zero_counting(record):
    rng = np.random.default_rng(12)
    violations = 0
    for _ in range(1000):
        s = int(rng.integers(1, 4))
        poly = random_poly(rng, s, int(rng.integers(1, 5)))
        size = int(rng.integers(1, 6))
        A = [int(v) for v in rng.choice(np.arange(-6, 7), size=size, replace=False)]
        violations += not count_zeros_bound(poly, A, s)[2]
    record(12, violations == 0, f"10^3 random polynomials, violations={violations}")
    assert violations == 0


def test_13_internal_inequalities(record):
    gens = {"projections": lambda K: projection_family(K, decay=0.25),
            "unitaries": lambda K: unitary_family(K),
            "radon": lambda K: radon_family(K)}
    worst = float("inf")
    for make in gens.values():
        for K in (4, 8, 12):
            rep = check_internal_inequalities(make(K))
            worst = min(worst, rep.worst_square, rep.worst_gamma_square, rep.worst_nu)
    ok = worst >= -1e-8
    record(13, ok, f"3 generators x K in (4, 8, 12), smallest margin {worst:.3e}")
    assert ok


def test_14_near_orthogonal_growth(record):
    hyp = {K: check_decay_hypotheses(near_orthogonal_family(K), 2, 2.0, 0.5).ok
           for K in (8, 16)}
    s = {K: sum_norm(near_orthogonal_family(K)) for K in (8, 16)}
    each = {K: sum(spectral_norm(S) for S in near_orthogonal_family(K).ops) for K in (8, 16)}
    growth = s[16] / s[8] - 1
    linear = abs(each[16] / each[8] - 2) < 1e-9
    ok = all(hyp.values()) and growth <= 0.05 and linear
    record(14, ok, f"hypotheses (A, delta0, p0)=(2, 1/2, 2) hold {hyp}, |sum| K=8 {s[8]:.6f} "
                   f"K=16 {s[16]:.6f} (+{100 * growth:.2f}%), sum of norms "
                   f"{each[8]:.6f} -> {each[16]:.6f}")
    assert ok


def test_15_boundedness_plateau(record):
    parts, ok = [], True
    for d in (1, 2):
        t0 = time.perf_counter()
        rows = norm_sweep(d, "hilbert", [2 ** 6, 2 ** 8, 2 ** 10])
        dt = time.perf_counter() - t0
        lb = [est.lower_bound for _, est in rows]
        ratios = [b / a for a, b in zip(lb, lb[1:])]
        ok &= all(x <= 1.10 for x in ratios) and dt < 600
        parts.append(f"d={d}: " + ", ".join(f"{v:.5f}" for v in lb) +
                     " ratios " + ", ".join(f"{x:.4f}" for x in ratios) + f" ({dt:.1f}s)")
    record(15, ok, "; ".join(parts))
    assert ok
