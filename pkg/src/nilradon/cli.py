"""Experiment runner: one subcommand per experiment, reproducible from a config.

Every run writes its CSV/JSON outputs plus ``manifest.json`` (config echo,
config hash, library versions, wall times) into the output directory.  Every
CSV starts with ``#`` comment lines carrying the config hash and the fixed
parameters (eps, r, kappa) together with a flag telling whether they satisfy
the parameter constraints of the boundedness argument.

Exit codes: 0 all checks passed, 1 a property failed, 2 usage or budget error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import platform
import sys
import time
import zlib
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy

from . import expsums, group, kernels, ortho, polyseq, transform
from .expsums import BudgetError

EXPERIMENTS = ("group-check", "seq-check", "kernel-check", "norm-sweep", "expsum-table",
               "weyl-scan", "osc-scan", "ortho-demo", "compose-kernel")


class ConfigError(ValueError):
    def __init__(self, problems: Sequence[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


@dataclass
class ExperimentConfig:
    experiment: str = "group-check"
    d: int = 2
    r: int = 2
    eps: float = 0.25
    kappa: float = 0.25
    P: int = 32
    R: list = field(default_factory=lambda: [64, 256, 1024])
    J: list = field(default_factory=lambda: list(range(1, 9)))
    K: list = field(default_factory=lambda: [4, 8, 16])
    kernel: str = "hilbert"
    generator: str = "near-orthogonal"
    variant: str = "D"
    seed: int = 0
    samples: int = 1000
    qmax: int = 20
    beta_max: float = 10.0
    iterations: int = 30
    method: str = "auto"
    budget: int = 10 ** 7
    out: str = "runs"

    def validate(self) -> None:
        problems = []
        if self.experiment not in EXPERIMENTS:
            problems.append(f"experiment: unknown {self.experiment!r}")
        for name in ("d", "r", "P", "samples", "qmax", "iterations", "budget"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 1:
                problems.append(f"{name}: must be a positive integer")
        if not 0 < self.eps < 1:
            problems.append("eps: must lie in (0, 1)")
        if not 0 < self.kappa < 1:
            problems.append("kappa: must lie in (0, 1)")
        for name in ("R", "J", "K"):
            vals = getattr(self, name)
            if not vals or any(not isinstance(v, int) or v < 1 for v in vals):
                problems.append(f"{name}: must be a non-empty list of positive integers")
        if self.kernel not in kernels.KERNEL_NAMES:
            problems.append(f"kernel: one of {', '.join(kernels.KERNEL_NAMES)}")
        if self.generator not in ortho.GENERATORS:
            problems.append(f"generator: one of {', '.join(ortho.GENERATORS)}")
        if self.variant not in ("D", "Dtilde"):
            problems.append("variant: D or Dtilde")
        if self.method not in ("auto", "sparse", "dense", "fibred"):
            problems.append("method: auto, sparse, dense or fibred")
        if self.beta_max < 0:
            problems.append("beta_max: must be >= 0")
        if problems:
            raise ConfigError(problems)

    def hash(self) -> str:
        body = {k: v for k, v in asdict(self).items() if k != "out"}
        text = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def rng(self, stream: str) -> np.random.Generator:
        """Independent generator for a named substream of the run seed."""
        key = (zlib.crc32(stream.encode()),)
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=key))


def parameter_violations(eps: float, r: int, kappa: float, d: int,
                         Cbar: float = 1.0) -> list[str]:
    """Constraints on (eps, r, kappa) needed by the boundedness argument; the
    constant Cbar >= 1 is not explicit, so Cbar = 1 gives necessary conditions."""
    big = (10.0 * d) ** 10
    out = []
    if r < 1 or r & (r - 1):
        out.append("r is not a power of two")
    if not math.isclose(kappa * r * r, 1.0, rel_tol=1e-12):
        out.append("kappa r^2 != 1")
    if eps > 1.0 / (Cbar * big):
        out.append("eps > 1/(Cbar (10d)^10)")
    if -2 * Cbar + r * eps / (2 * Cbar) < big:
        out.append("-2 Cbar + r eps/(2 Cbar) < (10d)^10")
    return out


# --- output plumbing ------------------------------------------------------------------

class Run:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.hash = cfg.hash()
        self.dir = Path(cfg.out)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.outputs: list[str] = []
        self.timings: dict[str, float] = {}
        self.violations = parameter_violations(cfg.eps, cfg.r, cfg.kappa, cfg.d)

    def header(self) -> list[str]:
        c = self.cfg
        flag = "true" if self.violations else "false"
        return [f"# config_hash={self.hash} experiment={c.experiment} seed={c.seed}",
                f"# eps={c.eps!r} r={c.r} kappa={c.kappa!r} "
                f"parameter_constraints_violated={flag}"]

    def csv(self, name: str, columns: Sequence[str], rows: Sequence[Sequence]) -> Path:
        path = self.dir / name
        with open(path, "w", newline="") as fh:
            for line in self.header():
                fh.write(line + "\n")
            w = csv.writer(fh)
            w.writerow(columns)
            for row in rows:
                w.writerow([fmt(v) for v in row])
        self.outputs.append(name)
        return path

    def stamp(self, name: str) -> Path:
        """Prepend the header to a CSV written by a library writer."""
        path = self.dir / name
        body = path.read_text()
        path.write_text("\n".join(self.header()) + "\n" + body)
        self.outputs.append(name)
        return path

    def json(self, name: str, obj) -> Path:
        path = self.dir / name
        path.write_text(json.dumps({"config_hash": self.hash, **obj}, indent=1, sort_keys=True,
                                   default=_jsonable) + "\n")
        self.outputs.append(name)
        return path

    def timed(self, label: str, fn: Callable, *args, **kw):
        t0 = time.perf_counter()
        out = fn(*args, **kw)
        self.timings[label] = round(time.perf_counter() - t0, 6)
        return out

    def manifest(self, status: str, summary: dict) -> Path:
        from importlib import metadata
        try:
            version = metadata.version("artifact")
        except metadata.PackageNotFoundError:
            version = "unknown"
        return self.json("manifest.json", {
            "config": asdict(self.cfg), "status": status, "summary": summary,
            "outputs": self.outputs, "wall_time_s": self.timings,
            "parameter_constraint_violations": self.violations,
            "versions": {"python": platform.python_version(), "numpy": np.__version__,
                         "scipy": scipy.__version__, "artifact": version}})


def fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (tuple, list)):
        return " ".join(fmt(x) for x in v)
    return str(v)


def _jsonable(x):
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (Fraction, complex)):
        return str(x)
    if dataclasses.is_dataclass(x):
        return asdict(x)
    raise TypeError(f"not serialisable: {type(x)}")


# --- experiments ------------------------------------------------------------------------

def run_group_check(run: Run) -> tuple[bool, dict]:
    """Group axioms on random triples with coordinates in [-1000, 1000]."""
    c = run.cfg
    rng = c.rng("group_core")
    G = group.UniversalGroup(c.d)
    e = G.identity()
    fails = dict.fromkeys(("associativity", "identity", "inverse", "commutator_central"), 0)
    for _ in range(c.samples):
        x, y, z = (tuple(int(v) for v in rng.integers(-1000, 1001, G.dim)) for _ in range(3))
        m = G.multiply
        fails["associativity"] += m(m(x, y), z) != m(x, m(y, z))
        fails["identity"] += m(x, e) != x or m(e, x) != x
        fails["inverse"] += m(x, G.inverse(x)) != e or m(G.inverse(x), x) != e
        comm = m(m(x, y), G.inverse(m(y, x)))
        fails["commutator_central"] += m(comm, z) != m(z, comm)
    run.csv("group_check.csv", ["check", "trials", "failures"],
            [(k, c.samples, v) for k, v in fails.items()])
    return not any(fails.values()), fails


def run_seq_check(run: Run) -> tuple[bool, dict]:
    """Nilpotency of A0(d) and intertwining T(A0(n)) = A(n) for random targets."""
    c = run.cfg
    rng = c.rng("poly_seq")
    deg = polyseq.nilpotency_degree(polyseq.a0_sequence(c.d), 4 * c.d + 4)
    rows = []
    ok = deg is not None
    targets = min(c.samples, 20)
    for t in range(targets):
        G, A = polyseq.random_target(rng, degree=int(rng.integers(1, 4)))
        T = polyseq.build_morphism(G, A)
        A0 = polyseq.a0_sequence(T.d)
        inter = all(T(A0(n)) == A(n) for n in range(-20, 21))
        dim = len(group.index_set(T.d))

        def draw():
            return group.element(T.d, [int(v) for v in rng.integers(-50, 51, dim)])

        pairs = [(draw(), draw()) for _ in range(c.samples)]
        rep = polyseq.verify_homomorphism(T, pairs)
        ok &= inter and rep.ok
        rows.append((t, G.dim1, G.dim2, A.degree, T.d, inter, rep.checked, rep.ok))
    run.csv("seq_check.csv", ["target", "dim1", "dim2", "degree", "source_d", "intertwines",
                              "pairs_checked", "homomorphism"], rows)
    return ok, {"nilpotency_degree": deg, "targets": targets}


def run_kernel_check(run: Run) -> tuple[bool, dict]:
    """Mean zero and size of each dyadic piece, telescoping identity, CZ bounds."""
    c = run.cfg
    K = kernels.kernel(c.kernel)
    dk = kernels.DyadicKernel(K)
    jmax = max(c.J)
    rng = c.rng("kernels")
    rows, ok = [], True
    for j in range(1, jmax + 1):
        piece = dk.piece(j)
        mean = piece.integral()
        size, deriv = piece.scaled_sup()
        t = rng.uniform(-2.0 ** (j + 3), 2.0 ** (j + 3), c.samples)
        tel = float(np.max(np.abs(dk.partial_sum(j, t) - dk.telescoped(j, t))))
        good = abs(mean) < 1e-10 and tel < 1e-12
        ok &= good
        rows.append((j, dk.c(j), mean, tel, size, deriv, good))
    rep = kernels.verify_cz(K)
    ok &= rep.passed
    run.csv("kernel_check.csv", ["j", "c_j", "integral", "telescoping_max_err",
                                 "scaled_sup", "scaled_sup_derivative", "pass"], rows)
    return ok, {"cz": asdict(rep)}


def run_norm_sweep(run: Run) -> tuple[bool, dict]:
    """Lower bounds for |H^R| over R; the ratio column tracks the plateau."""
    c = run.cfg
    rows = run.timed("norm_sweep", transform.norm_sweep, c.d, c.kernel, c.R, c.seed,
                     c.iterations, c.budget, c.method)
    transform.write_norm_sweep(rows, run.dir / "norm_sweep.csv")
    run.stamp("norm_sweep.csv")
    for R, est in rows:
        run.timings[f"R={R}"] = round(est.wall_time_ms / 1e3, 6)
    lbs = [est.lower_bound for _, est in rows]
    return True, {"lower_bounds": lbs}


def run_expsum_table(run: Run) -> tuple[bool, dict]:
    """max_a |S(a/q)| and |S~(a/q)| for q = 1..qmax."""
    c = run.cfg
    rows = run.timed("table", expsums.saq_decay_table, c.d, c.r, c.qmax, None, c.budget)
    expsums.write_decay_table(rows, run.dir / "expsum_table.csv")
    run.stamp("expsum_table.csv")
    ok = all(row.max_abs_S <= 1 + 1e-12 and row.max_abs_Stilde <= 1 + 1e-12 for row in rows)
    ok &= abs(rows[0].max_abs_S - 1) < 1e-15 if rows and rows[0].q == 1 else True
    return ok, {"rows": len(rows)}


def run_weyl_scan(run: Run) -> tuple[bool, dict]:
    """Normalised Weyl sums at zero, a major arc and a minor arc per coordinate."""
    c = run.cfg
    rows = run.timed("scan", expsums.minor_arc_scan, c.d, c.r, c.P, c.eps,
                     variant=c.variant, budget=c.budget)
    expsums.write_arc_scan(rows, run.dir / "weyl_scan.csv")
    run.stamp("weyl_scan.csv")
    minor = [row.relative for row in rows if row.theta_desc.startswith("minor")]
    return all(v < 0.5 for v in minor), {"max_minor_relative": max(minor, default=0.0)}


def run_osc_scan(run: Run) -> tuple[bool, dict]:
    """I(beta) along each coordinate axis for |beta| up to beta_max."""
    c = run.cfg
    n = len(group.index_set(c.d))
    mags = [float(v) for v in np.linspace(0.0, c.beta_max, 6)]
    base = expsums.osc_integral([0.0] * n, c.r, c.d, variant=c.variant).value
    rows, ok = [], True
    worst = 0.0
    for k in range(n):
        for b in mags:
            beta = [0.0] * n
            beta[k] = b
            res = expsums.osc_integral(beta, c.r, c.d, variant=c.variant)
            ratio = max(res.ratios, default=0.0)
            worst = max(worst, ratio)
            rel = abs(res.value) / abs(base)
            rows.append((k, b, res.value.real, res.value.imag, abs(res.value), rel,
                         res.order, ratio))
            ok &= ratio < 1e-2
            if b == c.beta_max and b >= 10:
                ok &= rel < 0.5
    run.csv("osc_scan.csv", ["axis", "magnitude", "re", "im", "abs", "relative_to_zero",
                             "order", "worst_cauchy_ratio"], rows)
    return ok, {"worst_cauchy_ratio": worst}


def run_ortho_demo(run: Run) -> tuple[bool, dict]:
    """Sum-norm growth, decay hypotheses and internal inequalities for a generator."""
    c = run.cfg
    gen = ortho.GENERATORS[c.generator]
    seed = int(c.rng("ortho").integers(2 ** 31))
    make = (lambda K: gen(K)) if c.generator == "radon" else (lambda K: gen(K, seed=seed))
    rows = run.timed("growth", ortho.sum_norm_growth, make, c.K)
    ortho.write_growth(rows, run.dir / "ortho_growth.csv")
    run.stamp("ortho_growth.csv")
    ineq = []
    ok = True
    for K in c.K:
        rep = ortho.check_internal_inequalities(make(K), mode="exact" if K <= 12 else "greedy")
        ineq.append((K, rep.worst_square, rep.worst_gamma_square, rep.worst_nu, rep.ok))
        ok &= rep.ok
    run.csv("ortho_inequalities.csv", ["K", "worst_square", "worst_gamma_square", "worst_nu",
                                       "pass"], ineq)
    hyp = ortho.check_decay_hypotheses(make(min(c.K)), 2, 2.0, 0.5, full=True)
    (run.dir / "ortho_hypotheses.json").write_text(hyp.to_json() + "\n")
    run.outputs.append("ortho_hypotheses.json")
    return ok, {"sum_norms": [row.sum_norm for row in rows], "hypotheses_hold": hyp.ok}


def run_compose_kernel(run: Run) -> tuple[bool, dict]:
    """apply_chain(delta_e, [H_j*, H_k]) against the closed-form composition kernel."""
    c = run.cfg
    rows, ok = [], True
    e = transform.SparseFunction.delta(c.d)
    for j in c.J:
        for k in c.J:
            chain = transform.OperatorChain(
                [transform.Factor("H_j*", j=j), transform.Factor("H_j", j=k)], c.kernel, d=c.d)
            got = transform.apply_chain(e, chain, c.budget)
            want = transform.exact_composition_kernel([j, k], c.d, "D", c.kernel, c.budget,
                                                      chain.dyadic)
            same = got.equals(want)
            ok &= same
            rows.append((j, k, len(want.values), same, got.max_abs_diff(want)))
    run.csv("compose_kernel.csv", ["j", "k", "support", "exact_equal", "max_abs_diff"], rows)
    return ok, {"pairs": len(rows)}


RUNNERS = {
    "group-check": run_group_check,
    "seq-check": run_seq_check,
    "kernel-check": run_kernel_check,
    "norm-sweep": run_norm_sweep,
    "expsum-table": run_expsum_table,
    "weyl-scan": run_weyl_scan,
    "osc-scan": run_osc_scan,
    "ortho-demo": run_ortho_demo,
    "compose-kernel": run_compose_kernel,
}

SCHEMAS = {
    "group-check": "group_check.csv: check, trials, failures",
    "seq-check": "seq_check.csv: target, dim1, dim2, degree, source_d, intertwines, "
                 "pairs_checked, homomorphism",
    "kernel-check": "kernel_check.csv: j, c_j, integral, telescoping_max_err, scaled_sup, "
                    "scaled_sup_derivative, pass",
    "norm-sweep": "norm_sweep.csv: R, lower_bound, ratio, iterations, support_size, method",
    "expsum-table": "expsum_table.csv: q, max_abs_S, max_abs_Stilde, argmax_a",
    "weyl-scan": "weyl_scan.csv: theta_desc, P, r, ratio, relative_to_zero",
    "osc-scan": "osc_scan.csv: axis, magnitude, re, im, abs, relative_to_zero, order, "
                "worst_cauchy_ratio",
    "ortho-demo": "ortho_growth.csv: K, sum_norm, worst_margin_line2, worst_margin_line3, "
                  "sum_of_norms, cotlar_stein; ortho_inequalities.csv: K, worst_square, "
                  "worst_gamma_square, worst_nu, pass; ortho_hypotheses.json",
    "compose-kernel": "compose_kernel.csv: j, k, support, exact_equal, max_abs_diff",
}


def run(cfg: ExperimentConfig) -> tuple[int, dict]:
    """Validate, dispatch and write the manifest.  Returns (exit code, summary)."""
    cfg.validate()
    r = Run(cfg)
    t0 = time.perf_counter()
    ok, summary = RUNNERS[cfg.experiment](r)
    r.timings["total"] = round(time.perf_counter() - t0, 6)
    r.manifest("PASS" if ok else "FAIL", summary)
    return (0 if ok else 1), summary


# --- argument parsing -------------------------------------------------------------------

def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nilradon", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        s = sub.add_parser(name, help=RUNNERS[name].__doc__.splitlines()[0],
                           description=f"{RUNNERS[name].__doc__}\n\nOutput: {SCHEMAS[name]}",
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        s.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
        s.add_argument("--d", type=int)
        s.add_argument("--r", type=int)
        s.add_argument("--eps", type=float)
        s.add_argument("--kappa", type=float)
        s.add_argument("--P", type=int)
        s.add_argument("--R", type=_ints, help="comma separated")
        s.add_argument("--J", type=_ints, help="comma separated")
        s.add_argument("--K", type=_ints, help="comma separated")
        s.add_argument("--kernel")
        s.add_argument("--generator")
        s.add_argument("--variant")
        s.add_argument("--seed", type=int)
        s.add_argument("--samples", type=int)
        s.add_argument("--qmax", type=int)
        s.add_argument("--beta-max", dest="beta_max", type=float)
        s.add_argument("--iterations", type=int)
        s.add_argument("--method")
        s.add_argument("--budget", type=int)
        s.add_argument("--out")
    return p


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    values = {}
    if ns.config:
        data = json.loads(Path(ns.config).read_text())
        unknown = set(data) - names
        if unknown:
            raise ConfigError([f"{k}: unknown field" for k in sorted(unknown)])
        values.update(data)
    for k in names:
        v = getattr(ns, k, None)
        if v is not None:
            values[k] = v
    values["experiment"] = ns.experiment
    return ExperimentConfig(**values)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        code, summary = run(cfg)
    except ConfigError as exc:
        for prob in exc.problems:
            print(f"config error: {prob}", file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(json.dumps({"error": "budget", "message": str(exc), "cost": exc.cost}),
              file=sys.stderr)
        return 2
    print(f"{cfg.experiment}: {'PASS' if code == 0 else 'FAIL'} "
          f"{json.dumps(summary, default=_jsonable, sort_keys=True)}")
    return code


if __name__ == "__main__":
    sys.exit(main())
