"""Experiment runner: one-pass progressive evaluation with optional
stepsize sweep, synthetic conditioning studies, eigenvalue-recovery
tracking and CSV emission.

Exit codes: 0 success, 2 bad configuration, 3 data problems.
"""

import argparse
import concurrent.futures
import gzip
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import AdaGradLearner, DiagPreconditioner, OgdLearner
from .data_io import LibsvmParseError, SyntheticSpec, gen_synthetic, iter_libsvm, scan_dimension
from .losses import square_loss
from .sketch_oja import OjaSketch
from .son import ETA_CONVEX, ETA_CURVATURE, SonConfig, make_learner
from .sparse import SparseFdSon, SparseOjaSon

SWEEP_EXPONENTS = range(-3, 7)  # stepsizes 2^-3 .. 2^6


@dataclass
class RunConfig:
    algo: str  # son-oja | son-fd | son-full | adagrad | ogd
    m: int = 0
    alpha: float = 1.0
    C: float = 1.0
    eta_mode: str = ETA_CURVATURE
    stepsize: float = 1.0  # eta for first-order baselines; 1/alpha in sweeps
    diag_precondition: bool = False
    impl: str = "sparse"  # sparse | dense (sketched learners only)
    seed: int = 0
    checkpoint_every: int = 100


@dataclass
class RunReport:
    final_error: float
    cumulative_loss: float
    rounds: int
    wall_time: float
    config: dict
    checkpoints: list = field(default_factory=list)  # (round, prog_error, cum_loss)
    eig_trace: list | None = None


class DataSource:
    """A restartable stream of examples with a known dimension."""

    def __init__(self, dim, factory):
        self.dim = dim
        self._factory = factory

    def __iter__(self):
        return iter(self._factory())


def synthetic_source(spec):
    return DataSource(spec.d, lambda: gen_synthetic(spec))


def file_source(path, dim=None):
    def open_lines():
        if str(path).endswith(".gz"):
            return gzip.open(path, "rt")
        return open(path, "rt")

    if dim is None:
        with open_lines() as fh:
            dim = scan_dimension(fh)

    def factory():
        with open_lines() as fh:
            yield from iter_libsvm(fh, dim)

    return DataSource(dim, factory)


def build_learner(config, dim):
    loss = square_loss(config.C)
    algo = config.algo
    if algo == "ogd":
        inner = OgdLearner(dim, config.stepsize, loss)
    elif algo == "adagrad":
        inner = AdaGradLearner(dim, config.stepsize, loss)
    elif algo in ("son-oja", "son-fd", "son-full"):
        sketcher = {"son-oja": "oja", "son-fd": "epoch-fd", "son-full": "full"}[algo]
        son_cfg = SonConfig(
            C=config.C,
            alpha=config.alpha,
            m=config.m,
            sketcher=sketcher,
            eta_mode=config.eta_mode,
            loss=loss,
            seed=config.seed,
        )
        if algo == "son-oja" and config.impl == "sparse":
            inner = SparseOjaSon(son_cfg, dim)
        elif algo == "son-fd" and config.impl == "sparse" and config.m >= 1:
            inner = SparseFdSon(son_cfg, dim)
        else:
            inner = make_learner(son_cfg, dim)
    else:
        raise ValueError(f"unknown algorithm {algo!r}")
    if config.diag_precondition:
        return DiagPreconditioner(inner, dim, loss)
    return inner


def run_experiment(config, source):
    """One online pass; predictions never see an example before its round."""
    learner = build_learner(config, source.dim)
    mistakes = 0
    cum_loss = 0.0
    rounds = 0
    checkpoints = []
    started = time.perf_counter()
    for ex in source:
        pred = learner.predict(ex.features)
        label = ex.label
        cum_loss += learner.update(ex.features, label, pred)
        rounds += 1
        if (1.0 if pred >= 0 else -1.0) != label:
            mistakes += 1
        if config.checkpoint_every and rounds % config.checkpoint_every == 0:
            checkpoints.append((rounds, mistakes / rounds, cum_loss))
    if rounds == 0:
        raise ValueError("empty data source")
    return RunReport(
        final_error=mistakes / rounds,
        cumulative_loss=cum_loss,
        rounds=rounds,
        wall_time=time.perf_counter() - started,
        config=vars(config).copy(),
        checkpoints=checkpoints,
    )


def sweep_experiment(config, source, exponents=SWEEP_EXPONENTS, max_workers=4):
    """Run every stepsize 2^j and keep the best final progressive error.

    The swept knob is the baseline stepsize, which doubles as 1/alpha for
    the sketched Newton learners.  Returns (best_report, all_reports).
    """
    configs = []
    for j in exponents:
        step = 2.0**j
        cfg = RunConfig(**vars(config))
        cfg.stepsize = step
        if cfg.algo.startswith("son"):
            cfg.alpha = 1.0 / step
        configs.append(cfg)
    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
        reports = list(pool.map(lambda c: run_experiment(c, source), configs))
    best = min(reports, key=lambda r: r.final_error)
    return best, reports


def eigen_recovery_track(source, m, alpha=1.0, checkpoints=(), rng_examples=None):
    """Track how well the streaming sketch recovers top covariance eigenvalues.

    Feeds raw examples to an Oja sketch and, at each checkpoint round,
    compares its eigenvalue estimates with the top-m eigenvalues of the
    empirical second-moment matrix seen so far.  Returns a list of
    ``(round, max_relative_error)``.
    """
    dim = source.dim
    sketch = OjaSketch(alpha, m, dim)
    second_moment = np.zeros((dim, dim))
    marks = sorted(set(checkpoints))
    trace = []
    t = 0
    for ex in source:
        x = ex.features
        xd = x.to_dense()
        second_moment += np.outer(xd, xd)
        sketch.update(x)
        t += 1
        if marks and t == marks[0]:
            marks.pop(0)
            true_vals = np.linalg.eigvalsh(second_moment / t)[::-1][:m]
            est = np.sort(sketch.eigvals)[::-1]
            rel = np.abs(est - true_vals) / np.maximum(np.abs(true_vals), 1e-12)
            trace.append((t, float(rel.max())))
        if not marks:
            break
    return trace


def write_csv(path, report):
    with open(path, "w") as fh:
        fh.write("round,progressive_error,cumulative_loss\n")
        for rounds, err, loss in report.checkpoints:
            fh.write(f"{rounds},{err:.6f},{loss:.6f}\n")


def write_eig_csv(path, trace):
    with open(path, "w") as fh:
        fh.write("round,max_rel_err\n")
        for rounds, err in trace:
            fh.write(f"{rounds},{err:.6f}\n")


def _parse_args(argv):
    p = argparse.ArgumentParser(prog="sonsketch", description=__doc__)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="svmlight/libsvm file (optionally .gz)")
    src.add_argument("--synthetic", metavar="T,d,kappa", help="generate an ill-conditioned stream")
    p.add_argument(
        "--algo",
        required=True,
        choices=["son-oja", "son-fd", "son-full", "adagrad", "ogd"],
    )
    p.add_argument("--sketch-size", type=int, default=0, dest="m")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--eta-mode", choices=[ETA_CONVEX, ETA_CURVATURE], default=ETA_CURVATURE)
    p.add_argument("--stepsize", type=float, default=1.0, help="baseline stepsize eta")
    p.add_argument("--diag-precondition", action="store_true")
    p.add_argument("--impl", choices=["sparse", "dense"], default="sparse")
    p.add_argument("--sweep", action="store_true", help="try stepsizes 2^-3..2^6, report best")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=None, help="override inferred feature dimension")
    p.add_argument("--out", help="CSV path for per-checkpoint progress")
    p.add_argument("--track-eigs", action="store_true")
    p.add_argument("--checkpoint-every", type=int, default=100)
    return p.parse_args(argv)


def main(argv=None):
    try:
        args = _parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        if args.synthetic:
            parts = args.synthetic.split(",")
            if len(parts) != 3:
                raise ValueError("--synthetic expects T,d,kappa")
            spec = SyntheticSpec(int(parts[0]), int(parts[1]), float(parts[2]), seed=args.seed)
            source = synthetic_source(spec)
        else:
            source = file_source(args.data, args.dim)
    except (OSError, ValueError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 3 if isinstance(exc, OSError) or args.data else 2
    try:
        config = RunConfig(
            algo=args.algo,
            m=args.m,
            alpha=args.alpha,
            C=args.C,
            eta_mode=args.eta_mode,
            stepsize=args.stepsize,
            diag_precondition=args.diag_precondition,
            impl=args.impl,
            seed=args.seed,
            checkpoint_every=args.checkpoint_every,
        )
        if args.sweep:
            report, _ = sweep_experiment(config, source)
        else:
            report = run_experiment(config, source)
        if args.out:
            write_csv(args.out, report)
        if args.track_eigs:
            marks = range(args.checkpoint_every, report.rounds + 1, args.checkpoint_every)
            trace = eigen_recovery_track(source, max(args.m, 1), args.alpha, marks)
            report.eig_trace = trace
            if args.out:
                write_eig_csv(f"{args.out.rsplit('.', 1)[0]}_eigs.csv", trace)
    except (LibsvmParseError, OSError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    print(
        f"algo={report.config['algo']} rounds={report.rounds} "
        f"final_error={report.final_error:.6f} "
        f"cumulative_loss={report.cumulative_loss:.6f} "
        f"wall_time={report.wall_time:.3f}s"
    )
    return 0


from .data_io import LibsvmParseError as LibsvmParseErrorBase  # noqa: E402


if __name__ == "__main__":
    sys.exit(main())
