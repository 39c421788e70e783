"""Command-line front end: ``gqt synth|mask|complete|svd|metrics``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import nullcontext
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import media_io
from .algebra import gqt_rank, multi_gqt_rank, singular_value_profile, write_profile_csv
from .completion import SolverConfig, mqrtc, qrtc, write_trace_csv
from .errors import ConfigError, GqtError
from .metrics import evaluate
from .quat import parse_mu
from .synthetic import low_rank_tensor, multi_rank_tensor

SOLVER_FLAGS = {
    # flag dest -> SolverConfig field
    "mu": "mu", "lam": "lam", "lam1": "lam1", "lam2": "lam2", "beta": "beta",
    "alpha": "alpha", "rank": "rank", "epsilon": "epsilon", "max_outer": "max_outer",
    "max_inner": "max_inner", "inner_alpha0": "inner_alpha0", "seed": "seed",
}


@dataclass
class RunConfig:
    """Everything needed to repeat a completion run."""

    solver: SolverConfig = field(default_factory=SolverConfig)
    algo: str = "qrtc"
    tensor: str | None = None
    frames: str | None = None
    mask: str | None = None
    rho: float | None = None
    mask_seed: int | None = None
    truth: str | None = None
    out: str | None = None
    threads: int | None = None
    metrics: bool = True
    save_frames: bool = False
    plot: bool = False

    def validate(self):
        self.solver.validate()
        if self.algo not in ("qrtc", "mqrtc"):
            raise ConfigError(f"unknown algorithm {self.algo!r}")
        if (self.tensor is None) == (self.frames is None):
            raise ConfigError("give exactly one of --tensor or --frames")
        if self.mask is None and self.rho is None:
            raise ConfigError("give --mask or --rho")
        if self.out is None:
            raise ConfigError("--out is required")

    def to_dict(self):
        d = asdict(self)
        d["solver"] = self.solver.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        solver = SolverConfig.from_dict(d.pop("solver", {}))
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown run settings: {sorted(unknown)}")
        return cls(solver=solver, **d)


# ------------------------------------------------------------ parsing helpers

def _shape(text):
    parts = [int(p) for p in text.replace("x", ",").split(",") if p]
    if len(parts) != 3 or min(parts) < 1:
        raise argparse.ArgumentTypeError(f"shape must be n1,n2,n3 with positive entries, got {text!r}")
    return tuple(parts)


def _triple(text):
    parts = [float(p) for p in text.split(",") if p]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated values, got {text!r}")
    return tuple(parts)


def _read_rank_file(path):
    text = Path(path).read_text().replace(",", " ").split()
    return [int(t) for t in text]


def _threads(value):
    if value is not None:
        return int(value)
    env = os.environ.get("GQT_THREADS")
    return int(env) if env else None


def _thread_limit(n):
    if not n:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def _load_input(tensor=None, frames=None):
    if tensor is not None:
        return media_io.read_qt3(tensor)
    return media_io.encode_quaternion(media_io.load_frames(frames))


# ------------------------------------------------------------ commands

def cmd_synth(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mu = parse_mu(args.mu)
    if args.kind == "multi":
        M = multi_rank_tensor(args.shape, args.rank, seed=args.seed)
        ranks = multi_gqt_rank(M, mu)
        print(f"multi-gqt-rank: {ranks.r1},{ranks.r2},{ranks.r3}")
    else:
        if not 1 <= args.rank <= min(args.shape[:2]):
            raise ConfigError(f"rank must lie in [1, {min(args.shape[:2])}]")
        M = low_rank_tensor(args.shape, args.rank, mu, seed=args.seed)
        print(f"gqt-rank: {gqt_rank(M, mu)}")
    path = out / "truth.qt3"
    media_io.write_qt3(M, path)
    print(f"wrote {path}")
    return 0


def cmd_mask(args):
    if args.shape is not None:
        shape = args.shape
    elif args.tensor is not None or args.frames is not None:
        shape = _load_input(args.tensor, args.frames).shape[:3]
    else:
        raise ConfigError("give --shape, --tensor or --frames")
    mask = media_io.sample_mask(*shape, args.rho, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "mask.qm3"
    media_io.write_mask(mask, path, seed=args.seed)
    print(f"observed {mask.count} of {mask.observed.size} entries (rho={mask.ratio:.6g})")
    print(f"wrote {path}")
    return 0


def resolve_run_config(args):
    """Defaults, then the JSON file, then explicit command-line flags."""
    base = RunConfig().to_dict()
    if args.config:
        loaded = json.loads(Path(args.config).read_text())
        solver = {**base["solver"], **loaded.pop("solver", {})}
        base.update(loaded)
        base["solver"] = solver
    for dest, key in SOLVER_FLAGS.items():
        v = getattr(args, dest, None)
        if v is not None:
            base["solver"][key] = v
    if args.rank_file:
        base["solver"]["rank"] = _read_rank_file(args.rank_file)
    if isinstance(base["solver"]["mu"], str):
        mu = parse_mu(base["solver"]["mu"])
        base["solver"]["mu"] = [mu.a, mu.b, mu.c]
    for dest in ("algo", "tensor", "frames", "mask", "rho", "mask_seed", "truth", "out"):
        v = getattr(args, dest, None)
        if v is not None:
            base[dest] = v
    for dest in ("tensor", "frames", "mask", "truth"):
        if base[dest] is not None:
            base[dest] = str(Path(base[dest]).resolve())
    t = _threads(args.threads)
    if t is not None:
        base["threads"] = t
    for dest in ("metrics", "save_frames", "plot"):
        v = getattr(args, dest, None)
        if v is not None:
            base[dest] = v
    rc = RunConfig.from_dict(base)
    rc.validate()
    return rc


def cmd_complete(args):
    rc = resolve_run_config(args)
    out = Path(rc.out)
    out.mkdir(parents=True, exist_ok=True)
    data = _load_input(rc.tensor, rc.frames)
    n1, n2, n3 = data.shape[:3]
    if rc.mask is not None:
        mask = media_io.read_mask(rc.mask)
        if mask.shape != (n1, n2, n3):
            raise ConfigError(f"mask shape {mask.shape} does not match data {(n1, n2, n3)}")
    else:
        seed = rc.mask_seed if rc.mask_seed is not None else rc.solver.seed
        mask = media_io.sample_mask(n1, n2, n3, rc.rho, seed)
        media_io.write_mask(mask, out / "mask.qm3", seed=seed)
    (out / "config.json").write_text(json.dumps(rc.to_dict(), indent=2, sort_keys=True) + "\n")

    solve = mqrtc if rc.algo == "mqrtc" else qrtc
    with _thread_limit(rc.threads):
        res = solve(mask.apply(data), mask, rc.solver)
    media_io.write_qt3(res.C_hat, out / "recovered.qt3")
    write_trace_csv(res, out / "trace.csv")
    print(f"{rc.algo}: {res.iterations} outer iterations ({res.stop_reason}), "
          f"final objective {res.objective_trace[-1]:.6g}, {res.wall_time:.2f} s")

    if rc.metrics:
        truth = media_io.read_qt3(rc.truth) if rc.truth else data
        report = evaluate(truth, res.C_hat)
        line = report.to_json()
        (out / "metrics.json").write_text(line + "\n")
        print(report.table())
        print(line)
    if rc.save_frames:
        video, clamped = media_io.decode_quaternion(res.C_hat)
        media_io.save_frames(video, out / "frames")
        print(f"saved frames ({clamped} samples clamped to [0, 1])")
    if rc.plot:
        from .plotting import plot_objective_trace
        plot_objective_trace(res.trace, out / "trace.png")
    return 0


def cmd_svd(args):
    data = _load_input(args.tensor, args.frames)
    mu = parse_mu(args.mu)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with _thread_limit(_threads(args.threads)):
        write_profile_csv(data, mu, out / "singular_values.csv")
        profiles = {w: singular_value_profile(data, mu, w) for w in (1, 2, 3)}
    ranks = multi_gqt_rank(data, mu)
    print(f"multi-gqt-rank: {ranks.r1},{ranks.r2},{ranks.r3}")
    print(f"wrote {out / 'singular_values.csv'}")
    if not args.no_plot:
        from .plotting import plot_singular_values
        plot_singular_values(profiles, out / "singular_values.png")
        print(f"wrote {out / 'singular_values.png'}")
    return 0


def cmd_metrics(args):
    truth = media_io.read_qt3(args.truth)
    est = media_io.read_qt3(args.estimate)
    report = evaluate(truth, est, peakval=args.peak)
    print(report.table())
    print(report.to_json())
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n")
    return 0


# ------------------------------------------------------------ argument parser

def _add_input(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--tensor", help="input tensor (.qt3)")
    g.add_argument("--frames", help="directory of frame_NNNN.png files")


def build_parser():
    p = argparse.ArgumentParser(prog="gqt", description="Quaternion tensor completion tools.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a seeded low-rank pure quaternion tensor")
    s.add_argument("--shape", type=_shape, required=True)
    s.add_argument("--rank", type=int, required=True)
    s.add_argument("--mu", default="sym")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--kind", choices=("gqt", "multi"), default="gqt",
                   help="gqt: low gQt-rank; multi: low rank along every mode")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    m = sub.add_parser("mask", help="sample an observation mask")
    m.add_argument("--shape", type=_shape)
    _add_input(m)
    m.add_argument("--rho", type=float, required=True)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_mask)

    c = sub.add_parser("complete", help="run QRTC or MQRTC")
    c.add_argument("--config", help="JSON run configuration (command-line flags take precedence)")
    _add_input(c)
    c.add_argument("--mask")
    c.add_argument("--rho", type=float, help="sample a mask instead of reading --mask")
    c.add_argument("--mask-seed", dest="mask_seed", type=int)
    c.add_argument("--truth", help="ground truth (.qt3) for metrics; defaults to the input")
    c.add_argument("--algo", choices=("qrtc", "mqrtc"))
    c.add_argument("--mu")
    c.add_argument("--rank", type=int)
    c.add_argument("--rank-file", dest="rank_file")
    c.add_argument("--lambda", dest="lam", type=float)
    c.add_argument("--lambda1", dest="lam1", type=float)
    c.add_argument("--lambda2", dest="lam2", type=float)
    c.add_argument("--beta", type=float)
    c.add_argument("--alpha", type=_triple)
    c.add_argument("--epsilon", type=float)
    c.add_argument("--max-outer", dest="max_outer", type=int)
    c.add_argument("--max-inner", dest="max_inner", type=int)
    c.add_argument("--inner-alpha0", dest="inner_alpha0", type=float)
    c.add_argument("--seed", type=int)
    c.add_argument("--out")
    c.add_argument("--threads", type=int)
    c.add_argument("--no-metrics", dest="metrics", action="store_const", const=False)
    c.add_argument("--save-frames", dest="save_frames", action="store_const", const=True)
    c.add_argument("--plot", dest="plot", action="store_const", const=True)
    c.set_defaults(func=cmd_complete)

    v = sub.add_parser("svd", help="export transform-domain singular values for all modes")
    _add_input(v)
    v.add_argument("--mu", default="sym")
    v.add_argument("--out", required=True)
    v.add_argument("--threads", type=int)
    v.add_argument("--no-plot", action="store_true")
    v.set_defaults(func=cmd_svd)

    q = sub.add_parser("metrics", help="compare two tensors")
    q.add_argument("--truth", required=True)
    q.add_argument("--estimate", required=True)
    q.add_argument("--peak", type=float, default=255.0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_metrics)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "svd" and args.tensor is None and args.frames is None:
        parser.error("svd needs --tensor or --frames")
    try:
        return args.func(args)
    except (GqtError, OSError, ValueError) as exc:
        print(f"gqt {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
