"""Pipeline runner and command line interface.

Stages run in a fixed order: exponent estimates, Lyapunov norm checks,
periodic approximation, sup-over-orbit growth rates, spectral radii. Each
stage announces itself on the ``cocyclelab.stage`` logger.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .cocycles import LocallyConstantCocycle
from .config import ExperimentConfig, build, stage_seed
from .errors import ConfigError
from .exponents import estimate_exponents
from .lyapunov_norm import LyapunovNormContext, check_contraction, temperedness_diagnostic
from .measures import sample_point, with_seed
from .periodic import SCORE_HEADER, corollary_norm_rates, verify_main_theorem
from .spectral import branch_and_bound, exhaustive_bounds

log = logging.getLogger("cocyclelab")
stage_log = logging.getLogger("cocyclelab.stage")

STAGES = ("estimate", "lyapnorm", "periodic", "corollary", "jsr")
STAGE_IDS = {s: i + 1 for i, s in enumerate(STAGES)}
COMMAND_STAGES = {
    "run": STAGES,
    "estimate": ("estimate",),
    "lyapnorm": ("estimate", "lyapnorm"),
    "periodic": ("estimate", "periodic", "corollary"),
    "jsr": ("jsr",),
}


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it and ``__cause__`` holds the error."""

    def __init__(self, stage, exc):
        super().__init__(f"stage '{stage}' failed: {type(exc).__name__}: {exc}")
        self.stage = stage


@dataclass
class ResultBundle:
    exponents: dict = field(default_factory=dict)
    theorem_report: Optional[dict] = None
    norm_reports: Optional[list] = None
    corollary: Optional[dict] = None
    radius_bounds: Optional[dict] = None
    provenance: dict = field(default_factory=dict)

    def as_dict(self):
        return {"exponents": self.exponents, "theorem_report": self.theorem_report,
                "norm_reports": self.norm_reports, "corollary": self.corollary,
                "radius_bounds": self.radius_bounds, "provenance": self.provenance}


# --------------------------------------------------------------------------
# serialization


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x) + 0.0:.17g}"
    return str(x)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    return obj


def write_json(path: Path, obj):
    path.write_text(json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n")


def write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    path.write_text(buf.getvalue(), newline="")


# --------------------------------------------------------------------------
# pipeline


def _stage(name, fn, *args, **kw):
    stage_log.info("stage %s: start", name)
    try:
        out = fn(*args, **kw)
    except Exception as exc:
        stage_log.error("stage %s: failed", name)
        raise StageError(name, exc) from exc
    stage_log.info("stage %s: done", name)
    return out


def _estimate(cfg, gen, base, sampler, threads):
    return estimate_exponents(gen, base, sampler, cfg.horizon("n"), cfg.horizon("replicas"), threads)


def _lyapnorm(cfg, gen, base, sampler, lam, chi):
    opts = cfg.lyapunov
    ctx = LyapunovNormContext(lam, min(chi, lam), cfg.eps, cfg.horizon("truncation_N"),
                              float(opts.get("tail_tol", 1e-6)), float(opts.get("ell", 10.0)),
                              float(opts.get("rho", 0.1)))
    s = with_seed(sampler, stage_seed(cfg.seed, STAGE_IDS["lyapnorm"]))
    out = []
    for i in range(int(opts.get("points", 5))):
        x = sample_point(s, base, replica=i)
        c = check_contraction(ctx, gen, base, x, int(opts.get("steps", 20)))
        t = temperedness_diagnostic(ctx, gen, base, x, int(opts.get("temperedness_N", 100)))
        out.append({
            "point": i,
            "contraction": {"violations": c.violations, "max_excess": c.max_excess, "slack": c.slack,
                            "all_converged": bool(c.converged.all()),
                            "max_forward_ratio": float(c.forward_ratio.max()),
                            "max_backward_ratio": float(c.backward_ratio.max())},
            "temperedness": {"K_rho_truncated": t.K_rho_truncated, "forward_slope": t.forward_slope,
                             "backward_slope": t.backward_slope,
                             "max_M_eps": float(t.M_eps_values.max()),
                             "max_M_eps_prime": float(t.M_eps_prime_values.max())},
        })
    return out


def _periodic(cfg, gen, base, sampler, est, threads):
    opts = cfg.theorem
    return verify_main_theorem(gen, base, sampler, float(opts.get("eps_target", cfg.eps)),
                               cfg.horizon("k_max"), cfg.horizon("N_min"), estimates=est,
                               mode=opts.get("mode", "exhaustive"), budget=opts.get("budget"),
                               threads=threads, constructive=opts.get("constructive"))


def _corollary(cfg, gen, base, threads):
    opts = cfg.corollary
    return corollary_norm_rates(gen, base, int(opts.get("n_max", cfg.horizon("depth"))),
                                int(opts.get("k_max", cfg.horizon("k_max"))),
                                samples=int(opts.get("samples", 10_000)),
                                seed=stage_seed(cfg.seed, STAGE_IDS["corollary"]), threads=threads)


def _jsr(cfg, gen):
    if not isinstance(gen, LocallyConstantCocycle) or gen.memory != 0:
        return None
    ops = list(gen.table.values())
    opts = cfg.jsr
    ex = exhaustive_bounds(ops, cfg.horizon("depth"), norm=gen.norm)
    bb = branch_and_bound(ops, float(opts.get("target_gap", 1e-3)), int(opts.get("max_depth", 30)), norm=gen.norm)
    return {"exhaustive": ex.as_dict(), "branch_and_bound": bb.as_dict(),
            "level_norm_rates": ex.level_norm_rates, "level_radius_rates": ex.level_radius_rates}


def run(config: ExperimentConfig, stages=STAGES, threads=None, output_dir=None) -> ResultBundle:
    """Run the requested stages and write their artifacts to the output directory."""
    base, gen, sampler = build(config)
    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    bundle = ResultBundle(provenance={"config_hash": config.digest(), "seed": config.seed,
                                      "tool_version": __version__, "stages": list(stages)})
    est = None
    if "estimate" in stages:
        lam_e, chi_e = est = _stage("estimate", _estimate, config, gen, base, sampler, threads)
        bundle.exponents = {"lambda_hat": lam_e.as_dict(), "chi_hat": chi_e.as_dict()}
        write_csv(out / "exponents.csv", ["quantity", "value", "stderr", "n", "replicas"],
                  [["lambda_hat", lam_e.value, lam_e.stderr, lam_e.horizon_n, lam_e.replicas],
                   ["chi_hat", chi_e.value, chi_e.stderr, chi_e.horizon_n, chi_e.replicas]])
        write_csv(out / "replica_rates.csv", ["replica", "n", "a_n_over_n", "a_tilde_n_over_n"],
                  [[r, lam_e.horizon_n, a, -c] for r, (a, c) in enumerate(zip(lam_e.samples, chi_e.samples))])
    if "lyapnorm" in stages:
        bundle.norm_reports = _stage("lyapnorm", _lyapnorm, config, gen, base, sampler, est[0].value, est[1].value)
        write_json(out / "norm_checks.json", bundle.norm_reports)
    if "periodic" in stages:
        rep = _stage("periodic", _periodic, config, gen, base, sampler, est, threads)
        bundle.theorem_report = rep.as_dict()
        write_csv(out / "periodic_scores.csv", SCORE_HEADER, [s.row() for s in rep.scores])
    if "corollary" in stages:
        bundle.corollary = _stage("corollary", _corollary, config, gen, base, threads).as_dict()
    if "jsr" in stages:
        bundle.radius_bounds = _stage("jsr", _jsr, config, gen)
        if bundle.radius_bounds is not None:
            write_json(out / "jsr.json", bundle.radius_bounds)
    write_json(out / "bundle.json", bundle.as_dict())
    # the wall-clock stamp lives apart so every other file is reproducible byte for byte
    write_json(out / "provenance.json", {**bundle.provenance,
                                         "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds")})
    bundle.provenance["timestamp"] = None
    return bundle


# --------------------------------------------------------------------------
# command line


def _parser():
    p = argparse.ArgumentParser(prog="cocyclelab", description="Numerical experiments on linear cocycles.")
    sub = p.add_subparsers(dest="command", metavar="command")
    helps = {
        "run": "every stage",
        "estimate": "upper and lower exponent estimates",
        "periodic": "estimates, periodic-orbit search and sup-over-orbit growth rates",
        "jsr": "joint spectral radius bounds (memory-0 locally constant cocycles)",
        "lyapnorm": "estimates and Lyapunov norm checks",
        "validate": "parse and build the config without computing",
    }
    for name, text in helps.items():
        s = sub.add_parser(name, help=text, description=text)
        s.add_argument("config")
        s.add_argument("--seed", type=int, default=None, help="override the config seed")
        s.add_argument("--output-dir", default=None, help="override the config output_dir")
        s.add_argument("--threads", type=int, default=None, help="worker threads (default: $COCYCLE_LAB_THREADS or 1)")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def cli(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(name)s: %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config)
        if args.seed is not None:
            d = cfg.to_dict()
            d["seed"] = args.seed
            cfg = ExperimentConfig.from_dict(d)
        build(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.command == "validate":
        print("config ok", file=sys.stderr)
        return 0
    try:
        run(cfg, COMMAND_STAGES[args.command], args.threads, args.output_dir)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(cli())
