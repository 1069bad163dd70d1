"""Command-line front end.

Subcommands: check | certify | bounds | simulate | batch.  Reports are JSON
on stdout; trajectories go to CSV.  Exit codes:

    0   success / positive verdict
    2   negative scientific verdict (hypothesis failure, no certificate,
        blow-up, envelope violated)
    3   undetermined (sampling could neither prove nor refute)
    64  unusable configuration or arguments
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import checks as checks_mod
from . import rates as rates_mod
from .certify import (
    CertificateSearchConfig,
    find_certificate_linear,
    find_certificate_nonlinear,
    verify_certificate,
)
from .config import ConfigError, ExperimentConfig, load_config
from .model import Certificate
from .simulate import envelope_check, export_csv, level_set_descent, simulate_continuous, simulate_discrete

EXIT_OK = 0
EXIT_NEGATIVE = 2
EXIT_UNDETERMINED = 3
EXIT_CONFIG = 64


def _emit(doc: dict) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if getattr(args, "h", None) is not None or getattr(args, "horizon", None) is not None:
        sim = cfg.sim
        new_sim = dataclasses.replace(
            sim,
            h=args.h if args.h is not None else sim.h,
            horizon=args.horizon if args.horizon is not None else sim.horizon,
        )
        cfg = dataclasses.replace(cfg, sim=new_sim)
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def cmd_check(args) -> int:
    cfg = _load(args)
    report = checks_mod.check_model(cfg.system)
    delay_reports = {}
    for q, d in enumerate(cfg.delays):
        delay_reports[f"delay_{q}"] = checks_mod.check_delay_assumption(
            d, horizon=max(cfg.sim.horizon, 10.0)
        ).to_dict()
    verdict = report.verdict
    for rep in delay_reports.values():
        if rep["divergence(a5)"] == checks_mod.FAIL:
            verdict = checks_mod.FAIL
    _emit({"report": report.to_dict(), "delays": delay_reports, "verdict": verdict})
    if verdict == checks_mod.FAIL:
        return EXIT_NEGATIVE
    if verdict == checks_mod.UNDETERMINED:
        return EXIT_UNDETERMINED
    return EXIT_OK


def _obtain_certificate(cfg: ExperimentConfig) -> Certificate | None:
    system = cfg.system
    if cfg.analysis.v is not None:
        return verify_certificate(system, cfg.analysis.v)
    if system.f.is_linear and all(g.is_linear for g in system.delayed_terms):
        v = find_certificate_linear(
            system.f.to_matrix(),
            [g.to_matrix() for g in system.delayed_terms],
            system.kind,
        )
        if v is None:
            return None
        return verify_certificate(system, v, provenance="linear-solve")
    v = find_certificate_nonlinear(system, CertificateSearchConfig(seed=cfg.seed))
    if v is None:
        return None
    return verify_certificate(system, v, provenance="ray-search")


def cmd_certify(args) -> int:
    cfg = _load(args)
    cert = _obtain_certificate(cfg)
    if cert is None:
        _emit({
            "certificate": None,
            "note": "no certificate found; for nonlinear systems this is not a proof of infeasibility",
        })
        return EXIT_NEGATIVE
    _emit({"certificate": cert.to_dict()})
    return EXIT_OK if cert.valid else EXIT_NEGATIVE


def _delay_tau_sup(cfg: ExperimentConfig) -> float | None:
    if cfg.analysis.tau_sup is not None:
        return cfg.analysis.tau_sup
    sups = [d.tau_sup for d in cfg.delays]
    if any(s is None for s in sups):
        return None
    return max(sups)


def _delay_alpha(cfg: ExperimentConfig) -> float | None:
    if cfg.analysis.alpha is not None:
        return cfg.analysis.alpha
    alphas = [d.alpha_limit for d in cfg.delays]
    if any(a is None or a >= 1.0 for a in alphas):
        return None
    return max(alphas)


def _compute_bounds(cfg: ExperimentConfig, cert: Certificate) -> list[rates_mod.DecayBound]:
    system = cfg.system
    requested = list(cfg.analysis.bounds)
    tau_sup = _delay_tau_sup(cfg)
    alpha = _delay_alpha(cfg)
    if "auto" in requested:
        requested.remove("auto")
        if system.is_discrete:
            if alpha is not None and alpha > 0.0 and system.degree == 0.0:
                requested.append("xi")
        elif tau_sup is not None:
            requested.append("eta" if system.degree == 0.0 else "theta")
        elif alpha is not None:
            requested.append("xi" if system.degree == 0.0 else "beta")
    out = []
    for name in dict.fromkeys(requested):
        if name == "eta":
            if tau_sup is None:
                raise ConfigError("eta bound needs a bounded delay or analysis.tau_sup")
            out.append(rates_mod.eta_bound(system, cert.v, tau_sup))
        elif name == "theta":
            if tau_sup is None:
                raise ConfigError("theta bound needs a bounded delay or analysis.tau_sup")
            out.append(rates_mod.theta_bound(system, cert.v, tau_sup))
        elif name == "xi":
            if alpha is None:
                raise ConfigError("xi bound needs a proportional delay ratio or analysis.alpha")
            out.append(rates_mod.xi_bound(system, cert.v, alpha))
        elif name == "beta":
            if alpha is None:
                raise ConfigError("beta bound needs a proportional delay ratio or analysis.alpha")
            out.append(rates_mod.beta_bound(system, cert.v, alpha))
    return out


def cmd_bounds(args) -> int:
    cfg = _load(args)
    cert = _obtain_certificate(cfg)
    if cert is None or not cert.valid:
        _emit({
            "certificate": None if cert is None else cert.to_dict(),
            "bounds": [],
            "note": "decay bounds need a valid certificate",
        })
        return EXIT_NEGATIVE
    bounds = _compute_bounds(cfg, cert)
    _emit({
        "certificate": cert.to_dict(),
        "bounds": [b.to_dict() for b in bounds],
    })
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args)
    return _run_simulation(cfg, Path(args.out))


def _run_simulation(cfg: ExperimentConfig, out_path: Path) -> int:
    system = cfg.system
    if system.is_discrete:
        traj = simulate_discrete(
            system, list(cfg.delays), cfg.history_discrete(), int(cfg.sim.horizon)
        )
    else:
        traj = simulate_continuous(
            system, list(cfg.delays), cfg.history_continuous(), cfg.sim.h, cfg.sim.horizon
        )

    cert = None
    bounds = []
    try:
        cert = _obtain_certificate(cfg)
        if cert is not None and cert.valid:
            bounds = _compute_bounds(cfg, cert)
    except (ValueError, ConfigError):
        bounds = []
    bound = bounds[0] if bounds else None

    v = cfg.analysis.v if cfg.analysis.v is not None else (cert.v if cert else None)
    if v is not None:
        export_csv(traj, out_path, v=v, dilation=system.dilation, bound=bound)
    else:
        export_csv(traj, out_path)

    report: dict = {
        "csv": str(out_path),
        "samples": int(len(traj.times)),
        "final_time": float(traj.times[-1]),
        "diverged_at": traj.metadata.get("diverged_at"),
        "positivity_violations": len(traj.metadata.get("positivity_violations", [])),
    }
    status = EXIT_OK
    if traj.diverged:
        report["note"] = "state left the finite range; trajectory truncated"
        status = EXIT_NEGATIVE
    elif v is not None and bound is not None:
        env = envelope_check(traj, bound, v, system.dilation, cfg.analysis.settle_fraction)
        report["envelope"] = env.to_dict()
        report["bound"] = bound.to_dict()
        vals = traj.lyapunov_values(v, system.dilation)
        entries = level_set_descent(
            traj, v, system.dilation, cfg.analysis.gamma, float(vals[0]), m_max=200
        )
        report["level_set_entries"] = entries[:50]
        if not env.holds:
            status = EXIT_NEGATIVE
    _emit(report)
    return status


def cmd_batch(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    worst = EXIT_OK
    for path in args.configs:
        path = Path(path)
        try:
            cfg = load_config(path)
            status = _run_simulation(cfg, out_dir / (path.stem + ".csv"))
        except ConfigError as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            status = EXIT_CONFIG
        worst = max(worst, status)
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delaycert",
        description=(
            "Certify delay-independent stability of positive systems, compute "
            "guaranteed decay-rate bounds, and validate them by simulation."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, out_required=False):
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--h", type=float, default=None, help="override the step size")
        p.add_argument("--horizon", type=float, default=None, help="override the horizon")
        if out_required:
            p.add_argument("--out", required=True, help="output CSV path")

    add_common(sub.add_parser("check", help="verify the standing hypotheses"))
    add_common(sub.add_parser("certify", help="find or verify a stability certificate"))
    add_common(sub.add_parser("bounds", help="compute guaranteed decay-rate bounds"))
    add_common(sub.add_parser("simulate", help="integrate the delayed dynamics"), out_required=True)

    batch = sub.add_parser("batch", help="simulate several configs")
    batch.add_argument("configs", nargs="+", help="experiment configs (JSON)")
    batch.add_argument("--out", required=True, help="output directory for CSV files")
    return parser


_COMMANDS = {
    "check": cmd_check,
    "certify": cmd_certify,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "batch": cmd_batch,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
