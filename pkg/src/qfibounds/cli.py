"""Command-line interface.

Exit codes: 0 success, 1 invariant failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .operators import ModelSpec, build_tfim
from .gibbs import prepared_gibbs
from .qfi import bounds_chain, check_bounds_report, uncertainty_report
from .fluctuation import autocorrelation_spectrum, dissipation_spectrum
from .sld import TimeKernelSpec, kernel_g_integral, lyapunov_residual, sld_matrix
from .locality import DressSpec, commutator_decay_profile, local_approximation
from .harness import (
    ConfigError,
    SweepConfig,
    config_from_dict,
    emit_report,
    load_config,
    run_sweep,
    selftest,
    spectrum_csv,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps-deg", type=float, default=None,
                   help="degeneracy tolerance (default: 1e-8 x spectral range)")
    p.add_argument("--out", type=Path, default=Path("out"))


def _add_model(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-sites", type=int, default=8)
    p.add_argument("--gamma", type=float, default=0.35 * math.pi)
    p.add_argument("--theta", type=float, default=0.0)


def _model(args) -> ModelSpec:
    return ModelSpec(args.n_sites, args.gamma, args.theta)


def _sweep_config(args, axis: str) -> SweepConfig:
    if args.config is not None:
        cfg = load_config(args.config)
        if cfg.sweep_axis != axis:
            raise ConfigError(
                f"config sweep_axis={cfg.sweep_axis!r} but subcommand wants {axis!r}"
            )
        overrides = {}
        if args.eps_deg is not None:
            overrides["eps_deg"] = args.eps_deg
        if args.out != Path("out"):
            overrides["outputs"] = str(args.out)
        if overrides:
            import dataclasses

            cfg = dataclasses.replace(cfg, **overrides)
        return cfg
    raw = {
        "model": {"n_sites": args.n_sites, "gamma": args.gamma, "theta": args.theta},
        "sweep_axis": axis,
        "grid": {
            "start": args.start,
            "stop": args.stop,
            "points": args.points,
            "spacing": args.spacing,
        },
        "eps_deg": args.eps_deg,
        "outputs": str(args.out),
        "seed": args.seed,
    }
    if axis == "gamma":
        raw["fixed"] = {"beta": args.beta}
    return config_from_dict(raw)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qfibounds",
        description="QFI bounds, spectra, SLD and locality diagnostics for "
        "Gibbs states of finite spin chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep-temperature", help="bounds chain vs temperature")
    p.add_argument("--config", type=Path, default=None, help="YAML sweep config")
    _add_model(p)
    p.add_argument("--start", type=float, default=0.05)
    p.add_argument("--stop", type=float, default=50.0)
    p.add_argument("--points", type=int, default=40)
    p.add_argument("--spacing", choices=("linear", "log"), default="log")
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("sweep-gamma", help="bounds chain vs field angle gamma")
    p.add_argument("--config", type=Path, default=None)
    _add_model(p)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--start", type=float, default=0.02)
    p.add_argument("--stop", type=float, default=math.pi / 2 - 0.02)
    p.add_argument("--points", type=int, default=40)
    p.add_argument("--spacing", choices=("linear", "log"), default="linear")
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("bounds", help="single bounds-chain evaluation")
    _add_model(p)
    p.add_argument("--beta", type=float, required=True)
    _add_common(p)

    p = sub.add_parser("spectrum", help="line spectrum as CSV")
    _add_model(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--kind", choices=("autocorrelation", "dissipation"),
                   default="autocorrelation")
    _add_common(p)

    p = sub.add_parser("sld-check", help="SLD diagnostics for one model")
    _add_model(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--horizon-betas", type=float, default=12.0,
                   help="time horizon in units of beta")
    p.add_argument("--panels", type=int, default=2048)
    p.add_argument("--fd-delta", type=float, default=1e-4)
    _add_common(p)

    p = sub.add_parser("locality", help="commutator-decay and local-approximation run")
    _add_model(p)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=None, help="default pi/beta")
    p.add_argument("--probe", choices=("X", "Y", "Z"), default="Z")
    _add_common(p)

    p = sub.add_parser("selftest", help="fixture and invariant suite")
    _add_common(p)

    args = parser.parse_args(argv)

    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 1


def _prepared(args):
    model = _model(args)
    H, O = build_tfim(model)
    return model, O, prepared_gibbs(H, O, args.beta, args.eps_deg)


def _dispatch(args) -> int:
    cmd = args.command

    if cmd in ("sweep-temperature", "sweep-gamma"):
        axis = "temperature" if cmd == "sweep-temperature" else "gamma"
        cfg = _sweep_config(args, axis)
        rows = run_sweep(cfg, workers=getattr(args, "workers", 1))
        paths = emit_report(rows, cfg)
        print(json.dumps(paths))
        return 0

    if cmd == "bounds":
        _, O, ens = _prepared(args)
        report = bounds_chain(ens, O)
        check_bounds_report(report)
        out = report.to_dict()
        out["uncertainty"] = uncertainty_report(report)
        print(json.dumps(out, indent=2, sort_keys=True))
        return 0

    if cmd == "spectrum":
        _, O, ens = _prepared(args)
        spec = (
            autocorrelation_spectrum(ens, O)
            if args.kind == "autocorrelation"
            else dissipation_spectrum(ens, O)
        )
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / f"spectrum_{args.kind}.csv"
        spectrum_csv(spec, path)
        print(json.dumps({"csv": str(path), "lines": len(spec)}))
        return 0

    if cmd == "sld-check":
        model, O, ens = _prepared(args)
        res = sld_matrix(ens, O)
        tks = TimeKernelSpec(args.beta, args.horizon_betas * args.beta, args.panels)
        from .sld import sld_time_domain

        L_time = sld_time_domain(ens, O, tks)
        l_norm = float(np.max(np.abs(res.L))) or 1.0
        summary = {
            "trace_rho_L": res.trace_rho_L,
            "trace_rho_L2": res.trace_rho_L2,
            "lyapunov_residual": lyapunov_residual(
                ens, res.L, model, args.fd_delta, args.eps_deg
            ),
            "time_domain_max_deviation": float(np.max(np.abs(L_time - res.L))),
            "time_domain_rel_deviation": float(np.max(np.abs(L_time - res.L))) / l_norm,
            "kernel_integral": kernel_g_integral(args.beta),
            "kernel_integral_expected": -args.beta,
        }
        print(json.dumps(summary, indent=2, sort_keys=True))
        return 0

    if cmd == "locality":
        from .operators import PauliString, pauli_string_matrix
        from .spectral import DegeneracyPolicy, eigendecompose

        model = _model(args)
        mu = args.mu if args.mu is not None else math.pi / args.beta
        H, _ = build_tfim(model)
        eigs = eigendecompose(H, DegeneracyPolicy(args.eps_deg))
        a_loc = pauli_string_matrix(PauliString({0: "X"}), model.n_sites)
        profile = commutator_decay_profile(
            eigs, a_loc, DressSpec(mu=mu), probe_kind=args.probe
        )
        args.out.mkdir(parents=True, exist_ok=True)
        csv_path = args.out / "locality_profile.csv"
        lines = ["r,norm"] + [
            f"{int(r)},{n:.12g}"
            for r, n in zip(profile.distances, profile.commutator_norms)
        ]
        csv_path.write_text("\n".join(lines) + "\n")
        fit_path = args.out / "locality_fit.json"
        fit_path.write_text(
            json.dumps(
                {
                    "lambda": profile.fitted_rate,
                    "r2": profile.fit_r2,
                    "mu": mu,
                    "model": {
                        "n_sites": model.n_sites,
                        "gamma": model.gamma,
                        "theta": model.theta,
                        "beta": args.beta,
                    },
                },
                indent=2,
                sort_keys=True,
            )
            + "\n"
        )
        print(json.dumps({"csv": str(csv_path), "fit": str(fit_path)}))
        return 0

    if cmd == "selftest":
        checks = selftest(args.eps_deg)
        failed = 0
        for name, ok, detail in checks:
            status = "PASS" if ok else "FAIL"
            suffix = f"  ({detail})" if detail and not ok else ""
            print(f"{status} {name}{suffix}")
            failed += not ok
        print(f"{len(checks) - failed}/{len(checks)} checks passed")
        return 0 if failed == 0 else 1

    raise ConfigError(f"unknown command {cmd!r}")


if __name__ == "__main__":
    sys.exit(main())
