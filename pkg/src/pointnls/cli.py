"""Command line entry point: ``pointnls run|sweep|validate|oracle``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from pointnls.config import ConfigError, is_sweep, load_run, load_toml, parse_run, parse_sweep
from pointnls.ground_state import exponents, ground_state, instability_rate
from pointnls.propagator import GaussianPacket
from pointnls.runner import EXIT_CONFIG, EXIT_IO, EXIT_OK, execute_run, execute_sweep


def _gaussian_oracle(amplitude: float, p: float) -> dict:
    g = GaussianPacket(amplitude=amplitude)
    mass, grad_sq = g.norms()
    energy = 0.5 * grad_sq - amplitude ** (p + 1) / (p + 1)
    out = {"mass": mass, "grad_sq": grad_sq, "energy": energy, "gap": 4 * grad_sq - 2 * amplitude ** (p + 1)}
    if p > 3:
        k = exponents(p).me_exponent
        out["me_product"] = mass**k * energy
        out["eta0"] = math.sqrt(mass) ** k * math.sqrt(grad_sq) / ground_state(p).eta_denominator
    return out


def _oracle(name: str, p: float, amplitude: float, t: float) -> dict:
    if name == "exponents":
        ex = exponents(p)
        return {"p": p, "sigma_c": ex.sigma_c, "q": ex.q, "q_tilde": ex.q_tilde}
    if name == "ground-state":
        gs = ground_state(p)
        return {
            "amplitude": gs.amplitude,
            "mass": gs.mass,
            "grad_norm": gs.grad_norm,
            "energy": gs.energy,
            "threshold": gs.threshold,
            "instability_rate": instability_rate(p),
        }
    if name == "gaussian":
        return _gaussian_oracle(amplitude, p)
    if name == "gaussian-drive":
        v = complex((1 + 4j * t) ** -0.5)
        return {"t": t, "re": v.real, "im": v.imag, "abs": abs(v)}
    raise ConfigError("oracle", f"unknown oracle {name!r}")


ORACLES = ("exponents", "ground-state", "gaussian", "gaussian-drive")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pointnls", description="Point-nonlinearity Schrodinger simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    def overrides(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("config", help="TOML configuration file")
        sp.add_argument("--dt", type=float, help="override solver.dt")
        sp.add_argument("--T", type=float, help="override solver.T")
        sp.add_argument("--out", help="output directory (default: $POINTNLS_OUT/<config name>)")

    run = sub.add_parser("run", help="solve one configuration and write artifacts")
    overrides(run)
    sweep = sub.add_parser("sweep", help="run a parameter sweep")
    overrides(sweep)
    sweep.add_argument("--threads", type=int, help="parallel rows (default: sweep.threads)")
    validate = sub.add_parser("validate", help="check a run or sweep configuration without running it")
    validate.add_argument("config")
    oracle = sub.add_parser("oracle", help="print closed-form reference values as JSON")
    oracle.add_argument("name", choices=ORACLES)
    oracle.add_argument("--p", type=float, default=5.0)
    oracle.add_argument("--amplitude", type=float, default=1.0)
    oracle.add_argument("--t", type=float, default=1.0)
    return parser


def _apply_sweep_overrides(raw: dict, args: argparse.Namespace) -> dict:
    solver = raw.setdefault("base", {}).setdefault("solver", {})
    if args.dt is not None:
        solver["dt"] = args.dt
    if args.T is not None:
        solver["T"] = args.T
    if args.out is not None:
        raw.setdefault("sweep", {})["dir"] = args.out
    return raw


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "oracle":
            print(json.dumps(_oracle(args.name, args.p, args.amplitude, args.t), indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "validate":
            raw = load_toml(args.config)
            kind = "sweep" if is_sweep(raw) else "run"
            if kind == "sweep":
                n = len(parse_sweep(raw).points())
                print(f"valid sweep configuration ({n} points)")
            else:
                cfg = replace(parse_run(raw), base_dir=str(Path(args.config).resolve().parent))
                cfg.build_datum()
                print("valid run configuration")
            return EXIT_OK
        name = Path(args.config).stem
        if args.command == "run":
            cfg = load_run(args.config).with_overrides(dt=args.dt, T=args.T, out=args.out)
            outcome = execute_run(cfg, name)
            run = outcome.metadata["run"]
            extra = f" t_detect={run['t_detect']}" if "t_detect" in run else ""
            print(f"{outcome.status.value}{extra} -> {outcome.out_dir}")
            return outcome.exit_code
        raw = _apply_sweep_overrides(load_toml(args.config), args)
        sweep = replace(parse_sweep(raw), base_dir=str(Path(args.config).resolve().parent))
        result = execute_sweep(sweep, name, threads=args.threads)
        print(f"{result.agreed}/{result.decided} decided rows agree -> {result.out_dir}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
