"""Command line entry points.

    poiseuille-lc run      --config FILE [--key value ...]
    poiseuille-lc sweep    --eps 0.2,0.1,0.05 [--config FILE] [--key value ...]
    poiseuille-lc refine   [--levels 3] [--config FILE] [--key value ...]
    poiseuille-lc validate (--preset NAME | --config FILE)
    poiseuille-lc presets

Every config key doubles as a flag (underscores become dashes) and flags
override the file.  Exit codes: 0 for a clean run matching expectation, 2 for
a blowup detected as expected, 1 for errors or an outcome contradicting the
preset's expectation.
"""

from __future__ import annotations

import argparse
import sys

from . import harness, material as material_mod
from .harness import ConfigError, parse_config
from .material import validate


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="config file (key = value lines)")
    for key in harness._KEYS:
        parser.add_argument(f"--{key.replace('_', '-')}", dest=f"cfg_{key}",
                            metavar="VALUE", help=argparse.SUPPRESS)


def _config_inputs(args) -> tuple[str, dict[str, str]]:
    text = ""
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    overrides = {key: getattr(args, f"cfg_{key}")
                 for key in harness._KEYS if getattr(args, f"cfg_{key}", None) is not None}
    return text, overrides


def _resolve(args) -> harness.RunConfig:
    text, overrides = _config_inputs(args)
    return parse_config(text, overrides=overrides)


def _cmd_run(args) -> int:
    config = _resolve(args)
    scenario = harness.run_scenario(config)
    result = scenario.result
    b = result.blowup
    print(f"preset={config.preset or 'custom'} nx={config.grid.nx} "
          f"epsilon={config.spec.epsilon:g} amplitude={config.spec.amplitude:g}")
    if b.detected:
        print(f"blowup detected: trigger={b.trigger} t0={b.t0:.6g} "
              f"(bound {b.t_bound:.6g}) sup|S| x{result.records[-1].sup_abs_S / result.records[0].sup_abs_S:.2f}")
    else:
        print(f"completed to t={result.t_final:.6g} without a trigger")
    print(f"sup|R| {b.max_sup_R:.6g} (cap {b.r_cap:.6g}, "
          f"{'within' if b.r_within_cap else 'EXCEEDED'})")
    print(f"artifacts in {config.output_dir}/")
    return scenario.exit_code


def _cmd_sweep(args) -> int:
    config = _resolve(args)
    eps_list = [float(tok) for tok in args.eps.split(",")]
    sweep = harness.epsilon_sweep(config, eps_list)
    for i, eps in enumerate(sweep.epsilons):
        print(f"epsilon={eps:g}  E0={sweep.E0[i]:.6g}  max|J|={sweep.max_sup_J[i]:.6g}  "
              f"detected={str(sweep.detected[i]).lower()}")
    print(f"log-log slopes: E0 ~ eps^{sweep.slope_E0:.3f}, max|J| ~ eps^{sweep.slope_J:.3f}")
    print(f"artifacts in {config.output_dir}/")
    return 0


def _cmd_refine(args) -> int:
    config = _resolve(args)
    study = harness.refinement_study(config, levels=args.levels)
    for i, nx in enumerate(study.nx_levels):
        line = f"nx={nx}"
        if i >= 1:
            line += (f"  |dtheta|={study.diff_theta[i - 1]:.3e}"
                     f"  |du|={study.diff_u[i - 1]:.3e}")
        if i >= 2:
            line += (f"  order(theta)={study.order_theta[i - 2]:.3f}"
                     f"  order(u)={study.order_u[i - 2]:.3f}")
        print(line)
    print(f"energy budget residuals: "
          + ", ".join(f"{r:.3e}" for r in study.budget_residual))
    print(f"artifacts in {config.output_dir}/")
    return 0


def _cmd_validate(args) -> int:
    # material-only parse: full resolution derives defaults from the coefficient
    # bounds, which refuse exactly the materials this report should describe
    text, overrides = _config_inputs(args)
    report = validate(harness.parse_material(text, overrides=overrides))
    print(report)
    return 0 if report.ok else 1


def _cmd_presets(args) -> int:
    for name in sorted(material_mod.PRESETS):
        pre = material_mod.preset(name)
        print(f"{name:15s} expects_blowup={str(pre.expects_blowup).lower():5s} {pre.description}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="poiseuille-lc",
                                     description="shear-flow director dynamics lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write its artifacts")
    _add_config_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a decreasing-epsilon family")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--eps", required=True,
                         metavar="E1,E2,...", help="comma-separated decreasing epsilons")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_refine = sub.add_parser("refine", help="grid convergence on smooth data")
    _add_config_flags(p_refine)
    p_refine.add_argument("--levels", type=int, default=3, help="nested grid count")
    p_refine.set_defaults(func=_cmd_refine)

    p_val = sub.add_parser("validate", help="check material coefficient relations")
    _add_config_flags(p_val)
    p_val.set_defaults(func=_cmd_validate)

    p_presets = sub.add_parser("presets", help="list material presets")
    p_presets.set_defaults(func=_cmd_presets)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
