"""Command-line entry points for running experiments and rendering figures.

Subcommands:
    run              one closed-loop scenario
    sweep            one run per hyperparameter value (alpha-p or alpha-n)
    compare-inertia  fixed vs adaptive at a scaled plant inertia
    render           figures from telemetry CSVs

Exit codes: 0 success, 1 configuration/IO error, 2 divergence.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .harness import (ConfigError, EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK,
                      ScenarioConfig, compare_inertia, parse_config,
                      run_scenario, summarize, sweep, write_metrics_csv)
from .mission import MissionError


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH",
                        help="scenario config file (key = value)")
    parser.add_argument("--mode", choices=("fixed", "adaptive"))
    parser.add_argument("--alpha-p", type=float, metavar="F",
                        help="scale on every adaptive covariance P0")
    parser.add_argument("--alpha-n", type=float, metavar="F",
                        help="scale on every adaptive sigma")
    parser.add_argument("--inertia-scale", type=float, metavar="F",
                        help="factor on the plant inertia diagonal")
    parser.add_argument("--mission", metavar="PATH", help="mission file")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--t-max", type=float, metavar="F")
    parser.add_argument("--dt-sim", type=float, metavar="F")
    parser.add_argument("--decimation", type=int, metavar="N")
    parser.add_argument("--name", metavar="NAME",
                        help="base name for telemetry files")
    parser.add_argument("--figures", action="store_true",
                        help="render the standard figure set next to the CSVs")


def _resolve_config(args) -> ScenarioConfig:
    config = parse_config(args.config) if args.config else ScenarioConfig()
    overrides = {}
    for attr, key in (("mode", "mode"), ("alpha_p", "alpha_p"),
                      ("alpha_n", "alpha_n"), ("inertia_scale", "inertia_scale"),
                      ("mission", "mission"), ("out", "out"),
                      ("t_max", "t_max"), ("dt_sim", "dt_sim"),
                      ("decimation", "decimation"), ("name", "name")):
        value = getattr(args, attr)
        if value is not None:
            overrides[key] = value
    if overrides:
        config = replace(config, **overrides)
    config.validate()
    return config


def _render_run_figures(telemetry_paths, out_dir) -> None:
    from .plots import standard_figures
    standard_figures(telemetry_paths, out_dir)


def cmd_run(args) -> int:
    config = _resolve_config(args)
    metrics, path = run_scenario(config)
    write_metrics_csv(Path(config.out) / f"{config.base_name()}_metrics.csv",
                      [(config.base_name(), config, metrics)])
    print(summarize(config.base_name(), metrics))
    if args.figures:
        _render_run_figures([path], Path(config.out))
    return EXIT_DIVERGED if metrics.diverged else EXIT_OK


def cmd_sweep(args) -> int:
    config = _resolve_config(args)
    parameter = args.param.replace("-", "_")
    values = [float(v) for v in args.values.split(",") if v.strip()]
    results = sweep(config, parameter, values)
    code = EXIT_OK
    paths = []
    for value, metrics, path in results:
        print(summarize(f"{parameter}={value:g}", metrics))
        paths.append(path)
        if metrics.diverged:
            code = EXIT_DIVERGED
    if args.figures:
        from .plots import FigureSpec, render
        spec = FigureSpec(
            kind="sweep",
            inputs=[(str(p), f"{parameter}={v:g}")
                    for (v, _, p) in results],
            out=str(Path(config.out) / f"sweep_{parameter}.png"))
        render(spec)
    return code


def cmd_compare_inertia(args) -> int:
    config = _resolve_config(args)
    scale = config.inertia_scale
    results = compare_inertia(config, scale)
    code = EXIT_OK
    for mode, (metrics, path) in results.items():
        print(summarize(f"{mode}@J*{scale:g}", metrics))
        if metrics.diverged:
            code = EXIT_DIVERGED
    if args.figures:
        from .plots import FigureSpec, render
        spec = FigureSpec(
            kind="yaw_compare",
            inputs=[(str(results["fixed"][1]), "fixed gains"),
                    (str(results["adaptive"][1]), "adaptive")],
            out=str(Path(config.out) / f"yaw_compare_{scale:g}.png"))
        render(spec)
    return code


def cmd_render(args) -> int:
    from .plots import FigureSpec, load_figure_spec, render
    if args.spec:
        spec = load_figure_spec(args.spec)
    else:
        if not (args.kind and args.inputs and args.out_path):
            print("render needs --spec or all of --kind/--in/--out",
                  file=sys.stderr)
            return EXIT_CONFIG
        labels = args.labels.split(",") if args.labels else None
        inputs = []
        for i, path in enumerate(args.inputs):
            label = labels[i] if labels and i < len(labels) else Path(path).stem
            inputs.append((path, label))
        spec = FigureSpec(kind=args.kind, inputs=inputs, out=args.out_path)
    render(spec)
    print(f"wrote {spec.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcacpilot",
        description="Quadcopter simulation experiments with a "
                    "retrospective-cost adaptive autopilot")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    _add_scenario_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="hyperparameter sweep")
    _add_scenario_flags(p_sweep)
    p_sweep.add_argument("--param", choices=("alpha-p", "alpha-n"),
                         required=True)
    p_sweep.add_argument("--values", default="0.1,0.5,1,2",
                         help="comma-separated positive factors")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cmp = sub.add_parser("compare-inertia",
                           help="fixed vs adaptive at scaled plant inertia")
    _add_scenario_flags(p_cmp)
    p_cmp.set_defaults(func=cmd_compare_inertia)

    p_render = sub.add_parser("render", help="render figures from telemetry")
    p_render.add_argument("--spec", metavar="PATH",
                          help="JSON figure spec file")
    p_render.add_argument("--kind", choices=(
        "trajectory", "states_pos", "states_att", "gains_Pr", "gains_PIv",
        "gains_Pq", "gains_PIDw", "sweep", "yaw_compare"))
    p_render.add_argument("--in", dest="inputs", nargs="+", metavar="CSV")
    p_render.add_argument("--labels", metavar="A,B,...")
    p_render.add_argument("--out", dest="out_path", metavar="PATH")
    p_render.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, MissionError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
