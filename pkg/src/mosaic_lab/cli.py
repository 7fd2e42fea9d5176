"""Command line entry points.

Subcommands: ``simulate`` dumps one window realization as JSON lines,
``blaschke`` solves the reference body for a section, ``deviation``
compares two stored bodies, and ``experiment`` runs a named scenario and
writes its table, exiting nonzero when any encoded assertion fails.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .arrangement import build_face_complex
from .experiments import SCENARIOS, ExperimentConfig, default_config, \
    render_plot, run_scenario
from .grassmann import Subspace
from .measures import SphericalMeasure
from .minkowski import blaschke_body, tail_rate_coefficient
from .polytope import Polytope
from .process import ProcessSpec, sample_hyperplanes, zero_cell


def _load_config(path: str | None, scenario: str = "theorem1",
                 seed: int | None = None) -> ExperimentConfig:
    if path is None:
        config = default_config(scenario)
    else:
        with open(path) as fh:
            data = json.load(fh)
        base = default_config(scenario).to_dict()
        base.update(data)
        config = ExperimentConfig.from_dict(base)
    if seed is not None:
        config = config.replace(seed=seed)
    return config


def _out_stream(out_dir: str | None, filename: str):
    if out_dir is None:
        return sys.stdout
    os.makedirs(out_dir, exist_ok=True)
    return open(os.path.join(out_dir, filename), "w")


def _cmd_simulate(args) -> int:
    config = _load_config(args.config, seed=args.seed)
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence(config.seed)))
    spec = config.process
    if args.zero_cell:
        cell = zero_cell(spec, rng)
        stream = _out_stream(args.out, "zero_cell.json")
        stream.write(cell.to_json() + "\n")
    else:
        radius = config.window * np.sqrt(spec.dim)
        planes = sample_hyperplanes(spec, radius, rng)
        complex_ = build_face_complex(planes, config.window)
        stream = _out_stream(args.out, "faces.jsonl")
        for face, interior, idx in zip(complex_.faces, complex_.interior,
                                       complex_.plane_of):
            plane = complex_.planes[idx]
            base = plane.offset * plane.normal
            ambient = base + face.carrier.embed(face.verts)
            stream.write(json.dumps({
                "plane": int(idx),
                "interior": bool(interior),
                "area": face.volume(),
                "vertices": [[float(c) for c in v] for v in ambient],
            }) + "\n")
    if stream is not sys.stdout:
        stream.close()
    return 0


def _cmd_blaschke(args) -> int:
    config = _load_config(args.config, seed=args.seed)
    body = blaschke_body(config.process, config.subspace)
    payload = {
        "body": json.loads(body.to_json()),
        "volume": body.volume(),
        "tau": tail_rate_coefficient(body),
        "subspace": json.loads(config.subspace.to_json()),
    }
    stream = _out_stream(args.out, "blaschke.json")
    stream.write(json.dumps(payload, indent=1) + "\n")
    if stream is not sys.stdout:
        stream.close()
    return 0


def _cmd_deviation(args) -> int:
    from .shape import deviation_cross_space

    with open(args.body) as fh:
        body = Polytope.from_json(fh.read())
    with open(args.reference) as fh:
        reference = Polytope.from_json(fh.read())
    result = deviation_cross_space(body, reference)
    stream = _out_stream(args.out, "deviation.json")
    stream.write(json.dumps(result.to_json_dict(), indent=1) + "\n")
    if stream is not sys.stdout:
        stream.close()
    return 0


def _cmd_experiment(args) -> int:
    config = _load_config(args.config, scenario=args.scenario,
                          seed=args.seed)
    table = run_scenario(args.scenario, config)
    out_dir = args.out or "results"
    paths = table.write(out_dir, fmt=args.format)
    if args.plots:
        plot_path = os.path.join(out_dir, table.name + ".svg")
        render_plot(table, plot_path)
        paths.append(plot_path)
    print(table.summary())
    for path in paths:
        print("wrote %s" % path)
    return 0 if table.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mosaic-lab",
        description="Simulation and verification toolkit for stationary "
                    "Poisson hyperplane tessellations.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH.json", default=None,
                        help="JSON file overriding default config fields")
    common.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    common.add_argument("--out", metavar="DIR", default=None,
                        help="output directory (default: stdout for dumps, "
                             "./results for experiment tables)")

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="sample one realization and dump faces as "
                                "JSON lines")
    p_sim.add_argument("--zero-cell", action="store_true",
                       help="emit the ambient zero cell instead of window "
                            "faces")
    p_sim.set_defaults(func=_cmd_simulate)

    p_bla = sub.add_parser("blaschke", parents=[common],
                           help="solve the section reference body for the "
                                "configured process")
    p_bla.set_defaults(func=_cmd_blaschke)

    p_dev = sub.add_parser("deviation", parents=[common],
                           help="homothety deviation between two stored "
                                "bodies")
    p_dev.add_argument("body", help="polytope JSON file")
    p_dev.add_argument("reference", help="origin-symmetric polytope JSON "
                                         "file")
    p_dev.set_defaults(func=_cmd_deviation)

    p_exp = sub.add_parser("experiment", parents=[common],
                           help="run a named scenario and write its table")
    p_exp.add_argument("scenario", choices=SCENARIOS)
    p_exp.add_argument("--format", choices=("csv", "json"), default="csv")
    p_exp.add_argument("--plots", action="store_true",
                       help="also render an SVG plot")
    p_exp.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
