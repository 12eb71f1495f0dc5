"""Batch front end: experiment documents in, CSV or text reports out.

An experiment is one YAML document. The ``command`` key selects what runs;
the remaining sections configure it:

    command: regions | poa-sweep | mil-sweep | enumerate | production
             | few-sweep | verify
    seed: 0                      # RNG seed, overridable with --seed

    game:                        # enumerate + the three sweeps
      entropic_vector:
        family: pair_redundancy         # independent | max_correlated | pair_redundancy
        h: [5, 4, 4]
        kl: 0.0                  # pair_redundancy only
        # or: file: vector.txt
        # or: inline: {n_agents: 2, entries: [[1, 1.0], [2, 1.0], [3, 2.0]]}
      benefit: {name: log1p, base: e}   # log1p | power(alpha) | linear
      costs: {model: homogeneous, c: 0.3}
        # recipient: {model: recipient, c: [0.1, 0.2, 0.3]}
        # matrix:    {model: matrix, c: [[...], ...]}

    grid:                        # the three sweeps; family must be pair_redundancy
      kl: [0, 1, 2, 3, 4]        # list or {start, stop, points}
      c: {start: 0.0, stop: 1.5, points: 20}

    production:                  # production + few-sweep
      n_agents: 3
      benefit: {name: log1p, base: e}
      k: 0.25
      c: 0.2
      aggregation: sum           # sum | max
      grid_step: 0.5             # optional, defaults to h_bar / 6
    n_list: [2, 3, 4, 5, 6, 7, 8]   # few-sweep

    verify: {n_agents: 3, instances: 20}

    output: out.csv              # optional, overridden by --out

Sweep rows are emitted redundancy-major, then cost. Every CSV starts with a
comment line recording the sha256 of the experiment document, the seed, and
the caps in effect, so identical inputs produce byte-identical files. Exit
codes: 0 success, 1 verification failure, 2 invalid spec, 3 cap exceeded.
"""
from __future__ import annotations

import argparse
import hashlib
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import yaml

from . import analytic, equilibrium, production
from .entropy import family_pair_redundancy
from .equilibrium import CapExceededError
from .formation_game import (
    GameConfig,
    benefit_from_config,
    config_from_dict,
)
from .production import Aggregation, ProductionGameConfig
from .verification import run_verification

COMMANDS = ("enumerate", "regions", "poa-sweep", "mil-sweep", "production", "few-sweep", "verify")


class SpecError(ValueError):
    """The experiment document is malformed or inconsistent."""


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _grid_values(node, what: str) -> list[float]:
    if isinstance(node, (list, tuple)):
        if not node:
            raise SpecError(f"{what} grid must be nonempty")
        return [float(v) for v in node]
    if isinstance(node, dict):
        try:
            start, stop, points = float(node["start"]), float(node["stop"]), int(node["points"])
        except KeyError as e:
            raise SpecError(f"{what} grid needs start/stop/points") from None
        if points < 1:
            raise SpecError(f"{what} grid must be nonempty")
        return [float(v) for v in np.linspace(start, stop, points)]
    raise SpecError(f"{what} grid must be a list or a start/stop/points mapping")


def _require(spec: dict, key: str) -> dict:
    if key not in spec:
        raise SpecError(f"spec is missing the {key!r} section")
    return spec[key]


def _sweep_family(spec: dict):
    game = _require(spec, "game")
    ev_cfg = game.get("entropic_vector")
    if not isinstance(ev_cfg, dict) or ev_cfg.get("family") != "pair_redundancy":
        raise SpecError("region sweeps need entropic_vector family 'pair_redundancy'")
    h = ev_cfg.get("h")
    if not h or len(h) != 3:
        raise SpecError("pair_redundancy family needs h: [h1, h2, h3]")
    benefit = benefit_from_config(_require(game, "benefit"))
    return [float(v) for v in h], benefit


def _sweep_rows(spec: dict, threads: int):
    h, benefit = _sweep_family(spec)
    grid = _require(spec, "grid")
    kl_values = _grid_values(grid.get("kl", [0.0]), "kl")
    c_values = _grid_values(_require(grid, "c"), "c")

    def one(point):
        kl, c = point
        try:
            ev = family_pair_redundancy(h[0], h[1], h[2], kl)
        except ValueError as e:
            raise SpecError(str(e)) from None
        region = analytic.classify_homogeneous(ev, benefit, c)
        n = ev.n_agents
        f_joint = benefit(ev.joint_entropy)
        if region.label == analytic.K_M:
            poa = n * f_joint / sum(benefit(v) for v in ev.singletons)
            mil = ev.joint_entropy - min(ev.singletons)
        else:
            poa = 1.0
            mil = 0.0
        return (c, kl, region.label, region.c_l, region.c_u, poa, mil)

    points = [(kl, c) for kl in kl_values for c in c_values]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, points))
    else:
        rows = [one(p) for p in points]
    columns = ["c", "kl", "region", "c_l", "c_u", "poa_or_bound", "mil_or_bound"]
    return columns, rows


def _run_enumerate(spec: dict, max_n) -> tuple[str, int]:
    cfg = _game_config(spec)
    report = equilibrium.enumerate_nash(cfg, max_n=max_n)
    body = report.to_csv()
    extra = (f"# social_optimum={_fmt(report.social_optimum_value)}"
             f" worst_ne_welfare={_fmt(report.worst_ne_welfare)}"
             f" poa={'undefined' if report.poa is None else _fmt(report.poa)}"
             f" mil={_fmt(report.mil)}\n")
    return extra + body, 0


def _game_config(spec: dict) -> GameConfig:
    try:
        return config_from_dict(_require(spec, "game"))
    except ValueError as e:
        raise SpecError(str(e)) from None


def _production_config(spec: dict) -> ProductionGameConfig:
    node = _require(spec, "production")
    try:
        agg = Aggregation(node.get("aggregation", "sum"))
    except ValueError:
        raise SpecError(f"unknown aggregation {node.get('aggregation')!r}") from None
    try:
        return ProductionGameConfig(
            n_agents=int(node.get("n_agents", 2)),
            benefit=benefit_from_config(_require(node, "benefit")),
            k=float(_require(node, "k")),
            c=float(_require(node, "c")),
            agg=agg,
            grid_step=float(node["grid_step"]) if "grid_step" in node else None,
        )
    except ValueError as e:
        raise SpecError(str(e)) from None


def _run_production(spec: dict, max_n) -> tuple[str, int]:
    cfg = _production_config(spec)
    found = production.enumerate_production_ne(cfg, max_n=max_n)
    columns = ["links"] + [f"prod_{i}" for i in range(cfg.n_agents)]
    lines = [",".join(columns)]
    for s in found:
        lines.append(",".join([s.links.bitstring()] + [repr(p) for p in s.productions]))
    return "\n".join(lines) + "\n", 0


def _run_few_sweep(spec: dict) -> tuple[str, int]:
    cfg = _production_config(spec)
    n_list = spec.get("n_list", [2, 3, 4, 5, 6, 7, 8])
    if not isinstance(n_list, (list, tuple)) or not n_list:
        raise SpecError("few-sweep needs a nonempty n_list")
    points = production.few_sweep(cfg, [int(n) for n in n_list])
    columns = ["n", "agg", "c", "k", "h_bar", "producer_fraction", "total_information_bits"]
    lines = [",".join(columns)]
    for pt in points:
        lines.append(",".join([
            str(pt.n), pt.agg.value, repr(pt.c), repr(pt.k), repr(pt.h_bar),
            repr(pt.producer_fraction), repr(pt.total_information_bits),
        ]))
    return "\n".join(lines) + "\n", 0


def _run_verify(spec: dict, seed: int) -> tuple[str, int]:
    node = spec.get("verify", {})
    if not isinstance(node, dict):
        raise SpecError("verify section must be a mapping")
    try:
        report = run_verification(
            n_agents=int(node.get("n_agents", 3)),
            instances=int(node.get("instances", 20)),
            seed=seed,
        )
    except ValueError as e:
        raise SpecError(str(e)) from None
    return report.to_text(), 0 if report.ok else 1


def _csv_with_header(comment: str, columns, rows) -> str:
    lines = [f"# {comment}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def run_spec(spec: dict, spec_bytes: bytes, seed: int | None, threads: int,
             max_n: int | None) -> tuple[str, int]:
    """Execute one experiment document; returns (output text, exit code)."""
    if not isinstance(spec, dict):
        raise SpecError("experiment document must be a mapping")
    command = spec.get("command")
    if command not in COMMANDS:
        raise SpecError(f"command must be one of {', '.join(COMMANDS)}; got {command!r}")
    effective_seed = seed if seed is not None else int(spec.get("seed", 0))
    digest = hashlib.sha256(spec_bytes).hexdigest()
    caps = f"max_n={max_n if max_n is not None else 'default'}"
    comment = f"spec_sha256={digest} seed={effective_seed} {caps} command={command}"

    if command in ("regions", "poa-sweep", "mil-sweep"):
        columns, rows = _sweep_rows(spec, threads)
        return _csv_with_header(comment, columns, rows), 0
    if command == "enumerate":
        body, code = _run_enumerate(spec, max_n)
        return f"# {comment}\n" + body, code
    if command == "production":
        body, code = _run_production(spec, max_n)
        return f"# {comment}\n" + body, code
    if command == "few-sweep":
        body, code = _run_few_sweep(spec)
        return f"# {comment}\n" + body, code
    body, code = _run_verify(spec, effective_seed)
    return f"# {comment}\n" + body, code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="infogame",
        description="Run information-network formation experiments from a YAML document.")
    parser.add_argument("--spec", required=True, help="experiment document (YAML)")
    parser.add_argument("--out", help="output file; stdout when omitted")
    parser.add_argument("--seed", type=int, default=None, help="override the document seed")
    parser.add_argument("--threads", type=int, default=1, help="parallel sweep evaluation")
    parser.add_argument("--max-n", type=int, default=None, dest="max_n",
                        help="override enumeration agent caps")
    args = parser.parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        with open(args.spec, "rb") as fh:
            spec_bytes = fh.read()
        spec = yaml.safe_load(spec_bytes)
    except OSError as e:
        print(f"error: cannot read spec: {e}", file=sys.stderr)
        return 2
    except yaml.YAMLError as e:
        print(f"error: spec is not valid YAML: {e}", file=sys.stderr)
        return 2
    try:
        text, code = run_spec(spec, spec_bytes, args.seed, args.threads, args.max_n)
    except CapExceededError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except SpecError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out_path = args.out or (spec.get("output") if isinstance(spec, dict) else None)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
