"""Command-line entry point: ``edbnet <subcommand> [options]``.

Pipeline::

    synth -> ingest -> metrics / coreperiphery -> simulate -> null / regress -> report

Option values are resolved in this order, later sources winning:

1. built-in defaults;
2. ``key = value`` lines of the ``--config`` file that carry no prefix;
3. ``subcommand.key = value`` lines of the same file;
4. flags on the command line.

Keys use the long flag name with or without dashes (``rng-seed`` or
``rng_seed``). Subcommands that draw random numbers refuse to run unless a
seed comes from a flag or the config file.

Every artifact starts with its provenance: CSV files with a ``# edbnet ...``
comment line holding the tool version, subcommand and resolved options as
JSON, JSON files with a ``meta`` object. The thread count is left out, since
it never changes results.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .coreperiphery import block_summary, fit_core_periphery
from .econostats import REGRESSOR_SETS, build_panel, fe_regression
from .edb import SCENARIOS, SimConfig, scenario, simulate_ensemble
from .metrics import bank_metrics, metrics_metadata, moving_average, network_metrics
from .netcore import (
    aggregate_quarters,
    parse_quarter,
    read_edgelist,
    read_transactions_csv,
    reduce_to_wcc,
    write_edgelist,
    write_transactions_csv,
)
from .nullmodel import DEFAULT_QUANTUM, DEFAULT_TOL, null_networks, null_risk_test, solve_decm
from .synth import DEFAULT_CRISIS, DEFAULT_START, DEFAULT_STOP, SynthSpec, generate, regime_schedule

log = logging.getLogger("edbnet")

PROG = "edbnet"
# options that never reach the artifacts
_NOT_EMBEDDED = {"command", "config", "threads", "handler", "verbose"}


class CLIError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument types

def _seed(text) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _pair(text) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from None
    return a, b


def _window(text) -> tuple[str, str]:
    parts = [p.strip().upper() for p in str(text).split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'START,END' quarters, got {text!r}")
    for p in parts:
        try:
            parse_quarter(p)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad quarter label {p!r}") from None
    return parts[0], parts[1]


def _quarter(text) -> str:
    try:
        parse_quarter(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad quarter label {text!r}") from None
    return str(text).upper()


def _probability(text) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1]")
    return value


def _positive_int(text) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _path_list(text) -> list[str]:
    if isinstance(text, list):
        return text
    return [p.strip() for p in str(text).split(",") if p.strip()]


# ---------------------------------------------------------------------------
# config file and provenance

def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CLIError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _config_defaults(sub: argparse.ArgumentParser, command: str, config: dict[str, str]) -> dict:
    actions = {a.dest: a for a in sub._actions}
    found = {}
    for key, value in config.items():
        scope, _, name = key.rpartition(".")
        if scope and scope.replace("-", "_") != command.replace("-", "_"):
            continue
        if name not in actions or name in ("help", "config"):
            if scope:
                raise CLIError(f"config key {key!r} is not an option of {command}")
            continue
        action = actions[name]
        if isinstance(action, argparse._StoreTrueAction):
            value = value.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                value = action.type(value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise CLIError(f"config key {key!r}: {exc}") from None
        # scoped keys beat unscoped ones
        if scope or name not in found or not found[name][0]:
            found[name] = (bool(scope), value)
    return {k: v for k, (_, v) in found.items()}


def _jsonable(value):
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, (np.floating,)):
        return _jsonable(float(value))
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def provenance(args: argparse.Namespace) -> dict:
    options = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_EMBEDDED}
    return {"tool": PROG, "version": __version__, "command": args.command, "options": _jsonable(options)}


def _header(args) -> str:
    return f"{PROG} " + json.dumps(provenance(args), sort_keys=True, separators=(",", ":"))


def read_provenance(path) -> dict | None:
    """Provenance block of an artifact written by this tool, or ``None``."""
    with open(path, encoding="utf-8") as fh:
        if str(path).endswith(".json"):
            return json.load(fh).get("meta")
        first = fh.readline()
    prefix = f"# {PROG} "
    return json.loads(first[len(prefix):]) if first.startswith(prefix) else None


def provenance_argv(meta: dict) -> list[str]:
    """Command line that reproduces an artifact from its provenance block."""
    argv = [meta["command"]]
    for key, value in meta["options"].items():
        if value is None or value is False:
            continue
        flag = "--" + key.replace("_", "-")
        if value is True:
            argv.append(flag)
        elif isinstance(value, list):
            argv += [flag, ",".join(str(v) for v in value)]
        else:
            argv += [flag, str(value)]
    return argv


def _write_json(path, payload: dict):
    text = json.dumps(_jsonable(payload), indent=2, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _csv_writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _num(x) -> str:
    x = float(x)
    return repr(x) if math.isfinite(x) else ""


def _read_table(path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#", dtype={"quarter": str, "bank": str})


# ---------------------------------------------------------------------------
# subcommands

def cmd_synth(args):
    weights = {"cc": args.weight_cc, "cp": args.weight_cp, "pc": args.weight_pc, "pp": args.weight_pp}
    spec = SynthSpec(
        n_banks=args.n_banks,
        core_fraction=args.core_fraction,
        p_cc=args.p_cc, p_cp=args.p_cp, p_pc=args.p_pc, p_pp=args.p_pp,
        weight_params=weights,
        schedule=regime_schedule(args.start, args.end, args.crisis_window),
        rng_seed=args.rng_seed,
    )
    records = generate(spec)
    write_transactions_csv(records, args.out, header_comment=_header(args))
    log.info("wrote %d transactions over %d quarters to %s", len(records), len(spec.quarters), args.out)


def cmd_ingest(args):
    records = read_transactions_csv(args.input)
    raw = aggregate_quarters(records)
    nets = [reduce_to_wcc(q, ids, W) for q, ids, W in raw]
    write_edgelist(nets, args.out, header_comment=_header(args))
    if args.bank_index:
        ids = sorted({b for net in nets for b in net.bank_ids})
        with open(args.bank_index, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# {_header(args)}\n")
            w = _csv_writer(fh)
            w.writerow(["bank", "index"])
            w.writerows((b, i) for i, b in enumerate(ids))
    for (q, ids, _), net in zip(raw, nets):
        if net.n_banks < len(ids):
            log.info("%s: kept %d of %d active banks in the largest component", q, net.n_banks, len(ids))
    log.info("wrote %d quarterly networks to %s", len(nets), args.out)


def cmd_metrics(args):
    nets = read_edgelist(args.input)
    header = _header(args)
    rows = [network_metrics(net).as_dict() for net in nets]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {header}\n")
        fh.write("# " + json.dumps(metrics_metadata(), sort_keys=True) + "\n")
        w = _csv_writer(fh)
        if rows:
            fields = list(rows[0])
            w.writerow(fields)
            for r in rows:
                w.writerow([r["quarter"]] + [_num(r[f]) if isinstance(r[f], float) else r[f] for f in fields[1:]])
    with open(args.bank_out, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {header}\n")
        w = _csv_writer(fh)
        w.writerow(["quarter", "bank", "metric", "value"])
        for net in nets:
            for bank, name, value in bank_metrics(net).rows():
                w.writerow([net.quarter, bank, name, _num(value)])
    log.info("wrote metrics for %d quarters", len(nets))


def cmd_coreperiphery(args):
    nets = read_edgelist(args.input)
    header = _header(args)
    fits = []
    for net in nets:
        if net.n_banks < 3:
            log.warning("%s: %d banks, core-periphery fit skipped", net.quarter, net.n_banks)
            continue
        fits.append((net, fit_core_periphery(net, seed=args.rng_seed, restarts=args.restarts)))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {header}\n")
        w = _csv_writer(fh)
        w.writerow(["quarter", "bank", "coreness"])
        for net, part in fits:
            for bank, c in zip(part.bank_ids, part.coreness):
                w.writerow([net.quarter, bank, int(c)])
    if args.blocks_out:
        with open(args.blocks_out, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# {header}\n")
            w = _csv_writer(fh)
            head = None
            for net, part in fits:
                summary = {"error_score": part.error_score, **block_summary(net, part)}
                if head is None:
                    head = list(summary)
                    w.writerow(["quarter"] + head)
                w.writerow([net.quarter] + [summary[k] if isinstance(summary[k], int) else _num(summary[k])
                                            for k in head])
    log.info("fitted core-periphery partitions for %d quarters", len(fits))


def _scenario_from(args):
    name = args.scenario.upper()
    if name not in SCENARIOS:
        raise CLIError(f"unknown scenario {args.scenario!r}; choose from {', '.join(SCENARIOS)}")
    return scenario(name, args.phi_beta, args.psi_beta)


def _sim_config(args) -> SimConfig:
    return SimConfig(
        seed_density=args.seed_density,
        scenario=_scenario_from(args),
        max_steps=args.max_steps,
        n_realizations=args.realizations,
        rng_seed=args.rng_seed,
    )


def _select(nets, quarters):
    if not quarters:
        return nets
    wanted = set(quarters)
    chosen = [n for n in nets if n.quarter in wanted]
    missing = wanted - {n.quarter for n in chosen}
    if missing:
        raise CLIError(f"quarters not in input: {', '.join(sorted(missing, key=parse_quarter))}")
    return chosen


def cmd_simulate(args):
    config = _sim_config(args)
    nets = _select(read_edgelist(args.input), args.quarters)
    out = []
    freq_rows = []
    for net in nets:
        res = simulate_ensemble(net, config, workers=args.threads)
        freq = dict(zip(res.bank_ids, res.per_bank_default_frequency.tolist()))
        out.append({"quarter": net.quarter, **res.summary(), "per_bank_default_frequency": freq})
        freq_rows += [(net.quarter, b, f) for b, f in freq.items()]
        log.info("%s: bankrupted fraction %.4f", net.quarter, res.bankrupted_fraction_mean)
    _write_json(args.out, {
        "meta": provenance(args),
        "scenario": config.scenario.as_dict(),
        "config": config.as_dict(),
        "quarters": out,
    })
    if args.freq_out:
        with open(args.freq_out, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# {_header(args)}\n")
            w = _csv_writer(fh)
            w.writerow(["quarter", "bank", "default_frequency"])
            w.writerows((q, b, _num(f)) for q, b, f in freq_rows)


def cmd_null(args):
    config = _sim_config(args)
    nets = read_edgelist(args.input)
    if not nets:
        raise CLIError(f"{args.input}: no networks")
    quarter = args.quarter or nets[-1].quarter
    net = _select(nets, [quarter])[0]
    report = null_risk_test(
        net, config, n_null=args.n_null, rng_seed=args.rng_seed,
        quantum=args.quantum, tol=args.tol, workers=args.threads,
    )
    _write_json(args.out, {
        "meta": provenance(args),
        "quarter": quarter,
        "scenario": config.scenario.as_dict(),
        "config": config.as_dict(),
        "report": report.as_dict(include_samples=args.include_samples),
    })
    if args.samples_out:
        params = solve_decm(net, tol=args.tol, quantum=args.quantum)
        with open(args.samples_out, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# {_header(args)}\n")
            w = _csv_writer(fh)
            w.writerow(["sample", "quarter", "lender", "borrower", "weight"])
            for k, sample in enumerate(null_networks(params, args.n_null, args.rng_seed, quarter)):
                w.writerows((k, quarter, a, b, _num(x)) for a, b, x in sample.edges())
    log.info("%s: KS D=%.4f p=%.3g", quarter, report.ks_statistic, report.p_value)


def cmd_regress(args):
    metrics_long = _read_table(args.metrics)
    freqs = _read_table(args.frequencies)
    coreness = _read_table(args.coreness) if args.coreness else None
    panel = build_panel(metrics_long, freqs, coreness, regressor_set=args.set, crisis_quarter=args.crisis_quarter)
    res = fe_regression(panel, time_effects=args.time_effects, cluster=args.cluster)
    _write_json(args.out, {
        "meta": provenance(args),
        "regressor_set": args.set,
        "crisis_quarter": args.crisis_quarter,
        "result": res.as_dict(),
    })
    if args.table_out:
        title = f"Fixed-effects regression, {args.set} regressors, crisis dummy from {args.crisis_quarter}"
        text = f"# {_header(args)}\n" + res.format_table(title) + "\n"
        Path(args.table_out).write_text(text, encoding="utf-8")


def _sim_label(payload: dict) -> str:
    cfg = payload["config"]
    return f"{cfg['scenario']['name']}_f{cfg['seed_density']:g}"


def cmd_report(args):
    table = _read_table(args.metrics).set_index("quarter")
    quarters = sorted(table.index, key=parse_quarter)
    table = table.loc[quarters]
    lo, hi = (parse_quarter(q) for q in args.crisis_window)
    columns: dict[str, list] = {
        "crisis": [int(lo <= parse_quarter(q) <= hi) for q in quarters],
    }
    for name in ("n_banks", "n_links", "density", "degree_skewness", "total_volume", "volume_per_bank",
                 "reciprocity", "clustering", "weighted_clustering", "efficiency"):
        columns[name] = table[name].to_numpy(float)
    if args.blocks:
        blocks = _read_table(args.blocks).set_index("quarter")
        missing = set(quarters) - set(blocks.index)
        if missing:
            raise CLIError(f"{args.blocks}: no block summary for {', '.join(sorted(missing))}")
        for name in blocks.columns:
            columns[name] = blocks.loc[quarters, name].to_numpy(float)
    for path in args.simulations:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        label = _sim_label(payload)
        by_q = {r["quarter"]: r for r in payload["quarters"]}
        missing = set(quarters) - set(by_q)
        if missing:
            raise CLIError(f"{path}: no simulation for {', '.join(sorted(missing, key=parse_quarter))}")
        columns[f"bankrupted_fraction_{label}"] = [by_q[q]["bankrupted_fraction_mean"] for q in quarters]
        columns[f"liquidity_loss_{label}"] = [by_q[q]["liquidity_loss_mean"] for q in quarters]

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {_header(args)}\n")
        w = _csv_writer(fh)
        names = list(columns)
        w.writerow(["quarter"] + names)
        smoothed = {k: (v if k == "crisis" else _smooth(v, args.window)) for k, v in columns.items()}
        for i, q in enumerate(quarters):
            w.writerow([q] + [smoothed[k][i] if k == "crisis" else _num(smoothed[k][i]) for k in names])


def _smooth(values, window: int) -> list[float]:
    x = np.asarray(values, dtype=float)
    if np.all(np.isfinite(x)):
        return moving_average(x, window)
    # average over the finite entries of each window
    n, half = x.size, window // 2
    out = []
    for i in range(n):
        h = min(half, i, n - 1 - i)
        seg = x[i - h:i + h + 1]
        seg = seg[np.isfinite(seg)]
        out.append(float(seg.mean()) if seg.size else float("nan"))
    return out


# ---------------------------------------------------------------------------
# parser

def _add_scenario_options(p):
    p.add_argument("--scenario", default="lc-ld", type=str.lower,
                   choices=[s.lower() for s in SCENARIOS], help="economic scenario (default lc-ld)")
    p.add_argument("--phi-beta", type=_pair, default=None, metavar="A,B",
                   help="override the infection shape with I_x(A, B)")
    p.add_argument("--psi-beta", type=_pair, default=None, metavar="A,B",
                   help="override the bankruptcy shape with I_x(A, B)")
    p.add_argument("--seed-density", type=float, default=0.01, help="initial distressed fraction")
    p.add_argument("--realizations", type=_positive_int, default=5000)
    p.add_argument("--max-steps", type=_positive_int, default=100)
    p.add_argument("--threads", type=_positive_int, default=1, help="worker threads; results do not depend on it")


# (name, handler, stochastic, input options, output options)
COMMANDS = {}


def _command(sub, name, handler, help_text, stochastic=False, inputs=(), outputs=()):
    p = sub.add_parser(name, help=help_text, description=help_text)
    p.add_argument("--config", help="key = value defaults file")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    if stochastic:
        p.add_argument("--rng-seed", type=_seed, default=None, help="random seed (required)")
    p.set_defaults(handler=handler)
    COMMANDS[name] = (p, stochastic, inputs, outputs)
    return p


def build_parser() -> argparse.ArgumentParser:
    COMMANDS.clear()
    parser = argparse.ArgumentParser(prog=PROG, description="Interbank network contagion toolkit.")
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = _command(sub, "synth", cmd_synth, "generate a synthetic transaction log", True,
                 outputs=("out",))
    defaults = SynthSpec()
    p.add_argument("--out", default="transactions.csv")
    p.add_argument("--n-banks", type=int, default=defaults.n_banks)
    p.add_argument("--core-fraction", type=float, default=defaults.core_fraction)
    for block in ("cc", "cp", "pc", "pp"):
        p.add_argument(f"--p-{block}", type=_probability, default=getattr(defaults, f"p_{block}"),
                       help=f"{block} block link probability")
    for block in ("cc", "cp", "pc", "pp"):
        p.add_argument(f"--weight-{block}", type=_pair, default=tuple(defaults.weight_params[block]),
                       metavar="MU,SIGMA", help=f"log-normal volume parameters of the {block} block")
    p.add_argument("--start", type=_quarter, default=DEFAULT_START)
    p.add_argument("--end", type=_quarter, default=DEFAULT_STOP)
    p.add_argument("--crisis-window", type=_window, default=DEFAULT_CRISIS, metavar="START,END")

    p = _command(sub, "ingest", cmd_ingest, "aggregate transactions into quarterly networks",
                 inputs=("input",), outputs=("out", "bank_index"))
    p.add_argument("--input", default="transactions.csv")
    p.add_argument("--out", default="networks.csv")
    p.add_argument("--bank-index", default=None, help="also write the global bank id -> index map")

    p = _command(sub, "metrics", cmd_metrics, "network and per-bank statistics",
                 inputs=("input",), outputs=("out", "bank_out"))
    p.add_argument("--input", default="networks.csv")
    p.add_argument("--out", default="metrics.csv")
    p.add_argument("--bank-out", default="bank_metrics.csv")

    p = _command(sub, "coreperiphery", cmd_coreperiphery, "fit a discrete core-periphery partition per quarter",
                 True, inputs=("input",), outputs=("out", "blocks_out"))
    p.add_argument("--input", default="networks.csv")
    p.add_argument("--out", default="coreness.csv")
    p.add_argument("--blocks-out", default=None, help="also write per-quarter block counts and volumes")
    p.add_argument("--restarts", type=_positive_int, default=20)

    p = _command(sub, "simulate", cmd_simulate, "Monte Carlo EDB contagion on every quarter", True,
                 inputs=("input",), outputs=("out", "freq_out"))
    p.add_argument("--input", default="networks.csv")
    p.add_argument("--out", default="simulation.json")
    p.add_argument("--freq-out", default="default_frequency.csv")
    p.add_argument("--quarters", type=_path_list, default=None, help="comma-separated subset of quarters")
    _add_scenario_options(p)

    p = _command(sub, "null", cmd_null, "KS test of simulated risk against DECM null networks", True,
                 inputs=("input",), outputs=("out", "samples_out"))
    p.add_argument("--input", default="networks.csv")
    p.add_argument("--quarter", type=_quarter, default=None, help="quarter to test (default: last)")
    p.add_argument("--out", default="null_report.json")
    p.add_argument("--samples-out", default=None, help="also write the sampled null edge lists")
    p.add_argument("--n-null", type=_positive_int, default=100)
    p.add_argument("--quantum", type=float, default=DEFAULT_QUANTUM)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--include-samples", action="store_true",
                   help="store every per-realization bankrupted fraction in the report")
    _add_scenario_options(p)

    p = _command(sub, "regress", cmd_regress, "fixed-effects regression of default frequency on bank features",
                 inputs=("metrics", "frequencies", "coreness"), outputs=("out", "table_out"))
    p.add_argument("--metrics", default="bank_metrics.csv")
    p.add_argument("--frequencies", default="default_frequency.csv")
    p.add_argument("--coreness", default=None, help="coreness CSV (needed for --set binary)")
    p.add_argument("--set", choices=sorted(REGRESSOR_SETS), default="binary")
    p.add_argument("--crisis-quarter", type=_quarter, default="2008Q4")
    p.add_argument("--time-effects", choices=("const", "dummies"), default="const")
    p.add_argument("--cluster", choices=("bank", "quarter"), default="bank")
    p.add_argument("--out", default="regression.json")
    p.add_argument("--table-out", default="regression.txt")

    p = _command(sub, "report", cmd_report, "plot-ready smoothed time series",
                 inputs=("metrics", "blocks", "simulations"), outputs=("out",))
    p.add_argument("--metrics", default="metrics.csv")
    p.add_argument("--blocks", default=None, help="block summary CSV from coreperiphery --blocks-out")
    p.add_argument("--simulations", type=_path_list, default=[], help="comma-separated simulate JSON outputs")
    p.add_argument("--window", type=_positive_int, default=5)
    p.add_argument("--crisis-window", type=_window, default=DEFAULT_CRISIS, metavar="START,END")
    p.add_argument("--out", default="report.csv")
    return parser


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        if not Path(args.config).is_file():
            raise CLIError(f"config file not found: {args.config}")
        sub = COMMANDS[args.command][0]
        sub.set_defaults(**_config_defaults(sub, args.command, read_config(args.config)))
        args = parser.parse_args(argv)
    return args


def _check_paths(args):
    _, stochastic, inputs, outputs = COMMANDS[args.command]
    if stochastic and args.rng_seed is None:
        raise CLIError(f"{args.command} draws random numbers: pass --rng-seed or set rng_seed in the config file")
    if getattr(args, "window", 1) % 2 == 0:
        raise CLIError("--window must be odd")
    in_paths = []
    for name in inputs:
        value = getattr(args, name)
        for path in value if isinstance(value, list) else [value]:
            if path is None:
                continue
            if not Path(path).is_file():
                raise CLIError(f"input file not found: {path}")
            in_paths.append(path)
    out_paths = [getattr(args, name) for name in outputs if getattr(args, name)]
    resolved = [Path(p).resolve() for p in in_paths + out_paths]
    if len(set(resolved)) != len(resolved):
        raise CLIError("input and output paths must all be distinct")


def run(argv=None) -> int:
    """Run one subcommand; returns the process exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except CLIError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    try:
        _check_paths(args)
        args.handler(args)
    except CLIError as exc:
        print(f"{PROG} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError, KeyError, ArithmeticError) as exc:
        print(f"{PROG} {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
