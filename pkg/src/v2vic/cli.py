"""Command-line front end.

Every subcommand reads one JSON config (``--config``) and writes to
``--out`` (stdout by default).  Output is a deterministic function of the
config: all randomness comes from its ``seed`` / ``master_seed`` and JSON is
written with sorted keys.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import tables as tables_mod
from .cluster import (
    ClusterConfig,
    InconsistentSystem,
    SideInformation,
    build_encoder,
    decode_cluster,
    decode_from_neighbor,
    encode_block,
    encode_cluster,
    layout_side_information,
)
from .ecic import (
    ClassicalCode,
    DecodingAmbiguity,
    EcicConfig,
    classical_code_for,
    ecic_decode_cluster,
    ecic_encode_cluster,
    inject_errors,
)
from .exchange import run_information_exchange, verify_universal_recovery
from .gf import field
from .sim import (
    FOUR_VEHICLE_CODE,
    FOUR_VEHICLE_KNOWN,
    ScenarioConfig,
    compare_schemes,
    rounds_rows,
    simulate,
    trajectory_rows,
)

COMMANDS = ("encode", "decode", "bounds", "exchange", "ecic", "simulate", "tables")


class ConfigError(ValueError):
    """The config is malformed; the message names the offending field."""


# -- config access ---------------------------------------------------------------

_MISSING = object()


def _get(cfg: dict, key: str, kind=None, default=_MISSING, where: str = ""):
    name = f"{where}{key}"
    if key not in cfg:
        if default is _MISSING:
            raise ConfigError(f"missing required field '{name}'")
        return default
    value = cfg[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(f"field '{name}' must be an integer, got {value!r}")
    if kind is bool and not isinstance(value, bool):
        raise ConfigError(f"field '{name}' must be true or false, got {value!r}")
    if kind is str and not isinstance(value, str):
        raise ConfigError(f"field '{name}' must be a string, got {value!r}")
    if kind is list and not isinstance(value, list):
        raise ConfigError(f"field '{name}' must be a list, got {value!r}")
    if kind is dict and not isinstance(value, dict):
        raise ConfigError(f"field '{name}' must be an object, got {value!r}")
    return value


def _cluster(cfg: dict) -> ClusterConfig:
    c = _get(cfg, "cluster", dict)
    try:
        return ClusterConfig(
            _get(c, "K", int, where="cluster."),
            _get(c, "l", int, where="cluster."),
            _get(c, "i", int, where="cluster."),
            _get(c, "n", int, None, where="cluster."),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"field 'cluster': {exc}") from exc


def _side(cfg: dict) -> tuple[SideInformation, ClusterConfig | None]:
    """Explicit ``known_sets`` (with ``n``) or an equal-overlap ``cluster``."""
    if "known_sets" in cfg:
        sets = _get(cfg, "known_sets", list)
        n = _get(cfg, "n", int)
        try:
            return SideInformation.from_sets(n, sets), None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field 'known_sets': {exc}") from exc
    cluster = _cluster(cfg)
    try:
        return layout_side_information(cluster), cluster
    except ValueError as exc:
        raise ConfigError(f"field 'cluster': {exc}") from exc


def _packets(cfg: dict, count: int, key: str = "packets") -> np.ndarray:
    """Payload rows from ``packets`` (lists of byte values) or seeded random bytes."""
    if key in cfg:
        rows = _get(cfg, key, list)
        try:
            arr = np.array(rows, dtype=np.int64)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field '{key}' must be a list of equal-length byte lists") from exc
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] != count:
            raise ConfigError(f"field '{key}' must hold {count} packets, got shape {list(arr.shape)}")
        if arr.min() < 0 or arr.max() > 255:
            raise ConfigError(f"field '{key}' entries must be bytes in [0, 255]")
        return arr.astype(np.uint8)
    size = _get(cfg, "payload_bytes", int, 8)
    if size < 1:
        raise ConfigError("field 'payload_bytes' must be >= 1")
    rng = np.random.default_rng(_get(cfg, "seed", int, 0))
    return rng.integers(0, 256, size=(count, size), dtype=np.uint8)


def _hex(row) -> str:
    return bytes(np.asarray(row, dtype=np.uint8).reshape(-1).tolist()).hex()


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _expression(coeffs) -> str:
    terms = []
    for j in np.nonzero(coeffs)[0]:
        name = f"x{j}"
        c = int(coeffs[j])
        terms.append(name if c == 1 else f"{c}*{name}")
    return " + ".join(terms) if terms else "0"


def _tx_json(t) -> dict:
    out = {
        "sender": t.sender,
        "coefficients": [int(c) for c in t.coefficients],
        "field": t.q,
        "combination": _expression(t.coefficients),
    }
    if t.payload is not None:
        out["payload"] = _hex(t.payload)
    return out


# -- subcommands -----------------------------------------------------------------


def cmd_encode(cfg: dict, args) -> str:
    """Either one vehicle's block (``l``, ``i``) or a whole ``cluster``."""
    if "cluster" in cfg:
        cluster = _cluster(cfg)
        packets = _packets(cfg, cluster.n)
        try:
            tx = encode_cluster(cluster, packets)
            L = build_encoder(cluster.l, cluster.i)
        except ValueError as exc:
            raise ConfigError(f"field 'cluster': {exc}") from exc
    else:
        l, i = _get(cfg, "l", int), _get(cfg, "i", int)
        try:
            L = build_encoder(l, i)
        except ValueError as exc:
            raise ConfigError(f"fields 'l'/'i': {exc}") from exc
        indices = _get(cfg, "indices", list, list(range(l)))
        if len(indices) != l or any(not isinstance(x, int) or x < 0 for x in indices):
            raise ConfigError(f"field 'indices' must list {l} non-negative packet indices")
        packets = _packets(cfg, l)
        tx = encode_block(L, packets, indices=indices, n=max(indices) + 1)
    return _dump({
        "encoder": L.tolist(),
        "transmissions": [_tx_json(t) for t in tx],
        "count": len(tx),
    })


def cmd_decode(cfg: dict, args) -> str:
    """Single neighbour decode (``direction``/``side``/``coded``) or a cluster roundtrip."""
    if "coded" in cfg:
        direction = _get(cfg, "direction", str)
        side_rows = _get(cfg, "side", list)
        coded_rows = _get(cfg, "coded", list)
        side = _packets({"side": side_rows}, len(side_rows), "side")
        coded = _packets({"coded": coded_rows}, len(coded_rows), "coded")
        try:
            window = decode_from_neighbor(direction, side, coded)
        except InconsistentSystem:
            raise
        except ValueError as exc:
            raise ConfigError(f"field 'direction'/'side'/'coded': {exc}") from exc
        return _dump({"window": [_hex(r) for r in window]})
    side, cluster = _side(cfg)
    if cluster is None:
        raise ConfigError("field 'cluster' is required for a cluster roundtrip")
    packets = _packets(cfg, cluster.n)
    try:
        tx = encode_cluster(cluster, packets)
    except ValueError as exc:
        raise ConfigError(f"field 'cluster': {exc}") from exc
    decoded = decode_cluster(cluster, side, tx, packets)
    return _dump({
        "transmissions": len(tx),
        "vehicles": [
            {"vehicle": m, "recovered": bool(np.array_equal(decoded[m], packets))}
            for m in range(cluster.K)
        ],
    })


def cmd_bounds(cfg: dict, args) -> str:
    side, cluster = _side(cfg)
    oracles = _get(cfg, "oracles", bool, True)
    try:
        report = bounds_mod.bounds_report(side, cluster, oracles=oracles)
    except bounds_mod.SizeGuardExceeded:
        raise
    except ValueError as exc:
        raise ConfigError(f"field 'known_sets'/'cluster': {exc}") from exc
    return _dump(report)


def cmd_exchange(cfg: dict, args) -> str:
    side, _ = _side(cfg)
    q = _get(cfg, "q", int, 2)
    seed = _get(cfg, "seed", int, 0)
    try:
        field(q)
    except ValueError as exc:
        raise ConfigError(f"field 'q': {exc}") from exc
    try:
        log = run_information_exchange(side, q=q, seed=seed)
    except ValueError as exc:
        raise ConfigError(f"field 'known_sets'/'cluster': {exc}") from exc
    if not verify_universal_recovery(log, side):
        raise RuntimeError("exchange finished without universal recovery")
    lines = [json.dumps({"sender": t.sender, "coefficients": [int(c) for c in t.coefficients], "field": t.q},
                        sort_keys=True) for t in log]
    return "\n".join(lines) + "\n"


def cmd_ecic(cfg: dict, args) -> str:
    cluster = _cluster(cfg)
    delta = _get(cfg, "delta", int, 1)
    q = _get(cfg, "q", int, 2)
    k = cluster.l - cluster.i
    try:
        if "generator" in cfg:
            outer = ClassicalCode(np.array(_get(cfg, "generator", list), dtype=np.uint8), q)
        elif "generator_file" in cfg:
            outer = ClassicalCode.from_file(_get(cfg, "generator_file", str), q)
        else:
            outer = classical_code_for(k, delta, q)
        ecfg = EcicConfig(cluster.l, cluster.i, delta, outer)
    except (ValueError, OSError) as exc:
        raise ConfigError(f"field 'generator'/'delta': {exc}") from exc
    packets = _packets(cfg, cluster.n)
    try:
        blocks = ecic_encode_cluster(ecfg, cluster, packets)
    except ValueError as exc:
        raise ConfigError(f"field 'cluster': {exc}") from exc
    errors = _get(cfg, "errors", dict, {})
    for key, pattern in sorted(errors.items()):
        try:
            m = int(key)
            blocks[m] = inject_errors(blocks[m], [tuple(p) for p in pattern], delta, q)
        except (KeyError, ValueError, TypeError, IndexError) as exc:
            raise ConfigError(f"field 'errors.{key}': {exc}") from exc
    side = layout_side_information(cluster)
    try:
        decoded = ecic_decode_cluster(ecfg, cluster, side, blocks, packets)
        vehicles = [{"vehicle": m, "recovered": bool(np.array_equal(decoded[m], packets))} for m in range(cluster.K)]
        status = "ok"
    except (DecodingAmbiguity, InconsistentSystem) as exc:
        vehicles, status = [], f"decoding failed: {exc}"
    return _dump({
        "outer_code": {"N": outer.N, "k": outer.k, "d": outer.d, "generator": outer.generator.tolist()},
        "per_vehicle": outer.N,
        "total_transmissions": outer.N * cluster.K,
        "status": status,
        "vehicles": vehicles,
    })


SCENARIO_FIELDS = {
    "file_size_packets": int, "rsu_scheme": str, "v2v_scheme": str, "v2v_budget": int,
    "overlap_enabled": bool, "capture": str, "trials": int, "master_seed": int, "q": int, "max_rounds": int,
}


def scenario_from_config(cfg: dict, seed: int | None = None, trials: int | None = None) -> ScenarioConfig:
    kwargs = {"cluster": _cluster(cfg)}
    for key, kind in SCENARIO_FIELDS.items():
        if key in cfg and not (cfg[key] is None and key in ("v2v_budget", "max_rounds")):
            kwargs[key] = _get(cfg, key, kind)
    if "v2v_scheme" not in kwargs and isinstance(cfg.get("schemes"), list) and cfg["schemes"]:
        kwargs["v2v_scheme"] = cfg["schemes"][0]
    if "file_size_packets" not in kwargs:
        raise ConfigError("missing required field 'file_size_packets'")
    for key, preset in (("known_sets", FOUR_VEHICLE_KNOWN), ("explicit_code", FOUR_VEHICLE_CODE)):
        if key in cfg:
            value = cfg[key]
            kwargs[key] = preset if value == "four_vehicle" else value
    if seed is not None:
        kwargs["master_seed"] = seed
    if trials is not None:
        kwargs["trials"] = trials
    try:
        return ScenarioConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"scenario: {exc}") from exc


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_simulate(cfg: dict, args) -> str:
    scenario = scenario_from_config(cfg, args.seed, args.trials)
    schemes = _get(cfg, "schemes", list, [scenario.v2v_scheme])
    sweep = _get(cfg, "sweep", dict, None)
    if sweep is None:
        try:
            results = compare_schemes(scenario, schemes)
        except ValueError as exc:
            raise ConfigError(f"field 'schemes': {exc}") from exc
        if args.trajectory:
            Path(args.trajectory).write_text(_csv(trajectory_rows(results)))
        return _csv(rounds_rows(results))
    parameter = _get(sweep, "parameter", str, where="sweep.")
    values = _get(sweep, "values", list, where="sweep.")
    if parameter not in ("v2v_budget", "file_size_packets"):
        raise ConfigError("field 'sweep.parameter' must be 'v2v_budget' or 'file_size_packets'")
    rows: list[list] = [["scheme", parameter, "trial", "rounds"]]
    for value in values:
        try:
            results = compare_schemes(replace(scenario, **{parameter: value}), schemes)
        except ValueError as exc:
            raise ConfigError(f"field 'sweep.values': {exc}") from exc
        for scheme, res in results.items():
            for t in res.trials:
                rows.append([scheme, "" if value is None else value, t.trial, "" if t.rounds is None else t.rounds])
    return _csv(rows)


def cmd_tables(cfg: dict, args) -> str:
    presets = _get(cfg, "presets", list, None)
    try:
        rows = tables_mod.reproduce_tables(presets, seed=_get(cfg, "seed", int, 0) if args.seed is None else args.seed)
    except KeyError as exc:
        raise ConfigError(f"field 'presets': {exc.args[0]}") from exc
    return tables_mod.format_csv(rows) if args.format == "csv" else tables_mod.format_text(rows)


HANDLERS = {
    "encode": cmd_encode,
    "decode": cmd_decode,
    "bounds": cmd_bounds,
    "exchange": cmd_exchange,
    "ecic": cmd_ecic,
    "simulate": cmd_simulate,
    "tables": cmd_tables,
}

SUMMARIES = {
    "encode": "encode one vehicle's block or a whole equal-overlap cluster",
    "decode": "decode a neighbour's window, or round-trip a whole cluster",
    "bounds": "lower/upper bounds and alpha/kappa oracles for a side-information layout",
    "exchange": "run the greedy data exchange and print its transmission log",
    "ecic": "error-correcting encode, corrupt and decode a cluster",
    "simulate": "multi-round RSU/V2V download simulation (CSV of rounds per trial)",
    "tables": "reproduce the transmission-count tables",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="v2vic", description="Index coding for V2V content sharing.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(COMMANDS) + "}")
    for name in COMMANDS:
        p = sub.add_parser(name, help=SUMMARIES[name], description=SUMMARIES[name])
        p.add_argument("--config", type=Path, required=name != "tables", help="JSON config file")
        p.add_argument("--out", type=Path, help="output path (default: stdout)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--trials", type=int, help="override the number of trials")
        if name == "simulate":
            p.add_argument("--trajectory", type=Path, help="also write the per-round trajectory CSV here")
        if name == "tables":
            p.add_argument("--format", choices=("text", "csv"), default="text")
    return parser


def _load(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args.config)
        if args.seed is not None and args.command != "simulate":
            cfg["seed"] = args.seed
        text = HANDLERS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"v2vic {args.command}: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # module errors are reported verbatim
        print(f"v2vic {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
