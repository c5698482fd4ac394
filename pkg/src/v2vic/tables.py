"""Transmission-count report for the equal-overlap sweeps.

For each (K, l, i) column the report lists the cooperative data exchange
bounds, the greedy exchange count, the n - i lower bound and the number of
transmissions the encoding matrix actually uses (with decoding checked).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .bounds import data_exchange_bounds, equal_overlap_lower_bound
from .cluster import ClusterConfig, decode_cluster, encode_cluster, layout_side_information
from .exchange import run_information_exchange, verify_universal_recovery

# (K, i, download capabilities l) per sweep.
PRESETS: dict[str, tuple[int, int, tuple[int, ...]]] = {
    "k5-i5": (5, 5, (6, 8, 10, 12, 14)),
    "k5-i7": (5, 7, (8, 10, 12, 14, 16)),
    "k7-i7": (7, 7, (8, 10, 12, 14, 16)),
}

COLUMNS = (
    "preset", "K", "l", "i", "n",
    "exchange_lower", "exchange_upper", "algorithm1", "algorithm1_field",
    "n_minus_i", "matrix_L",
)


@dataclass(frozen=True)
class TableRow:
    preset: str
    K: int
    l: int
    i: int
    n: int
    exchange_lower: int
    exchange_upper: int
    algorithm1: int
    algorithm1_field: int
    n_minus_i: int
    matrix_L: int

    def values(self) -> tuple:
        return tuple(getattr(self, c) for c in COLUMNS)


def matrix_l_count(cfg: ClusterConfig, seed: int = 0) -> int:
    """Transmissions of the encoding matrix, after checking every vehicle decodes."""
    rng = np.random.default_rng(seed)
    packets = rng.integers(0, 256, size=(cfg.n, 4), dtype=np.uint8)
    side = layout_side_information(cfg)
    tx = encode_cluster(cfg, packets)
    decoded = decode_cluster(cfg, side, tx, packets)
    if any(not np.array_equal(v, packets) for v in decoded.values()):
        raise AssertionError(f"encoding matrix failed to deliver every packet for {cfg}")
    return len(tx)


def column(preset: str, K: int, l: int, i: int, seed: int = 0) -> TableRow:
    cfg = ClusterConfig(K, l, i)
    side = layout_side_information(cfg)
    lower, upper = data_exchange_bounds(side)
    log = run_information_exchange(side, q=2, seed=seed)
    if not verify_universal_recovery(log, side):
        raise AssertionError(f"greedy exchange left a vehicle short for {cfg}")
    return TableRow(
        preset, K, l, i, cfg.n, lower, upper, len(log), max(t.q for t in log),
        equal_overlap_lower_bound(cfg), matrix_l_count(cfg, seed),
    )


def reproduce_tables(presets=None, seed: int = 0) -> list[TableRow]:
    names = list(PRESETS) if presets is None else list(presets)
    rows = []
    for name in names:
        if name not in PRESETS:
            raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        K, i, ls = PRESETS[name]
        rows.extend(column(name, K, l, i, seed) for l in ls)
    return rows


def format_text(rows: list[TableRow]) -> str:
    table = [COLUMNS] + [tuple(str(v) for v in r.values()) for r in rows]
    widths = [max(len(line[c]) for line in table) for c in range(len(COLUMNS))]
    return "\n".join("  ".join(v.rjust(w) for v, w in zip(line, widths)) for line in table) + "\n"


def format_csv(rows: list[TableRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.values())
    return buf.getvalue()
