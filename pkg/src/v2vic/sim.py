"""Round-based R2V / V2V file dissemination simulator.

Each round the RSU emits ``n`` transmissions, every vehicle captures a
window of ``l`` consecutive ones, and the cluster then exchanges packets
over V2V with an optional per-phase transmission budget.  Rounds repeat
until every vehicle holds the whole file.

Knowledge is tracked two ways.  With network coding at the RSU each vehicle
keeps the span of the coefficient vectors it has seen and any received V2V
combination adds rank.  With the uncoded RSU schemes a vehicle keeps a set
of packets; at the end of each V2V phase it solves for whatever the phase
let it decode and discards the rest.

All randomness is derived from ``(master_seed, trial)``.  The RSU and V2V
layers draw from separate streams so that trials with the same seed see the
same RSU behaviour under every V2V scheme whenever the RSU does not react to
vehicle state (random and network-coding schemes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Iterable, Sequence

import numpy as np

from .cluster import ClusterConfig, SideInformation, build_encoder
from .exchange import run_information_exchange
from .gf import GF, Subspace, field

RSU_SCHEMES = ("random", "feedback", "network_coding")
V2V_SCHEMES = ("none", "uncoded", "algorithm1", "matrix_L", "explicit_ic")
CAPTURE_MODES = ("fixed", "random")

# Round-local transmissions of the K=4, l=4, n=8 example (one list per vehicle).
FOUR_VEHICLE_KNOWN = ((0, 1, 2, 3), (2, 3, 4, 5), (3, 4, 5, 6), (4, 5, 6, 7))
FOUR_VEHICLE_CODE = (
    ((0, 2), (1, 3)),
    ((2, 4),),
    ((3, 5),),
    ((6, 4), (7, 5)),
)


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulated scenario.

    ``v2v_budget=None`` means unlimited (perfect V2V).  ``known_sets`` fixes
    the capture windows as round-local indices and overrides the layout
    implied by ``cluster``; ``explicit_code`` lists, per vehicle, the
    round-local packets summed by each of its transmissions.
    """

    file_size_packets: int
    cluster: ClusterConfig
    rsu_scheme: str = "network_coding"
    v2v_scheme: str = "matrix_L"
    v2v_budget: int | None = None
    overlap_enabled: bool = True
    capture: str = "fixed"
    known_sets: tuple[tuple[int, ...], ...] | None = None
    explicit_code: tuple[tuple[tuple[int, ...], ...], ...] | None = None
    trials: int = 1
    master_seed: int = 0
    q: int = 256
    max_rounds: int | None = None

    def __post_init__(self):
        c = self.cluster
        if self.rsu_scheme not in RSU_SCHEMES:
            raise ValueError(f"rsu_scheme must be one of {RSU_SCHEMES}, got {self.rsu_scheme!r}")
        if self.v2v_scheme not in V2V_SCHEMES:
            raise ValueError(f"v2v_scheme must be one of {V2V_SCHEMES}, got {self.v2v_scheme!r}")
        if self.capture not in CAPTURE_MODES:
            raise ValueError(f"capture must be one of {CAPTURE_MODES}, got {self.capture!r}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.v2v_budget is not None and self.v2v_budget < 0:
            raise ValueError(f"v2v_budget must be >= 0, got {self.v2v_budget}")
        if self.master_seed < 0:
            raise ValueError(f"master_seed must be non-negative, got {self.master_seed}")
        if self.file_size_packets < 1:
            raise ValueError("file_size_packets must be >= 1")
        if self.rsu_scheme != "network_coding" and self.file_size_packets < c.n:
            raise ValueError(
                f"file_size_packets={self.file_size_packets} is smaller than the {c.n} packets sent per round"
            )
        if self.known_sets is not None:
            known = tuple(tuple(int(x) for x in k) for k in self.known_sets)
            if len(known) != c.K:
                raise ValueError(f"known_sets lists {len(known)} vehicles, cluster has K={c.K}")
            if any(not 0 <= x < c.n for k in known for x in k):
                raise ValueError(f"known_sets refer to transmissions outside [0, {c.n})")
            object.__setattr__(self, "known_sets", known)
        elif self.capture == "fixed":
            if self.overlap_enabled and c.n != c.expected_n:
                raise ValueError(f"n={c.n} does not match K(l-i)+i = {c.expected_n}")
            if not self.overlap_enabled and c.n < c.K * c.l:
                raise ValueError(f"disjoint capture needs n >= K*l = {c.K * c.l}, got n={c.n}")
        elif c.n < c.l:
            raise ValueError(f"window of {c.l} does not fit in n={c.n}")
        if self.v2v_scheme == "matrix_L" and (self.known_sets is not None or self.capture != "fixed"):
            raise ValueError("matrix_L needs the fixed equal-overlap capture layout")
        if self.v2v_scheme == "explicit_ic":
            if self.explicit_code is None:
                raise ValueError("explicit_ic needs explicit_code")
            code = tuple(tuple(tuple(int(x) for x in t) for t in vehicle) for vehicle in self.explicit_code)
            if len(code) != c.K:
                raise ValueError(f"explicit_code lists {len(code)} vehicles, cluster has K={c.K}")
            object.__setattr__(self, "explicit_code", code)
        field(self.q)

    @property
    def round_cap(self) -> int:
        if self.max_rounds is not None:
            return self.max_rounds
        return 10 * math.ceil(self.file_size_packets / self.cluster.n)

    @property
    def coded_rsu(self) -> bool:
        return self.rsu_scheme == "network_coding"


@dataclass
class TrialState:
    """Per-vehicle knowledge during one trial."""

    cfg: ScenarioConfig
    held: np.ndarray | None = None
    spaces: list[Subspace] | None = None

    @classmethod
    def fresh(cls, cfg: ScenarioConfig) -> TrialState:
        K, F = cfg.cluster.K, cfg.file_size_packets
        if cfg.coded_rsu:
            return cls(cfg, spaces=[Subspace(F, cfg.q) for _ in range(K)])
        return cls(cfg, held=np.zeros((K, F), dtype=bool))

    def amount(self, m: int) -> int:
        return self.spaces[m].dim if self.spaces is not None else int(self.held[m].sum())

    def fractions(self) -> np.ndarray:
        F = self.cfg.file_size_packets
        return np.array([self.amount(m) / F for m in range(self.cfg.cluster.K)])

    def vehicle_done(self, m: int) -> bool:
        return self.amount(m) == self.cfg.file_size_packets

    def done(self) -> bool:
        return all(self.vehicle_done(m) for m in range(self.cfg.cluster.K))


@dataclass
class RoundBroadcast:
    """What the RSU sent this round and what each vehicle caught.

    ``packets[t]`` is the file packet of transmission ``t`` (uncoded
    schemes); ``coefficients`` holds the n x F coding matrix (NC scheme).
    """

    windows: tuple[tuple[int, ...], ...]
    packets: np.ndarray | None = None
    coefficients: np.ndarray | None = None


def _windows(cfg: ScenarioConfig, rng: np.random.Generator) -> tuple[tuple[int, ...], ...]:
    c = cfg.cluster
    if cfg.known_sets is not None:
        return cfg.known_sets
    if cfg.capture == "random":
        starts = rng.integers(0, c.n - c.l + 1, size=c.K)
        return tuple(tuple(range(int(s), int(s) + c.l)) for s in starts)
    step = c.step if cfg.overlap_enabled else c.l
    return tuple(tuple(range(m * step, m * step + c.l)) for m in range(c.K))


def rsu_broadcast(state: TrialState, cfg: ScenarioConfig, rng: np.random.Generator) -> RoundBroadcast:
    """One R2V phase: emit ``n`` transmissions and let each vehicle capture its window."""
    n, F = cfg.cluster.n, cfg.file_size_packets
    windows = _windows(cfg, rng)
    if cfg.rsu_scheme == "network_coding":
        T = field(cfg.q).random((n, F), rng)
        for m, w in enumerate(windows):
            for t in w:
                state.spaces[m].add(T[t])
        return RoundBroadcast(windows, coefficients=T)
    if cfg.rsu_scheme == "random":
        packets = rng.choice(F, size=n, replace=False)
    else:
        missing = np.nonzero(~state.held.all(axis=0))[0]
        packets = missing[:n]
        if packets.size < n:
            chosen = set(packets.tolist())
            pad = [p for p in range(F) if p not in chosen][: n - packets.size]
            packets = np.concatenate([packets, np.array(pad, dtype=packets.dtype)])
    packets = packets.astype(np.int64)
    for m, w in enumerate(windows):
        state.held[m, packets[list(w)]] = True
    return RoundBroadcast(windows, packets=packets)


# -- V2V schedules (round-local coefficient vectors) ----------------------------


def _unit(n: int, idx: Iterable[int]) -> np.ndarray:
    v = np.zeros(n, dtype=np.uint8)
    for j in idx:
        v[j] = 1
    return v


def _round_robin(per_vehicle: Sequence[list[np.ndarray]]) -> list[tuple[int, np.ndarray]]:
    out = []
    depth = max((len(v) for v in per_vehicle), default=0)
    for r in range(depth):
        for m, rows in enumerate(per_vehicle):
            if r < len(rows):
                out.append((m, rows[r]))
    return out


def _uncoded_schedule(windows, n: int) -> list[tuple[int, np.ndarray]]:
    K = len(windows)
    universe = set().union(*map(set, windows))
    holders = [set(w) for w in windows]
    sent: set[int] = set()
    out = []
    pending = {t for t in universe if not all(t in h for h in holders)}
    while pending:
        progressed = False
        for m in range(K):
            choices = sorted(t for t in holders[m] if t in pending)
            if not choices:
                continue
            t = choices[0]
            out.append((m, _unit(n, [t])))
            pending.discard(t)
            sent.add(t)
            progressed = True
        if not progressed:
            break
    return out


def _matrix_l_schedule(cfg: ScenarioConfig, windows, n: int) -> list[tuple[int, np.ndarray]]:
    c = cfg.cluster
    if not cfg.overlap_enabled or c.i == 0:
        return _round_robin([[_unit(n, [t]) for t in w] for w in windows])
    if c.i == c.l:
        return []
    L = build_encoder(c.l, c.i)
    per_vehicle = []
    for w in windows:
        rows = []
        for r in range(L.shape[0]):
            v = np.zeros(n, dtype=np.uint8)
            v[list(w)] = L[r]
            rows.append(v)
        per_vehicle.append(rows)
    return _round_robin(per_vehicle)


def _explicit_schedule(cfg: ScenarioConfig, n: int) -> list[tuple[int, np.ndarray]]:
    return _round_robin([[_unit(n, t) for t in vehicle] for vehicle in cfg.explicit_code])


def _algorithm1_schedule(cfg: ScenarioConfig, windows, n: int, rng) -> list[tuple[int, np.ndarray, int]]:
    universe = sorted(set().union(*map(set, windows)))
    local = {t: j for j, t in enumerate(universe)}
    side = SideInformation.from_sets(len(universe), [[local[t] for t in w] for w in windows])
    q = cfg.q if cfg.coded_rsu else 2
    fallback = None if cfg.coded_rsu else 256
    seed = int(rng.integers(0, 2**31 - 1))
    out = []
    for tx in run_information_exchange(side, q=q, seed=seed, fallback_q=fallback):
        v = np.zeros(n, dtype=np.uint8)
        v[universe] = tx.coefficients
        out.append((tx.sender, v, tx.q))
    return out


def v2v_schedule(cfg: ScenarioConfig, windows, rng: np.random.Generator) -> list[tuple[int, np.ndarray, int]]:
    """The untruncated V2V transmission list as (sender, local vector, field order)."""
    n = cfg.cluster.n
    nc_q = cfg.q if cfg.coded_rsu else 2
    if cfg.v2v_scheme == "none":
        return []
    if cfg.v2v_scheme == "algorithm1":
        return _algorithm1_schedule(cfg, windows, n, rng)
    if cfg.v2v_scheme == "uncoded":
        plan = _uncoded_schedule(windows, n)
    elif cfg.v2v_scheme == "matrix_L":
        plan = _matrix_l_schedule(cfg, windows, n)
    else:
        plan = _explicit_schedule(cfg, n)
    return [(m, v, nc_q) for m, v in plan]


def v2v_phase(
    state: TrialState,
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    broadcast: RoundBroadcast,
) -> list[tuple[int, np.ndarray, int]]:
    """Run one V2V phase in place; returns the transmissions actually sent."""
    plan = v2v_schedule(cfg, broadcast.windows, rng)
    if cfg.v2v_budget is not None:
        plan = plan[: cfg.v2v_budget]
    if not plan:
        return plan
    K, n = cfg.cluster.K, cfg.cluster.n
    if cfg.coded_rsu:
        # Reduce in the round-local space first; only directions new to the
        # vehicle's own captures are lifted into the file space.
        f = field(cfg.q)
        # 0/1 vectors have the same rank over GF(2) as over any field of
        # characteristic two, so the cheap bit-packed path is exact there.
        binary = f.char2 and all(np.all(v <= 1) for _, v, _ in plan)
        local_field = field(2) if binary else f
        for m in range(K):
            if state.vehicle_done(m):
                continue
            local = Subspace(n, local_field, [_unit(n, [t]) for t in broadcast.windows[m]])
            fresh = [v for sender, v, _ in plan if sender != m and local.add(v)]
            if fresh:
                for vec in f.matmul(np.stack(fresh), broadcast.coefficients):
                    state.spaces[m].add(vec)
        return plan
    f = field(max(q for _, _, q in plan))
    packets = broadcast.packets
    for m in range(K):
        local = Subspace(n, f)
        for t in range(n):
            if state.held[m, packets[t]]:
                local.add(_unit(n, [t]))
        for _, v, _ in plan:
            local.add(v)
        for t in range(n):
            if not state.held[m, packets[t]] and local.contains(_unit(n, [t])):
                state.held[m, packets[t]] = True
    return plan


# -- trials ----------------------------------------------------------------------


def trial_streams(master_seed: int, trial: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (RSU, V2V) generators for one trial."""
    rsu = np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trial, 0)))
    v2v = np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trial, 1)))
    return rsu, v2v


@dataclass
class TrialResult:
    trial: int
    rounds: int | None
    trajectory: list[np.ndarray] = dc_field(default_factory=list)
    v2v_counts: list[int] = dc_field(default_factory=list)
    error: str | None = None

    @property
    def completed(self) -> bool:
        return self.rounds is not None


@dataclass
class SimulationResult:
    config: ScenarioConfig
    trials: list[TrialResult]

    @property
    def rounds(self) -> list[int | None]:
        return [t.rounds for t in self.trials]

    @property
    def completed(self) -> bool:
        return all(t.completed for t in self.trials)

    @property
    def mean(self) -> float | None:
        """Mean rounds-to-complete, or None if any trial hit the round cap."""
        if not self.completed:
            return None
        return float(np.mean(self.rounds))


def run_trial(cfg: ScenarioConfig, trial: int) -> TrialResult:
    rsu_rng, v2v_rng = trial_streams(cfg.master_seed, trial)
    state = TrialState.fresh(cfg)
    result = TrialResult(trial, None)
    for r in range(1, cfg.round_cap + 1):
        broadcast = rsu_broadcast(state, cfg, rsu_rng)
        sent = v2v_phase(state, cfg, v2v_rng, broadcast)
        result.trajectory.append(state.fractions())
        result.v2v_counts.append(len(sent))
        if state.done():
            result.rounds = r
            return result
    result.error = f"not complete after {cfg.round_cap} rounds"
    return result


def simulate(cfg: ScenarioConfig) -> SimulationResult:
    return SimulationResult(cfg, [run_trial(cfg, t) for t in range(cfg.trials)])


def sweep(cfg: ScenarioConfig, parameter: str, values: Iterable) -> list[tuple[object, SimulationResult]]:
    """Re-run ``cfg`` with one field (e.g. ``v2v_budget``, ``file_size_packets``) varied."""
    return [(v, simulate(replace(cfg, **{parameter: v}))) for v in values]


def compare_schemes(cfg: ScenarioConfig, schemes: Sequence[str]) -> dict[str, SimulationResult]:
    """Paired-seed comparison of several V2V schemes on the same scenario."""
    return {s: simulate(replace(cfg, v2v_scheme=s)) for s in schemes}


# -- CSV helpers -----------------------------------------------------------------


def rounds_rows(results: dict[str, SimulationResult]) -> list[list[object]]:
    rows: list[list[object]] = [["scheme", "trial", "rounds"]]
    for scheme, res in results.items():
        for t in res.trials:
            rows.append([scheme, t.trial, "" if t.rounds is None else t.rounds])
    return rows


def trajectory_rows(results: dict[str, SimulationResult]) -> list[list[object]]:
    rows: list[list[object]] = [["scheme", "trial", "round", "vehicle", "fraction_complete", "v2v_transmissions"]]
    for scheme, res in results.items():
        for t in res.trials:
            for r, (fracs, count) in enumerate(zip(t.trajectory, t.v2v_counts), start=1):
                for m, frac in enumerate(fracs):
                    rows.append([scheme, t.trial, r, m, f"{frac:.6f}", count])
    return rows
