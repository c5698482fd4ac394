"""Lower bounds and exhaustive oracles for index coding problems.

The oracles (generalized independence number, binary min-rank) are exact
exponential searches with explicit size guards; they certify the optimality
of the equal-overlap code on small instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cluster import ClusterConfig, SideInformation

GIN_MAX_MESSAGES = 20
MINRANK_MAX_SIDE = 26


class SizeGuardExceeded(ValueError):
    """The instance is too large for an exhaustive oracle."""


@dataclass(frozen=True)
class Receiver:
    demand: int
    side: frozenset[int]


@dataclass(frozen=True)
class IndexCodingProblem:
    """Single-sender problem over messages ``0..n-1`` with single-demand receivers.

    ``labels[j]`` is the global packet index of local message ``j`` and
    ``owners[r]`` the vehicle behind receiver ``r`` (both optional).
    """

    n: int
    receivers: tuple[Receiver, ...]
    labels: tuple[int, ...] | None = None
    owners: tuple[int, ...] | None = None

    def __post_init__(self):
        for r in self.receivers:
            if r.demand in r.side:
                raise ValueError(f"receiver demands message {r.demand} it already holds")
            if not 0 <= r.demand < self.n or any(not 0 <= x < self.n for x in r.side):
                raise ValueError("receiver refers to a message outside the message set")

    @classmethod
    def from_demands(cls, n: int, receivers: Sequence[tuple[int | Sequence[int], Sequence[int]]], **kw):
        """Build from ``(demands, side)`` pairs, splitting multi-demand receivers."""
        out = []
        for demands, side in receivers:
            demands = [demands] if isinstance(demands, (int, np.integer)) else list(demands)
            out.extend(Receiver(int(d), frozenset(int(x) for x in side)) for d in demands)
        return cls(n, tuple(out), **kw)

    def interfering(self, r: int) -> frozenset[int]:
        rec = self.receivers[r]
        return frozenset(range(self.n)) - rec.side - {rec.demand}

    def to_global(self, local: Sequence[int]) -> tuple[int, ...]:
        if self.labels is None:
            return tuple(local)
        return tuple(self.labels[j] for j in local)


# -- cluster-level bounds -------------------------------------------------------


def innovative_sets(side: SideInformation) -> tuple[frozenset[int], ...]:
    """Packets each vehicle holds that no other vehicle holds."""
    sets = [set(k) for k in side.known]
    out = []
    for m, k in enumerate(sets):
        others = set().union(*(s for j, s in enumerate(sets) if j != m))
        out.append(frozenset(k - others))
    return tuple(out)


def v2v_lower_bound(side: SideInformation) -> int:
    """n - l + max_m |N_m| for equal capabilities l."""
    sizes = set(side.sizes())
    if len(sizes) != 1:
        raise ValueError(f"bound needs equal download capabilities, got sizes {sorted(sizes)}")
    l = sizes.pop()
    return side.n - l + max(len(s) for s in innovative_sets(side))


def equal_overlap_lower_bound(cfg: ClusterConfig) -> int:
    return cfg.n - cfg.i


def data_exchange_bounds(side: SideInformation) -> tuple[int, int]:
    """Lower and upper bounds on cooperative data exchange transmissions.

    lower = n - n_min, plus one when every vehicle holds exactly n_min < n
    packets; upper = min_i (|complement K_i| + max_j |complement K_j & K_i|).
    """
    n = side.n
    if not side.covers_all():
        raise ValueError("side information does not cover every packet")
    sizes = side.sizes()
    n_min = min(sizes)
    lower = n - n_min
    if len(set(sizes)) == 1 and n_min < n:
        lower += 1
    sets = [set(k) for k in side.known]
    upper = min(
        (n - len(ki)) + max(len(ki - kj) for kj in sets)
        for ki in sets
    )
    return lower, upper


def per_transmitter_subproblem(side: SideInformation, m: int) -> IndexCodingProblem:
    """The problem seen while vehicle ``m`` transmits to its neighbours.

    Messages are the packets of vehicle ``m`` (re-indexed in increasing
    global order); each neighbour demands what it lacks of them and knows
    the rest.
    """
    window = side.known[m]
    local = {x: j for j, x in enumerate(window)}
    receivers, owners = [], []
    for j in (m - 1, m + 1):
        if not 0 <= j < side.K:
            continue
        held = set(side.known[j])
        known_here = frozenset(local[x] for x in window if x in held)
        for x in window:
            if x not in held:
                receivers.append(Receiver(local[x], known_here))
                owners.append(j)
    return IndexCodingProblem(len(window), tuple(receivers), labels=tuple(window), owners=tuple(owners))


# -- exhaustive oracles ---------------------------------------------------------


def _masks(p: IndexCodingProblem) -> list[tuple[int, int]]:
    out = []
    for r in p.receivers:
        side = 0
        for x in r.side:
            side |= 1 << x
        out.append((1 << r.demand, side))
    return out


def _in_j(masks: list[tuple[int, int]], H: int) -> bool:
    return any(H & d and not H & s for d, s in masks)


def is_generalized_independent(p: IndexCodingProblem, H: Sequence[int]) -> bool:
    """Every non-empty subset of ``H`` is a demand plus interfering messages."""
    masks = _masks(p)
    items = [1 << x for x in set(H)]
    for k in range(1, 1 << len(items)):
        S = 0
        for b, bit in enumerate(items):
            if (k >> b) & 1:
                S |= bit
        if not _in_j(masks, S):
            return False
    return True


def gen_independence_number(p: IndexCodingProblem) -> int:
    """Size of the largest generalized independent set (exhaustive)."""
    n = p.n
    if n > GIN_MAX_MESSAGES:
        raise SizeGuardExceeded(f"{n} messages exceed the guard of {GIN_MAX_MESSAGES}")
    if n == 0 or not p.receivers:
        return 0
    all_masks = np.arange(1 << n, dtype=np.int64)
    in_j = np.zeros(1 << n, dtype=bool)
    for d, s in _masks(p):
        in_j |= ((all_masks & d) != 0) & ((all_masks & s) == 0)
    popcount = np.zeros(1 << n, dtype=np.int64)
    for b in range(n):
        popcount += (all_masks >> b) & 1
    good = np.zeros(1 << n, dtype=bool)
    good[0] = True
    best = 0
    for k in range(1, n + 1):
        layer = all_masks[popcount == k]
        ok = in_j[layer].copy()
        for b in range(n):
            has = (layer >> b) & 1 == 1
            ok[has] &= good[layer[has] ^ (1 << b)]
        good[layer] = ok
        if not ok.any():
            break
        best = k
    return best


def min_rank_bruteforce(p: IndexCodingProblem, q: int = 2) -> int:
    """Binary min-rank: the shortest scalar linear index code.

    Depth-first over receivers in order.  Any completion that stays inside
    the current span dominates ones that leave it, and completions leaving
    it are explored once per coset; branches that cannot beat the best rank
    found so far are cut.
    """
    if q != 2:
        raise ValueError("min-rank is only computed over GF(2)")
    total_side = sum(len(r.side) for r in p.receivers)
    if total_side > MINRANK_MAX_SIDE:
        raise SizeGuardExceeded(f"total side information {total_side} exceeds the guard of {MINRANK_MAX_SIDE}")
    receivers = [(r.demand, sorted(r.side)) for r in p.receivers]
    best = [len(receivers)]

    def reduce(v: int, basis: dict[int, int]) -> int:
        for piv, row in basis.items():
            if (v >> piv) & 1:
                v ^= row
        return v

    def insert(v: int, basis: dict[int, int]) -> dict[int, int]:
        piv = (v & -v).bit_length() - 1
        out = {q_: (row ^ v if (row >> piv) & 1 else row) for q_, row in basis.items()}
        out[piv] = v
        return out

    def dfs(idx: int, basis: dict[int, int]) -> None:
        r = len(basis)
        if r >= best[0]:
            return
        if idx == len(receivers):
            best[0] = r
            return
        demand, side = receivers[idx]
        # Candidate rows are e_demand + (any combination of side unit vectors);
        # modulo the current span they form an affine space.
        offset = reduce(1 << demand, basis)
        directions: dict[int, int] = {}
        for x in side:
            v = reduce(1 << x, basis)
            for piv, row in directions.items():
                if (v >> piv) & 1:
                    v ^= row
            if v:
                piv = (v & -v).bit_length() - 1
                directions = {q_: (row ^ v if (row >> piv) & 1 else row) for q_, row in directions.items()}
                directions[piv] = v
        residual = offset
        for piv, row in directions.items():
            if (residual >> piv) & 1:
                residual ^= row
        if residual == 0:
            dfs(idx + 1, basis)
            return
        if r + 1 >= best[0]:
            return
        rows = list(directions.values())
        seen = set()
        for k in range(1 << len(rows)):
            v = offset
            for b, row in enumerate(rows):
                if (k >> b) & 1:
                    v ^= row
            v = reduce(v, basis)
            if v in seen:
                continue
            seen.add(v)
            dfs(idx + 1, insert(v, basis))

    dfs(0, {})
    return best[0]


def ecic_length_bounds(p: IndexCodingProblem, delta: int, q: int = 2) -> tuple[int, int]:
    """The alpha- and kappa-bounds on the optimal delta-error-correcting length."""
    from .ecic import optimal_length

    alpha = gen_independence_number(p)
    kappa = min_rank_bruteforce(p, 2)
    d = 2 * delta + 1
    return optimal_length(alpha, d, q), optimal_length(kappa, d, q)


def bounds_report(side: SideInformation, cfg: ClusterConfig | None = None, *, oracles: bool = True) -> dict:
    """Everything the bounds module knows about one cluster, JSON-ready."""
    innov = innovative_sets(side)
    lower, upper = data_exchange_bounds(side)
    report: dict = {
        "n": side.n,
        "K": side.K,
        "innovative_sizes": [len(s) for s in innov],
        "data_exchange_lower": lower,
        "data_exchange_upper": upper,
    }
    if len(set(side.sizes())) == 1:
        report["v2v_lower_bound"] = v2v_lower_bound(side)
    if cfg is not None:
        report["equal_overlap_lower_bound"] = equal_overlap_lower_bound(cfg)
    if oracles:
        vehicles = []
        for m in range(side.K):
            sub = per_transmitter_subproblem(side, m)
            vehicles.append(
                {
                    "vehicle": m,
                    "messages": list(sub.labels),
                    "receivers": len(sub.receivers),
                    "alpha": gen_independence_number(sub),
                    "kappa": min_rank_bruteforce(sub),
                }
            )
        report["vehicles"] = vehicles
    return report
