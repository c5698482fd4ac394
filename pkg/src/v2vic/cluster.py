"""Cluster model and the optimal equal-overlap index code.

Vehicles and packets are indexed from zero.  Vehicle ``m`` of an
equal-overlap cluster holds the window ``m*(l-i) .. m*(l-i)+l-1``; adjacent
windows share ``i`` packets and the last window ends at packet ``n-1``.

Each vehicle broadcasts ``c = L x`` where row ``r`` of ``L`` adds packets
``r`` and ``r+i`` of its window.  A right-hand neighbour knows the last ``i``
packets of the window, a left-hand neighbour the first ``i``; either one
recovers the whole window, and decoding chains outward from there.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

import numpy as np

from .gf import GF, GF2, NoSolution, identity, solve


class InconsistentSystem(ValueError):
    """Received payloads contradict the decoding system."""


@dataclass(frozen=True)
class ClusterConfig:
    """K vehicles of download capability l with adjacent overlap i."""

    K: int
    l: int
    i: int
    n: int | None = None

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.l < 1:
            raise ValueError(f"l must be >= 1, got {self.l}")
        if not 0 <= self.i <= self.l:
            raise ValueError(f"overlap i must lie in [0, l], got i={self.i}, l={self.l}")
        if self.n is None:
            object.__setattr__(self, "n", self.expected_n)

    @property
    def expected_n(self) -> int:
        return self.K * (self.l - self.i) + self.i

    @property
    def step(self) -> int:
        return self.l - self.i

    def window(self, m: int) -> range:
        start = m * self.step
        return range(start, start + self.l)


@dataclass(frozen=True)
class SideInformation:
    """Per-vehicle known sets over the packet indices ``0..n-1``."""

    n: int
    known: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        known = tuple(tuple(sorted(set(int(x) for x in k))) for k in self.known)
        for m, k in enumerate(known):
            if k and not (0 <= k[0] and k[-1] < self.n):
                raise ValueError(f"vehicle {m} knows a packet outside [0, {self.n})")
        object.__setattr__(self, "known", known)

    @classmethod
    def from_sets(cls, n: int, sets: Iterable[Iterable[int]]) -> SideInformation:
        return cls(n, tuple(tuple(s) for s in sets))

    @property
    def K(self) -> int:
        return len(self.known)

    def want(self, m: int) -> tuple[int, ...]:
        held = set(self.known[m])
        return tuple(x for x in range(self.n) if x not in held)

    def overlap(self, j: int) -> tuple[int, ...]:
        """Packets shared by vehicles ``j`` and ``j+1``."""
        return tuple(sorted(set(self.known[j]) & set(self.known[j + 1])))

    def covers_all(self) -> bool:
        return set().union(*map(set, self.known)) == set(range(self.n))

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(k) for k in self.known)


@dataclass(frozen=True, eq=False)
class CodedTransmission:
    """One broadcast: global coefficient vector plus (optionally) its payload.

    ``q`` records the field the coefficients live in.
    """

    sender: int
    coefficients: np.ndarray
    payload: np.ndarray | None = None
    q: int = 2
    meta: dict = dc_field(default_factory=dict)

    def support(self) -> tuple[int, ...]:
        return tuple(int(j) for j in np.nonzero(self.coefficients)[0])


def layout_side_information(cfg: ClusterConfig) -> SideInformation:
    """Consecutive, equally staggered windows of the equal-overlap case."""
    if cfg.n != cfg.expected_n:
        raise ValueError(
            f"n={cfg.n} is inconsistent with K(l-i)+i = {cfg.expected_n} for "
            f"K={cfg.K}, l={cfg.l}, i={cfg.i}"
        )
    return SideInformation(cfg.n, tuple(tuple(cfg.window(m)) for m in range(cfg.K)))


def _check_coded_overlap(l: int, i: int) -> None:
    if i == 0:
        raise ValueError("i=0 has no overlap to exploit; the encoding matrix would be zero over GF(2)")
    if i >= l:
        raise ValueError(f"i={i} >= l={l} leaves nothing to transmit")
    if i < 0:
        raise ValueError(f"negative overlap i={i}")


def build_encoder(l: int, i: int) -> np.ndarray:
    """The (l-i) x l encoding matrix: row r has ones at columns r and r+i."""
    _check_coded_overlap(l, i)
    L = np.zeros((l - i, l), dtype=np.uint8)
    r = np.arange(l - i)
    L[r, r] = 1
    L[r, r + i] = 1
    return L


def build_right_decoder(l: int, i: int) -> np.ndarray:
    """Decoder used by the left-hand neighbour: first i unit rows above L."""
    return np.vstack([identity(l)[:i], build_encoder(l, i)])


def build_left_decoder(l: int, i: int) -> np.ndarray:
    """Decoder used by the right-hand neighbour: L above the last i unit rows."""
    return np.vstack([build_encoder(l, i), identity(l)[l - i:]])


def _payload_rows(block) -> np.ndarray:
    block = np.asarray(block, dtype=np.uint8)
    if block.ndim == 1:
        block = block[:, None]
    return block


def encode_block(
    L: np.ndarray,
    block,
    *,
    indices: Sequence[int] | None = None,
    n: int | None = None,
    sender: int = 0,
    f: GF = GF2,
) -> list[CodedTransmission]:
    """Encode one vehicle's packets ``block`` (l rows of S symbols) with ``L``.

    ``indices`` are the global packet indices of the block rows; coefficient
    vectors are expressed over ``0..n-1``.  Without ``indices`` the block is
    taken to occupy positions ``0..l-1`` of a length-``l`` index space.
    """
    if isinstance(block, (list, tuple)):
        lengths = {np.asarray(p).reshape(-1).shape[0] for p in block}
        if len(lengths) > 1:
            raise ValueError(f"packets have differing payload lengths {sorted(lengths)}")
        block = np.stack([np.asarray(p, dtype=np.uint8).reshape(-1) for p in block])
    block = _payload_rows(block)
    L = np.asarray(L, dtype=np.uint8)
    if block.shape[0] != L.shape[1]:
        raise ValueError(f"block has {block.shape[0]} packets, encoder expects {L.shape[1]}")
    if indices is None:
        indices = range(L.shape[1])
    indices = list(indices)
    if n is None:
        n = max(indices) + 1
    payloads = f.matmul(L, block)
    out = []
    for r in range(L.shape[0]):
        coeffs = np.zeros(n, dtype=np.uint8)
        coeffs[indices] = L[r]
        out.append(CodedTransmission(sender, coeffs, payloads[r], q=f.q))
    return out


def encode_cluster(cfg: ClusterConfig, packets, f: GF = GF2) -> list[CodedTransmission]:
    """Every vehicle's transmissions for the global packet array ``packets``."""
    side = layout_side_information(cfg)
    packets = _payload_rows(packets)
    L = build_encoder(cfg.l, cfg.i)
    out: list[CodedTransmission] = []
    for m, window in enumerate(side.known):
        out.extend(encode_block(L, packets[list(window)], indices=window, n=cfg.n, sender=m, f=f))
    return out


def decode_from_neighbor(direction: str, side, coded, f: GF = GF2) -> np.ndarray:
    """Recover a neighbour's full window from its ``l-i`` coded payloads.

    ``direction='right'``: the receiver sits to the left and ``side`` holds
    the first ``i`` packets of the window.  ``direction='left'``: the receiver
    sits to the right and ``side`` holds the last ``i`` packets.
    """
    side = _payload_rows(side)
    if isinstance(coded, (list, tuple)) and coded and isinstance(coded[0], CodedTransmission):
        coded = np.stack([np.asarray(t.payload).reshape(-1) for t in coded])
    coded = _payload_rows(coded)
    if side.shape[1:] != coded.shape[1:]:
        raise ValueError("side packets and coded payloads differ in length")
    i, l = side.shape[0], side.shape[0] + coded.shape[0]
    if direction == "right":
        P = build_right_decoder(l, i)
        y = np.vstack([side, coded])
    elif direction == "left":
        P = build_left_decoder(l, i)
        y = np.vstack([coded, side])
    else:
        raise ValueError(f"direction must be 'left' or 'right', got {direction!r}")
    try:
        return solve(P, y, f)
    except NoSolution as exc:
        raise InconsistentSystem(str(exc)) from exc


def _group_by_sender(transmissions: Iterable[CodedTransmission]) -> dict[int, list[CodedTransmission]]:
    grouped: dict[int, list[CodedTransmission]] = {}
    for t in transmissions:
        grouped.setdefault(t.sender, []).append(t)
    return grouped


def decode_cluster(
    cfg: ClusterConfig,
    side: SideInformation,
    transmissions: Iterable[CodedTransmission],
    packets,
    f: GF = GF2,
) -> dict[int, np.ndarray]:
    """Each vehicle's reconstruction of all ``n`` packets.

    ``packets`` is the global packet array; vehicle ``m`` only ever reads the
    rows listed in ``side.known[m]``.  Every vehicle walks outward from its
    own window one neighbour at a time.
    """
    packets = _payload_rows(packets)
    by_sender = _group_by_sender(transmissions)
    K, i = cfg.K, cfg.i
    windows = [list(w) for w in side.known]
    for m in range(K):
        sent = len(by_sender.get(m, []))
        if sent != cfg.l - i:
            raise InconsistentSystem(f"vehicle {m} sent {sent} transmissions, expected {cfg.l - i}")
    result = {}
    for v in range(K):
        have: dict[int, np.ndarray] = {x: packets[x] for x in windows[v]}
        for m in range(v + 1, K):
            first = [have[x] for x in windows[m][:i]]
            x_m = decode_from_neighbor("right", np.stack(first), by_sender[m], f)
            have.update(zip(windows[m], x_m))
        for m in range(v - 1, -1, -1):
            last = [have[x] for x in windows[m][-i:]]
            x_m = decode_from_neighbor("left", np.stack(last), by_sender[m], f)
            have.update(zip(windows[m], x_m))
        missing = [x for x in range(cfg.n) if x not in have]
        if missing:
            raise InconsistentSystem(f"vehicle {v} could not recover packets {missing}")
        result[v] = np.stack([have[x] for x in range(cfg.n)])
    return result
