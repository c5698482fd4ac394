"""Error-correcting index codes by concatenation with a classical code.

Each vehicle first forms its ``l-i`` index-coded symbols ``c = L x`` and then
broadcasts the outer-code codeword ``G^T c`` (``N`` transmissions).  A
receiver corrects up to ``delta`` corrupted transmissions per block by
nearest-codeword search, symbol position by symbol position, and then
decodes as in the error-free case.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cluster import (
    ClusterConfig,
    CodedTransmission,
    SideInformation,
    build_encoder,
    decode_cluster,
    decode_from_neighbor,
    layout_side_information,
)
from .gf import GF, field, rank

MAX_CODEBOOK = 1 << 16

# The [6, 3, 3] binary generator used for single-error correction of k=3.
SIX_THREE_THREE = np.array(
    [
        [1, 0, 0, 1, 1, 0],
        [0, 1, 0, 1, 0, 1],
        [0, 0, 1, 0, 1, 1],
    ],
    dtype=np.uint8,
)


class UnknownParameters(LookupError):
    """No embedded optimal code for the requested (k, d, q)."""


class DecodingAmbiguity(ValueError):
    """Two or more codewords are nearest to the received word."""


def _codebook(G: np.ndarray, f: GF) -> tuple[np.ndarray, np.ndarray]:
    k = G.shape[0]
    if f.q**k > MAX_CODEBOOK:
        raise ValueError(f"codebook of size {f.q}^{k} is too large to enumerate")
    messages = np.array(list(itertools.product(range(f.q), repeat=k)), dtype=np.uint8).reshape(-1, k)
    return messages, f.matmul(messages, G)


def minimum_distance(G, q: int = 2) -> int:
    """Minimum nonzero codeword weight, by enumerating every message."""
    G = np.asarray(G, dtype=np.uint8)
    messages, words = _codebook(G, field(q))
    weights = np.count_nonzero(words, axis=1)[np.any(messages != 0, axis=1)]
    return int(weights.min()) if weights.size else 0


@dataclass(frozen=True, eq=False)
class ClassicalCode:
    """A linear [N, k, d] code over GF(q) given by its k x N generator."""

    generator: np.ndarray
    q: int = 2
    d: int = 0

    def __post_init__(self):
        G = np.array(self.generator, dtype=np.uint8, copy=True)
        if G.ndim != 2:
            raise ValueError("generator must be a matrix")
        if np.any(G >= self.q):
            raise ValueError(f"generator entries must lie in GF({self.q})")
        if rank(G, self.q) != G.shape[0]:
            raise ValueError("generator rows are linearly dependent")
        object.__setattr__(self, "generator", G)
        object.__setattr__(self, "d", minimum_distance(G, self.q))

    @property
    def k(self) -> int:
        return self.generator.shape[0]

    @property
    def N(self) -> int:
        return self.generator.shape[1]

    @classmethod
    def from_file(cls, path: str | Path, q: int = 2) -> ClassicalCode:
        """Read a generator written as rows of whitespace-separated digits."""
        rows = []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([int(tok) for tok in line.split()])
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError(f"{path}: generator rows must be non-empty and of equal length")
        return cls(np.array(rows, dtype=np.uint8), q)

    def encode(self, message) -> np.ndarray:
        return field(self.q).matmul(np.asarray(message, dtype=np.uint8)[None, :], self.generator)[0]


def optimal_length(k: int, d: int, q: int = 2) -> int:
    """N_q[k, d] for the entries this package knows."""
    if k == 0:
        return 0
    if d == 1:
        return k
    if k == 1:
        return d
    if (k, d, q) == (3, 3, 2):
        return 6
    raise UnknownParameters(f"no optimal length recorded for k={k}, d={d}, q={q}")


def classical_code_for(k: int, delta: int, q: int = 2) -> ClassicalCode:
    """An optimal-length code of dimension ``k`` correcting ``delta`` errors."""
    if k < 1 or delta < 0:
        raise ValueError(f"need k >= 1 and delta >= 0, got k={k}, delta={delta}")
    if delta == 0:
        return ClassicalCode(np.eye(k, dtype=np.uint8), q)
    if k == 1:
        return ClassicalCode(np.ones((1, 2 * delta + 1), dtype=np.uint8), q)
    if (k, delta, q) == (3, 1, 2):
        return ClassicalCode(SIX_THREE_THREE, q)
    raise UnknownParameters(
        f"no embedded optimal code for k={k}, delta={delta}, q={q}; supply a generator"
    )


def shortest_binary_code(k: int, d: int, max_length: int = 16) -> int:
    """Brute-force N_2[k, d]: the shortest binary code of dimension k, distance d.

    A binary code is fixed up to equivalence by the multiset of its nonzero
    generator columns, so multisets of size N are enumerated for N = k, k+1, ...
    """
    columns = list(range(1, 1 << k))
    messages = range(1, 1 << k)
    parity = np.array([[bin(u & c).count("1") & 1 for c in columns] for u in messages], dtype=np.int64)
    for N in range(max(k, d), max_length + 1):
        for combo in itertools.combinations_with_replacement(range(len(columns)), N):
            counts = np.bincount(combo, minlength=len(columns))
            if (parity @ counts).min() >= d:
                return N
    raise ValueError(f"no binary [N, {k}, {d}] code with N <= {max_length}")


@dataclass(frozen=True)
class EcicConfig:
    """Inner encoding matrix for (l, i) concatenated with ``outer``."""

    l: int
    i: int
    delta: int
    outer: ClassicalCode

    def __post_init__(self):
        if self.outer.k != self.l - self.i:
            raise ValueError(f"outer code dimension {self.outer.k} must equal l-i = {self.l - self.i}")
        if self.outer.d < 2 * self.delta + 1:
            raise ValueError(f"outer code distance {self.outer.d} cannot correct {self.delta} errors")

    @classmethod
    def default(cls, l: int, i: int, delta: int, q: int = 2) -> EcicConfig:
        return cls(l, i, delta, classical_code_for(l - i, delta, q))

    @property
    def L(self) -> np.ndarray:
        return build_encoder(self.l, self.i)

    @property
    def field(self) -> GF:
        return field(self.outer.q)

    @property
    def block_length(self) -> int:
        return self.outer.N


def ecic_encode(
    cfg: EcicConfig,
    block,
    *,
    indices: Sequence[int] | None = None,
    n: int | None = None,
    sender: int = 0,
) -> list[CodedTransmission]:
    """The N outer-coded transmissions of one vehicle's l packets."""
    f = cfg.field
    block = np.asarray(block, dtype=np.uint8)
    if block.ndim == 1:
        block = block[:, None]
    if block.shape[0] != cfg.l:
        raise ValueError(f"block has {block.shape[0]} packets, expected {cfg.l}")
    indices = list(range(cfg.l)) if indices is None else list(indices)
    n = max(indices) + 1 if n is None else n
    inner = f.matmul(cfg.L, block)
    Gt = cfg.outer.generator.T
    composite = f.matmul(Gt, cfg.L)
    payloads = f.matmul(Gt, inner)
    out = []
    for j in range(cfg.block_length):
        coeffs = np.zeros(n, dtype=np.uint8)
        coeffs[indices] = composite[j]
        out.append(CodedTransmission(sender, coeffs, payloads[j], q=f.q))
    return out


def block_payloads(transmissions: Iterable[CodedTransmission]) -> np.ndarray:
    return np.stack([np.asarray(t.payload, dtype=np.uint8).reshape(-1) for t in transmissions])


def inject_errors(block, pattern: Iterable[tuple[int, int | None, int]], delta: int | None = None, q: int = 2) -> np.ndarray:
    """Additively corrupt a block of N payloads (N x S).

    Each pattern entry is ``(position, offset, value)``; ``offset=None``
    applies ``value`` to every symbol of that transmission.
    """
    f = field(q)
    out = np.array(block, dtype=np.uint8, copy=True)
    if out.ndim == 1:
        out = out[:, None]
    pattern = list(pattern)
    positions = {pos for pos, _, _ in pattern}
    if delta is not None and len(positions) > delta:
        raise ValueError(f"pattern touches {len(positions)} transmissions, more than delta={delta}")
    for pos, offset, value in pattern:
        if offset is None:
            out[pos] = f.add(out[pos], np.full(out.shape[1], value, dtype=np.uint8))
        else:
            out[pos, offset] = f.add(out[pos, offset], value)
    return out


def correct_block(code: ClassicalCode, received) -> np.ndarray:
    """Nearest-codeword decoding per symbol position; returns k x S messages.

    Over GF(2) each payload byte is split into its eight bit positions.
    """
    f = field(code.q)
    R = np.asarray(received, dtype=np.uint8)
    if R.ndim == 1:
        R = R[:, None]
    if R.shape[0] != code.N:
        raise ValueError(f"block has {R.shape[0]} transmissions, code length is {code.N}")
    S = R.shape[1]
    if code.q == 2:
        symbols = np.unpackbits(R, axis=1)
    else:
        symbols = R
    messages, words = _codebook(code.generator, f)
    dist = (words[:, :, None] != symbols[None, :, :]).sum(axis=1)
    best = dist.min(axis=0)
    if np.any((dist == best[None, :]).sum(axis=0) > 1):
        raise DecodingAmbiguity("received word is equidistant from two codewords")
    decoded = messages[dist.argmin(axis=0)].T
    if code.q == 2:
        decoded = np.packbits(decoded, axis=1)[:, :S]
    return decoded.astype(np.uint8)


def ecic_decode(cfg: EcicConfig, direction: str, side, received) -> np.ndarray:
    """A neighbour's full window from its (possibly corrupted) N-block."""
    inner = correct_block(cfg.outer, received)
    return decode_from_neighbor(direction, side, inner, cfg.field)


def ecic_encode_cluster(cfg: EcicConfig, cluster: ClusterConfig, packets) -> dict[int, np.ndarray]:
    """Payload blocks (N x S) for every vehicle."""
    side = layout_side_information(cluster)
    packets = np.asarray(packets, dtype=np.uint8)
    if packets.ndim == 1:
        packets = packets[:, None]
    return {
        m: block_payloads(ecic_encode(cfg, packets[list(w)], indices=w, n=cluster.n, sender=m))
        for m, w in enumerate(side.known)
    }


def ecic_decode_cluster(
    cfg: EcicConfig,
    cluster: ClusterConfig,
    side: SideInformation,
    blocks: dict[int, np.ndarray],
    packets,
) -> dict[int, np.ndarray]:
    """Correct every block, then decode outward as in the error-free case."""
    transmissions = []
    for m in range(cluster.K):
        inner = correct_block(cfg.outer, blocks[m])
        transmissions.extend(CodedTransmission(m, np.zeros(0, dtype=np.uint8), row, q=cfg.outer.q) for row in inner)
    return decode_cluster(cluster, side, transmissions, packets, cfg.field)
