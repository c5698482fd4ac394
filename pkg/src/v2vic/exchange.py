"""Deterministic cooperative data exchange (greedy subspace broadcast).

Every user starts from the span of the unit vectors of the packets it holds.
While someone is short of the full space: drop the lower-indexed member of
any pair of active users with identical subspaces, let the active user of
largest dimension (lowest index on ties) broadcast some b in its subspace
that lies outside every other active user's subspace, and add b everywhere.

The broadcast vector is the first binary vector, by Hamming weight and then
by support tuple, that qualifies.  When none exists (or the binary search
budget runs out) the vector is drawn at random over the working field; a
GF(2) run switches to ``fallback_q`` for that and every later step.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from .cluster import CodedTransmission, SideInformation
from .gf import Subspace, field, rank

SEARCH_LIMIT = 200_000
RANDOM_TRIES = 2_000


class NoEligibleVector(RuntimeError):
    """No vector of the sender's subspace avoids all other active subspaces."""


@dataclass
class ExchangeState:
    n: int
    q: int
    spaces: list[Subspace]
    active: list[int]
    log: list[CodedTransmission] = dc_field(default_factory=list)

    @classmethod
    def start(cls, side: SideInformation, q: int = 2) -> ExchangeState:
        spaces = []
        for k in side.known:
            s = Subspace(side.n, q)
            for x in k:
                e = np.zeros(side.n, dtype=np.uint8)
                e[x] = 1
                s.add(e)
            spaces.append(s)
        return cls(side.n, q, spaces, list(range(side.K)))

    def done(self) -> bool:
        return all(s.dim == self.n for s in self.spaces)

    def prune_duplicates(self) -> None:
        changed = True
        while changed:
            changed = False
            for a, b in itertools.combinations(self.active, 2):
                if self.spaces[a] == self.spaces[b]:
                    self.active.remove(min(a, b))
                    changed = True
                    break

    def pick_sender(self) -> int:
        return max(self.active, key=lambda u: (self.spaces[u].dim, -u))

    def lift(self, q: int) -> None:
        self.spaces = [s.lift(q) for s in self.spaces]
        self.q = q


def _binary_candidate(sender: Subspace, others: list[Subspace], limit: int):
    support = sender.support()
    tested = 0
    n = sender.n
    for w in range(1, len(support) + 1):
        for combo in itertools.combinations(support, w):
            tested += 1
            if tested > limit:
                return None
            if sender._bits:
                v = 0
                for j in combo:
                    v |= 1 << j
            else:
                v = np.zeros(n, dtype=np.uint8)
                v[list(combo)] = 1
            if sender.contains(v) and not any(o.contains(v) for o in others):
                if isinstance(v, int):
                    v = np.array([(v >> j) & 1 for j in range(n)], dtype=np.uint8)
                return v
    return None


def _random_candidate(sender: Subspace, others: list[Subspace], rng: np.random.Generator, tries: int):
    f = sender.field
    B = sender.basis()
    for _ in range(tries):
        coeffs = f.random(B.shape[0], rng)
        v = f.matmul(coeffs[None, :], B)[0]
        if np.any(v) and not any(o.contains(v) for o in others):
            return v
    return None


def run_information_exchange(
    side: SideInformation,
    q: int = 2,
    seed: int = 0,
    *,
    fallback_q: int | None = 256,
    search_limit: int = SEARCH_LIMIT,
) -> list[CodedTransmission]:
    """Transmission log of the greedy exchange; coefficients cover ``0..n-1``."""
    if not side.covers_all():
        raise ValueError("side information does not cover every packet")
    state = ExchangeState.start(side, q)
    rng = np.random.default_rng(seed)
    while not state.done():
        state.prune_duplicates()
        sender = state.pick_sender()
        others = [state.spaces[j] for j in state.active if j != sender]
        b = _binary_candidate(state.spaces[sender], others, search_limit)
        if b is None and state.q > 2:
            b = _random_candidate(state.spaces[sender], others, rng, RANDOM_TRIES)
        if b is None and state.q == 2 and fallback_q:
            state.lift(fallback_q)
            others = [state.spaces[j] for j in state.active if j != sender]
            b = _random_candidate(state.spaces[sender], others, rng, RANDOM_TRIES)
        if b is None:
            raise NoEligibleVector(
                f"user {sender} has no vector outside the other active subspaces over GF({state.q})"
            )
        for s in state.spaces:
            s.add(b)
        state.log.append(CodedTransmission(sender, b, q=state.q))
    return state.log


def verify_universal_recovery(transmissions, side: SideInformation) -> bool:
    """Every user's own unit vectors plus all broadcasts span the whole space."""
    transmissions = list(transmissions)
    q = max([t.q for t in transmissions], default=2)
    coeffs = [np.asarray(t.coefficients, dtype=np.uint8) for t in transmissions]
    for k in side.known:
        rows = [np.eye(side.n, dtype=np.uint8)[x] for x in k] + coeffs
        if not rows or rank(np.stack(rows), field(q)) < side.n:
            return False
    return True
