"""Random linear network coding engine.

Covers the packet-mixing side of the protocol: source encoding of native
payloads, recoding at intermediate nodes (the same random coefficient
vector applied to unlocked coefficients, locked coefficients and payload
alike), per-generation buffering with innovativeness filtering, and plain
Gaussian-elimination decoding for the unlocked-only baseline.

This module deliberately knows nothing about keys or encryption: recoding
must work on locked coefficients as opaque symbols.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

from spoc.gf import FIELDS_BY_BITS, DimensionMismatchError, GaloisField, OpCounter
from spoc.wire import CodedPacket, NativePacket


class EmptyBufferError(ValueError):
    """Recode was requested from a buffer holding no packets."""


class GenerationMismatchError(ValueError):
    """Packet belongs to a different generation than the target state."""


class NotFullRankError(ValueError):
    """Decoding was attempted before the coefficient matrix reached rank h."""


class InsertResult(Enum):
    STORED = "stored"
    DISCARDED = "discarded"
    FULL_RANK = "full_rank"


@dataclass
class CodingStats:
    """Field-multiplication tallies, split by the packet part they touch."""

    unlocked: OpCounter = dc_field(default_factory=OpCounter)
    locked: OpCounter = dc_field(default_factory=OpCounter)
    payload: OpCounter = dc_field(default_factory=OpCounter)

    @property
    def header_mults(self) -> int:
        return self.unlocked.mults + self.locked.mults

    @property
    def total_mults(self) -> int:
        return self.header_mults + self.payload.mults


def make_rng(seed) -> np.random.Generator:
    """Deterministic coefficient generator; equal seeds give equal streams."""
    return np.random.default_rng(seed)


def random_coefficients(field: GaloisField, rng: np.random.Generator, n: int):
    """n uniform symbols, redrawn if all of them came out zero."""
    while True:
        coeffs = field.random(rng, n)
        if coeffs.any():
            return coeffs


def source_encode(natives, coeffs, stats: CodingStats | None = None) -> np.ndarray:
    """Linear combination of native payloads: sum_i coeffs[i] * natives[i]."""
    if len(natives) != len(coeffs):
        raise DimensionMismatchError(
            f"{len(coeffs)} coefficients against {len(natives)} natives"
        )
    lengths = {len(n.payload) for n in natives}
    if len(lengths) != 1:
        raise DimensionMismatchError(f"payload lengths differ: {sorted(lengths)}")
    field = _field_of(natives[0].payload)
    W = np.stack([n.payload for n in natives])
    return field.combine(coeffs, W, counter=stats.payload if stats else None)


def _field_of(sample) -> GaloisField:
    return FIELDS_BY_BITS[np.asarray(sample).dtype.itemsize * 8]


class _RankTracker:
    """Row-echelon view of the unlocked vectors seen so far."""

    def __init__(self, field: GaloisField, h: int):
        self.field = field
        self.h = h
        self.rows: list[np.ndarray] = []   # pivot-normalized, distinct pivot columns
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.rows)

    def residual(self, vec: np.ndarray) -> np.ndarray:
        v = np.asarray(vec, dtype=self.field.dtype).copy()
        for piv, row in zip(self.pivots, self.rows):
            if v[piv]:
                v ^= self.field.scale(int(v[piv]), row)
        return v

    def would_increase_rank(self, vec) -> bool:
        return bool(self.residual(vec).any())

    def add(self, vec) -> bool:
        v = self.residual(vec)
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            return False
        piv = int(nz[0])
        v = self.field.scale(self.field.inv(int(v[piv])), v)
        self.rows.append(v)
        self.pivots.append(piv)
        return True


class GenerationBuffer:
    """Per-generation packet store keeping only innovative packets.

    A packet is stored iff its unlocked vector increases the rank of what
    is already buffered, so ``len(packets) == rank <= h`` always holds.
    """

    def __init__(self, generation_id: int, h: int, field: GaloisField):
        self.generation_id = generation_id
        self.h = h
        self.field = field
        self.packets: list[CodedPacket] = []
        self._tracker = _RankTracker(field, h)

    @property
    def rank(self) -> int:
        return self._tracker.rank

    def _check_generation(self, p: CodedPacket):
        if p.generation_id != self.generation_id:
            raise GenerationMismatchError(
                f"packet generation {p.generation_id} != {self.generation_id}"
            )

    def is_innovative(self, p: CodedPacket) -> bool:
        self._check_generation(p)
        return self._tracker.would_increase_rank(p.unlocked)

    def offer(self, p: CodedPacket) -> bool:
        """Store p if innovative; returns True when stored."""
        self._check_generation(p)
        if not self._tracker.add(p.unlocked):
            return False
        self.packets.append(p)
        return True


class DecoderState:
    """Sink-side receive state: innovative packets plus their matrices.

    Rows of the unlocked matrix M_U, the locked matrix L and the payload
    matrix Y correspond to stored packets in arrival order.
    """

    def __init__(self, generation_id: int, h: int, field: GaloisField):
        self.buffer = GenerationBuffer(generation_id, h, field)

    @property
    def generation_id(self) -> int:
        return self.buffer.generation_id

    @property
    def field(self) -> GaloisField:
        return self.buffer.field

    @property
    def h(self) -> int:
        return self.buffer.h

    @property
    def rank(self) -> int:
        return self.buffer.rank

    @property
    def full_rank(self) -> bool:
        return self.buffer.rank == self.buffer.h

    def is_innovative(self, p: CodedPacket) -> bool:
        return self.buffer.is_innovative(p)

    def insert(self, p: CodedPacket) -> InsertResult:
        if not self.buffer.offer(p):
            return InsertResult.DISCARDED
        return InsertResult.FULL_RANK if self.full_rank else InsertResult.STORED

    @property
    def unlocked_matrix(self) -> np.ndarray:
        return np.stack([p.unlocked for p in self.buffer.packets])

    @property
    def locked_matrix(self) -> np.ndarray:
        return np.stack([p.locked for p in self.buffer.packets])

    @property
    def payload_matrix(self) -> np.ndarray:
        return np.stack([p.payload for p in self.buffer.packets])


def recode_packets(
    packets,
    rng: np.random.Generator,
    stats: CodingStats | None = None,
    coeffs=None,
) -> CodedPacket:
    """One random linear combination of the given packets.

    The same coefficient vector is applied to the unlocked vectors, the
    locked vectors and the payloads; intermediate nodes never distinguish
    the three parts.
    """
    if not packets:
        raise EmptyBufferError("no packets to recode")
    gen_ids = {p.generation_id for p in packets}
    if len(gen_ids) != 1:
        raise GenerationMismatchError(f"mixed generations {sorted(gen_ids)}")
    field = packets[0].field
    if coeffs is None:
        coeffs = random_coefficients(field, rng, len(packets))
    coeffs = np.asarray(coeffs, dtype=field.dtype)
    unlocked = field.combine(
        coeffs, np.stack([p.unlocked for p in packets]),
        counter=stats.unlocked if stats else None,
    )
    locked = field.combine(
        coeffs, np.stack([p.locked for p in packets]),
        counter=stats.locked if stats else None,
    )
    payload = field.combine(
        coeffs, np.stack([p.payload for p in packets]),
        counter=stats.payload if stats else None,
    )
    return CodedPacket(packets[0].generation_id, field, unlocked, locked, payload)


def recode(
    buffer: GenerationBuffer,
    rng: np.random.Generator,
    stats: CodingStats | None = None,
    coeffs=None,
) -> CodedPacket:
    return recode_packets(buffer.packets, rng, stats=stats, coeffs=coeffs)


def decode_plain(state: DecoderState) -> list[NativePacket]:
    """Baseline decode when the unlocked vectors are the true coefficients."""
    if not state.full_rank:
        raise NotFullRankError(f"rank {state.rank} < {state.h}")
    W = state.field.solve(state.unlocked_matrix, state.payload_matrix)
    return [
        NativePacket(state.generation_id, i, W[i]) for i in range(state.h)
    ]
