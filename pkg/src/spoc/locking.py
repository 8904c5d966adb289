"""Coefficient locking: the confidentiality layer on top of plain RLNC.

The source draws an invertible random coding matrix C per generation and
sends, for packet k, the identity row e_k as the plaintext *unlocked*
vector and the encryption of C's row k as the *locked* vector.  The
cipher is size-preserving (AES-128 in counter mode), so intermediate
nodes recode locked symbols exactly like any other field symbols without
holding a key.  A sink at full rank reverts the network transform
recorded by the unlocked matrix, decrypts, and solves:

    M_P = M_U^-1 @ L        original ciphertext rows
    C   = unlock(M_P rows)  plaintext coding matrix
    M   = M_U @ C           final decoding matrix
    W   = solve(M, Y)       native payloads

Keystream uniqueness per locked row comes from the counter block layout
``key_id | generation_id | row_index | block_counter`` (4 bytes each,
big-endian); reusing a generation id under one key is therefore forbidden
and guarded by a monotonic counter in :class:`GenerationSequence`.

A zero-keystream "null" cipher is provided for differential testing:
with it the scheme degenerates to plain RLNC with a doubled header.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from spoc.gf import DimensionMismatchError, GaloisField, OpCounter
from spoc.integrity import ParitySecret, verify
from spoc.rlnc import (
    CodingStats,
    DecoderState,
    NotFullRankError,
    recode_packets,
    source_encode,
)
from spoc.wire import CodedPacket, NativePacket

KEY_BYTES = 16
CIPHERS = ("aes-ctr", "null")


class GenerationExhaustedError(ValueError):
    """All h identity-row packets of the generation were already emitted."""


class IntegrityRejectError(ValueError):
    """Decoded generation failed the shared-secret parity check."""


@dataclass(frozen=True)
class SharedKey:
    """Pre-shared 128-bit group key for one multicast session."""

    key_id: int
    key_bytes: bytes

    def __post_init__(self):
        if len(self.key_bytes) != KEY_BYTES:
            raise ValueError(f"key must be {KEY_BYTES} bytes, got {len(self.key_bytes)}")
        if not 0 <= self.key_id < 2**32:
            raise ValueError("key_id must fit in 32 bits")


def save_key(path, key: SharedKey):
    """Key file layout: 4-byte big-endian key_id followed by 16 key bytes."""
    with open(path, "wb") as f:
        f.write(struct.pack(">I", key.key_id) + key.key_bytes)


def load_key(path) -> SharedKey:
    data = open(path, "rb").read()
    if len(data) != 4 + KEY_BYTES:
        raise ValueError(f"key file must be {4 + KEY_BYTES} bytes, got {len(data)}")
    return SharedKey(struct.unpack(">I", data[:4])[0], data[4:])


def random_key(rng=None, key_id: int = 0) -> SharedKey:
    data = os.urandom(KEY_BYTES) if rng is None else bytes(rng.integers(0, 256, KEY_BYTES, dtype=np.uint8))
    return SharedKey(key_id, data)


def keystream(key: SharedKey, generation_id: int, row_index: int, n_bytes: int) -> bytes:
    """Deterministic AES-128-CTR bytes for one (generation, row) nonce."""
    if n_bytes < 0:
        raise ValueError("n_bytes must be >= 0")
    if n_bytes == 0:
        return b""
    nblocks = (n_bytes + 15) // 16
    counter_blocks = b"".join(
        struct.pack(">IIII", key.key_id, generation_id, row_index, i)
        for i in range(nblocks)
    )
    enc = Cipher(algorithms.AES(key.key_bytes), modes.ECB()).encryptor()
    return (enc.update(counter_blocks) + enc.finalize())[:n_bytes]


class LockingContext:
    """Shared key plus field/generation-size parameters for locking."""

    def __init__(self, key: SharedKey, field: GaloisField, h: int,
                 cipher: str = "aes-ctr"):
        if h < 1:
            raise ValueError("h must be >= 1")
        if cipher not in CIPHERS:
            raise ValueError(f"cipher must be one of {CIPHERS}")
        self.key = key
        self.field = field
        self.h = h
        self.cipher = cipher

    def keystream(self, generation_id: int, row_index: int, n_bytes: int) -> bytes:
        if self.cipher == "null":
            return bytes(n_bytes)
        return keystream(self.key, generation_id, row_index, n_bytes)


def _symbols_to_bytes(field: GaloisField, vec: np.ndarray) -> bytes:
    return vec.astype(">u2").tobytes() if field.symbol_bytes == 2 else vec.tobytes()


def _bytes_to_symbols(field: GaloisField, buf: bytes) -> np.ndarray:
    dt = ">u2" if field.symbol_bytes == 2 else np.uint8
    return np.frombuffer(buf, dtype=dt).astype(field.dtype)


def lock(ctx: LockingContext, generation_id: int, row_index: int, coeffs) -> np.ndarray:
    """Encrypt one coefficient row; output has the same length as the input."""
    coeffs = np.asarray(coeffs, dtype=ctx.field.dtype)
    if coeffs.shape != (ctx.h,):
        raise DimensionMismatchError(f"expected {ctx.h} coefficients, got {coeffs.shape}")
    plain = _symbols_to_bytes(ctx.field, coeffs)
    ks = ctx.keystream(generation_id, row_index, len(plain))
    ct = bytes(a ^ b for a, b in zip(plain, ks))
    return _bytes_to_symbols(ctx.field, ct)


def unlock(ctx: LockingContext, generation_id: int, row_index: int, locked) -> np.ndarray:
    """Exact inverse of :func:`lock` (same keystream, XOR is an involution)."""
    return lock(ctx, generation_id, row_index, locked)


class GenerationSequence:
    """Monotonic generation-id allocator; ids never repeat under one key."""

    def __init__(self, start: int = 0):
        self._next = start

    def next_id(self) -> int:
        gid = self._next
        if gid >= 2**32:
            raise ValueError("generation ids exhausted for this key")
        self._next += 1
        return gid


class SourceGenerationState:
    """Source-side state for one generation.

    Holds the h native packets, the invertible plaintext coding matrix C,
    the per-row ciphertexts, and the packets emitted so far.
    """

    def __init__(self, ctx: LockingContext, generation_id: int, natives,
                 coeff_rng: np.random.Generator | None = None):
        if len(natives) != ctx.h:
            raise DimensionMismatchError(f"expected {ctx.h} natives, got {len(natives)}")
        self.ctx = ctx
        self.generation_id = generation_id
        self.natives = list(natives)
        rng = coeff_rng if coeff_rng is not None else np.random.default_rng()
        field, h = ctx.field, ctx.h
        while True:
            C = field.random(rng, (h, h))
            if field.rank(C) == h:
                break
        self.coding_matrix = C
        self.locked_rows = np.stack(
            [lock(ctx, generation_id, k, C[k]) for k in range(h)]
        )
        self.emitted = 0
        self.packets: list[CodedPacket] = []

    @property
    def h(self) -> int:
        return self.ctx.h

    @property
    def native_matrix(self) -> np.ndarray:
        return np.stack([n.payload for n in self.natives])


def source_emit(state: SourceGenerationState, stats: CodingStats | None = None) -> CodedPacket:
    """Emit the next identity-row packet of the generation.

    Packet k carries unlocked = e_k, locked = E(C[k]), and payload
    C[k] @ W.  Generating identity rows costs no field multiplications;
    the h coefficients of C[k] entering the header are tallied as h
    coefficient-domain multiplications (the linear-combination accounting
    for an identity input basis), and the payload combination separately.
    """
    k = state.emitted
    if k >= state.h:
        raise GenerationExhaustedError(
            f"all {state.h} identity packets emitted; recode instead"
        )
    field = state.ctx.field
    payload = source_encode(state.natives, state.coding_matrix[k], stats=stats)
    if stats is not None:
        stats.locked.mults += state.h
    unlocked = field.identity(state.h)[k]
    pkt = CodedPacket(state.generation_id, field, unlocked,
                      state.locked_rows[k], payload)
    state.packets.append(pkt)
    state.emitted += 1
    return pkt


def source_recode(state: SourceGenerationState, rng: np.random.Generator,
                  stats: CodingStats | None = None) -> CodedPacket:
    """Further source transmissions: recode the h emitted packets.

    Behaves exactly like an intermediate node over the source's own
    packets, so the per-generation locked rows stay fixed.
    """
    if state.emitted < state.h:
        raise ValueError(f"only {state.emitted}/{state.h} packets emitted so far")
    return recode_packets(state.packets, rng, stats=stats)


def recover_ciphertext_rows(state: DecoderState,
                            stats: CodingStats | None = None) -> np.ndarray:
    """M_P = M_U^-1 @ L: the original locked rows, as the source sent them."""
    if not state.full_rank:
        raise NotFullRankError(f"rank {state.rank} < {state.h}")
    field = state.field
    m_inv = field.inverse(state.unlocked_matrix,
                          counter=stats.unlocked if stats else None)
    return field.matmul(m_inv, state.locked_matrix,
                        counter=stats.locked if stats else None)


def sink_decode(
    state: DecoderState,
    ctx: LockingContext,
    secret: ParitySecret | None = None,
    stats: CodingStats | None = None,
) -> list[NativePacket]:
    """Full sink pipeline: revert, decrypt, rebuild M, solve.

    With ``secret`` given, the decoded payload matrix is checked against
    the shared parity secret and IntegrityRejectError is raised on
    mismatch (the generation should then be discarded).
    """
    if not state.full_rank:
        raise NotFullRankError(f"rank {state.rank} < {state.h}")
    field, h = state.field, state.h
    m_u = state.unlocked_matrix
    m_p = recover_ciphertext_rows(state, stats=stats)
    C = np.stack(
        [unlock(ctx, state.generation_id, i, m_p[i]) for i in range(h)]
    )
    M = field.matmul(m_u, C, counter=stats.locked if stats else None)
    W = field.solve(
        M,
        state.payload_matrix,
        counter=stats.locked if stats else None,
        rhs_counter=stats.payload if stats else None,
    )
    if secret is not None and not verify(W, secret):
        raise IntegrityRejectError(
            f"generation {state.generation_id} failed the parity check"
        )
    return [NativePacket(state.generation_id, i, W[i]) for i in range(h)]
