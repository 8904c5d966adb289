"""Coded-packet types and their bit-exact byte layout.

A coded packet carries two coefficient vectors of length h: the plaintext
"unlocked" set that records the linear transform applied along the
network, and the encrypted "locked" set holding the true decoding
coefficients.  Serialized layout, all integers big-endian::

    magic 'SP' (2 B) | version 0x01 (1 B) | field_id (1 B)
    | generation_id (4 B) | h (2 B) | payload_symbols (2 B)
    | unlocked (h * s B) | locked (h * s B) | payload (payload_symbols * s B)

with s the symbol width in bytes (1 for GF(2^8), 2 for GF(2^16)).  Total
size is therefore ``12 + 2*h*s + payload_symbols*s``.  Equal packets
serialize identically.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from spoc.gf import FIELDS_BY_ID, GaloisField

MAGIC = b"SP"
VERSION = 1
_HEADER = struct.Struct(">2sBBIHH")
HEADER_BYTES = _HEADER.size  # 12


class BadMagicError(ValueError):
    """Buffer does not start with the packet magic."""


class BadVersionError(ValueError):
    """Unsupported packet format version."""


class TruncatedError(ValueError):
    """Buffer length does not match the length implied by the header."""


class FieldMismatchError(ValueError):
    """Unknown field identifier, or packet parts use different fields."""


def _to_bytes(field: GaloisField, arr: np.ndarray) -> bytes:
    return arr.astype(">u2").tobytes() if field.symbol_bytes == 2 else arr.tobytes()


def _from_bytes(field: GaloisField, buf: bytes) -> np.ndarray:
    dt = ">u2" if field.symbol_bytes == 2 else np.uint8
    return np.frombuffer(buf, dtype=dt).astype(field.dtype)


@dataclass(eq=False)
class CodedPacket:
    """One coded packet: header coefficient sets plus payload symbols."""

    generation_id: int
    field: GaloisField
    unlocked: np.ndarray
    locked: np.ndarray
    payload: np.ndarray

    def __post_init__(self):
        self.unlocked = np.asarray(self.unlocked, dtype=self.field.dtype)
        self.locked = np.asarray(self.locked, dtype=self.field.dtype)
        self.payload = np.asarray(self.payload, dtype=self.field.dtype)
        if self.unlocked.shape != self.locked.shape or self.unlocked.ndim != 1:
            raise FieldMismatchError(
                f"unlocked/locked lengths differ: "
                f"{self.unlocked.shape} vs {self.locked.shape}"
            )

    @property
    def h(self) -> int:
        return len(self.unlocked)

    @property
    def payload_symbols(self) -> int:
        return len(self.payload)

    def __eq__(self, other):
        return (
            isinstance(other, CodedPacket)
            and self.generation_id == other.generation_id
            and self.field is other.field
            and np.array_equal(self.unlocked, other.unlocked)
            and np.array_equal(self.locked, other.locked)
            and np.array_equal(self.payload, other.payload)
        )


@dataclass(eq=False)
class NativePacket:
    """An original source packet, position ``index`` within its generation."""

    generation_id: int
    index: int
    payload: np.ndarray

    def __eq__(self, other):
        return (
            isinstance(other, NativePacket)
            and self.generation_id == other.generation_id
            and self.index == other.index
            and np.array_equal(self.payload, other.payload)
        )


def serialize(p: CodedPacket) -> bytes:
    head = _HEADER.pack(
        MAGIC, VERSION, p.field.field_id, p.generation_id, p.h, p.payload_symbols
    )
    return (
        head
        + _to_bytes(p.field, p.unlocked)
        + _to_bytes(p.field, p.locked)
        + _to_bytes(p.field, p.payload)
    )


def deserialize(buf: bytes) -> CodedPacket:
    if len(buf) < HEADER_BYTES:
        if buf[:2] != MAGIC[: len(buf)]:
            raise BadMagicError(f"bad magic {buf[:2]!r}")
        raise TruncatedError(f"{len(buf)} bytes is shorter than the 12-byte header")
    magic, version, field_id, gen, h, payload_symbols = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != VERSION:
        raise BadVersionError(f"unsupported version {version}")
    field = FIELDS_BY_ID.get(field_id)
    if field is None:
        raise FieldMismatchError(f"unknown field id {field_id}")
    s = field.symbol_bytes
    expect = HEADER_BYTES + (2 * h + payload_symbols) * s
    if len(buf) != expect:
        raise TruncatedError(f"expected {expect} bytes, got {len(buf)}")
    off = HEADER_BYTES
    unlocked = _from_bytes(field, buf[off : off + h * s])
    off += h * s
    locked = _from_bytes(field, buf[off : off + h * s])
    off += h * s
    payload = _from_bytes(field, buf[off:])
    return CodedPacket(gen, field, unlocked, locked, payload)


def serialized_size(h: int, payload_symbols: int, symbol_bytes: int) -> int:
    return HEADER_BYTES + (2 * h + payload_symbols) * symbol_bytes


def header_overhead(h: int, symbol_bytes: int, max_packet_bytes: int) -> float:
    """Locked-coefficient share of a maximum-size packet, in percent."""
    if h <= 0 or symbol_bytes <= 0 or max_packet_bytes <= 0:
        raise ValueError("h, symbol_bytes and max_packet_bytes must be positive")
    return 100.0 * (h * symbol_bytes) / max_packet_bytes
