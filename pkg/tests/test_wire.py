from pathlib import Path

import numpy as np
import pytest

from spoc.gf import GF256, GF65536
from spoc.wire import (
    BadMagicError,
    BadVersionError,
    CodedPacket,
    FieldMismatchError,
    TruncatedError,
    deserialize,
    header_overhead,
    serialize,
    serialized_size,
)

DATA = Path(__file__).parent / "data"

GOLDEN = [
    # (file, packet) -- hex dumps were written by hand from the layout spec
    (
        "golden_gf256_small.hex",
        CodedPacket(1, GF256, [0x01, 0x00], [0xAA, 0xBB], [0x01, 0x02, 0x03]),
    ),
    (
        "golden_gf65536.hex",
        CodedPacket(
            7, GF65536, [0x0102, 0x0000, 0xFFFF], [0xDEAD, 0xBEEF, 0x0001],
            [0x1234, 0xABCD],
        ),
    ),
    (
        "golden_gf256_min.hex",
        CodedPacket(0xDEADBEEF, GF256, [0x03, 0x02], [0x05, 0x01], [0xFF]),
    ),
]


def random_packet(rng, field):
    h = int(rng.integers(1, 9))
    ps = int(rng.integers(1, 33))
    return CodedPacket(
        int(rng.integers(0, 2**32)),
        field,
        field.random(rng, h),
        field.random(rng, h),
        field.random(rng, ps),
    )


@pytest.mark.parametrize("name,packet", GOLDEN, ids=[g[0] for g in GOLDEN])
def test_golden_serialization(name, packet):
    want = bytes.fromhex((DATA / name).read_text().strip())
    assert serialize(packet) == want
    assert deserialize(want) == packet


def test_sizes():
    # 12-byte fixed header + 2 coefficient vectors + payload
    p = CodedPacket(0, GF256, [1, 0], [9, 9], [5])
    assert len(serialize(p)) == 17 == serialized_size(2, 1, 1)
    p16 = CodedPacket(0, GF65536, GF65536.zeros(20), GF65536.zeros(20),
                      GF65536.zeros(740))
    data = serialize(p16)
    assert len(data) == serialized_size(20, 740, 2)
    # coefficient area of the header: 2 * 20 symbols * 2 bytes
    assert len(data) - 12 - 740 * 2 == 80


def test_roundtrip_random_packets():
    rng = np.random.default_rng(20)
    for field in (GF256, GF65536):
        for _ in range(300):
            p = random_packet(rng, field)
            assert deserialize(serialize(p)) == p


def test_roundtrip_byte_image():
    rng = np.random.default_rng(21)
    p = random_packet(rng, GF65536)
    buf = serialize(p)
    assert serialize(deserialize(buf)) == buf


def test_bad_magic():
    p = serialize(random_packet(np.random.default_rng(22), GF256))
    with pytest.raises(BadMagicError):
        deserialize(b"\x00\x00" + p[2:])


def test_bad_version():
    p = serialize(random_packet(np.random.default_rng(23), GF256))
    with pytest.raises(BadVersionError):
        deserialize(p[:2] + b"\x09" + p[3:])


def test_unknown_field_id():
    p = serialize(random_packet(np.random.default_rng(24), GF256))
    with pytest.raises(FieldMismatchError):
        deserialize(p[:3] + b"\x07" + p[4:])


def test_truncated():
    p = serialize(random_packet(np.random.default_rng(25), GF256))
    with pytest.raises(TruncatedError):
        deserialize(p[:-1])
    with pytest.raises(TruncatedError):
        deserialize(p[:5])
    with pytest.raises(TruncatedError):
        deserialize(p + b"\x00")


def test_deterministic_serialization():
    rng = np.random.default_rng(26)
    p = random_packet(rng, GF256)
    q = CodedPacket(p.generation_id, p.field, p.unlocked.copy(), p.locked.copy(),
                    p.payload.copy())
    assert serialize(p) == serialize(q)


# printed values of the published per-packet overhead table:
# (max packet bytes, h, symbol bytes) -> percent
OVERHEAD_TABLE = [
    (1500, 20, 1, 1.3), (1500, 20, 2, 2.7),
    (1500, 50, 1, 3.3), (1500, 50, 2, 6.7),
    (1500, 100, 1, 6.7), (1500, 100, 2, 13.3),
    (1500, 200, 1, 13.3), (1500, 200, 2, 26.7),
    (5000, 20, 1, 0.4), (5000, 20, 2, 0.8),
    (5000, 50, 1, 1.0), (5000, 50, 2, 2.0),
    (5000, 100, 1, 2.0), (5000, 100, 2, 4.0),
    (5000, 200, 1, 4.0), (5000, 200, 2, 8.0),
    (8192, 20, 1, 0.2), (8192, 20, 2, 0.5),
    (8192, 50, 1, 0.6), (8192, 50, 2, 1.2),
    (8192, 100, 1, 1.2), (8192, 100, 2, 2.4),
    (8192, 200, 1, 2.4), (8192, 200, 2, 4.8),
]


@pytest.mark.parametrize("size,h,s,want", OVERHEAD_TABLE)
def test_header_overhead_table(size, h, s, want):
    assert header_overhead(h, s, size) == pytest.approx(want, abs=0.1)


def test_header_overhead_rejects_nonpositive():
    with pytest.raises(ValueError):
        header_overhead(0, 1, 1500)
