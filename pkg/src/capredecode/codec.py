"""Compressed syndrome messages: a sorted list of defect addresses.

Wire layout (all little-endian)::

    offset  size  field
    0       1     format version (currently 1)
    1       2     code distance d
    3       2     measurement rounds
    5       4     defect count n
    9       4*n   defect addresses, u32, strictly ascending

Files holding one message use the ``.synz`` extension.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import MalformedMessage
from .lattice import CodeLattice

FORMAT_VERSION = 1
HEADER = struct.Struct("<BHHI")
ADDRESS_BYTES = 4
SUFFIX = ".synz"
MODEL_ADDRESS_BITS = 16


@dataclass(frozen=True)
class CompressedSyndrome:
    d: int
    rounds: int
    addresses: tuple[int, ...]
    version: int = FORMAT_VERSION

    @property
    def count(self) -> int:
        return len(self.addresses)

    def to_bytes(self) -> bytes:
        head = HEADER.pack(self.version, self.d, self.rounds, self.count)
        body = np.asarray(self.addresses, dtype="<u4").tobytes()
        return head + body

    @classmethod
    def from_bytes(cls, data: bytes) -> CompressedSyndrome:
        """Parse and validate the framing (not yet checked against a lattice)."""
        if not isinstance(data, (bytes, bytearray, memoryview)):
            raise MalformedMessage(f"expected bytes, got {type(data).__name__}")
        data = bytes(data)
        if len(data) < HEADER.size:
            raise MalformedMessage(f"message truncated: {len(data)} bytes < {HEADER.size}-byte header")
        version, d, rounds, count = HEADER.unpack_from(data)
        if version != FORMAT_VERSION:
            raise MalformedMessage(f"unsupported format version {version}")
        expected = HEADER.size + ADDRESS_BYTES * count
        if len(data) != expected:
            raise MalformedMessage(f"length {len(data)} does not match header count {count} ({expected} bytes)")
        addrs = np.frombuffer(data, dtype="<u4", offset=HEADER.size, count=count)
        msg = cls(d=d, rounds=rounds, addresses=tuple(int(a) for a in addrs), version=version)
        _check_canonical(msg)
        return msg


def _check_canonical(msg: CompressedSyndrome) -> None:
    if msg.count % 2:
        raise MalformedMessage(f"defect count {msg.count} is odd")
    a = np.asarray(msg.addresses, dtype=np.int64)
    if len(a) > 1 and np.any(np.diff(a) <= 0):
        raise MalformedMessage("addresses are not strictly ascending (unsorted or duplicate)")


def compress(lattice: CodeLattice, s: np.ndarray) -> CompressedSyndrome:
    """Canonical address-list message for a syndrome history."""
    s = np.asarray(s, dtype=bool)
    if s.shape != (lattice.V,):
        raise ValueError(f"syndrome has shape {s.shape}, expected ({lattice.V},)")
    return CompressedSyndrome(
        d=lattice.d,
        rounds=lattice.n_rounds,
        addresses=tuple(int(a) for a in np.flatnonzero(s)),
    )


def decompress(lattice: CodeLattice, msg) -> np.ndarray:
    """Inverse of :func:`compress`; accepts a message object or raw bytes."""
    if not isinstance(msg, CompressedSyndrome):
        msg = CompressedSyndrome.from_bytes(msg)
    if msg.version != FORMAT_VERSION:
        raise MalformedMessage(f"unsupported format version {msg.version}")
    if msg.d != lattice.d or msg.rounds != lattice.n_rounds:
        raise MalformedMessage(
            f"header (d={msg.d}, rounds={msg.rounds}) does not match lattice "
            f"(d={lattice.d}, rounds={lattice.n_rounds})"
        )
    _check_canonical(msg)
    a = np.asarray(msg.addresses, dtype=np.int64)
    if len(a) and (a[0] < 0 or a[-1] >= lattice.V):
        raise MalformedMessage(f"address out of range [0, {lattice.V})")
    s = np.zeros(lattice.V, dtype=bool)
    s[a] = True
    return s


@dataclass(frozen=True)
class BandwidthReport:
    count: int
    volume: int
    rounds: int
    address_bits: int
    ideal_bits: int
    model16_bits: int
    uncompressed_bits: int
    wire_bits: int

    @property
    def ideal_bits_per_round(self) -> float:
        return self.ideal_bits / self.rounds

    @property
    def model16_bits_per_round(self) -> float:
        return self.model16_bits / self.rounds

    @property
    def uncompressed_bits_per_round(self) -> float:
        return self.uncompressed_bits / self.rounds

    @property
    def ideal_density(self) -> float:
        return self.ideal_bits / self.volume

    @property
    def model16_density(self) -> float:
        return self.model16_bits / self.volume

    @property
    def uncompressed_density_16bit_units(self) -> float:
        """Raw readout in units of 16-bit addresses: 1/16 per vertex."""
        return self.uncompressed_bits / MODEL_ADDRESS_BITS / self.volume


def bandwidth_report(lattice: CodeLattice, msg: CompressedSyndrome) -> BandwidthReport:
    bits = max(1, math.ceil(math.log2(lattice.V)))
    return BandwidthReport(
        count=msg.count,
        volume=lattice.V,
        rounds=lattice.n_rounds,
        address_bits=bits,
        ideal_bits=msg.count * bits,
        model16_bits=msg.count * MODEL_ADDRESS_BITS,
        uncompressed_bits=lattice.V,
        wire_bits=8 * (HEADER.size + ADDRESS_BYTES * msg.count),
    )


def write_synz(path, msg: CompressedSyndrome) -> None:
    with open(path, "wb") as fh:
        fh.write(msg.to_bytes())


def read_synz(path) -> CompressedSyndrome:
    if not os.fspath(path).endswith(SUFFIX):
        raise MalformedMessage(f"expected a {SUFFIX} file, got {path}")
    with open(path, "rb") as fh:
        return CompressedSyndrome.from_bytes(fh.read())
