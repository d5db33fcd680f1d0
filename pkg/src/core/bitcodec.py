"""
Bitstring encoding for compression outputs.

Bitstrings are Python strings over '0'/'1', big-endian and most significant
bit first. Lengths are always written explicitly with Elias-gamma codes.

The reductions share one layout for "kept original point plus sub-index"
records (see pack_origins):
- 1 flag bit: 1 when some original point carries several records
- when flagged: per original point, (count - 1) ones and a terminating zero
- per record: a fixed-width sub-index
- the substrate bitstring, prefixed by the gamma code of its length + 1
"""

from typing import List, Sequence, Tuple

from src.core.errors import DecodeError


class BitWriter:
    """Accumulates bits."""

    def __init__(self):
        self._bits: List[str] = []

    def write_uint(self, value: int, width: int) -> None:
        """Write value in exactly width bits."""
        if value < 0 or (width == 0 and value != 0) or value >= 1 << max(width, 0):
            raise ValueError(f"Value {value} does not fit in {width} bits")
        if width:
            self._bits.append(format(value, f"0{width}b"))

    def write_gamma(self, value: int) -> None:
        """Elias-gamma code of a positive integer."""
        if value < 1:
            raise ValueError(f"Elias-gamma codes positive integers, got {value}")
        binary = format(value, "b")
        self._bits.append("0" * (len(binary) - 1) + binary)

    def write_bits(self, bits: str) -> None:
        if any(b not in "01" for b in bits):
            raise ValueError(f"Not a bitstring: {bits!r}")
        self._bits.append(bits)

    def write_flag(self, flag: bool) -> None:
        self._bits.append("1" if flag else "0")

    def getvalue(self) -> str:
        return "".join(self._bits)


class BitReader:
    """Consumes bits, raising DecodeError on truncation."""

    def __init__(self, bits: str):
        if any(b not in "01" for b in bits):
            raise DecodeError(f"Not a bitstring: {bits!r}")
        self._bits = bits
        self._pos = 0

    @property
    def remaining(self) -> int:
        return len(self._bits) - self._pos

    def read_bits(self, count: int) -> str:
        if count > self.remaining:
            raise DecodeError(f"Needed {count} bits, only {self.remaining} left")
        chunk = self._bits[self._pos:self._pos + count]
        self._pos += count
        return chunk

    def read_uint(self, width: int) -> int:
        return int(self.read_bits(width), 2) if width else 0

    def read_flag(self) -> bool:
        return self.read_bits(1) == "1"

    def read_gamma(self) -> int:
        zeros = 0
        while self.read_bits(1) == "0":
            zeros += 1
        return int("1" + self.read_bits(zeros), 2) if zeros else 1

    def expect_end(self) -> None:
        if self.remaining:
            raise DecodeError(f"{self.remaining} trailing bits left undecoded")


def gamma_length(value: int) -> int:
    """Length of the Elias-gamma code of value."""
    return 2 * value.bit_length() - 1


def pack_origins(groups: Sequence[Sequence[int]], width: int, substrate_bits: str) -> str:
    """
    Encode per-original-point sub-index records followed by substrate bits.

    Args:
        groups: For each kept original point, the sub-indices of its records
        width: Bits per sub-index
        substrate_bits: Bitstring of the underlying binary scheme
    """
    writer = BitWriter()
    grouped = any(len(g) != 1 for g in groups)
    writer.write_flag(grouped)
    if grouped:
        for group in groups:
            writer.write_bits("1" * (len(group) - 1) + "0")
    for group in groups:
        for sub_index in group:
            writer.write_uint(sub_index, width)
    writer.write_gamma(len(substrate_bits) + 1)
    writer.write_bits(substrate_bits)
    return writer.getvalue()


def unpack_origins(bits: str, n_groups: int, width: int) -> Tuple[List[List[int]], str]:
    """
    Inverse of pack_origins.

    Raises:
        DecodeError: If the bitstring is malformed
    """
    reader = BitReader(bits)
    counts = [1] * n_groups
    if reader.read_flag():
        for j in range(n_groups):
            count = 1
            while reader.read_flag():
                count += 1
            counts[j] = count
    groups = [[reader.read_uint(width) for _ in range(count)] for count in counts]
    length = reader.read_gamma() - 1
    substrate = reader.read_bits(length)
    reader.expect_end()
    return groups, substrate


def origins_overhead(groups: Sequence[Sequence[int]], substrate_bits: str) -> int:
    """Bits of pack_origins that are neither sub-indices nor substrate bits."""
    grouped = any(len(g) != 1 for g in groups)
    grouping = sum(len(g) for g in groups) if grouped else 0
    return 1 + grouping + gamma_length(len(substrate_bits) + 1)
