"""SECDED Hamming (72,64) and error-correcting-pointer row protection.

The SECDED code is the extended Hamming code: positions 1..71 carry 64
data bits and 7 parity bits (at the power-of-two positions), plus one
overall parity bit.  Any single flipped bit is corrected; any double flip
is detected but not correctable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

DATA_BITS = 64
CODE_BITS = 72
_PARITY_POSITIONS = tuple(1 << i for i in range(7))  # 1..64
_DATA_POSITIONS = tuple(p for p in range(1, CODE_BITS) if p not in _PARITY_POSITIONS)
OVERALL_BIT = CODE_BITS - 1  # codeword bit 71; positions 1..71 sit at bits 0..70


class DecodeStatus(enum.Enum):
    CLEAN = "clean"
    CORRECTED = "corrected"
    DETECTED_DOUBLE = "detected_double"


def secded_encode(data: int) -> int:
    """64 data bits -> 72-bit codeword."""
    if not 0 <= data < (1 << DATA_BITS):
        raise ValueError("data out of range")
    word = 0
    for i, pos in enumerate(_DATA_POSITIONS):
        if (data >> i) & 1:
            word |= 1 << (pos - 1)
    syndrome = 0
    value = word
    while value:
        low = value & -value
        syndrome ^= low.bit_length()  # == position of this set bit
        value ^= low
    for i in range(7):
        if (syndrome >> i) & 1:
            word |= 1 << (_PARITY_POSITIONS[i] - 1)
    if word.bit_count() & 1:
        word |= 1 << OVERALL_BIT
    return word


def _extract_data(word: int) -> int:
    data = 0
    for i, pos in enumerate(_DATA_POSITIONS):
        if (word >> (pos - 1)) & 1:
            data |= 1 << i
    return data


def secded_decode(word: int) -> tuple[int, DecodeStatus]:
    """Decode a 72-bit word; single errors corrected, doubles flagged."""
    if not 0 <= word < (1 << CODE_BITS):
        raise ValueError("codeword out of range")
    syndrome = 0
    value = word & ((1 << OVERALL_BIT) - 1)
    while value:
        low = value & -value
        syndrome ^= low.bit_length()
        value ^= low
    parity = word.bit_count() & 1
    if syndrome == 0 and parity == 0:
        return _extract_data(word), DecodeStatus.CLEAN
    if parity == 1:
        # single error; syndrome 0 means the overall parity bit itself
        if syndrome:
            word ^= 1 << (syndrome - 1)
        else:
            word ^= 1 << OVERALL_BIT
        return _extract_data(word), DecodeStatus.CORRECTED
    return _extract_data(word), DecodeStatus.DETECTED_DOUBLE


def parity_matrix() -> np.ndarray:
    """(64, 8) matrix over GF(2): codeword check bits = data @ M % 2.

    Check bit order: the 7 Hamming parities then the overall parity.
    """
    mat = np.zeros((DATA_BITS, 8), dtype=np.uint8)
    for i in range(DATA_BITS):
        word = secded_encode(1 << i)
        for j, pos in enumerate(_PARITY_POSITIONS):
            mat[i, j] = (word >> (pos - 1)) & 1
        mat[i, 7] = (word >> OVERALL_BIT) & 1
    return mat


def assemble_codeword(data: int, check_bits: int) -> int:
    """Rebuild the 72-bit word from its data bits and 8 check bits."""
    word = 0
    for i, pos in enumerate(_DATA_POSITIONS):
        if (data >> i) & 1:
            word |= 1 << (pos - 1)
    for j, pos in enumerate(_PARITY_POSITIONS):
        if (check_bits >> j) & 1:
            word |= 1 << (pos - 1)
    if (check_bits >> 7) & 1:
        word |= 1 << OVERALL_BIT
    return word


# ---------------------------------------------------------------------------
# error-correcting pointers

ECP_DEFAULT_CAPACITY = 3
ECP_POINTER_BITS = 8      # covers the 256 data cells of a row
ECP_REPLACEMENT_BITS = 2  # one MLC symbol


@dataclass
class EcpTable:
    """Per-row pointer/replacement entries masking stuck cells."""

    capacity: int = ECP_DEFAULT_CAPACITY
    entries: dict = field(default_factory=dict)  # cell index -> replacement symbol

    def bits_used(self) -> int:
        return self.capacity * (ECP_POINTER_BITS + ECP_REPLACEMENT_BITS)


def ecp_assign(row_cells, stuck_mask, stuck_values,
               table: EcpTable | None = None,
               capacity: int = ECP_DEFAULT_CAPACITY) -> EcpTable | None:
    """Assign entries for stuck cells that mismatch the intended row.

    Entries are granted in first-come (ascending cell) order and persist in
    ``table`` across calls; returns None when the mismatching stuck cells
    exceed the remaining capacity (the row is uncorrectable).
    """
    intended = np.asarray(row_cells, dtype=np.uint8)
    stuck = np.asarray(stuck_mask, dtype=bool)
    frozen = np.asarray(stuck_values, dtype=np.uint8)
    if table is None:
        table = EcpTable(capacity=capacity)
    mismatch = np.flatnonzero(stuck & (intended != frozen))
    for cell in mismatch:
        cell = int(cell)
        if cell not in table.entries and len(table.entries) >= table.capacity:
            return None
        table.entries[cell] = int(intended[cell])
    # refresh replacement values for already-assigned cells
    for cell in list(table.entries):
        table.entries[cell] = int(intended[cell])
    return table


def ecp_apply(row_cells, table: EcpTable) -> np.ndarray:
    """Row contents as read back through the pointer overrides."""
    out = np.asarray(row_cells, dtype=np.uint8).copy()
    for cell, value in table.entries.items():
        out[cell] = value
    return out
