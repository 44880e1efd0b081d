"""Bit-vector plumbing shared by the codecs and the memory model.

Conventions used throughout the package:

* A bit vector of width ``n`` is a Python int; bit ``k`` is ``(value >> k) & 1``.
* The string form of a bit vector lists bit 0 first, so ``"1101"`` has
  bits 0,1,3 set.
* MLC symbol ``i`` of a block occupies bits ``(2i, 2i+1)`` = (left digit,
  right digit).  The symbol value is ``(left << 1) | right``, i.e. the four
  cell states 00, 01, 11, 10 map to values 0, 1, 3, 2.
"""

from __future__ import annotations

import numpy as np

SYMBOL_ONES = np.array([0, 1, 1, 2], dtype=np.uint8)  # popcount of a 2-bit symbol


def popcount(value: int) -> int:
    return value.bit_count()


def bits_from_string(s: str) -> int:
    """Parse a bit string (bit 0 first) into an int."""
    if not set(s) <= {"0", "1"}:
        raise ValueError(f"not a bit string: {s!r}")
    value = 0
    for k, ch in enumerate(s):
        if ch == "1":
            value |= 1 << k
    return value


def bits_to_string(value: int, n: int) -> str:
    return "".join("1" if (value >> k) & 1 else "0" for k in range(n))


def int_to_bit_array(value: int, n: int) -> np.ndarray:
    """Unpack an n-bit int into a uint8 array, bit 0 first."""
    nbytes = (n + 7) // 8
    raw = np.frombuffer(value.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].copy()

def bit_array_to_int(bits: np.ndarray) -> int:
    packed = np.packbits(bits.astype(np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def block_to_symbols(value: int, n: int) -> np.ndarray:
    """View an n-bit block as n/2 MLC symbols (left digit = high bit)."""
    if n % 2:
        raise ValueError("block length must be even")
    bits = int_to_bit_array(value, n)
    return (bits[0::2] << 1 | bits[1::2]).astype(np.uint8)


def symbols_to_block(symbols: np.ndarray) -> int:
    symbols = np.asarray(symbols, dtype=np.uint8)
    bits = np.empty(symbols.size * 2, dtype=np.uint8)
    bits[0::2] = symbols >> 1
    bits[1::2] = symbols & 1
    return bit_array_to_int(bits)


def extract_even_bits(value: int, n: int) -> int:
    """Bits at even positions of an n-bit vector, compacted (length n/2)."""
    bits = int_to_bit_array(value, n)
    return bit_array_to_int(bits[0::2])


def interleave_bits(even: int, odd: int, n: int) -> int:
    """Inverse of splitting an n-bit vector into even/odd position halves."""
    bits = np.empty(n, dtype=np.uint8)
    bits[0::2] = int_to_bit_array(even, n // 2)
    bits[1::2] = int_to_bit_array(odd, n // 2)
    return bit_array_to_int(bits)


def words_to_symbol_rows(words: np.ndarray, word_bits: int = 64) -> np.ndarray:
    """Vectorized block_to_symbols for an array of 64-bit words.

    words: uint64 array of shape (...,); returns uint8 symbols of shape
    (..., word_bits // 2).
    """
    words = np.ascontiguousarray(words, dtype=np.uint64)
    raw = words[..., None].view(np.uint8)  # little-endian byte order
    bits = np.unpackbits(raw, axis=-1, bitorder="little")[..., :word_bits]
    return (bits[..., 0::2] << 1 | bits[..., 1::2]).astype(np.uint8)


def symbol_rows_to_words(symbols: np.ndarray) -> np.ndarray:
    """Inverse of words_to_symbol_rows (symbol count per row must be 32)."""
    symbols = np.asarray(symbols, dtype=np.uint8)
    bits = np.empty(symbols.shape[:-1] + (symbols.shape[-1] * 2,), dtype=np.uint8)
    bits[..., 0::2] = symbols >> 1
    bits[..., 1::2] = symbols & 1
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return packed.view(np.uint64).reshape(symbols.shape[:-1])
