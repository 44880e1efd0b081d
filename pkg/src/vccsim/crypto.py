"""Deterministic keyed keystream modeling counter-mode line encryption.

A write to a line XORs the plaintext with a pad derived from (key, line
address, per-line counter); the counter advances on every write so repeated
stores of the same data produce fresh uniform ciphertext.  The pad is a
keyed BLAKE2b stream: the experiments need statistical uniformity and exact
reproducibility, not confidentiality, so no block cipher is involved.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

LINE_BYTES = 64
PAD_SEGMENTS = 4       # four 128-bit segments per 512-bit line
SEGMENT_BYTES = 16
KEY_BYTES = 32


class CounterOverflowError(RuntimeError):
    """A line counter wrapped; the line must be re-keyed."""


def derive_key(seed: int, context: bytes = b"") -> bytes:
    """256-bit key from an integer root seed."""
    h = hashlib.blake2b(seed.to_bytes(16, "little", signed=True) + context,
                        digest_size=KEY_BYTES)
    return h.digest()


def pad(key: bytes, addr: int, counter: int) -> bytes:
    """64-byte one-time pad for (address, counter), as 4 128-bit segments."""
    prefix = addr.to_bytes(8, "little") + counter.to_bytes(8, "little")
    return b"".join(
        hashlib.blake2b(prefix + bytes([seg]), key=key,
                        digest_size=SEGMENT_BYTES).digest()
        for seg in range(PAD_SEGMENTS)
    )


def _xor(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "little") ^ int.from_bytes(b, "little")).to_bytes(len(a), "little")


@dataclass
class LineCipherState:
    """Per-line counters plus the shared 256-bit key."""

    key: bytes
    counter_bits: int = 64
    counters: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.key) != KEY_BYTES:
            raise ValueError(f"key must be {KEY_BYTES} bytes")

    def encrypt_line(self, addr: int, plaintext: bytes) -> tuple[bytes, int]:
        """Encrypt and advance the line counter; returns (ciphertext, counter)."""
        if len(plaintext) != LINE_BYTES:
            raise ValueError(f"line must be {LINE_BYTES} bytes")
        counter = self.counters.get(addr, 0) + 1
        if counter >= (1 << self.counter_bits):
            raise CounterOverflowError(f"counter wrapped for line {addr:#x}")
        self.counters[addr] = counter
        return _xor(plaintext, pad(self.key, addr, counter)), counter

    def decrypt_line(self, addr: int, ciphertext: bytes, counter: int) -> bytes:
        if len(ciphertext) != LINE_BYTES:
            raise ValueError(f"line must be {LINE_BYTES} bytes")
        return _xor(ciphertext, pad(self.key, addr, counter))


class Keystream:
    """Counter-mode byte source for simulator randomness (codebooks, init).

    Distinct ``context`` strings give independent streams from one root seed.
    """

    def __init__(self, seed: int, context: bytes = b"keystream"):
        self._key = derive_key(seed, context)
        self._block_index = 0
        self._buffer = b""

    def _next_block(self) -> bytes:
        out = hashlib.blake2b(self._block_index.to_bytes(8, "little"),
                              key=self._key, digest_size=64).digest()
        self._block_index += 1
        return out

    def take(self, count: int) -> bytes:
        while len(self._buffer) < count:
            self._buffer += self._next_block()
        out, self._buffer = self._buffer[:count], self._buffer[count:]
        return out

    def bits(self, nbits: int) -> int:
        return int.from_bytes(self.take((nbits + 7) // 8), "little") & ((1 << nbits) - 1)
