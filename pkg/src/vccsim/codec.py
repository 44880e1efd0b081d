"""Virtual coset encoding/decoding and the runtime kernel generator.

An n-bit block is split into p sub-blocks; each of r small random kernels
is applied to every sub-block both directly (XOR) and inverted (XNOR), so
r kernels span N = r * 2**p full-length virtual candidates while only
2*r*p sub-block evaluations are performed.  The encoder returns the
candidate minimizing the supplied cost over the payload cells plus the
auxiliary cells that store the candidate index.

Two layouts are supported:

* ``full_block``: kernels cover all n bits (m-bit sub-blocks).
* ``mlc_right_digit``: only the right digit of each MLC symbol is encoded;
  left digits pass through unchanged and can seed the kernel generator,
  which makes the encoding self-decoding without stored kernels.

With generated kernels in ``full_block`` mode the encoded payload no longer
carries the left digits that seeded the generator, so decoding requires the
kernels to be supplied explicitly (the simulator keeps them; hardware would
use the ROM variant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .bits import (
    bit_array_to_int,
    block_to_symbols,
    extract_even_bits,
    int_to_bit_array,
    symbols_to_block,
)
from .cost import ConfigError, CostFunction, lex_argmin

FULL_BLOCK = "full_block"
MLC_RIGHT_DIGIT = "mlc_right_digit"
GENERATED = "generated"


@dataclass(frozen=True)
class DataBlock:
    """Fixed-length bit vector; the unit of encoding."""

    value: int
    n: int = 64

    def __post_init__(self):
        if self.n <= 0 or self.n % 2:
            raise ConfigError("block length must be positive and even")
        if not 0 <= self.value < (1 << self.n):
            raise ConfigError("block value out of range for its width")

    def symbols(self) -> np.ndarray:
        return block_to_symbols(self.value, self.n)

    @classmethod
    def from_symbols(cls, symbols) -> "DataBlock":
        symbols = np.asarray(symbols)
        return cls(symbols_to_block(symbols), 2 * symbols.size)


@dataclass(frozen=True)
class CosetKernel:
    bits: int
    m: int = 16
    index: int = 0

    def __post_init__(self):
        if not 0 <= self.bits < (1 << self.m):
            raise ConfigError("kernel bits exceed kernel length")


@dataclass(frozen=True)
class VccConfig:
    n: int = 64
    m: int = 16
    r: int = 16
    mode: str = FULL_BLOCK
    # kernel source: a tuple of r stored kernel ints, or "generated"
    kernels: tuple | str = GENERATED

    def __post_init__(self):
        if self.mode not in (FULL_BLOCK, MLC_RIGHT_DIGIT):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.plane_bits % self.m:
            raise ConfigError("kernel length must divide the encoded plane")
        if self.r < 1 or self.r & (self.r - 1):
            raise ConfigError("kernel count must be a power of two")
        if self.kernels == GENERATED:
            _generator_geometry(self.n // 2, self.r, self.m)  # validates
        else:
            kernels = tuple(int(k) for k in self.kernels)
            if len(kernels) != self.r:
                raise ConfigError("stored kernel count must equal r")
            if any(not 0 <= k < (1 << self.m) for k in kernels):
                raise ConfigError("stored kernel exceeds kernel length")
            object.__setattr__(self, "kernels", kernels)

    @property
    def plane_bits(self) -> int:
        return self.n if self.mode == FULL_BLOCK else self.n // 2

    @property
    def p(self) -> int:
        return self.plane_bits // self.m

    @property
    def coset_count(self) -> int:
        return self.r * (1 << self.p)

    @property
    def aux_bits(self) -> int:
        return int(math.log2(self.r)) + self.p

    @property
    def kernel_index_bits(self) -> int:
        return int(math.log2(self.r))

    @property
    def cells(self) -> int:
        return self.n // 2

    @property
    def aux_cells(self) -> int:
        return (self.aux_bits + 1) // 2

    @property
    def generated(self) -> bool:
        return self.kernels == GENERATED


@dataclass(frozen=True)
class EncodedWord:
    """Encoded payload plus the auxiliary candidate index.

    ``aux`` is the virtual-coset index (kernel index in the high bits,
    partition flags in the low bits); its bit vector is the index written
    MSB-first.
    """

    payload: int
    aux: int
    n: int
    aux_bits: int
    cost: tuple = ()


def split_aux(word: EncodedWord, cfg: VccConfig) -> tuple[int, tuple[int, ...]]:
    """Decompose the aux index into (kernel index, partition flags)."""
    flags_value = word.aux & ((1 << cfg.p) - 1)
    flags = tuple((flags_value >> (cfg.p - 1 - j)) & 1 for j in range(cfg.p))
    return word.aux >> cfg.p, flags


@dataclass(frozen=True)
class OldState:
    """Previous contents of the target word's data and aux cells.

    ``stuck_mask``/``stuck_values`` cover the data cells followed by the aux
    cells (when aux state is present).  ``aux_symbols=None`` models a write
    with no auxiliary region, excluding aux cells from the cost.
    """

    data_symbols: np.ndarray
    aux_symbols: np.ndarray | None = None
    stuck_mask: np.ndarray | None = None
    stuck_values: np.ndarray | None = None

    def __post_init__(self):
        data = np.asarray(self.data_symbols, dtype=np.uint8)
        object.__setattr__(self, "data_symbols", data)
        aux = self.aux_symbols
        if aux is not None:
            aux = np.asarray(aux, dtype=np.uint8)
            object.__setattr__(self, "aux_symbols", aux)
        total = data.size + (aux.size if aux is not None else 0)
        if (self.stuck_mask is None) != (self.stuck_values is None):
            raise ConfigError("stuck mask and values must be given together")
        if self.stuck_mask is not None:
            mask = np.asarray(self.stuck_mask, dtype=bool)
            values = np.asarray(self.stuck_values, dtype=np.uint8)
            if mask.shape != (total,) or values.shape != (total,):
                raise ConfigError("stuck arrays must cover data then aux cells")
            object.__setattr__(self, "stuck_mask", mask)
            object.__setattr__(self, "stuck_values", values)

    @classmethod
    def fresh(cls, cells: int, aux_cells: int | None = None) -> "OldState":
        aux = None if aux_cells is None else np.zeros(aux_cells, dtype=np.uint8)
        return cls(np.zeros(cells, dtype=np.uint8), aux)

    @classmethod
    def random(cls, rng, cells: int, aux_cells: int | None = None,
               stuck_rate: float = 0.0) -> "OldState":
        data = rng.integers(0, 4, size=cells, dtype=np.uint8)
        aux = None if aux_cells is None else rng.integers(0, 4, size=aux_cells, dtype=np.uint8)
        total = cells + (aux_cells or 0)
        mask = values = None
        if stuck_rate > 0:
            mask = rng.random(total) < stuck_rate
            values = rng.integers(0, 4, size=total, dtype=np.uint8)
        return cls(data, aux, mask, values)


@dataclass
class SearchCounters:
    """Instrumentation for the encoder's search-space claims."""

    kernel_partition_evals: int = 0


# ---------------------------------------------------------------------------
# kernel generator


def _generator_geometry(l: int, r: int, m: int) -> tuple[int, int, int]:
    """Validate Algorithm-style generator geometry; returns (b, q, w)."""
    if l % m:
        raise ConfigError("left-digit vector must divide into m-bit bases")
    b = l // m
    if b < 1 or r % b:
        raise ConfigError("kernel count must be a multiple of the base count")
    q = r // b
    if q < 1 or q & (q - 1):
        raise ConfigError("kernels per base vector must be a power of two")
    w = 1 + int(math.log2(q))
    if w > m:
        raise ConfigError("mask width exceeds kernel length")
    return b, q, w


def _mask_bits(i: int, w: int, m: int) -> np.ndarray:
    """Width-w binary mask for index i, replicated across m bits."""
    mask = np.array([(i >> (w - 1 - t)) & 1 for t in range(w)], dtype=np.uint8)
    return np.resize(mask, m)


def generate_kernels(left_digits: int, l: int, r: int, m: int) -> list[CosetKernel]:
    """Derive r m-bit coset kernels from an l-bit left-digit vector.

    The vector splits into b = l/m base vectors; kernel i*b + j is base j
    XOR the binary mask for i replicated across its sub-vectors.  Masks are
    one bit wider than strictly needed so their top bit stays clear, which
    keeps complementary patterns out of the kernel set.
    """
    b, q, w = _generator_geometry(l, r, m)
    base_bits = int_to_bit_array(left_digits, l).reshape(b, m)
    kernels = []
    for i in range(q):
        mask = _mask_bits(i, w, m)
        for j in range(b):
            bits = base_bits[j] ^ mask
            kernels.append(CosetKernel(bit_array_to_int(bits), m, i * b + j))
    return kernels


def _generated_kernel_bits(left_bits: np.ndarray, r: int, m: int) -> np.ndarray:
    """Vectorized generator: left_bits (W, l) -> kernel bits (W, r, m)."""
    w_words, l = left_bits.shape
    b, q, w = _generator_geometry(l, r, m)
    bases = left_bits.reshape(w_words, b, m)
    masks = np.stack([_mask_bits(i, w, m) for i in range(q)])  # (q, m)
    # kernel index i*b + j -> bases[j] ^ masks[i]
    out = bases[:, None, :, :] ^ masks[None, :, None, :]  # (W, q, b, m)
    return out.reshape(w_words, r, m)


def extract_left_digits(block: DataBlock) -> int:
    """Bits at symbol-left (even) positions, compacted to length n/2."""
    return extract_even_bits(block.value, block.n)


def derive_kernels(block: DataBlock, cfg: VccConfig) -> list[CosetKernel]:
    """Kernels the generator would produce for this block."""
    return generate_kernels(extract_left_digits(block), cfg.n // 2, cfg.r, cfg.m)


# ---------------------------------------------------------------------------
# aux-cell layout

KERNEL_BIT = 0
FLAG_BIT = 1
PAD_BIT = 2


def _aux_layout(cfg: VccConfig) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Per aux cell, the (kind, index) of its left and right bit."""
    kb = cfg.kernel_index_bits
    bits = [(KERNEL_BIT, t) for t in range(kb)]
    bits += [(FLAG_BIT, j) for j in range(cfg.p)]
    if len(bits) % 2:
        bits.append((PAD_BIT, 0))
    return [(bits[2 * a], bits[2 * a + 1]) for a in range(len(bits) // 2)]


def aux_value_to_symbols(aux_values: np.ndarray, aux_bits: int) -> np.ndarray:
    """Aux index values (W,) -> aux cell symbols (W, ceil(aux_bits/2))."""
    aux_values = np.asarray(aux_values, dtype=np.int64)
    ncells = (aux_bits + 1) // 2
    out = np.zeros(aux_values.shape + (ncells,), dtype=np.uint8)
    for t in range(aux_bits):
        bit = (aux_values >> (aux_bits - 1 - t)) & 1
        shift = 1 - (t % 2)  # left digit first
        out[..., t // 2] |= (bit << shift).astype(np.uint8)
    return out


# ---------------------------------------------------------------------------
# the search engine (vectorized over words)


def _kernel_symbols(kernel_bits: np.ndarray) -> np.ndarray:
    return (kernel_bits[..., 0::2] << 1 | kernel_bits[..., 1::2]).astype(np.uint8)


def _stored_kernel_bits(cfg: VccConfig) -> np.ndarray:
    return np.stack([int_to_bit_array(k, cfg.m) for k in cfg.kernels])


def vcc_search(data_syms: np.ndarray,
               old_data: np.ndarray | None,
               old_aux: np.ndarray | None,
               stuck: np.ndarray | None,
               stuck_values: np.ndarray | None,
               cfg: VccConfig,
               cost_fn: CostFunction,
               counters: SearchCounters | None = None):
    """Batch VCC search over W words.

    data_syms/old_data: (W, cells) uint8; old_aux: (W, aux_cells) or None;
    stuck/stuck_values: (W, cells [+ aux_cells]) or None.

    Returns (new_data_syms, aux_values, aux_syms, costs) with shapes
    (W, cells), (W,), (W, aux_cells), (W, components).
    """
    w_words, cells = data_syms.shape
    p, r, m = cfg.p, cfg.r, cfg.m
    full = cfg.mode == FULL_BLOCK
    sub_cells = m // 2 if full else m

    if cfg.generated:
        left_bits = (data_syms >> 1).astype(np.uint8)  # (W, l)
        kern_bits = _generated_kernel_bits(left_bits, r, m)  # (W, r, m)
    else:
        kern_bits = np.broadcast_to(_stored_kernel_bits(cfg), (w_words, r, m))

    data_parts = data_syms.reshape(w_words, p, sub_cells)
    if old_data is None:
        old_data = np.zeros_like(data_syms)
    old_parts = old_data.reshape(w_words, p, sub_cells)[:, None]

    def part_view(arr):
        if arr is None:
            return None
        return arr[:, :cells].reshape(w_words, p, sub_cells)[:, None]

    stuck_parts = part_view(stuck)
    vals_parts = part_view(stuck_values)

    if full:
        kern_syms = _kernel_symbols(kern_bits)  # (W, r, sub_cells)
        cand_x = data_parts[:, None] ^ kern_syms[:, :, None]  # (W, r, p, sc)
        cand_n = cand_x ^ 3
    else:
        kb = kern_bits[:, :, None, :]
        cand_x = (data_parts[:, None] & 2) | ((data_parts[:, None] & 1) ^ kb)
        cand_n = cand_x ^ 1

    cost_x = cost_fn(old_parts, cand_x, stuck_parts, vals_parts)  # (W, r, p, C)
    if full and cost_fn.complement_symmetric:
        cost_n = cost_fn.complement_total(sub_cells) - cost_x
    else:
        cost_n = cost_fn(old_parts, cand_n, stuck_parts, vals_parts)
    if counters is not None:
        counters.kernel_partition_evals += w_words * 2 * r * p
    comps = cost_x.shape[-1]

    # Cost of writing each possible symbol value to each aux cell.
    n_aux = cfg.aux_cells
    if old_aux is not None:
        aux_stuck = stuck[:, cells:][:, :, None, None] if stuck is not None else None
        aux_vals = stuck_values[:, cells:][:, :, None, None] if stuck_values is not None else None
        value_grid = np.arange(4, dtype=np.uint8)[None, None, :, None]
        cell_cost = cost_fn(old_aux[:, :, None, None], value_grid, aux_stuck, aux_vals)
        cell_cost = np.broadcast_to(cell_cost, (w_words, n_aux, 4, comps))
    else:
        cell_cost = np.zeros((w_words, n_aux, 4, comps))

    kb_count = cfg.kernel_index_bits
    kernel_bit_values = np.array(
        [[(i >> (kb_count - 1 - t)) & 1 for t in range(kb_count)] for i in range(r)],
        dtype=np.uint8,
    ).reshape(r, kb_count)

    total = np.zeros((w_words, r, comps))
    flags = np.zeros((w_words, r, p), dtype=np.uint8)

    for a, (bit_l, bit_r) in enumerate(_aux_layout(cfg)):
        var_flags = [idx for kind, idx in (bit_l, bit_r) if kind == FLAG_BIT]
        n_var = len(var_flags)
        n_c = 1 << n_var
        options = np.zeros((w_words, r, n_c, comps))
        for c in range(n_c):
            # combo order matches ascending flag bits so first-occurrence
            # argmin resolves ties to the lowest candidate index
            assign = {j: (c >> (n_var - 1 - t)) & 1 for t, j in enumerate(var_flags)}

            def bit_val(spec):
                kind, idx = spec
                if kind == KERNEL_BIT:
                    return kernel_bit_values[:, idx]
                if kind == PAD_BIT:
                    return np.zeros(r, dtype=np.uint8)
                return np.full(r, assign[idx], dtype=np.uint8)

            symbol = (bit_val(bit_l) << 1 | bit_val(bit_r)).astype(np.intp)  # (r,)
            options[:, :, c, :] = cell_cost[:, a][:, symbol, :]
            for j, v in assign.items():
                options[:, :, c, :] += (cost_n if v else cost_x)[:, :, j, :]
        best = lex_argmin(options)  # (W, r)
        total += np.take_along_axis(options, best[..., None, None], axis=2)[:, :, 0, :]
        for t, j in enumerate(var_flags):
            flags[:, :, j] = (best >> (n_var - 1 - t)) & 1

    sel = lex_argmin(total)  # (W,)
    sel_flags = np.take_along_axis(flags, sel[:, None, None], axis=1)[:, 0, :]  # (W, p)
    weights = 1 << np.arange(p - 1, -1, -1, dtype=np.int64)
    aux_values = (sel.astype(np.int64) << p) + sel_flags.astype(np.int64) @ weights

    pick_x = np.take_along_axis(cand_x, sel[:, None, None, None], axis=1)[:, 0]
    pick_n = np.take_along_axis(cand_n, sel[:, None, None, None], axis=1)[:, 0]
    new_parts = np.where(sel_flags[:, :, None].astype(bool), pick_n, pick_x)
    new_syms = new_parts.reshape(w_words, cells)

    costs = np.take_along_axis(total, sel[:, None, None], axis=1)[:, 0, :]
    aux_syms = aux_value_to_symbols(aux_values, cfg.aux_bits)
    return new_syms, aux_values, aux_syms, costs


# ---------------------------------------------------------------------------
# public per-word operations


def _old_arrays(old: OldState, aux_cells: int):
    data = old.data_symbols[None, :]
    aux = None if old.aux_symbols is None else old.aux_symbols[None, :]
    if aux is not None and aux.shape[1] != aux_cells:
        raise ConfigError("old aux state does not match the aux cell count")
    stuck = vals = None
    if old.stuck_mask is not None:
        stuck = old.stuck_mask[None, :]
        vals = old.stuck_values[None, :]
    return data, aux, stuck, vals


def vcc_encode(block: DataBlock, old: OldState, cfg: VccConfig,
               cost: CostFunction, counters: SearchCounters | None = None) -> EncodedWord:
    """Encode one block; returns the minimum-total-cost virtual candidate."""
    if block.n != cfg.n:
        raise ConfigError("block length does not match the configuration")
    if old.data_symbols.size != cfg.cells:
        raise ConfigError("old state does not match the configuration")
    data = block.symbols()[None, :]
    old_data, old_aux, stuck, vals = _old_arrays(old, cfg.aux_cells)
    new_syms, aux_values, _, costs = vcc_search(
        data, old_data, old_aux, stuck, vals, cfg, cost, counters)
    return EncodedWord(
        payload=symbols_to_block(new_syms[0]),
        aux=int(aux_values[0]),
        n=cfg.n,
        aux_bits=cfg.aux_bits,
        cost=tuple(costs[0]),
    )


def _kernel_ints(cfg: VccConfig, payload: int,
                 kernels: Sequence[CosetKernel] | Sequence[int] | None) -> list[int]:
    if kernels is not None:
        return [k.bits if isinstance(k, CosetKernel) else int(k) for k in kernels]
    if not cfg.generated:
        return list(cfg.kernels)
    if cfg.mode != MLC_RIGHT_DIGIT:
        raise ConfigError(
            "full-block generated kernels cannot be recovered from the payload; "
            "pass the kernels explicitly")
    left = extract_even_bits(payload, cfg.n)
    return [k.bits for k in generate_kernels(left, cfg.n // 2, cfg.r, cfg.m)]


def vcc_decode(word: EncodedWord, cfg: VccConfig,
               kernels: Sequence[CosetKernel] | Sequence[int] | None = None) -> DataBlock:
    """Invert the encoding; every well-formed aux index decodes."""
    if word.n != cfg.n or word.aux_bits != cfg.aux_bits:
        raise ConfigError("encoded word does not match the configuration")
    kernel_ints = _kernel_ints(cfg, word.payload, kernels)
    kernel_index, flags = split_aux(word, cfg)
    kernel = kernel_ints[kernel_index]
    sub_mask = (1 << cfg.m) - 1
    if cfg.mode == FULL_BLOCK:
        value = 0
        for j in range(cfg.p):
            y = (word.payload >> (j * cfg.m)) & sub_mask
            k = kernel ^ (sub_mask if flags[j] else 0)
            value |= (y ^ k) << (j * cfg.m)
        return DataBlock(value, cfg.n)
    left = extract_even_bits(word.payload, cfg.n)
    plane = extract_even_bits(word.payload >> 1, cfg.n)  # right digits
    out_plane = 0
    for j in range(cfg.p):
        y = (plane >> (j * cfg.m)) & sub_mask
        k = kernel ^ (sub_mask if flags[j] else 0)
        out_plane |= (y ^ k) << (j * cfg.m)
    bits = np.empty(cfg.n, dtype=np.uint8)
    bits[0::2] = int_to_bit_array(left, cfg.n // 2)
    bits[1::2] = int_to_bit_array(out_plane, cfg.n // 2)
    return DataBlock(bit_array_to_int(bits), cfg.n)
