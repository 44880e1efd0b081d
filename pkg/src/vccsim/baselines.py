"""Reference encoders compared against virtual coset coding.

All encoders share the codec's cost-function and old-state interfaces and
charge the auxiliary cells they write with the same cost function.  Each
returns the candidate minimizing total (payload + aux) cost; ties resolve
to the lowest candidate index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bits import int_to_bit_array, symbols_to_block, words_to_symbol_rows
from .codec import (
    GENERATED,
    DataBlock,
    EncodedWord,
    OldState,
    VccConfig,
    _old_arrays,
    aux_value_to_symbols,
    vcc_search,
)
from .cost import ConfigError, CostFunction, lex_argmin


@dataclass(frozen=True)
class RccCodebook:
    """N random full-length cosets, drawn once per run."""

    cosets: tuple
    n: int = 64

    def __post_init__(self):
        cosets = tuple(int(c) for c in self.cosets)
        count = len(cosets)
        if count < 1 or count & (count - 1):
            raise ConfigError("coset count must be a power of two")
        if any(not 0 <= c < (1 << self.n) for c in cosets):
            raise ConfigError("coset exceeds the block length")
        if len(set(cosets)) != count:
            raise ConfigError("cosets must be distinct")
        object.__setattr__(self, "cosets", cosets)

    @property
    def count(self) -> int:
        return len(self.cosets)

    @property
    def aux_bits(self) -> int:
        return (self.count - 1).bit_length()

    @property
    def aux_cells(self) -> int:
        return (self.aux_bits + 1) // 2

    @classmethod
    def draw(cls, n: int, count: int, keystream) -> "RccCodebook":
        seen = []
        while len(seen) < count:
            candidate = keystream.bits(n)
            if candidate not in seen:
                seen.append(candidate)
        return cls(tuple(seen), n)

    def symbols(self) -> np.ndarray:
        return np.stack([words_to_symbol_rows(np.uint64(c), self.n) for c in self.cosets])


def rcc_search(data_syms, old_data, old_aux, stuck, stuck_values,
               codebook: RccCodebook, cost_fn: CostFunction):
    """Batch RCC search; shapes as in codec.vcc_search."""
    w_words, cells = data_syms.shape
    cand = data_syms[:, None, :] ^ codebook.symbols()[None, :, :]
    if old_data is None:
        old_data = np.zeros_like(data_syms)

    def part(arr):
        return None if arr is None else arr[:, None, :cells]

    costs = cost_fn(old_data[:, None], cand, part(stuck), part(stuck_values))
    aux_table = aux_value_to_symbols(np.arange(codebook.count), codebook.aux_bits)
    if old_aux is not None and codebook.aux_bits:
        aux_stuck = stuck[:, None, cells:] if stuck is not None else None
        aux_vals = stuck_values[:, None, cells:] if stuck_values is not None else None
        costs = costs + cost_fn(old_aux[:, None], aux_table[None], aux_stuck, aux_vals)
    sel = lex_argmin(costs)
    new_syms = np.take_along_axis(cand, sel[:, None, None], axis=1)[:, 0]
    chosen = np.take_along_axis(costs, sel[:, None, None], axis=1)[:, 0]
    return new_syms, sel.astype(np.int64), aux_table[sel], chosen


def rcc_encode(block: DataBlock, old: OldState, codebook: RccCodebook,
               cost: CostFunction) -> EncodedWord:
    if block.n != codebook.n:
        raise ConfigError("block length does not match the codebook")
    data = block.symbols()[None, :]
    old_data, old_aux, stuck, vals = _old_arrays(old, codebook.aux_cells)
    new_syms, sel, _, costs = rcc_search(data, old_data, old_aux, stuck, vals,
                                         codebook, cost)
    return EncodedWord(symbols_to_block(new_syms[0]), int(sel[0]), block.n,
                       codebook.aux_bits, tuple(costs[0]))


def rcc_decode(word: EncodedWord, codebook: RccCodebook) -> DataBlock:
    return DataBlock(word.payload ^ codebook.cosets[word.aux], word.n)


@dataclass(frozen=True)
class FnwConfig:
    """Flip-N-Write: k sub-blocks, one inversion flag each."""

    n: int = 64
    k: int = 4

    def __post_init__(self):
        if self.k < 1 or self.n % self.k:
            raise ConfigError("sub-block count must divide the block length")
        if (self.n // self.k) % 2:
            raise ConfigError("sub-blocks must hold whole cells")

    @property
    def sub_bits(self) -> int:
        return self.n // self.k

    @property
    def aux_bits(self) -> int:
        return self.k

    def as_vcc(self) -> VccConfig:
        # FNW is the one-kernel degenerate case: the all-zero kernel XOR'd
        # (identity) or XNOR'd (inversion) with each sub-block.
        return VccConfig(n=self.n, m=self.sub_bits, r=1, kernels=(0,))


def fnw_encode(block: DataBlock, old: OldState, cfg: FnwConfig,
               cost: CostFunction) -> EncodedWord:
    from .codec import vcc_encode

    return vcc_encode(block, old, cfg.as_vcc(), cost)


def fnw_decode(word: EncodedWord, cfg: FnwConfig) -> DataBlock:
    from .codec import vcc_decode

    return vcc_decode(word, cfg.as_vcc())


def dbi_encode(block: DataBlock, old: OldState, cost: CostFunction) -> EncodedWord:
    """Data-block inversion at 16-bit granularity (reported jointly with FNW)."""
    return fnw_encode(block, old, FnwConfig(block.n, block.n // 16), cost)


FLIPCY_AUX_BITS = 2
FLIPCY_CANDIDATES = 3  # identity, ones' complement, two's complement


def _flipcy_words(words: np.ndarray, n: int) -> np.ndarray:
    mask = np.uint64((1 << n) - 1) if n < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
    words = np.asarray(words, dtype=np.uint64)
    ones = ~words & mask
    twos = (ones + np.uint64(1)) & mask
    return np.stack([words, ones, twos], axis=-1)


def flipcy_search(data_words, old_data, old_aux, stuck, stuck_values,
                  n: int, cost_fn: CostFunction):
    """Batch Flipcy search over W words (data_words: (W,) uint64)."""
    cands = _flipcy_words(data_words, n)  # (W, 3)
    cand_syms = words_to_symbol_rows(cands, n)  # (W, 3, cells)
    cells = n // 2
    if old_data is None:
        old_data = np.zeros((len(data_words), cells), dtype=np.uint8)

    def part(arr):
        return None if arr is None else arr[:, None, :cells]

    costs = cost_fn(old_data[:, None], cand_syms, part(stuck), part(stuck_values))
    aux_table = aux_value_to_symbols(np.arange(FLIPCY_CANDIDATES), FLIPCY_AUX_BITS)
    if old_aux is not None:
        aux_stuck = stuck[:, None, cells:] if stuck is not None else None
        aux_vals = stuck_values[:, None, cells:] if stuck_values is not None else None
        costs = costs + cost_fn(old_aux[:, None], aux_table[None], aux_stuck, aux_vals)
    sel = lex_argmin(costs)
    new_syms = np.take_along_axis(cand_syms, sel[:, None, None], axis=1)[:, 0]
    chosen = np.take_along_axis(costs, sel[:, None, None], axis=1)[:, 0]
    return new_syms, sel.astype(np.int64), aux_table[sel], chosen


def flipcy_encode(block: DataBlock, old: OldState, cost: CostFunction) -> EncodedWord:
    """Min-cost of identity, ones' complement, two's complement (2 aux bits)."""
    if block.n > 64:
        raise ConfigError("flipcy operates on at most 64-bit blocks")
    data = np.array([block.value], dtype=np.uint64)
    old_data, old_aux, stuck, vals = _old_arrays(old, (FLIPCY_AUX_BITS + 1) // 2)
    new_syms, sel, _, costs = flipcy_search(data, old_data, old_aux, stuck, vals,
                                            block.n, cost)
    return EncodedWord(symbols_to_block(new_syms[0]), int(sel[0]), block.n,
                       FLIPCY_AUX_BITS, tuple(costs[0]))


def flipcy_decode(word: EncodedWord) -> DataBlock:
    mask = (1 << word.n) - 1
    if word.aux == 0:
        return DataBlock(word.payload, word.n)
    if word.aux == 1:
        return DataBlock(~word.payload & mask, word.n)
    if word.aux == 2:
        return DataBlock((~(word.payload - 1)) & mask, word.n)
    raise ConfigError(f"invalid flipcy aux index {word.aux}")


def unencoded_encode(block: DataBlock, old: OldState,
                     cost: CostFunction) -> EncodedWord:
    """Plain writeback: no candidates, no aux bits; differential-write cost."""
    stuck = vals = None
    if old.stuck_mask is not None:
        stuck = old.stuck_mask[: old.data_symbols.size]
        vals = old.stuck_values[: old.data_symbols.size]
    c = cost(old.data_symbols, block.symbols(), stuck, vals)
    return EncodedWord(block.value, 0, block.n, 0, tuple(np.atleast_1d(c.squeeze(-1))))
