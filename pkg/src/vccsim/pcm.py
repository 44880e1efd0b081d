"""Simulated MLC PCM: differential writes, per-cell wear and lifetime,
stuck-at faults, fault-map snapshots, and row-failure judgment.

Cells are kept as flat struct-of-arrays over the whole memory; a row is a
contiguous span of 256 data cells followed by 32 auxiliary cells (8 aux
bits per 64-bit word).  A cell programs only when the incoming symbol
differs from its state; each program adds one wear unit, and the program
that pushes wear past the cell's budget lands and then freezes the cell at
that value.  Stuck cells never change again; writes attempting a different
value count as stuck-at-wrong (SAW).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .cost import ConfigError, SymbolTransitionTable


class AddressError(ValueError):
    """Address out of range for the configured geometry."""


@dataclass(frozen=True)
class MemoryGeometry:
    capacity_bytes: int = 1 << 20
    row_data_bits: int = 512
    word_bits: int = 64
    aux_bits_per_word: int = 8
    page_bytes: int = 4096

    def __post_init__(self):
        if self.row_data_bits % self.word_bits:
            raise ConfigError("row width must hold whole words")
        if self.word_bits % 2 or self.aux_bits_per_word % 2:
            raise ConfigError("word and aux widths must be whole cells")
        if self.capacity_bytes % self.row_bytes:
            raise ConfigError("capacity must hold whole rows")
        if self.page_bytes % self.row_bytes:
            raise ConfigError("pages must hold whole rows")

    @property
    def row_bytes(self) -> int:
        return self.row_data_bits // 8

    @property
    def words_per_row(self) -> int:
        return self.row_data_bits // self.word_bits

    @property
    def data_cells_per_row(self) -> int:
        return self.row_data_bits // 2

    @property
    def aux_cells_per_word(self) -> int:
        return self.aux_bits_per_word // 2

    @property
    def aux_cells_per_row(self) -> int:
        return self.words_per_row * self.aux_cells_per_word

    @property
    def cells_per_row(self) -> int:
        return self.data_cells_per_row + self.aux_cells_per_row

    @property
    def rows(self) -> int:
        return self.capacity_bytes // self.row_bytes

    @property
    def total_cells(self) -> int:
        return self.rows * self.cells_per_row

    def row_of_address(self, address: int) -> int:
        row, offset = divmod(address, self.row_bytes)
        if offset:
            raise AddressError(f"address {address:#x} not row aligned")
        if not 0 <= row < self.rows:
            raise AddressError(f"address {address:#x} out of range")
        return row


@dataclass(frozen=True)
class LifetimeModel:
    """Per-cell write budgets: normal, truncated so every budget is >= 1."""

    mean_writes: float = 1e4
    coefficient_of_variation: float = 0.2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        sigma = self.mean_writes * self.coefficient_of_variation
        draws = rng.normal(self.mean_writes, sigma, size=size)
        return np.maximum(np.rint(draws), 1.0).astype(np.int64)


UNLIMITED_BUDGET = np.int64(2 ** 62)

_FAULT_MAGIC = b"VCFM"
_FAULT_VERSION = 1


@dataclass
class FaultMap:
    """Stuck flags and frozen values sampled at a fixed incidence rate."""

    geometry: MemoryGeometry
    rate: float
    seed: int
    stuck: np.ndarray   # (total_cells,) bool
    values: np.ndarray  # (total_cells,) uint8; meaningful where stuck

    def stuck_count(self) -> int:
        return int(self.stuck.sum())

    def save(self, path) -> None:
        """Compact binary form: header plus run-length-encoded stuck spans."""
        idx = np.flatnonzero(self.stuck)
        runs = []
        if idx.size:
            breaks = np.flatnonzero(np.diff(idx) > 1)
            starts = np.concatenate([[0], breaks + 1])
            ends = np.concatenate([breaks, [idx.size - 1]])
            runs = [(int(idx[s]), int(idx[e] - idx[s] + 1)) for s, e in zip(starts, ends)]
        with open(path, "wb") as fh:
            fh.write(_FAULT_MAGIC)
            fh.write(struct.pack("<HQQdQI", _FAULT_VERSION, self.geometry.capacity_bytes,
                                 self.stuck.size, self.rate, self.seed, len(runs)))
            for start, length in runs:
                fh.write(struct.pack("<QI", start, length))
                vals = self.values[start:start + length]
                packed = np.zeros((length + 3) // 4, dtype=np.uint8)
                for i in range(length):
                    packed[i // 4] |= vals[i] << (2 * (i % 4))
                fh.write(packed.tobytes())

    @classmethod
    def load(cls, path, geometry: MemoryGeometry | None = None) -> "FaultMap":
        with open(path, "rb") as fh:
            if fh.read(4) != _FAULT_MAGIC:
                raise ConfigError("not a fault map file")
            version, capacity, cells, rate, seed, n_runs = struct.unpack(
                "<HQQdQI", fh.read(struct.calcsize("<HQQdQI")))
            if version != _FAULT_VERSION:
                raise ConfigError(f"unsupported fault map version {version}")
            geometry = geometry or MemoryGeometry(capacity_bytes=capacity)
            if geometry.total_cells != cells:
                raise ConfigError("fault map does not match the geometry")
            stuck = np.zeros(cells, dtype=bool)
            values = np.zeros(cells, dtype=np.uint8)
            for _ in range(n_runs):
                start, length = struct.unpack("<QI", fh.read(12))
                packed = np.frombuffer(fh.read((length + 3) // 4), dtype=np.uint8)
                for i in range(length):
                    values[start + i] = (packed[i // 4] >> (2 * (i % 4))) & 3
                stuck[start:start + length] = True
        return cls(geometry, rate, seed, stuck, values)


def snapshot_fault_map(geometry: MemoryGeometry, rate: float, seed: int) -> FaultMap:
    """Bernoulli(rate) stuck flags with uniform frozen symbols."""
    if not 0.0 <= rate <= 1.0:
        raise ConfigError("fault rate must be a probability")
    rng = np.random.default_rng(seed)
    stuck = rng.random(geometry.total_cells) < rate
    values = rng.integers(0, 4, size=geometry.total_cells, dtype=np.uint8)
    values[~stuck] = 0
    return FaultMap(geometry, rate, seed, stuck, values)


@dataclass
class WriteReport:
    energy: float
    cells_changed: int
    saw_count: int
    saw_mask: np.ndarray   # over the written span
    newly_stuck: int


class RowOutcome:
    OK = "ok"
    UNCORRECTABLE = "uncorrectable"


class CellArray:
    """Single-writer simulated memory; all state is plain numpy arrays."""

    def __init__(self, geometry: MemoryGeometry,
                 table: SymbolTransitionTable | None = None,
                 budgets: np.ndarray | None = None,
                 init_states: np.ndarray | None = None):
        self.geometry = geometry
        self.table = table or SymbolTransitionTable.from_high_low()
        n = geometry.total_cells
        self.state = np.zeros(n, dtype=np.uint8) if init_states is None \
            else np.asarray(init_states, dtype=np.uint8).copy()
        if self.state.shape != (n,):
            raise ConfigError("initial state does not match the geometry")
        self.wear = np.zeros(n, dtype=np.int64)
        self.budget = np.full(n, UNLIMITED_BUDGET, dtype=np.int64) if budgets is None \
            else np.asarray(budgets, dtype=np.int64).copy()
        if self.budget.shape != (n,):
            raise ConfigError("budget array does not match the geometry")
        if (self.budget < 1).any():
            raise ConfigError("all lifetime budgets must be >= 1")
        self.stuck = np.zeros(n, dtype=bool)

    def apply_fault_map(self, fault_map: FaultMap) -> None:
        if fault_map.stuck.shape != self.stuck.shape:
            raise ConfigError("fault map does not match the geometry")
        self.stuck |= fault_map.stuck
        self.state[fault_map.stuck] = fault_map.values[fault_map.stuck]

    def row_span(self, row: int) -> slice:
        if not 0 <= row < self.geometry.rows:
            raise AddressError(f"row {row} out of range")
        width = self.geometry.cells_per_row
        return slice(row * width, (row + 1) * width)

    def read_row(self, row: int) -> np.ndarray:
        """Current symbols (data cells then aux cells); stuck cells report
        their frozen value."""
        return self.state[self.row_span(row)].copy()

    def row_stuck(self, row: int) -> np.ndarray:
        return self.stuck[self.row_span(row)].copy()

    def _write_span(self, span: slice, new_values: np.ndarray) -> WriteReport:
        new = np.asarray(new_values, dtype=np.uint8)
        state = self.state[span]
        stuck = self.stuck[span]
        if new.shape != state.shape:
            raise ConfigError("write width does not match the span")
        changed = new != state
        program = changed & ~stuck
        saw_mask = changed & stuck
        energy = float(self.table.cost[state[program], new[program]].sum())
        state[program] = new[program]
        wear = self.wear[span]
        wear[program] += 1
        newly = program & (wear > self.budget[span])
        stuck[newly] = True  # frozen at the value that just landed
        return WriteReport(
            energy=energy,
            cells_changed=int(program.sum()),
            saw_count=int(saw_mask.sum()),
            saw_mask=saw_mask,
            newly_stuck=int(newly.sum()),
        )

    def write_row(self, row: int, new_values: np.ndarray) -> WriteReport:
        """Differential write of a full row (data plus aux cells)."""
        return self._write_span(self.row_span(row), new_values)

    def write_word(self, row: int, word: int, payload_symbols: np.ndarray,
                   aux_symbols: np.ndarray | None = None) -> WriteReport:
        """Write one word's data cells and (optionally) its aux cells."""
        g = self.geometry
        if not 0 <= word < g.words_per_row:
            raise AddressError(f"word {word} out of range")
        base = self.row_span(row).start
        cells = g.word_bits // 2
        intended = self.state[base:base + g.cells_per_row].copy()
        intended[word * cells:(word + 1) * cells] = payload_symbols
        if aux_symbols is not None and len(aux_symbols):
            astart = g.data_cells_per_row + word * g.aux_cells_per_word
            intended[astart:astart + len(aux_symbols)] = aux_symbols
        return self._write_span(self.row_span(row), intended)

    def row_write_outcome(self, row: int, new_values: np.ndarray,
                          corrector: "Corrector") -> tuple[str, WriteReport]:
        """Write a row and judge whether residual SAW errors are covered."""
        report = self.write_row(row, new_values)
        ok = corrector.row_ok(self, row, np.asarray(new_values, dtype=np.uint8), report)
        return (RowOutcome.OK if ok else RowOutcome.UNCORRECTABLE), report


class Corrector:
    """Row-level judgment of residual stuck-at-wrong errors."""

    def row_ok(self, array: CellArray, row: int, intended: np.ndarray,
               report: WriteReport) -> bool:
        raise NotImplementedError


class NoCorrection(Corrector):
    """Unencoded or coset-intrinsic: any residual SAW is data loss."""

    def row_ok(self, array, row, intended, report) -> bool:
        return report.saw_count == 0
