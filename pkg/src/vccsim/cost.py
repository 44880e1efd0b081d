"""Per-symbol transition costs and lexicographic compositions.

Cost functions evaluate candidate writes against the previous cell contents.
They are vectorized: ``new_symbols`` may carry arbitrary leading axes
(candidates, kernels, words, ...) and the result has shape
``new_symbols.shape[:-1] + (components,)``.  Costs of disjoint cell groups
add componentwise, which the encoders rely on when they assemble a word
cost from sub-block and auxiliary-cell costs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bits import SYMBOL_ONES

STATE_LABELS = ("00", "01", "11", "10")  # cell states in resistance order
_LABEL_TO_SYMBOL = {"00": 0, "01": 1, "11": 3, "10": 2}

DEFAULT_HIGH_ENERGY = 10.0
DEFAULT_LOW_ENERGY = 1.0


class ConfigError(ValueError):
    """Invalid configuration or malformed input."""


@dataclass(frozen=True)
class SymbolTransitionTable:
    """4x4 write-energy table indexed by (old symbol, new symbol)."""

    cost: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.cost, dtype=np.float64)
        if table.shape != (4, 4):
            raise ConfigError("transition table must be 4x4")
        if np.any(np.diagonal(table) != 0.0):
            raise ConfigError("same-state transitions must cost 0")
        object.__setattr__(self, "cost", table)

    @classmethod
    def from_high_low(cls, high: float = DEFAULT_HIGH_ENERGY,
                      low: float = DEFAULT_LOW_ENERGY) -> "SymbolTransitionTable":
        """High when the new symbol's right digit is 1, low otherwise."""
        table = np.zeros((4, 4))
        for old in range(4):
            for new in range(4):
                if old != new:
                    table[old, new] = high if new & 1 else low
        return cls(table)

    @classmethod
    def bit_changes(cls) -> "SymbolTransitionTable":
        """Cost = number of flipped bits (Hamming distance of the symbols)."""
        table = np.zeros((4, 4))
        for old in range(4):
            for new in range(4):
                table[old, new] = bin(old ^ new).count("1")
        return cls(table)

    @classmethod
    def symbol_changes(cls) -> "SymbolTransitionTable":
        """Cost = 1 per reprogrammed cell."""
        return cls(1.0 - np.eye(4))

    @classmethod
    def parse(cls, text: str) -> "SymbolTransitionTable":
        """Parse the plain-text key-value format, e.g. ``00>01 = 10.0``.

        All 16 entries are required (row-major old -> new, state labels as
        written in the transition table).
        """
        entries = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                key, value = line.split("=", 1)
                old_label, new_label = key.strip().split(">")
                old = _LABEL_TO_SYMBOL[old_label.strip()]
                new = _LABEL_TO_SYMBOL[new_label.strip()]
                entries[(old, new)] = float(value)
            except (ValueError, KeyError) as exc:
                raise ConfigError(f"bad transition entry on line {lineno}: {line!r}") from exc
        if len(entries) != 16:
            raise ConfigError(f"expected 16 transition entries, got {len(entries)}")
        table = np.zeros((4, 4))
        for (old, new), value in entries.items():
            table[old, new] = value
        return cls(table)

    @classmethod
    def load(cls, path) -> "SymbolTransitionTable":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.parse(fh.read())

    def dump(self) -> str:
        lines = []
        for old_label in STATE_LABELS:
            for new_label in STATE_LABELS:
                o, n = _LABEL_TO_SYMBOL[old_label], _LABEL_TO_SYMBOL[new_label]
                lines.append(f"{old_label}>{new_label} = {self.cost[o, n]}")
        return "\n".join(lines) + "\n"


def ones_count(new_bits: int) -> int:
    """Hamming weight of a bit vector."""
    return new_bits.bit_count()


def mlc_energy(old_symbols, new_symbols, table: SymbolTransitionTable) -> float:
    """Total write energy of a symbol-wise transition (no stuck handling)."""
    old = np.asarray(old_symbols, dtype=np.uint8)
    new = np.asarray(new_symbols, dtype=np.uint8)
    if old.shape != new.shape:
        raise ConfigError("old/new symbol counts differ")
    return float(table.cost[old, new].sum())


def saw_count(new_symbols, stuck_mask, stuck_values) -> int:
    """Stuck cells whose frozen value differs from the attempted symbol."""
    new = np.asarray(new_symbols, dtype=np.uint8)
    stuck = np.asarray(stuck_mask, dtype=bool)
    frozen = np.asarray(stuck_values, dtype=np.uint8)
    if stuck.shape != new.shape or frozen.shape != new.shape:
        raise ConfigError("stuck mask/values must align with the symbols")
    return int((stuck & (new != frozen)).sum())


class CostFunction:
    """Vectorized candidate cost; see module docstring for shapes.

    ``components`` is the number of lexicographically ordered values the
    function yields per candidate; lower tuples are better.
    """

    components: int = 1
    # True when complementing every bit of a candidate maps its cost to
    # complement_total(cells) - cost (the Hamming-weight threshold trick).
    complement_symmetric: bool = False

    def __call__(self, old, new, stuck, stuck_values) -> np.ndarray:
        raise NotImplementedError

    def complement_total(self, cells: int) -> np.ndarray:
        raise NotImplementedError


class OnesCountCost(CostFunction):
    """Number of 1 bits written (ignores the previous contents)."""

    complement_symmetric = True

    def __call__(self, old, new, stuck, stuck_values):
        return SYMBOL_ONES[np.asarray(new, dtype=np.uint8)].sum(axis=-1, dtype=np.float64)[..., None]

    def complement_total(self, cells: int) -> np.ndarray:
        return np.array([2.0 * cells])


class EnergyCost(CostFunction):
    """Table-driven write energy; stuck cells do not switch and cost 0."""

    def __init__(self, table: SymbolTransitionTable | None = None):
        self.table = table or SymbolTransitionTable.from_high_low()

    def __call__(self, old, new, stuck, stuck_values):
        new = np.asarray(new, dtype=np.uint8)
        per_cell = self.table.cost[np.asarray(old, dtype=np.uint8), new]
        if stuck is not None:
            per_cell = np.where(stuck, 0.0, per_cell)
        return per_cell.sum(axis=-1)[..., None]


class SawCost(CostFunction):
    """Count of stuck cells that would hold the wrong value."""

    def __call__(self, old, new, stuck, stuck_values):
        new = np.asarray(new, dtype=np.uint8)
        if stuck is None:
            shape = np.broadcast_shapes(new.shape[:-1], np.asarray(old).shape[:-1])
            return np.zeros(shape + (1,))
        mism = np.asarray(stuck, bool) & (new != np.asarray(stuck_values, dtype=np.uint8))
        return mism.sum(axis=-1, dtype=np.float64)[..., None]


class Lexicographic(CostFunction):
    def __init__(self, primary: CostFunction, secondary: CostFunction):
        self.primary = primary
        self.secondary = secondary
        self.components = primary.components + secondary.components

    def __call__(self, old, new, stuck, stuck_values):
        return np.concatenate(
            [self.primary(old, new, stuck, stuck_values),
             self.secondary(old, new, stuck, stuck_values)],
            axis=-1,
        )


def lexicographic(primary: CostFunction, secondary: CostFunction) -> Lexicographic:
    """Compose two costs; primary decides, secondary breaks ties."""
    return Lexicographic(primary, secondary)


def lex_argmin(costs: np.ndarray) -> np.ndarray:
    """Index of the lexicographically smallest row along axis -2.

    ``costs`` has shape (..., K, components); returns int indices of shape
    (...,).  Ties resolve to the lowest index.
    """
    costs = np.asarray(costs)
    alive = np.ones(costs.shape[:-1], dtype=bool)
    for c in range(costs.shape[-1]):
        comp = np.where(alive, costs[..., c], np.inf)
        best = comp.min(axis=-1, keepdims=True)
        alive &= comp <= best
    return alive.argmax(axis=-1)


def lex_less(a, b) -> bool:
    """Strict lexicographic comparison of two cost vectors."""
    return tuple(np.asarray(a).ravel()) < tuple(np.asarray(b).ravel())


@dataclass(frozen=True)
class CostVector:
    """Ordered cost tuple compared lexicographically."""

    values: tuple

    def __lt__(self, other: "CostVector") -> bool:
        return self.values < other.values

    def __le__(self, other: "CostVector") -> bool:
        return self.values <= other.values

    def __add__(self, other: "CostVector") -> "CostVector":
        return CostVector(tuple(a + b for a, b in zip(self.values, other.values)))
