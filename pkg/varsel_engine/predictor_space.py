"""
Canonical indexing of main-effect and pairwise interaction terms.

Term ids run 1..total_terms: the first n_main ids are the main effects and
the remaining ids are the unordered pairs (i, j), i < j, in lexicographic
order (1,2), (1,3), ..., (1,n), (2,3), ...  Id 0 is the dummy marker and is
never a valid term.
"""
from dataclasses import dataclass, field
from functools import cached_property
from math import comb, isqrt
from typing import Iterable, Optional, Sequence, Union

import numpy as np

DUMMY = 0


@dataclass(frozen=True)
class MainEffect:
    """A single original predictor column."""
    index: int

    def __str__(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True)
class Interaction:
    """The elementwise product of two main-effect columns (first < second)."""
    first: int
    second: int

    def __post_init__(self):
        if self.first >= self.second:
            raise ValueError(
                f"Interaction requires first < second, got ({self.first}, {self.second})"
            )

    @property
    def parents(self) -> tuple[int, int]:
        return (self.first, self.second)

    def __str__(self) -> str:
        return f"x{self.first}:x{self.second}"


TermDescriptor = Union[MainEffect, Interaction]


def term_count(n_main: int, include_interactions: bool = True, max_order: int = 2) -> int:
    """
    Size of the predictor space.

    Counts the n_main main effects plus C(n_main, k) terms for every
    interaction order k up to max_order. Only pairwise interactions are
    supported by the rest of the engine.
    """
    if n_main < 1:
        raise ValueError(f"n_main must be >= 1, got {n_main}")
    if max_order < 1:
        raise ValueError(f"max_order must be >= 1, got {max_order}")
    if max_order > 2:
        raise ValueError(
            f"Only pairwise interactions are supported (max_order=2), got {max_order}"
        )
    if not include_interactions:
        return n_main
    return n_main + sum(comb(n_main, k) for k in range(2, max_order + 1))


@dataclass(frozen=True)
class PredictorSpace:
    """The full predictor space: n_main main effects plus, optionally, all pairs."""
    n_main: int
    include_interactions: bool = True
    column_names: Optional[tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.n_main < 1:
            raise ValueError(f"n_main must be >= 1, got {self.n_main}")
        if self.column_names is not None and len(self.column_names) != self.n_main:
            raise ValueError(
                f"Expected {self.n_main} column names, got {len(self.column_names)}"
            )

    @cached_property
    def total_terms(self) -> int:
        return term_count(self.n_main, self.include_interactions)

    def is_valid(self, term_id: int) -> bool:
        return 1 <= term_id <= self.total_terms

    def is_main(self, term_id: int) -> bool:
        self._check_id(term_id)
        return term_id <= self.n_main

    def _check_id(self, term_id: int) -> None:
        if not self.is_valid(term_id):
            raise ValueError(
                f"Term id {term_id} outside 1..{self.total_terms}"
            )

    def _row_start(self, row: int) -> int:
        """Number of pairs whose first (0-based) index is below row."""
        return row * self.n_main - row * (row + 1) // 2

    def encode(self, descriptor: TermDescriptor) -> int:
        n = self.n_main
        if isinstance(descriptor, MainEffect):
            if not 1 <= descriptor.index <= n:
                raise ValueError(f"Main effect {descriptor.index} outside 1..{n}")
            return descriptor.index
        if isinstance(descriptor, Interaction):
            if not self.include_interactions:
                raise ValueError("Interactions are disabled for this predictor space")
            i, j = descriptor.first, descriptor.second
            if not (1 <= i < j <= n):
                raise ValueError(f"Interaction ({i}, {j}) outside 1..{n}")
            offset = (i - 1) * n - i * (i - 1) // 2 + (j - i)
            return n + offset
        raise ValueError(f"Unknown term descriptor: {descriptor!r}")

    def decode(self, term_id: int) -> TermDescriptor:
        self._check_id(term_id)
        n = self.n_main
        if term_id <= n:
            return MainEffect(term_id)

        k = term_id - n - 1  # 0-based pair offset
        # Row solves m*n - m(m+1)/2 <= k; integer estimate then exact correction.
        b = 2 * n - 1
        row = max(0, (b - isqrt(max(b * b - 8 * k, 0))) // 2)
        while row > 0 and self._row_start(row) > k:
            row -= 1
        while self._row_start(row + 1) <= k:
            row += 1
        i = row + 1
        j = i + (k - self._row_start(row)) + 1
        return Interaction(i, j)

    def parents_of(self, term_id: int) -> frozenset[int]:
        descriptor = self.decode(term_id)
        if isinstance(descriptor, MainEffect):
            return frozenset()
        return frozenset(descriptor.parents)

    def children_of(self, main_id: int) -> frozenset[int]:
        if not self.is_main(main_id):
            raise ValueError(f"Term id {main_id} is an interaction, not a main effect")
        if not self.include_interactions:
            return frozenset()
        return frozenset(
            self.encode(Interaction(min(main_id, other), max(main_id, other)))
            for other in range(1, self.n_main + 1)
            if other != main_id
        )

    @cached_property
    def _pair_table(self) -> tuple[np.ndarray, np.ndarray]:
        first, second = np.triu_indices(self.n_main, k=1)
        return first.astype(np.int64), second.astype(np.int64)

    def interaction_columns(self, term_ids: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
        """
        Zero-based (first, second) main-effect columns for interaction ids.
        """
        ids = np.asarray(list(term_ids), dtype=np.int64)
        if ids.size and (ids.min() <= self.n_main or ids.max() > self.total_terms):
            raise ValueError("interaction_columns expects interaction ids only")
        first, second = self._pair_table
        offsets = ids - self.n_main - 1
        return first[offsets], second[offsets]

    def main_name(self, index: int) -> str:
        if self.column_names is not None:
            return self.column_names[index - 1]
        return f"x{index}"

    def term_name(self, term_id: int) -> str:
        descriptor = self.decode(term_id)
        if isinstance(descriptor, MainEffect):
            return self.main_name(descriptor.index)
        return f"{self.main_name(descriptor.first)}:{self.main_name(descriptor.second)}"

    def _main_lookup(self, label: str) -> int:
        label = label.strip()
        if self.column_names is not None:
            if label in self.column_names:
                return self.column_names.index(label) + 1
            folded = [name.lower() for name in self.column_names]
            if label.lower() in folded:
                return folded.index(label.lower()) + 1
        if label[:1] in ("x", "X") and label[1:].isdigit():
            index = int(label[1:])
            if 1 <= index <= self.n_main:
                return index
        raise ValueError(f"Unknown predictor '{label}'")

    def parse_term(self, name: str) -> int:
        """Resolve 'x3', 'x1:x5', 'alcohol' or 'pH:alcohol' to a term id."""
        parts = name.split(":")
        if len(parts) == 1:
            return self.encode(MainEffect(self._main_lookup(parts[0])))
        if len(parts) == 2:
            a, b = sorted(self._main_lookup(part) for part in parts)
            if a == b:
                raise ValueError(f"Interaction of a predictor with itself: '{name}'")
            return self.encode(Interaction(a, b))
        raise ValueError(f"Only pairwise interactions are supported: '{name}'")

    def parse_terms(self, names: Sequence[Union[str, int]]) -> tuple[int, ...]:
        ids = []
        for name in names:
            if isinstance(name, int):
                self._check_id(name)
                ids.append(name)
            else:
                ids.append(self.parse_term(name))
        return tuple(sorted(set(ids)))

    def is_hierarchical(self, term_ids: Iterable[int]) -> bool:
        """True when every interaction's parent main effects are present."""
        present = set(term_ids)
        return all(self.parents_of(t) <= present for t in present)

    def complete_hierarchy(self, term_ids: Iterable[int]) -> tuple[int, ...]:
        present = set(term_ids)
        for t in list(present):
            present |= self.parents_of(t)
        return tuple(sorted(present))


def encode_term(descriptor: TermDescriptor, space: PredictorSpace) -> int:
    return space.encode(descriptor)


def decode_term(term_id: int, space: PredictorSpace) -> TermDescriptor:
    return space.decode(term_id)


def parents_of(term_id: int, space: PredictorSpace) -> frozenset[int]:
    return space.parents_of(term_id)


def children_of(main_id: int, space: PredictorSpace) -> frozenset[int]:
    return space.children_of(main_id)
