"""
Chromosome encodings and their genetic operators.

Two formulations are supported:

- StandardChromosome: one bit per term of the predictor space.
- IndexedChromosome: a fixed number of slots, each holding a term id or 0
  (a dummy slot reserving room for a future term).

Every public operator returns a chromosome that satisfies strong hierarchy:
an included interaction always has both parent main effects included.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from .models import OperatorLog, RepairLog
from .predictor_space import DUMMY, PredictorSpace

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MutationRates:
    """Mutation probabilities: p_mutate (standard), p_add / p_del (indexed)."""
    p_mutate: float = 0.5
    p_add: float = 0.5
    p_del: float = 0.5

    def __post_init__(self):
        for name in ("p_mutate", "p_add", "p_del"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be within [0, 1], got {value}")


@dataclass(frozen=True, eq=False)
class StandardChromosome:
    """One inclusion bit per term id (bit k-1 holds term k)."""
    space: PredictorSpace
    bits: np.ndarray

    def __post_init__(self):
        bits = np.array(self.bits, dtype=bool)
        if bits.shape != (self.space.total_terms,):
            raise ValueError(
                f"Standard chromosome needs {self.space.total_terms} bits, got {bits.shape}"
            )
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    @property
    def length(self) -> int:
        return self.bits.shape[0]

    def active_terms(self) -> tuple[int, ...]:
        return tuple(int(t) for t in np.flatnonzero(self.bits) + 1)

    def to_text(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    @classmethod
    def from_text(cls, text: str, space: PredictorSpace) -> 'StandardChromosome':
        text = text.strip()
        if set(text) - {"0", "1"}:
            raise ValueError(f"Standard chromosome text must be 0/1 only: '{text[:40]}'")
        return cls(space, np.array([c == "1" for c in text], dtype=bool))

    @classmethod
    def from_terms(cls, space: PredictorSpace, terms: Iterable[int]) -> 'StandardChromosome':
        bits = np.zeros(space.total_terms, dtype=bool)
        for t in terms:
            if not space.is_valid(t):
                raise ValueError(f"Term {t} outside 1..{space.total_terms}")
            bits[t - 1] = True
        return cls(space, bits)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, StandardChromosome)
            and self.space == other.space
            and np.array_equal(self.bits, other.bits)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class IndexedChromosome:
    """Fixed-length vector of term ids with 0 marking dummy slots."""
    space: PredictorSpace
    slots: np.ndarray

    def __post_init__(self):
        slots = np.array(self.slots, dtype=np.int64)
        if slots.ndim != 1 or slots.size < 1:
            raise ValueError(f"Indexed chromosome needs at least one slot, got {slots.shape}")
        if slots.min() < 0 or slots.max() > self.space.total_terms:
            raise ValueError(f"Slot values must lie in 0..{self.space.total_terms}")
        filled = slots[slots != DUMMY]
        if np.unique(filled).size != filled.size:
            raise ValueError(f"Duplicate terms in indexed chromosome: {slots.tolist()}")
        slots.flags.writeable = False
        object.__setattr__(self, "slots", slots)

    @property
    def length(self) -> int:
        return self.slots.shape[0]

    def active_terms(self) -> tuple[int, ...]:
        return tuple(int(t) for t in np.sort(self.slots[self.slots != DUMMY]))

    def to_text(self) -> str:
        return ",".join(str(int(s)) for s in self.slots)

    @classmethod
    def from_text(cls, text: str, space: PredictorSpace) -> 'IndexedChromosome':
        try:
            slots = [int(part) for part in text.strip().split(",")]
        except ValueError as e:
            raise ValueError(f"Indexed chromosome text must be comma-separated ids: {e}")
        return cls(space, np.array(slots, dtype=np.int64))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IndexedChromosome)
            and self.space == other.space
            and np.array_equal(self.slots, other.slots)
        )

    __hash__ = None


Chromosome = Union[StandardChromosome, IndexedChromosome]


def active_terms(c: Chromosome) -> tuple[int, ...]:
    """Sorted included term ids."""
    return c.active_terms()


def chromosome_from_text(text: str, space: PredictorSpace, encoding: str) -> Chromosome:
    if encoding == "standard":
        return StandardChromosome.from_text(text, space)
    if encoding == "indexed":
        return IndexedChromosome.from_text(text, space)
    raise ValueError(f"Unknown encoding: {encoding}")


# ---------------------------------------------------------------------------
# Hierarchy repair
# ---------------------------------------------------------------------------

def _repair_bits(bits: np.ndarray, space: PredictorSpace) -> RepairLog:
    """Set every missing parent bit in place."""
    log = RepairLog()
    n = space.n_main
    interactions = np.flatnonzero(bits[n:]) + n + 1
    if interactions.size == 0:
        return log
    first, second = space.interaction_columns(interactions)
    needed = np.union1d(first, second)
    missing = needed[~bits[needed]]
    bits[missing] = True
    log.inserted.extend(int(m) + 1 for m in missing)
    return log


def _repair_slots(
    slots: np.ndarray,
    space: PredictorSpace,
    rng: Optional[np.random.Generator]
) -> RepairLog:
    """
    Insert missing parents into dummy slots in place.

    Interactions are processed in ascending id order. When there are not
    enough dummy slots for an interaction's missing parents, the interaction
    itself is removed and recorded as an overflow.
    """
    log = RepairLog()
    present = set(int(s) for s in slots if s != DUMMY)
    interactions = sorted(t for t in present if t > space.n_main)
    for term in interactions:
        if term not in present:
            continue
        missing = sorted(space.parents_of(term) - present)
        if not missing:
            continue
        dummies = np.flatnonzero(slots == DUMMY)
        if len(missing) <= dummies.size:
            if rng is None:
                positions = dummies[:len(missing)]
            else:
                positions = rng.choice(dummies, size=len(missing), replace=False)
            for position, parent in zip(positions, missing):
                slots[position] = parent
                present.add(parent)
                log.inserted.append(parent)
        else:
            slots[slots == term] = DUMMY
            present.discard(term)
            log.removed.append(term)
            logger.debug("Repair overflow: dropped term %d (no room for parents %s)", term, missing)
    return log


def repair_hierarchy(
    c: Chromosome,
    rng: Optional[np.random.Generator] = None
) -> tuple[Chromosome, RepairLog]:
    """
    Enforce strong hierarchy.

    Standard chromosomes get their missing parent bits set. Indexed
    chromosomes get missing parents written into uniformly chosen dummy
    slots (the lowest free slots when no rng is given).
    """
    if isinstance(c, StandardChromosome):
        bits = c.bits.copy()
        log = _repair_bits(bits, c.space)
        return StandardChromosome(c.space, bits), log
    if isinstance(c, IndexedChromosome):
        slots = c.slots.copy()
        log = _repair_slots(slots, c.space, rng)
        return IndexedChromosome(c.space, slots), log
    raise ValueError(f"Not a chromosome: {c!r}")


def _finish(c: Chromosome, rng, log: Optional[OperatorLog]) -> Chromosome:
    repaired, repair_log = repair_hierarchy(c, rng)
    if log is not None:
        log.absorb(repair_log)
    return repaired


# ---------------------------------------------------------------------------
# Initialization
# ---------------------------------------------------------------------------

def _validate_seeds(space: PredictorSpace, seeds: Optional[Iterable[int]]) -> list[int]:
    if not seeds:
        return []
    terms = sorted(set(int(s) for s in seeds))
    for t in terms:
        if not space.is_valid(t):
            raise ValueError(f"Seed term {t} outside 1..{space.total_terms}")
    return terms


def init_standard(
    space: PredictorSpace,
    init_density: float = 0.5,
    seeds: Optional[Iterable[int]] = None,
    rng: Optional[np.random.Generator] = None,
    log: Optional[OperatorLog] = None
) -> StandardChromosome:
    """Each bit set independently with probability init_density; seeds forced on."""
    if not 0.0 <= init_density <= 1.0:
        raise ValueError(f"init_density must be within [0, 1], got {init_density}")
    seed_terms = _validate_seeds(space, seeds)
    rng = rng or np.random.default_rng()
    bits = rng.random(space.total_terms) < init_density
    for t in seed_terms:
        bits[t - 1] = True
    return _finish(StandardChromosome(space, bits), rng, log)


def sample_initial_slots(
    space: PredictorSpace,
    length: int,
    rng: np.random.Generator,
    seeds: Optional[Iterable[int]] = None,
    n_terms: Optional[int] = None
) -> np.ndarray:
    """
    Draw the slot vector of a new indexed chromosome before hierarchy repair.

    Without seeds, k ~ Uniform{1..min(length, total_terms)} distinct terms are
    drawn without replacement. With seeds, every seed is placed (or n_terms of
    them, if given). Slot positions are sampled without replacement.
    """
    if length < 1:
        raise ValueError(f"Chromosome length must be >= 1, got {length}")
    seed_terms = _validate_seeds(space, seeds)
    if len(seed_terms) > length:
        raise ValueError(f"{len(seed_terms)} seed terms do not fit in {length} slots")
    pool = np.array(seed_terms, dtype=np.int64) if seed_terms else None
    upper = len(seed_terms) if seed_terms else min(length, space.total_terms)

    if n_terms is not None:
        if not 1 <= n_terms <= upper:
            raise ValueError(f"n_terms must be within 1..{upper}, got {n_terms}")
        k = n_terms
    elif seed_terms:
        k = len(seed_terms)
    else:
        k = int(rng.integers(1, upper + 1))

    if pool is None:
        terms = rng.choice(space.total_terms, size=k, replace=False) + 1
    elif k == pool.size:
        terms = pool
    else:
        terms = rng.choice(pool, size=k, replace=False)

    slots = np.zeros(length, dtype=np.int64)
    positions = rng.choice(length, size=k, replace=False)
    slots[positions] = terms
    return slots


def init_indexed(
    space: PredictorSpace,
    length: int,
    seeds: Optional[Iterable[int]] = None,
    rng: Optional[np.random.Generator] = None,
    n_terms: Optional[int] = None,
    log: Optional[OperatorLog] = None
) -> IndexedChromosome:
    rng = rng or np.random.default_rng()
    slots = sample_initial_slots(space, length, rng, seeds=seeds, n_terms=n_terms)
    chromosome = _finish(IndexedChromosome(space, slots), rng, log)
    if not chromosome.active_terms():
        # Every drawn term overflowed; a single main effect always fits.
        slots = np.zeros(length, dtype=np.int64)
        slots[rng.integers(length)] = rng.integers(1, space.n_main + 1)
        chromosome = IndexedChromosome(space, slots)
    return chromosome


# ---------------------------------------------------------------------------
# Crossover
# ---------------------------------------------------------------------------

def crossover_standard(
    a: StandardChromosome,
    b: StandardChromosome,
    log: Optional[OperatorLog] = None
) -> tuple[StandardChromosome, StandardChromosome]:
    """Swap bit segments at the midpoint."""
    if a.length != b.length:
        raise ValueError(f"Chromosome lengths differ: {a.length} vs {b.length}")
    mid = a.length // 2
    first = np.concatenate([a.bits[:mid], b.bits[mid:]])
    second = np.concatenate([b.bits[:mid], a.bits[mid:]])
    return (
        _finish(StandardChromosome(a.space, first), None, log),
        _finish(StandardChromosome(a.space, second), None, log),
    )


def _drop_tail_duplicates(slots: np.ndarray, mid: int) -> np.ndarray:
    head = slots[:mid]
    tail = slots[mid:]
    clash = (tail != DUMMY) & np.isin(tail, head[head != DUMMY])
    tail[clash] = DUMMY
    return slots


def crossover_indexed(
    a: IndexedChromosome,
    b: IndexedChromosome,
    rng: Optional[np.random.Generator] = None,
    log: Optional[OperatorLog] = None
) -> tuple[IndexedChromosome, IndexedChromosome]:
    """
    Swap slot segments at the midpoint.

    A term present in both halves of a child keeps its head occurrence; the
    tail occurrence becomes a dummy.
    """
    if a.length != b.length:
        raise ValueError(f"Chromosome lengths differ: {a.length} vs {b.length}")
    mid = a.length // 2
    first = _drop_tail_duplicates(np.concatenate([a.slots[:mid], b.slots[mid:]]), mid)
    second = _drop_tail_duplicates(np.concatenate([b.slots[:mid], a.slots[mid:]]), mid)
    return (
        _finish(IndexedChromosome(a.space, first), rng, log),
        _finish(IndexedChromosome(a.space, second), rng, log),
    )


def crossover(a: Chromosome, b: Chromosome, rng=None, log=None) -> tuple[Chromosome, Chromosome]:
    if isinstance(a, StandardChromosome):
        return crossover_standard(a, b, log=log)
    return crossover_indexed(a, b, rng=rng, log=log)


# ---------------------------------------------------------------------------
# Mutation
# ---------------------------------------------------------------------------

def mutate_standard(
    c: StandardChromosome,
    rates: MutationRates,
    rng: np.random.Generator,
    log: Optional[OperatorLog] = None
) -> StandardChromosome:
    """
    With probability p_mutate flip one uniformly chosen bit.

    Clearing a main effect also clears every interaction built on it.
    """
    if rng.random() >= rates.p_mutate:
        return c
    bits = c.bits.copy()
    position = int(rng.integers(c.length))
    term = position + 1
    if bits[position]:
        bits[position] = False
        if term <= c.space.n_main:
            for child in c.space.children_of(term):
                bits[child - 1] = False
    else:
        bits[position] = True
    return _finish(StandardChromosome(c.space, bits), rng, log)


def _draw_absent(
    space: PredictorSpace,
    excluded: set[int],
    rng: np.random.Generator
) -> Optional[int]:
    """A term id drawn uniformly from those not in excluded."""
    total = space.total_terms
    if len(excluded) >= total:
        return None
    if 2 * len(excluded) < total:
        while True:
            term = int(rng.integers(1, total + 1))
            if term not in excluded:
                return term
    candidates = np.setdiff1d(np.arange(1, total + 1), np.fromiter(excluded, dtype=np.int64))
    return int(rng.choice(candidates))


def mutate_indexed(
    c: IndexedChromosome,
    rates: MutationRates,
    rng: np.random.Generator,
    log: Optional[OperatorLog] = None
) -> IndexedChromosome:
    """
    Independent deletion (p_del) and addition (p_add) mutations.

    Deletion empties a random filled slot, cascading a main effect's removal
    to its interactions. Addition fills a random dummy slot with a term that
    was not in the chromosome before this mutation, so when both fire one
    term is switched out for another and the deleted term never comes
    straight back. After a main-effect deletion the addition also skips that
    main effect's interactions, whose repair would put it back.
    Mutations with no eligible slot are skipped and counted.
    """
    do_delete = rng.random() < rates.p_del
    do_add = rng.random() < rates.p_add
    if not (do_delete or do_add):
        return c

    slots = c.slots.copy()
    excluded = set(c.active_terms())

    if do_delete:
        filled = np.flatnonzero(slots != DUMMY)
        if filled.size:
            position = int(rng.choice(filled))
            term = int(slots[position])
            slots[position] = DUMMY
            if term <= c.space.n_main:
                children = c.space.children_of(term)
                slots[np.isin(slots, np.fromiter(children, dtype=np.int64))] = DUMMY
                excluded |= set(children)
        elif log is not None:
            log.skipped_deletions += 1

    if do_add:
        dummies = np.flatnonzero(slots == DUMMY)
        term = _draw_absent(c.space, excluded, rng) if dummies.size else None
        if term is not None:
            slots[int(rng.choice(dummies))] = term
        elif log is not None:
            log.skipped_additions += 1

    return _finish(IndexedChromosome(c.space, slots), rng, log)


def mutate(c: Chromosome, rates: MutationRates, rng, log=None) -> Chromosome:
    if isinstance(c, StandardChromosome):
        return mutate_standard(c, rates, rng, log=log)
    return mutate_indexed(c, rates, rng, log=log)


def mutation_probabilities(
    total_terms: int,
    rates: MutationRates,
    length: int,
    n_included: int
) -> dict[str, float]:
    """
    Probability that one specific term is added or deleted in a single
    mutation step, for both encodings.

    The `indexed_*` entries follow the operator definitions (absent terms,
    currently included terms); the `indexed_*_bound` entries use the maximum
    length l in place of the included count.
    """
    def ratio(p: float, d: int) -> float:
        return p / d if d > 0 else 0.0

    return {
        "standard_add": ratio(rates.p_mutate, total_terms),
        "standard_delete": ratio(rates.p_mutate, total_terms),
        "indexed_add": ratio(rates.p_add, total_terms - n_included),
        "indexed_delete": ratio(rates.p_del, n_included),
        "indexed_add_bound": ratio(rates.p_add, total_terms - length),
        "indexed_delete_bound": ratio(rates.p_del, length),
    }
