"""
Fitness cache and run checkpoints.

The cache always lives in memory; when given a path it is also backed by
SQLite so repeated runs over the same data and folds reuse earlier fits.
"""
import json
import logging
import os
import sqlite3
import threading
from typing import Iterable, Optional

logger = logging.getLogger(__name__)


def terms_key(terms: Iterable[int]) -> str:
    """Canonical cache key for a term set."""
    return ",".join(str(t) for t in sorted(set(int(t) for t in terms)))


class FitnessCache:
    """
    Fitness values keyed by (dataset, folds, metric) scope and sorted term set.

    Each value carries a flag marking fits scored from separated data.
    """

    def __init__(self, scope: str, db_path: Optional[str] = None):
        """Initialize the cache, creating the SQLite table if a path is given."""
        self.scope = scope
        self.db_path = db_path
        self._memory: dict[str, float] = {}
        self._separated: set[str] = set()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

        if db_path:
            directory = os.path.dirname(db_path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            self._init_db()

    def _init_db(self):
        """Create the table if it doesn't exist."""
        with sqlite3.connect(self.db_path) as conn:
            conn.execute("""
                CREATE TABLE IF NOT EXISTS fitness (
                    scope TEXT NOT NULL,
                    terms TEXT NOT NULL,
                    value REAL,
                    separated INTEGER NOT NULL DEFAULT 0,
                    PRIMARY KEY (scope, terms)
                )
            """)
            conn.commit()

    def get(self, terms: Iterable[int]) -> Optional[float]:
        key = terms_key(terms)
        with self._lock:
            if key in self._memory:
                self.hits += 1
                return self._memory[key]
        if self.db_path:
            with sqlite3.connect(self.db_path) as conn:
                row = conn.execute(
                    "SELECT value, separated FROM fitness WHERE scope = ? AND terms = ?",
                    (self.scope, key)
                ).fetchone()
            if row is not None:
                value = float("nan") if row[0] is None else float(row[0])
                with self._lock:
                    self._memory[key] = value
                    if row[1]:
                        self._separated.add(key)
                    self.hits += 1
                return value
        with self._lock:
            self.misses += 1
        return None

    def put(self, terms: Iterable[int], value: float, separated: bool = False) -> None:
        key = terms_key(terms)
        with self._lock:
            self._memory[key] = value
            if separated:
                self._separated.add(key)
            else:
                self._separated.discard(key)
        if self.db_path:
            stored = None if value != value else value  # NaN stored as NULL
            with sqlite3.connect(self.db_path) as conn:
                conn.execute(
                    "INSERT OR REPLACE INTO fitness (scope, terms, value, separated) VALUES (?, ?, ?, ?)",
                    (self.scope, key, stored, int(separated))
                )
                conn.commit()

    def is_separated(self, terms: Iterable[int]) -> bool:
        """Whether the cached value came from a separated fit; call after get or put."""
        with self._lock:
            return terms_key(terms) in self._separated

    def __len__(self) -> int:
        return len(self._memory)


def save_checkpoint(path: str, state: dict) -> None:
    """Write a checkpoint atomically (temp file then rename)."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    tmp_path = f"{path}.tmp"
    with open(tmp_path, "w", encoding="utf-8") as handle:
        json.dump(state, handle)
    os.replace(tmp_path, path)
    logger.info("Checkpoint written at generation %s: %s", state.get("generation"), path)


def load_checkpoint(path: str) -> dict:
    with open(path, encoding="utf-8") as handle:
        state = json.load(handle)
    for key in ("config", "generation", "rng_state", "population", "history"):
        if key not in state:
            raise ValueError(f"Checkpoint {path} is missing '{key}'")
    return state
