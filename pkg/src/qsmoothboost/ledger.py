"""Query ledger for measuring query complexity empirically."""
from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field

COUNTERS = (
    "oracle_queries",
    "hypothesis_queries",
    "sample_queries",
    "amplification_rounds",
    "weak_learner_calls",
)


@dataclass
class CostLedger:
    """Monotone counters for oracle, hypothesis and sample queries.

    Increments go through :meth:`charge`, which holds a lock so a single
    ledger can be shared by concurrent example preparations.
    """

    oracle_queries: int = 0
    hypothesis_queries: int = 0
    sample_queries: int = 0
    amplification_rounds: int = 0
    weak_learner_calls: int = 0
    memoized_lookups: int = 0
    wall_clock: float = 0.0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)
    _started: float = field(default_factory=time.perf_counter, repr=False, compare=False)

    def charge(self, **counts: int) -> None:
        with self._lock:
            for name, n in counts.items():
                if n < 0:
                    raise ValueError(f"negative charge for {name}")
                if name not in COUNTERS and name != "memoized_lookups":
                    raise KeyError(name)
                setattr(self, name, getattr(self, name) + int(n))

    @property
    def total_queries(self) -> int:
        return self.oracle_queries + self.hypothesis_queries + self.sample_queries

    def snapshot(self) -> dict:
        with self._lock:
            snap = {name: getattr(self, name) for name in COUNTERS}
            snap["memoized_lookups"] = self.memoized_lookups
            snap["total_queries"] = self.total_queries
            snap["wall_clock"] = time.perf_counter() - self._started
        return snap

    def to_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True)
