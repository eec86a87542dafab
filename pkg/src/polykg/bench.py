"""Micro-benchmark harness reporting relative backend timings.

Query files hold several queries separated by a line containing only ``;``.
A leading ``# name`` comment names a query; unnamed queries are numbered.
"""

from __future__ import annotations

import re
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from .dispatch import Dispatcher
from .errors import PolyKGError

_SEPARATOR = re.compile(r"^\s*;\s*$", re.MULTILINE)
_NAME = re.compile(r"^\s*#\s*(\S.*?)\s*$")


@dataclass(frozen=True)
class BenchQuery:
    name: str
    text: str


def parse_query_file(text: str) -> list[BenchQuery]:
    queries = []
    for chunk in _SEPARATOR.split(text):
        if not chunk.strip() or all(not l.strip() or l.lstrip().startswith("#") for l in chunk.splitlines()):
            continue
        name = None
        for line in chunk.splitlines():
            if not line.strip():
                continue
            m = _NAME.match(line)
            if m:
                name = m.group(1)
            break
        queries.append(BenchQuery(name or f"query-{len(queries) + 1}", chunk.strip()))
    return queries


@dataclass
class BenchRow:
    name: str
    timings: dict[str, list[float]] = field(default_factory=dict)
    error: Optional[str] = None

    def minimum(self, slot: str) -> float:
        return min(self.timings[slot])

    def median(self, slot: str) -> float:
        return statistics.median(self.timings[slot])

    def ranking(self) -> list[str]:
        """Backends from fastest to slowest by median time."""
        return sorted(self.timings, key=self.median)

    def format(self) -> str:
        if self.error is not None:
            return f"{self.name}: error: {self.error}"
        parts = [
            f"{slot} min={self.minimum(slot) * 1e3:.3f}ms median={self.median(slot) * 1e3:.3f}ms"
            for slot in self.timings
        ]
        return f"{self.name}: " + "; ".join(parts) + " | order: " + " < ".join(self.ranking())


def _time_once(d: Dispatcher, query: BenchQuery) -> dict[str, float]:
    plan = d.plan(query.text)
    out = {}
    for slot_id, adapter, payload in d.capable_backends(query.text, plan):
        start = time.perf_counter()
        adapter.execute(payload)
        out[slot_id] = time.perf_counter() - start
    return out


def run_bench(
    build: Callable[[], Dispatcher],
    queries: list[BenchQuery],
    repeat: int = 3,
    cold: bool = False,
    parallel: bool = False,
) -> list[BenchRow]:
    """Time every capable backend on every query ``repeat`` times.

    With ``cold`` the engines are rebuilt before each repetition, the
    in-process stand-in for dropping OS caches.  ``parallel`` runs the
    repetitions of one query on a thread pool.
    """
    if repeat < 1:
        raise ValueError("repeat must be at least 1")
    warm = build()
    rows = []
    for query in queries:
        row = BenchRow(query.name)
        try:
            def one(_: int) -> dict[str, float]:
                return _time_once(build() if cold else warm, query)

            if parallel:
                with ThreadPoolExecutor() as pool:
                    samples = list(pool.map(one, range(repeat)))
            else:
                samples = [one(i) for i in range(repeat)]
        except PolyKGError as exc:
            row.error = str(exc)
        else:
            for sample in samples:
                for slot, seconds in sample.items():
                    row.timings.setdefault(slot, []).append(seconds)
        rows.append(row)
    return rows
