"""Query dispatch: label, route, translate, run the targets, return a result.

Targets of one routing decision run concurrently and the first successful
result wins.  ``execute_verified`` instead runs every capable backend to
completion and checks that they agree.
"""

from __future__ import annotations

import json
import os
import threading
import time
import urllib.parse
import urllib.request
import warnings
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Protocol, Union

from .engines.pipeline import PipelineEngine
from .engines.sparql import SparqlEngine
from .errors import (
    AllBackendsFailed,
    InsufficientBackends,
    UnknownSlot,
    UntranslatableQuery,
    VerificationMismatch,
)
from .frontend.ast import QueryAst
from .frontend.parser import parse_query
from .model import ResultSet, same_results
from .routing import DOC_STORE, EXHAUSTIVE_INDEX_STORE, RoutingDecision, RoutingPolicy, default_policy, select_backends
from .shape import QueryLabel, label_query
from .translate import MqlPipeline, translate

SPARQL = "sparql"
PIPELINE = "pipeline"


class RoutingWarning(UserWarning):
    """A routing target was dropped because the query could not be translated."""


class BackendAdapter(Protocol):
    slot_id: str
    accepts: str  # SPARQL or PIPELINE
    single_flight: bool

    def execute(self, payload: Union[str, MqlPipeline]) -> ResultSet: ...


@dataclass
class SparqlEngineAdapter:
    engine: SparqlEngine
    slot_id: str = EXHAUSTIVE_INDEX_STORE
    single_flight: bool = False
    accepts: str = SPARQL

    def execute(self, payload: str) -> ResultSet:
        return self.engine.execute(payload)


@dataclass
class PipelineEngineAdapter:
    engine: PipelineEngine
    slot_id: str = DOC_STORE
    single_flight: bool = False
    accepts: str = PIPELINE

    def execute(self, payload: MqlPipeline) -> ResultSet:
        return self.engine.execute(payload)


@dataclass
class HttpSparqlAdapter:
    """Client for a SPARQL protocol endpoint returning JSON results."""

    endpoint: str
    slot_id: str
    timeout: float = 30.0
    direct_post: bool = False
    single_flight: bool = False
    accepts: str = SPARQL

    def execute(self, payload: str) -> ResultSet:
        headers = {"Accept": "application/sparql-results+json"}
        if self.direct_post:
            data = payload.encode("utf-8")
            headers["Content-Type"] = "application/sparql-query; charset=utf-8"
        else:
            data = urllib.parse.urlencode({"query": payload}).encode("ascii")
            headers["Content-Type"] = "application/x-www-form-urlencoded"
        request = urllib.request.Request(self.endpoint, data=data, headers=headers, method="POST")
        with urllib.request.urlopen(request, timeout=self.timeout) as response:
            document = json.loads(response.read().decode("utf-8"))
        return ResultSet.from_json(document)


def endpoint_adapters(policy: RoutingPolicy, environ: Optional[Mapping[str, str]] = None) -> list[HttpSparqlAdapter]:
    """HTTP adapters for slots with a configured endpoint.

    ``POLYKG_ENDPOINT_<SLOT>`` (slot id upper-cased, dashes as underscores)
    overrides the config file.
    """
    environ = os.environ if environ is None else environ
    endpoints = dict(policy.endpoints)
    for slot in policy.slots:
        env_name = "POLYKG_ENDPOINT_" + slot.slot_id.upper().replace("-", "_")
        if environ.get(env_name):
            endpoints[slot.slot_id] = environ[env_name]
    adapters = []
    for slot_id, url in endpoints.items():
        if policy.slot(slot_id).requires_translation:
            continue  # a SPARQL endpoint cannot stand in for a pipeline slot
        adapters.append(HttpSparqlAdapter(url, slot_id))
    return adapters


@dataclass
class Timings:
    label: float = 0.0
    translate: float = 0.0
    execute: float = 0.0


@dataclass
class QueryOutcome:
    result: ResultSet
    label: QueryLabel
    decision: RoutingDecision
    winner: str
    translation: Optional[MqlPipeline] = None
    timings: Timings = field(default_factory=Timings)
    failures: dict[str, BaseException] = field(default_factory=dict)


@dataclass
class VerificationReport:
    reference: str
    agreement: dict[str, bool]
    failures: dict[str, BaseException] = field(default_factory=dict)

    @property
    def agreed(self) -> bool:
        return all(self.agreement.values())

    def describe(self) -> str:
        if self.agreed:
            return f"agree ({len(self.agreement)} backends)"
        bad = ", ".join(s for s, ok in self.agreement.items() if not ok)
        return f"disagree: {bad} differ from {self.reference}"


@dataclass
class Plan:
    ast: QueryAst
    label: QueryLabel
    decision: RoutingDecision
    translation: Optional[MqlPipeline]
    untranslatable: Optional[UntranslatableQuery]
    timings: Timings


class Dispatcher:
    def __init__(self, policy: Optional[RoutingPolicy] = None, collection: str = "kg",
                 fallback: Optional[BackendAdapter] = None):
        self.policy = policy or default_policy()
        self.collection = collection
        self.fallback = fallback
        self.adapters: dict[str, BackendAdapter] = {}
        self._locks: dict[int, threading.Lock] = {}
        self._guard = threading.Lock()

    def register(self, adapter: BackendAdapter, slot_id: Optional[str] = None) -> None:
        slot_id = slot_id or adapter.slot_id
        if slot_id not in self.policy.slot_ids:
            raise UnknownSlot(f"slot {slot_id!r} is not defined by the active policy")
        with self._guard:
            self.adapters[slot_id] = adapter

    register_backend = register

    def adapter_for(self, slot_id: str) -> Optional[BackendAdapter]:
        return self.adapters.get(slot_id, self.fallback)

    # -- planning --------------------------------------------------------

    def plan(self, query_text: str) -> Plan:
        """Everything up to execution: parse, label, route, translate."""
        timings = Timings()
        start = time.perf_counter()
        ast = parse_query(query_text)
        label = label_query(ast)
        timings.label = time.perf_counter() - start
        decision = select_backends(label, self.policy)
        translation, failure = None, None
        if any(decision.requires_translation):
            start = time.perf_counter()
            try:
                translation = translate(ast, label, self.collection)
            except UntranslatableQuery as exc:
                failure = exc
            timings.translate = time.perf_counter() - start
        return Plan(ast, label, decision, translation, failure, timings)

    def _payload(self, adapter: BackendAdapter, text: str, plan: Plan) -> Union[str, MqlPipeline, None]:
        if adapter.accepts == PIPELINE:
            return plan.translation
        return text

    def _run(self, adapter: BackendAdapter, payload: Union[str, MqlPipeline]) -> ResultSet:
        if not adapter.single_flight:
            return adapter.execute(payload)
        with self._guard:
            lock = self._locks.setdefault(id(adapter), threading.Lock())
        with lock:
            return adapter.execute(payload)

    # -- execution -------------------------------------------------------

    def execute(self, query_text: str) -> QueryOutcome:
        plan = self.plan(query_text)
        failures: dict[str, BaseException] = {}
        jobs: list[tuple[str, BackendAdapter, Union[str, MqlPipeline]]] = []
        for slot in plan.decision.targets:
            adapter = self.adapter_for(slot.slot_id)
            if adapter is None:
                failures[slot.slot_id] = UnknownSlot(f"no adapter registered for {slot.slot_id}")
                continue
            payload = self._payload(adapter, query_text, plan)
            if payload is None:
                warnings.warn(f"dropping {slot.slot_id}: {plan.untranslatable}", RoutingWarning, stacklevel=2)
                failures[slot.slot_id] = plan.untranslatable
                continue
            jobs.append((slot.slot_id, adapter, payload))
        if not jobs:
            raise AllBackendsFailed(failures)

        start = time.perf_counter()
        pool = ThreadPoolExecutor(max_workers=len(jobs), thread_name_prefix="polykg")
        try:
            pending = {pool.submit(self._run, adapter, payload): (slot_id, adapter)
                       for slot_id, adapter, payload in jobs}
            while pending:
                done, _ = wait(pending, return_when=FIRST_COMPLETED)
                for future in done:
                    slot_id, adapter = pending.pop(future)
                    exc = future.exception()
                    if exc is not None:
                        failures[slot_id] = exc
                        continue
                    plan.timings.execute = time.perf_counter() - start
                    used_pipeline = adapter.accepts == PIPELINE
                    return QueryOutcome(
                        result=future.result(),
                        label=plan.label,
                        decision=plan.decision,
                        winner=slot_id,
                        translation=plan.translation if used_pipeline else None,
                        timings=plan.timings,
                        failures=failures,
                    )
        finally:
            pool.shutdown(wait=False, cancel_futures=True)
        raise AllBackendsFailed(failures)

    def capable_backends(self, query_text: str, plan: Plan) -> list[tuple[str, BackendAdapter, Union[str, MqlPipeline]]]:
        """Every distinct adapter able to run the query, routed targets first."""
        if plan.translation is None and plan.untranslatable is None:
            if any(a.accepts == PIPELINE for a in self.adapters.values()):
                try:
                    plan.translation = translate(plan.ast, plan.label, self.collection)
                except UntranslatableQuery as exc:
                    plan.untranslatable = exc
        candidates = list(self.adapters.items())
        if self.fallback is not None:
            candidates.append((self.fallback.slot_id, self.fallback))
        decided = plan.decision.slot_ids
        candidates.sort(key=lambda item: decided.index(item[0]) if item[0] in decided else len(decided))
        seen: set[int] = set()
        jobs = []
        for slot_id, adapter in candidates:
            if id(adapter) in seen:
                continue
            payload = self._payload(adapter, query_text, plan)
            if payload is None:
                continue
            seen.add(id(adapter))
            jobs.append((slot_id, adapter, payload))
        return jobs

    def execute_verified(self, query_text: str) -> tuple[QueryOutcome, VerificationReport]:
        """Run every capable backend to completion and compare the results."""
        plan = self.plan(query_text)
        jobs = self.capable_backends(query_text, plan)
        if len(jobs) < 2:
            raise InsufficientBackends(f"only {len(jobs)} backend(s) can run this query")

        start = time.perf_counter()
        results: dict[str, ResultSet] = {}
        failures: dict[str, BaseException] = {}
        with ThreadPoolExecutor(max_workers=len(jobs), thread_name_prefix="polykg-verify") as pool:
            futures = {slot_id: pool.submit(self._run, adapter, payload) for slot_id, adapter, payload in jobs}
            for slot_id, future in futures.items():
                try:
                    results[slot_id] = future.result()
                except Exception as exc:  # a failing backend is reported, not fatal
                    failures[slot_id] = exc
        plan.timings.execute = time.perf_counter() - start
        if len(results) < 2:
            if not results:
                raise AllBackendsFailed(failures)
            raise InsufficientBackends(f"only {len(results)} backend(s) returned a result: {failures}")

        reference = next(iter(results))
        mods = plan.ast.modifiers
        ordered = mods.order_by is not None
        order_var = mods.order_by.variable if ordered else None
        agreement = {
            slot_id: same_results(results[reference], rs, ordered=ordered, order_by=order_var)
            for slot_id, rs in results.items()
        }
        report = VerificationReport(reference, agreement, failures)
        if not report.agreed:
            raise VerificationMismatch(report, results)
        winner_adapter = dict((s, a) for s, a, _ in jobs)[reference]
        outcome = QueryOutcome(
            result=results[reference],
            label=plan.label,
            decision=plan.decision,
            winner=reference,
            translation=plan.translation if winner_adapter.accepts == PIPELINE else None,
            timings=plan.timings,
            failures=failures,
        )
        return outcome, report


def reference_dispatcher(graph, documents, policy: Optional[RoutingPolicy] = None,
                         collection: str = "kg", environ: Optional[Mapping[str, str]] = None) -> Dispatcher:
    """Dispatcher wired to the in-memory engines.

    The pipeline engine serves the doc-store slot; the SPARQL engine serves
    the exhaustive-index slot and stands in for any slot without an adapter.
    Slots with a configured endpoint get an HTTP adapter instead.
    """
    policy = policy or default_policy()
    sparql = SparqlEngineAdapter(SparqlEngine(graph))
    d = Dispatcher(policy, collection, fallback=sparql)
    if DOC_STORE in policy.slot_ids:
        d.register(PipelineEngineAdapter(PipelineEngine(documents, collection)))
    if EXHAUSTIVE_INDEX_STORE in policy.slot_ids:
        d.register(sparql)
    for adapter in endpoint_adapters(policy, environ):
        d.register(adapter)
    return d


def describe_failures(failures: Mapping[str, Any]) -> str:
    return "; ".join(f"{slot}: {exc}" for slot, exc in failures.items())
