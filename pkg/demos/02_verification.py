"""Cross-check backends against each other and watch failover happen.

Run with ``python3 demos/02_verification.py``.
"""

from polykg import data
from polykg.dispatch import Dispatcher, PipelineEngineAdapter, SparqlEngineAdapter
from polykg.engines import PipelineEngine, SparqlEngine
from polykg.errors import VerificationMismatch
from polykg.ntriples import load_ntriples

QUERY = 'SELECT ?x WHERE { ?x UNII "Q20Q" . ?x adverse_reaction "Nausea" . }'


class Offline:
    """Stands in for a document store that refuses connections."""

    slot_id = "doc-store"
    accepts = "pipeline"
    single_flight = False

    def execute(self, payload):
        raise ConnectionError("connection refused")


class DropsRows:
    """Wraps a healthy adapter but silently loses every row."""

    single_flight = False

    def __init__(self, inner):
        self.inner, self.slot_id, self.accepts = inner, inner.slot_id, inner.accepts

    def execute(self, payload):
        return self.inner.execute(payload).truncated(0)


def build(graph, docs) -> Dispatcher:
    d = Dispatcher()
    d.register(PipelineEngineAdapter(PipelineEngine(docs)))
    d.register(SparqlEngineAdapter(SparqlEngine(graph)))
    return d


def main() -> None:
    graph, docs, _ = load_ntriples(data.read(data.MINI_KG))

    d = build(graph, docs)
    _, report = d.execute_verified(QUERY)
    print("Both engines, healthy:", report.describe())

    d.register(Offline())
    outcome = d.execute(QUERY)
    print(f"Document store offline: answered by {outcome.winner}, rows={len(outcome.result)}")

    d = build(graph, docs)
    d.register(DropsRows(d.adapters["doc-store"]))
    try:
        d.execute_verified(QUERY)
    except VerificationMismatch as exc:
        print("Document store losing rows:", exc.report.describe())
        for slot, rs in exc.results.items():
            print(f"  {slot}: {len(rs)} row(s)")


if __name__ == "__main__":
    main()
