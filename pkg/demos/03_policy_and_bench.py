"""Swap in a custom routing policy, then time the bundled query suite.

Run with ``python3 demos/03_policy_and_bench.py``.
"""

import json

from polykg import data
from polykg.bench import parse_query_file, run_bench
from polykg.dispatch import reference_dispatcher
from polykg.ntriples import load_ntriples
from polykg.frontend import parse_query
from polykg.routing import default_policy, load_policy, select_backends
from polykg.shape import label_query

CHAIN = "SELECT ?y WHERE { ?x CUI 2555 . ?y FDA_Code ?x . }"

# Send chains to the document store too; everything else keeps a catch-all.
CUSTOM = {
    "rules": [
        {"id": "chains", "match": {"shape": "subject-object", "has_optional": False},
         "targets": ["doc-store", "btree-store"]},
        {"id": "rest", "targets": ["columnar-store"]},
    ]
}


def main() -> None:
    label = label_query(parse_query(CHAIN))
    print("default policy:", select_backends(label, default_policy()).describe())
    custom = load_policy(json.dumps(CUSTOM))
    print("custom policy: ", select_backends(label, custom).describe())

    graph, docs, _ = load_ntriples(data.read(data.MINI_KG))
    outcome = reference_dispatcher(graph, docs, custom).execute(CHAIN)
    print(f"custom route answered by {outcome.winner}: {[t.lexical for t in outcome.result.column('y')]}")

    print("\nTiming every capable in-process backend on the bundled suite:")
    queries = parse_query_file(data.read(data.WORKLOAD_QUERIES))
    for row in run_bench(lambda: reference_dispatcher(graph, docs), queries, repeat=5):
        print(" ", row.format())


if __name__ == "__main__":
    main()
