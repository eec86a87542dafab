"""Follow four queries through labelling, routing, translation and execution.

Run with ``python3 demos/01_walkthrough.py``.
"""

from polykg import data
from polykg.dispatch import reference_dispatcher
from polykg.frontend import parse_query
from polykg.ntriples import load_ntriples
from polykg.routing import select_backends
from polykg.shape import label_query
from polykg.translate import is_translatable, translate

QUERIES = {
    "single pattern": "SELECT ?unii WHERE { CISPLATIN UNII ?unii . }",
    "subject star": 'SELECT ?x WHERE { ?x UNII "Q20Q" . ?x adverse_reaction "Nausea" . }',
    "chain": "SELECT ?y WHERE { ?x CUI 2555 . ?y FDA_Code ?x . }",
    "tree": 'SELECT ?y WHERE { ?x UNII "Q20Q" . ?x FDA_Code ?z . ?z CUI 2555 . ?z Xref ?y . }',
}


def main() -> None:
    graph, docs, report = load_ntriples(data.read(data.MINI_KG))
    print(f"Loaded the sample drug extract: {report.summary()}.")
    print("Each subject became one document, for the document-store backend:")
    for doc in docs:
        print("  ", doc.to_json())

    dispatcher = reference_dispatcher(graph, docs)
    print("Slots with no adapter of their own (btree-store, columnar-store) fall back")
    print("to the in-memory SPARQL engine, so every route can be exercised offline.")
    for title, text in QUERIES.items():
        ast = parse_query(text)
        label = label_query(ast)
        decision = select_backends(label)
        print(f"\n== {title} ==\n{text}")
        print(f"label: {label.describe()}; {decision.describe()}")
        if is_translatable(ast):
            print("pipeline:", translate(ast).to_text(indent=None))
        outcome = dispatcher.execute(text)
        values = [row[v].lexical for row in outcome.result for v in outcome.result.variables]
        print(f"answer from {outcome.winner}: {values}")


if __name__ == "__main__":
    main()
