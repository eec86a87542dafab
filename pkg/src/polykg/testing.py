"""Seeded generators for property tests and demos.

Every generator takes a ``random.Random`` so that hypothesis can drive it
through ``st.randoms()`` and failures replay from a seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .frontend.ast import (
    COMPARISON_OPS,
    And,
    Compare,
    Exists,
    FilterExpr,
    ModifierSet,
    Not,
    NotExists,
    Or,
    OrderBy,
    QueryAst,
    TriplePattern,
)
from .model import KnowledgeGraph, Term, TermKind, Triple

LINK_PREDICATES = ("link0", "link1", "link2")
TEXT_PREDICATES = ("label0", "label1", "label2")
NUMBER_PREDICATES = ("num0", "num1", "num2")
PREDICATES = LINK_PREDICATES + TEXT_PREDICATES + NUMBER_PREDICATES
TEXT_VALUES = tuple(f"v{i}" for i in range(6))


def _kind_of(predicate: str) -> str:
    return predicate.rstrip("0123456789")


def entity(i: int) -> str:
    return f"e{i}"


def random_graph(
    rng: random.Random,
    max_triples: int = 200,
    functional: bool = True,
    entities: Optional[int] = None,
) -> KnowledgeGraph:
    """A graph over typed predicates.

    ``link*`` objects name another entity (as a name or as a string literal
    holding the name), ``label*`` objects are short strings and ``num*``
    objects are numbers.  With ``functional`` each (subject, predicate) pair
    has at most one object.  No two triples share subject, predicate and
    object match key, so ``e5`` and ``"e5"`` never both hang off one field.
    """
    n_entities = entities or rng.randint(3, 30)
    target = rng.randint(0, max_triples)
    g = KnowledgeGraph()
    used: set[tuple[str, str]] = set()
    attempts = 0
    while len(g) < target and attempts < target * 4:
        attempts += 1
        s = entity(rng.randrange(n_entities))
        p = rng.choice(PREDICATES)
        if functional and (s, p) in used:
            continue
        kind = _kind_of(p)
        if kind == "link":
            name = entity(rng.randrange(n_entities))
            o = Term.string(name) if rng.random() < 0.25 else Term.name(name)
        elif kind == "label":
            o = Term.string(rng.choice(TEXT_VALUES))
        else:
            o = Term.number(rng.choice([rng.randint(-5, 20), rng.randint(0, 10) + 0.5]))
        triple = Triple(Term.name(s), Term.name(p), o)
        if g.match(*triple):
            continue  # keep at most one spelling of a linked entity per field
        g.add(triple)
        used.add((s, p))
    return g


_RICH_NAMES = ("CISPLATIN", "Table_1326", "ex:drug", "a.b-c", "http://example.org/x#y", "urn:isbn:0451", "_:b0")
_RICH_STRINGS = ("", "plain", 'with "quotes"', "tab\there", "line\nbreak", "back\\slash", "ünïcode")


def random_rich_graph(rng: random.Random, max_triples: int = 60) -> KnowledgeGraph:
    """Multi-valued graph mixing IRIs, blank nodes, escaped strings and numbers."""
    g = KnowledgeGraph()
    for _ in range(rng.randint(0, max_triples)):
        s = Term.name(rng.choice(_RICH_NAMES[:-2] + (f"s{rng.randrange(5)}",)))
        if rng.random() < 0.1:
            s = Term.name("_:b" + str(rng.randrange(3)))
        p = Term.name(rng.choice(("p", "ex:q", "http://example.org/r", "UNII")))
        roll = rng.random()
        if roll < 0.35:
            o = Term.name(rng.choice(_RICH_NAMES))
        elif roll < 0.7:
            o = Term.string(rng.choice(_RICH_STRINGS))
        elif roll < 0.85:
            o = Term.number(rng.randint(-1000, 1000))
        else:
            o = Term.number(round(rng.uniform(-100, 100), rng.randint(0, 4)) + 0.25)
        g.add(Triple(s, p, o))
    return g


# -- translatable queries ---------------------------------------------------------


@dataclass
class _Slot:
    var: Optional[Term]
    value: Optional[Term]  # the entity this node is anchored to, if any
    expandable: bool = True


def _objects(g: KnowledgeGraph, subject: Term) -> list[Triple]:
    return g.by_subject(subject) if subject is not None else []


def random_translatable_query(
    rng: random.Random,
    g: KnowledgeGraph,
    max_patterns: int = 6,
    allow_filter: bool = True,
    allow_modifiers: bool = True,
    allow_repeats: bool = True,
) -> QueryAst:
    """A single-rooted, acyclic, OPTIONAL-free query over ``g``'s vocabulary.

    The query is grown by walking real triples from a random anchor so most
    generated queries have answers; constants are sometimes replaced by
    values absent from the data.
    """
    subjects = g.subjects() or [Term.name(entity(0))]
    anchor = rng.choice(subjects)
    counter = iter(range(1000))

    def fresh() -> Term:
        return Term.variable(f"v{next(counter)}")

    constant_root = rng.random() < 0.12
    root = _Slot(None if constant_root else fresh(), anchor)
    nodes = [root]
    leaves: list[tuple[Term, str]] = []  # (variable, predicate kind) usable as repeats
    kinds: dict[str, str] = {}
    patterns: list[TriplePattern] = []
    style = rng.choice(("star", "chain", "tree", "tree"))
    n = rng.randint(1, max_patterns)
    while len(patterns) < n:
        open_nodes = [x for x in nodes if x.expandable]
        if not open_nodes:
            break
        if style == "star":
            node = root
        elif style == "chain":
            node = open_nodes[-1]
        else:
            node = rng.choice(open_nodes)
        if not node.expandable:
            break
        subject_term = node.var if node.var is not None else node.value
        options = _objects(g, node.value)
        if style == "chain":
            node.expandable = False  # one outgoing edge per node
            links = [t for t in options if _kind_of(t.predicate.lexical) == "link"]
            if links and rng.random() < 0.8:
                options = links
        if options and rng.random() < 0.85:
            t = rng.choice(options)
            pred, obj = t.predicate, t.object
        else:
            pred = Term.name(rng.choice(PREDICATES))
            obj = _random_constant(rng, _kind_of(pred.lexical))
        kind = _kind_of(pred.lexical)
        roll = rng.random()
        if allow_repeats and leaves and roll < 0.08:
            same_kind = [v for v, k in leaves if k == kind]
            if same_kind:
                patterns.append(TriplePattern(subject_term, pred, rng.choice(same_kind)))
                continue
        if roll < 0.3:
            value = obj if rng.random() < 0.85 else _random_constant(rng, kind)
            if kind == "link" and rng.random() < 0.5:
                value = Term.name(value.lexical) if value.kind is TermKind.STRING else value
            patterns.append(TriplePattern(subject_term, pred, value))
            continue
        var = fresh()
        kinds[var.var_name] = kind
        patterns.append(TriplePattern(subject_term, pred, var))
        if kind == "link":
            child = _Slot(var, Term.name(obj.lexical), expandable=True)
            nodes.append(child)
        else:
            leaves.append((var, kind))
    if not patterns:
        patterns.append(TriplePattern(Term.variable("v0"), Term.name(PREDICATES[0]), Term.variable("v1")))
        kinds.update(v1="link")

    if not any(p.variables() for p in patterns):
        last = patterns[-1]
        var = fresh()
        kinds[var.var_name] = _kind_of(last.predicate.lexical)
        patterns[-1] = TriplePattern(last.subject, last.predicate, var)

    variables: list[str] = []
    for p in patterns:
        for v in p.variables():
            if v not in variables:
                variables.append(v)
    root_var = root.var.var_name if root.var is not None and root.var.var_name in variables else None

    filt = None
    if allow_filter and rng.random() < 0.4:
        filt = _random_filter(rng, variables, kinds, depth=rng.randint(0, 2), root_var=root_var)

    modifiers = ModifierSet(has_filter=filt is not None)
    if allow_modifiers and root_var is not None and rng.random() < 0.3:
        order = OrderBy(root_var, rng.random() < 0.4)
        limit = rng.choice([None, rng.randint(0, 8)])
        offset = rng.choice([None, None, rng.randint(0, 4)])
        modifiers = ModifierSet(order, limit, offset, filt is not None)

    if rng.random() < 0.3:
        projection = None
    else:
        k = rng.randint(1, len(variables))
        projection = tuple(sorted(rng.sample(variables, k), key=variables.index))
    return QueryAst(projection, tuple(patterns), (), filt, modifiers)


def _random_constant(rng: random.Random, kind: str) -> Term:
    if kind == "link":
        return Term.name(entity(rng.randrange(40)))
    if kind == "label":
        return Term.string(rng.choice(TEXT_VALUES + ("absent",)))
    return Term.number(rng.randint(-5, 25))


def _random_filter(rng: random.Random, variables: list[str], kinds: dict[str, str],
                   depth: int, root_var: Optional[str]) -> FilterExpr:
    if depth > 0 and rng.random() < 0.6:
        op = rng.choice(("and", "or", "not"))
        if op == "not":
            return Not(_random_filter(rng, variables, kinds, depth - 1, root_var))
        left = _random_filter(rng, variables, kinds, depth - 1, root_var)
        right = _random_filter(rng, variables, kinds, depth - 1, root_var)
        return And(left, right) if op == "and" else Or(left, right)
    name = rng.choice(variables)
    var = Term.variable(name)
    kind = "link" if name == root_var else kinds.get(name, "link")
    roll = rng.random()
    if roll < 0.1:
        return Exists(var)
    if roll < 0.15:
        return NotExists(var)
    if kind == "num":
        nums = [v for v in variables if kinds.get(v) == "num" and v != name]
        if nums and roll < 0.3:
            return Compare(rng.choice(COMPARISON_OPS), var, Term.variable(rng.choice(nums)))
        const = Term.number(rng.randint(-5, 20))
        if rng.random() < 0.5:
            return Compare(rng.choice(COMPARISON_OPS), var, const)
        return Compare(rng.choice(COMPARISON_OPS), const, var)
    if kind == "label" and roll < 0.5:
        return Compare(rng.choice(COMPARISON_OPS), var, Term.string(rng.choice(TEXT_VALUES)))
    const = Term.string(entity(rng.randrange(30))) if kind == "link" else Term.string(rng.choice(TEXT_VALUES))
    if kind == "link" and rng.random() < 0.5:
        const = Term.name(const.lexical)
    return Compare(rng.choice(("=", "!=")), var, const)


def random_multivalued_query(rng: random.Random, g: KnowledgeGraph, max_patterns: int = 4) -> QueryAst:
    """SELECT * star query without filters or repeated variables."""
    subjects = g.subjects() or [Term.name(entity(0))]
    anchor = rng.choice(subjects)
    subject = anchor if rng.random() < 0.2 else Term.variable("s")
    patterns = []
    for i in range(rng.randint(1, max_patterns)):
        options = g.by_subject(anchor)
        if options and rng.random() < 0.85:
            t = rng.choice(options)
            pred, obj = t.predicate, t.object
        else:
            pred = Term.name(rng.choice(PREDICATES))
            obj = _random_constant(rng, _kind_of(pred.lexical))
        patterns.append(TriplePattern(subject, pred, obj if rng.random() < 0.4 else Term.variable(f"o{i}")))
    if all(not p.variables() for p in patterns):
        patterns[0] = TriplePattern(patterns[0].subject, patterns[0].predicate, Term.variable("o0"))
    return QueryAst(None, tuple(patterns))


# -- classifier inputs -------------------------------------------------------------


def random_acyclic_patterns(rng: random.Random, max_patterns: int = 6) -> list[TriplePattern]:
    """Pattern lists whose query graph is acyclic by construction.

    Subject nodes are drawn from a ranked pool and objects only ever refer
    to higher-ranked variables or to constants, so no edge points backwards.
    Stars, chains and shared objects are over-represented so every shape
    occurs often.
    """
    n = rng.randint(1, max_patterns)
    style = rng.random()
    pred = lambda: Term.name(rng.choice(("p", "q", "r", "s")))  # noqa: E731
    const = lambda: (Term.string(rng.choice("abc")) if rng.random() < 0.5  # noqa: E731
                     else Term.name(rng.choice(("A", "B", "C"))))
    if style < 0.2:  # star
        subject = Term.variable("x") if rng.random() < 0.8 else Term.name("A")
        return [TriplePattern(subject, pred(), Term.variable(f"o{i}") if rng.random() < 0.5 else const())
                for i in range(n)]
    if style < 0.4:  # chain
        nodes = [Term.variable(f"c{i}") for i in range(n + 1)]
        if rng.random() < 0.2:
            nodes[0] = Term.name("A")
        if rng.random() < 0.4:
            nodes[-1] = const()
        patterns = [TriplePattern(nodes[i], pred(), nodes[i + 1]) for i in range(n)]
        rng.shuffle(patterns)
        return patterns
    pool = [Term.variable(f"n{i}") for i in range(rng.randint(1, n + 2))]
    pool += [Term.name(c) for c in ("A", "B")[: rng.randint(0, 2)]]
    rng.shuffle(pool)
    patterns = []
    for _ in range(n):
        i = rng.randrange(len(pool))
        later = [t for t in pool[i + 1:] if t.is_variable]
        if later and rng.random() < 0.7:
            obj = rng.choice(later)
        else:
            obj = const()
        patterns.append(TriplePattern(pool[i], pred(), obj))
    return patterns


# -- print/parse fixpoint inputs ---------------------------------------------------------

_AST_NAMES = ("CISPLATIN", "Table_1326", "ex:drug", "a.b-c", "http://example.org/x#y", "select", "Limit", "n1")
_AST_STRINGS = ("Q20Q", "", "it's", 'say "hi"', "two\nlines", "tab\t", "back\\slash", "naïve")


def _ast_term(rng: random.Random, role: str, variables: list[str]) -> Term:
    roll = rng.random()
    if roll < 0.45 or role == "predicate" and roll < 0.6:
        name = rng.choice(variables) if variables and rng.random() < 0.6 else f"v{rng.randrange(6)}"
        return Term.variable(name)
    if role != "object" or roll < 0.7:
        return Term.name(rng.choice(_AST_NAMES))
    if roll < 0.85:
        return Term.string(rng.choice(_AST_STRINGS))
    if rng.random() < 0.5:
        return Term.number(rng.randint(-10**6, 10**6))
    return Term.number(rng.choice((0.5, -2.25, 1e20, 3.14159, 1e-7)))


def _ast_expr(rng: random.Random, variables: list[str], depth: int) -> FilterExpr:
    if depth > 0 and rng.random() < 0.5:
        op = rng.choice(("and", "or", "not"))
        if op == "not":
            return Not(_ast_expr(rng, variables, depth - 1))
        pair = (_ast_expr(rng, variables, depth - 1), _ast_expr(rng, variables, depth - 1))
        return And(*pair) if op == "and" else Or(*pair)
    var = Term.variable(rng.choice(variables))
    roll = rng.random()
    if roll < 0.15:
        return Exists(var)
    if roll < 0.3:
        return NotExists(var)
    other = _ast_term(rng, "object", variables)
    if rng.random() < 0.5:
        return Compare(rng.choice(COMPARISON_OPS), var, other)
    return Compare(rng.choice(COMPARISON_OPS), other, var)


def random_ast(rng: random.Random, max_patterns: int = 5) -> QueryAst:
    """An arbitrary well-formed AST covering the whole supported syntax."""
    variables: list[str] = []

    def pattern() -> TriplePattern:
        p = TriplePattern(*(_ast_term(rng, role, variables) for role in ("subject", "predicate", "object")))
        for v in p.variables():
            if v not in variables:
                variables.append(v)
        return p

    required = tuple(pattern() for _ in range(rng.randint(0, max_patterns)))
    optionals = tuple(
        tuple(pattern() for _ in range(rng.randint(1, 2)))
        for _ in range(rng.randint(0 if required else 1, 2))
    )
    if not variables:
        required = required + (TriplePattern(Term.variable("x"), Term.name("p"), Term.variable("y")),)
        variables += ["x", "y"]
    filt = _ast_expr(rng, variables, rng.randint(0, 3)) if rng.random() < 0.5 else None
    order = OrderBy(rng.choice(variables), rng.random() < 0.5) if rng.random() < 0.4 else None
    limit = rng.choice((None, rng.randint(0, 100), 2**63 - 1))
    offset = rng.choice((None, rng.randint(0, 100)))
    projection = None if rng.random() < 0.3 else tuple(rng.sample(variables, rng.randint(1, len(variables))))
    return QueryAst(projection, required, optionals, filt, ModifierSet(order, limit, offset, filt is not None))
