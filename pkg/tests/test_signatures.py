from __future__ import annotations

import itertools
import random
from dataclasses import replace

import pytest

from cqowl.queryparse import (
    And,
    Bgp,
    BlankNodeLabel,
    BlankPropertyList,
    Compare,
    Filter,
    Group,
    Literal,
    Paren,
    PrefixedName,
    QueryAst,
    STAR,
    TermRef,
    TriplePattern,
    Variable,
    parse_query,
)
from cqowl.signatures import (
    CanonicalizationLimitExceeded,
    canonicalize,
    coverage_table,
    group_by_signature,
    render_in_source_order,
)

PREFIXES = {"ex": "http://example.org/ns#", "awo": "http://example.org/awo#"}


def test_uri_renaming_gives_equal_signature():
    q1 = ("SELECT DISTINCT ?x WHERE { ?x rdfs:subClassOf ex:Plant, "
          "[ a owl:Restriction ; owl:onProperty ex:eats ; "
          "owl:someValuesFrom ex:Animal ] . FILTER(?x != owl:Nothing) }")
    q2 = q1.replace("ex:Plant", "awo:lion").replace("ex:eats", "awo:p") \
           .replace("ex:Animal", "awo:Prey")
    assert canonicalize(parse_query(q1, PREFIXES)) == \
        canonicalize(parse_query(q2, PREFIXES))


def test_placeholder_variables_abstract_to_uri_token():
    q1 = "ASK WHERE { $sw rdfs:subClassOf ex:Tool }"
    q2 = "ASK WHERE { ex:Weka rdfs:subClassOf ex:Tool }"
    assert canonicalize(parse_query(q1, PREFIXES)) == \
        canonicalize(parse_query(q2, PREFIXES))


def test_literal_abstracts_but_keeps_datatype():
    q1 = ('SELECT ?x WHERE { ?x ex:p "2"^^xsd:nonNegativeInteger }')
    q2 = ('SELECT ?x WHERE { ?x ex:p "7"^^xsd:nonNegativeInteger }')
    q3 = ('SELECT ?x WHERE { ?x ex:p "2"^^xsd:integer }')
    s1 = canonicalize(parse_query(q1, PREFIXES))
    assert s1 == canonicalize(parse_query(q2, PREFIXES))
    assert s1 != canonicalize(parse_query(q3, PREFIXES))
    assert ":LIT^^xsd:nonNegativeInteger" in s1.skeleton


def test_sensitivity():
    base = "SELECT ?x WHERE {{ ?x rdfs:subClassOf [ owl:onProperty ex:p ; {val} ex:C ] }}"
    some = canonicalize(parse_query(base.format(val="owl:someValuesFrom"), PREFIXES))
    all_ = canonicalize(parse_query(base.format(val="owl:allValuesFrom"), PREFIXES))
    has = canonicalize(parse_query(base.format(val="owl:hasValue"), PREFIXES))
    assert len({some.skeleton, all_.skeleton, has.skeleton}) == 3
    sel = canonicalize(parse_query("SELECT ?x WHERE { ?x a ex:C }", PREFIXES))
    ask = canonicalize(parse_query("ASK WHERE { ?x a ex:C }", PREFIXES))
    assert sel != ask
    plain = canonicalize(parse_query("SELECT ?x WHERE { ?x a ex:C }", PREFIXES))
    distinct = canonicalize(parse_query("SELECT DISTINCT ?x WHERE { ?x a ex:C }", PREFIXES))
    assert plain != distinct


def test_projection_abstracts_to_star_vs_nonstar():
    a = canonicalize(parse_query("SELECT ?x WHERE { ?x a ex:C . ?y a ex:D }", PREFIXES))
    b = canonicalize(parse_query("SELECT ?y WHERE { ?x a ex:C . ?y a ex:D }", PREFIXES))
    star = canonicalize(parse_query("SELECT * WHERE { ?x a ex:C . ?y a ex:D }", PREFIXES))
    assert a == b
    assert a != star


def test_guard_on_oversized_bgp():
    triples = " . ".join(
        f'?x{i} ex:p "v"^^xsd:T{i}' for i in range(20)
    )
    ast = parse_query(f"SELECT * WHERE {{ {triples} }}", PREFIXES)
    with pytest.raises(CanonicalizationLimitExceeded):
        canonicalize(ast)
    groups, skipped = group_by_signature([("big", ast)])
    assert groups == [] and skipped[0][0] == "big"
    # a larger bound admits it
    assert canonicalize(ast, max_triples=32)


def test_guard_on_pathological_symmetry():
    # twenty indistinguishable triples would explode the tie search even
    # under a raised triple bound; the branch cap turns it into an error
    triples = " . ".join(f"?x{i} ex:p ex:C{i}" for i in range(20))
    ast = parse_query(f"SELECT * WHERE {{ {triples} }}", PREFIXES)
    with pytest.raises(CanonicalizationLimitExceeded):
        canonicalize(ast, max_triples=32)


def test_group_by_signature_partition_and_order():
    queries = [
        ("a", parse_query("ASK WHERE { ?x a ex:C }", PREFIXES)),
        ("b", parse_query("ASK WHERE { ?y a ex:D }", PREFIXES)),
        ("c", parse_query("SELECT ?x WHERE { ?x a ex:C }", PREFIXES)),
    ]
    groups, skipped = group_by_signature(queries)
    assert skipped == []
    assert [g.count for g in groups] == [2, 1]
    assert sorted(sum((g.member_ids for g in groups), [])) == ["a", "b", "c"]
    rows = coverage_table(groups)
    assert rows[0]["cumulative_pct"] == 66.7
    assert rows[-1]["cumulative_pct"] == 100.0


def test_single_query_group():
    groups, _ = group_by_signature(
        [("only", parse_query("ASK WHERE { }", PREFIXES))])
    assert len(groups) == 1
    assert groups[0].count == 1
    assert coverage_table(groups)[0]["cumulative_pct"] == 100.0


# ---------------------------------------------------------------------------
# randomized invariance suite (acceptance criterion: 1000 trials) and the
# brute-force global-minimum oracle


def _random_ast(rng: random.Random) -> QueryAst:
    n_vars = rng.randint(1, 4)
    n_blanks = rng.randint(0, 2)
    variables = [Variable(f"x{i}") for i in range(n_vars)]
    blanks = [BlankNodeLabel(f"b{i}") for i in range(n_blanks)]
    iris = [PrefixedName("ex", f"C{i}") for i in range(rng.randint(1, 4))]
    reserved = [PrefixedName("rdfs", "subClassOf"), PrefixedName("owl", "onProperty"),
                PrefixedName("ex", "p"), PrefixedName("ex", "q")]

    def term(allow_literal=True):
        choices = variables + blanks + iris
        if allow_literal and rng.random() < 0.15:
            return Literal("v", datatype=PrefixedName("xsd", "integer"))
        return rng.choice(choices)

    def node():
        if rng.random() < 0.2:
            return BlankPropertyList((
                (PrefixedName("owl", "onProperty"), (term(False),)),
                (PrefixedName("owl", "someValuesFrom"), (term(),)),
            ))
        return term()

    n_triples = rng.randint(1, 8)
    triples = tuple(
        TriplePattern(term(allow_literal=False), rng.choice(reserved), (node(),))
        for _ in range(n_triples)
    )
    items = [Bgp(triples)]
    if rng.random() < 0.6:
        conjuncts = tuple(
            Compare("!=", TermRef(rng.choice(variables)), TermRef(term()))
            for _ in range(rng.randint(1, 3))
        )
        expr = conjuncts[0] if len(conjuncts) == 1 else And(conjuncts)
        items.append(Filter(Paren(expr)))
    verb = rng.choice(["SELECT", "ASK"])
    projection = STAR if verb == "SELECT" else None
    return QueryAst(verb, verb == "SELECT" and rng.random() < 0.5, projection,
                    Group(tuple(items)),
                    tuple(sorted({**PREFIXES,
                                  "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
                                  "owl": "http://www.w3.org/2002/07/owl#",
                                  "xsd": "http://www.w3.org/2001/XMLSchema#",
                                  }.items())))


def _rename_terms(ast: QueryAst, rng: random.Random) -> QueryAst:
    iri_map = {}
    var_map = {}
    blank_map = {}

    def map_term(t):
        if isinstance(t, PrefixedName) and t.prefix == "ex" and t.local.startswith("C"):
            return iri_map.setdefault(t, PrefixedName("ex", f"R{len(iri_map)}{rng.randint(0, 9)}"))
        if isinstance(t, Variable):
            return var_map.setdefault(t, Variable(f"w{len(var_map)}{rng.randint(0, 9)}"))
        if isinstance(t, BlankNodeLabel):
            return blank_map.setdefault(t, BlankNodeLabel(f"k{len(blank_map)}{rng.randint(0, 9)}"))
        return t

    def map_node(n):
        if isinstance(n, BlankPropertyList):
            return BlankPropertyList(tuple(
                (map_term(p), tuple(map_node(o) for o in objs))
                for p, objs in n.pairs
            ))
        return map_term(n)

    def map_expr(e):
        if isinstance(e, Paren):
            return Paren(map_expr(e.inner))
        if isinstance(e, And):
            return And(tuple(map_expr(p) for p in e.parts))
        if isinstance(e, Compare):
            return Compare(e.op, map_expr(e.left), map_expr(e.right))
        if isinstance(e, TermRef):
            return TermRef(map_term(e.term))
        return e

    def map_item(item):
        if isinstance(item, Bgp):
            triples = [
                TriplePattern(map_node(t.subject), map_term(t.predicate),
                              tuple(map_node(o) for o in t.objects))
                for t in item.triples
            ]
            rng.shuffle(triples)
            return Bgp(tuple(triples))
        if isinstance(item, Filter):
            expr = map_expr(item.expr)
            inner = expr.inner if isinstance(expr, Paren) else expr
            if isinstance(inner, And):
                parts = list(inner.parts)
                rng.shuffle(parts)
                parts = [
                    Compare(p.op, p.right, p.left)
                    if isinstance(p, Compare) and rng.random() < 0.5 else p
                    for p in parts
                ]
                inner = And(tuple(parts))
            elif isinstance(inner, Compare) and rng.random() < 0.5:
                inner = Compare(inner.op, inner.right, inner.left)
            return Filter(Paren(inner))
        return item

    return replace(ast, where=Group(tuple(map_item(i) for i in ast.where.items)))


def test_invariance_1000_randomized_trials():
    rng = random.Random(20240601)
    for _ in range(1000):
        ast = _random_ast(rng)
        transformed = _rename_terms(ast, rng)
        assert canonicalize(ast).skeleton == canonicalize(transformed).skeleton


def _oracle_minimum(ast: QueryAst) -> str:
    """Global minimum rendering over every triple order, conjunct order and
    comparison operand order, computed by exhaustive enumeration."""
    bgp_index = [i for i, item in enumerate(ast.where.items)
                 if isinstance(item, Bgp)]
    assert len(bgp_index) == 1
    bgp = ast.where.items[bgp_index[0]]
    filters = [i for i, item in enumerate(ast.where.items)
               if isinstance(item, Filter)]

    def filter_variants(item):
        expr = item.expr.inner if isinstance(item.expr, Paren) else item.expr
        conjuncts = list(expr.parts) if isinstance(expr, And) else [expr]
        for order in itertools.permutations(conjuncts):
            swap_space = [
                ((c.left, c.right), (c.right, c.left)) if isinstance(c, Compare)
                else ((None, None),)
                for c in order
            ]
            for swaps in itertools.product(*swap_space):
                rebuilt = []
                for c, swap in zip(order, swaps):
                    if isinstance(c, Compare):
                        rebuilt.append(Compare(c.op, swap[0], swap[1]))
                    else:
                        rebuilt.append(c)
                inner = rebuilt[0] if len(rebuilt) == 1 else And(tuple(rebuilt))
                yield Filter(Paren(inner))

    best = None
    for perm in itertools.permutations(bgp.triples):
        variants = [filter_variants(ast.where.items[i]) for i in filters]
        for combo in itertools.product(*variants) if filters else [()]:
            items = list(ast.where.items)
            items[bgp_index[0]] = Bgp(tuple(perm))
            for idx, filt in zip(filters, combo):
                items[idx] = filt
            candidate = render_in_source_order(
                replace(ast, where=Group(tuple(items))))
            if best is None or candidate < best:
                best = candidate
    return best


def test_canonical_form_is_global_minimum_small_asts():
    rng = random.Random(99)
    checked = 0
    while checked < 60:
        ast = _random_ast(rng)
        bgp = ast.where.items[0]
        if len(bgp.triples) > 4:
            continue
        checked += 1
        want = _oracle_minimum(ast)
        got = canonicalize(ast).skeleton
        assert got.split("WHERE ", 1)[1] == want.split("WHERE ", 1)[1]
        assert got == want


def test_three_triple_permutations_and_blank_swaps_identical():
    base = """SELECT * WHERE {{ {t} }}"""
    t1 = "?x rdfs:subClassOf _:b1 ."
    t2 = "_:b1 owl:onProperty ex:p ."
    t3 = "?y rdfs:subClassOf _:b2 ."
    skeletons = set()
    for perm in itertools.permutations([t1, t2, t3]):
        text = base.format(t=" ".join(perm))
        for swapped in (text, text.replace("_:b1", "_:TMP")
                        .replace("_:b2", "_:b1").replace("_:TMP", "_:b2")):
            skeletons.add(canonicalize(parse_query(swapped, PREFIXES)).skeleton)
    assert len(skeletons) == 1


def test_determinism_byte_identical():
    q = ("SELECT DISTINCT * WHERE { ?x rdfs:subClassOf _:b2, "
         "[ owl:onProperty _:b3 ; owl:someValuesFrom ?w ] . "
         "?y rdfs:subClassOf _:b2, [ owl:onProperty _:b3 ; "
         "owl:someValuesFrom ?w ] . ?w rdfs:subClassOf ?z "
         "FILTER ( ?w != ?z && ?x != ?y) }")
    first = canonicalize(parse_query(q, PREFIXES)).skeleton
    for _ in range(5):
        assert canonicalize(parse_query(q, PREFIXES)).skeleton == first
