"""Canonical, URI-agnostic signatures for SPARQL-OWL query ASTs.

Two queries share a signature when they are equal "ignoring URIs": every
domain IRI is abstracted to the token ``:URI`` (reserved rdf/rdfs/owl/xsd
vocabulary stays concrete), placeholder ``$`` variables also become
``:URI`` since they stand for a concrete ontology term, literals become
``:LIT`` (keeping the datatype), and variables / labeled blank nodes are
renamed canonically.

The canonical skeleton is the lexicographically smallest rendering over all
permutations of triples inside each BGP, conjuncts inside each FILTER, and
operand orders of ``=``/``!=`` comparisons, with ``?v1``/``_:b1``-style
names assigned in first-occurrence order per candidate.  The minimum is
found by a greedy best-first walk that branches on exact rendering ties, so
it equals the brute-force minimum while staying cheap on asymmetric
queries.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .queryparse import (
    And,
    AnonBlank,
    Arith,
    Bgp,
    Bind,
    BlankNodeLabel,
    BlankPropertyList,
    Collection,
    Compare,
    Expr,
    Filter,
    FnCall,
    GraphPattern,
    Group,
    In,
    KeywordA,
    Literal,
    NotExists,
    Or,
    Paren,
    PathAtom,
    PathSequence,
    PathZeroOrMore,
    QueryAst,
    RDF_NS,
    RDFS_NS,
    OWL_NS,
    XSD_NS,
    STAR,
    TermRef,
    UnionPattern,
    Variable,
    resolve_term,
)

RESERVED_NAMESPACES = {
    RDF_NS: "rdf",
    RDFS_NS: "rdfs",
    OWL_NS: "owl",
    XSD_NS: "xsd",
}

URI_TOKEN = ":URI"
LIT_TOKEN = ":LIT"

DEFAULT_MAX_TRIPLES = 16
_BRANCH_CAP = 20000


class CanonicalizationLimitExceeded(RuntimeError):
    """Query too large or too symmetric for exact canonicalization."""


@dataclass(frozen=True)
class Signature:
    verb: str
    distinct: bool
    skeleton: str

    def key(self) -> tuple:
        return (self.skeleton,)


# ---------------------------------------------------------------------------
# Abstraction: AST -> token trees with named slots
#
# A token tree is a list whose entries are either fixed strings or slot
# markers ("var", key) / ("blank", key); the key is the source name so that
# repeated occurrences share one canonical name later.


def _abstract_term(term, prefixes: dict[str, str]) -> list:
    if isinstance(term, Variable):
        if term.marker == "$":
            return [URI_TOKEN]
        return [("var", "?" + term.name)]
    if isinstance(term, BlankNodeLabel):
        return [("blank", term.label)]
    if isinstance(term, AnonBlank):
        return ["[]"]
    if isinstance(term, Literal):
        if term.datatype is not None:
            dt = _abstract_term(term.datatype, prefixes)
            return [LIT_TOKEN + "^^" + "".join(dt)]
        return [LIT_TOKEN]
    if isinstance(term, KeywordA):
        return ["a"]
    resolved = resolve_term(term, prefixes)
    if resolved is None:
        raise TypeError(f"cannot abstract term {term!r}")
    if resolved == RDF_NS + "type":
        return ["a"]
    for ns, prefix in RESERVED_NAMESPACES.items():
        if resolved.startswith(ns):
            return [f"{prefix}:{resolved[len(ns):]}"]
    return [URI_TOKEN]


def _abstract_path(pred, prefixes) -> list:
    if isinstance(pred, PathAtom):
        return _abstract_term(pred.term, prefixes)
    if isinstance(pred, PathZeroOrMore):
        return _abstract_path(pred.inner, prefixes) + ["*"]
    if isinstance(pred, PathSequence):
        out: list = []
        for i, part in enumerate(pred.parts):
            if i:
                out.append("/")
            out.extend(_abstract_path(part, prefixes))
        return out
    return _abstract_term(pred, prefixes)


def _abstract_node(node, prefixes) -> list:
    if isinstance(node, BlankPropertyList):
        rendered_pairs = []
        for pred, objects in node.pairs:
            pair_tokens: list = _abstract_path(pred, prefixes)
            for i, obj in enumerate(objects):
                if i:
                    pair_tokens.append(",")
                pair_tokens.extend(_abstract_node(obj, prefixes))
            rendered_pairs.append(pair_tokens)
        # deterministic pair order: sort on the name-erased rendering so the
        # key is invariant under variable/blank renaming; ties keep source
        # order (pair permutation invariance is not part of the contract)
        rendered_pairs.sort(key=_erased)
        out: list = ["["]
        for i, pair in enumerate(rendered_pairs):
            if i:
                out.append(";")
            out.extend(pair)
        out.append("]")
        return out
    if isinstance(node, Collection):
        out = ["("]
        for item in node.items:
            out.extend(_abstract_node(item, prefixes))
        out.append(")")
        return out
    return _abstract_term(node, prefixes)


def _erased(tokens: Iterable) -> str:
    parts = []
    for tok in tokens:
        if isinstance(tok, tuple):
            parts.append("?" if tok[0] == "var" else "_:")
        else:
            parts.append(tok)
    return " ".join(parts)


def _flatten_triples(bgp: Bgp, prefixes) -> list[list]:
    """Expand object lists so each template is a single s/p/o rendering."""
    templates = []
    for triple in bgp.triples:
        subj = _abstract_node(triple.subject, prefixes)
        pred = _abstract_path(triple.predicate, prefixes)
        for obj in triple.objects:
            templates.append(subj + pred + _abstract_node(obj, prefixes) + ["."])
    return templates


def _abstract_expr(expr: Expr, prefixes) -> "_ExprNode":
    if isinstance(expr, Paren):
        return _abstract_expr(expr.inner, prefixes)
    if isinstance(expr, Compare):
        return _ExprNode(
            "cmp", op=expr.op,
            children=[_abstract_expr(expr.left, prefixes),
                      _abstract_expr(expr.right, prefixes)],
        )
    if isinstance(expr, And):
        return _ExprNode("and", children=[_abstract_expr(p, prefixes) for p in expr.parts])
    if isinstance(expr, Or):
        return _ExprNode("or", children=[_abstract_expr(p, prefixes) for p in expr.parts])
    if isinstance(expr, In):
        return _ExprNode(
            "in",
            children=[_abstract_expr(expr.needle, prefixes)]
            + [_abstract_expr(o, prefixes) for o in expr.options],
        )
    if isinstance(expr, FnCall):
        name = expr.name if isinstance(expr.name, str) \
            else "".join(_abstract_term(expr.name, prefixes))
        return _ExprNode("fn", op=name,
                         children=[_abstract_expr(a, prefixes) for a in expr.args])
    if isinstance(expr, Arith):
        return _ExprNode("arith", op=expr.op,
                         children=[_abstract_expr(expr.left, prefixes),
                                   _abstract_expr(expr.right, prefixes)])
    if isinstance(expr, TermRef):
        return _ExprNode("term", tokens=_abstract_term(expr.term, prefixes))
    raise TypeError(f"unknown expression {expr!r}")


class _ExprNode:
    __slots__ = ("kind", "op", "children", "tokens")

    def __init__(self, kind, op=None, children=None, tokens=None):
        self.kind = kind
        self.op = op
        self.children = children or []
        self.tokens = tokens or []


# ---------------------------------------------------------------------------
# Canonical rendering search


class _Namer:
    """First-occurrence canonical names; copy-on-branch."""

    def __init__(self):
        self.vars: dict[str, str] = {}
        self.blanks: dict[str, str] = {}

    def clone(self) -> "_Namer":
        fresh = _Namer.__new__(_Namer)
        fresh.vars = dict(self.vars)
        fresh.blanks = dict(self.blanks)
        return fresh

    def render(self, tokens: Iterable) -> str:
        parts = []
        for tok in tokens:
            if isinstance(tok, tuple):
                kind, key = tok
                if kind == "var":
                    name = self.vars.setdefault(key, f"?v{len(self.vars) + 1}")
                else:
                    name = self.blanks.setdefault(key, f"_:b{len(self.blanks) + 1}")
                parts.append(name)
            else:
                parts.append(tok)
        return " ".join(parts)


def _dedup_states(states: list[_Namer]) -> list[_Namer]:
    seen = set()
    out = []
    for s in states:
        key = (tuple(sorted(s.vars.items())), tuple(sorted(s.blanks.items())))
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out


class _Canonicalizer:
    """Search for the lexicographically smallest abstracted rendering.

    Every renderer maps a *set* of naming states sharing an identical
    rendered prefix to the minimal next fragment plus every naming state
    that achieves it.  Keeping all tied states matters: two orderings can
    emit the same text while binding canonical names to different source
    variables, and dropping one would make later fragments depend on the
    input order.  A strictly smaller fragment always wins regardless of
    what follows (fragments are newline/space joined), so pruning to the
    per-step minimum preserves the global minimum.
    """

    def __init__(self, prefixes: dict[str, str], max_triples: int,
                 search: bool = True):
        self.prefixes = prefixes
        self.max_triples = max_triples
        self.search = search
        self.branches = 0

    def render_query(self, ast: QueryAst) -> str:
        header = ast.verb
        if ast.distinct:
            header += " DISTINCT"
        if ast.verb == "SELECT":
            header += " *" if ast.projection == STAR else " ?proj"
        body, _states = self._render_group(ast.where, [_Namer()])
        return header + " WHERE " + body

    def _bump(self, count: int = 1):
        self.branches += count
        if self.branches > _BRANCH_CAP:
            raise CanonicalizationLimitExceeded(
                "too many symmetric orderings during canonicalization"
            )

    def _render_group(self, group: Group, states: list[_Namer]) -> tuple[str, list[_Namer]]:
        lines: list[str] = ["{"]
        for item in group.items:
            text, states = self._render_item(item, states)
            lines.append(text)
        lines.append("}")
        return "\n".join(lines), states

    def _render_item(self, item: GraphPattern, states: list[_Namer]) -> tuple[str, list[_Namer]]:
        if isinstance(item, Bgp):
            templates = _flatten_triples(item, self.prefixes)
            if len(templates) > self.max_triples:
                raise CanonicalizationLimitExceeded(
                    f"BGP has {len(templates)} triples, over the bound of "
                    f"{self.max_triples}"
                )
            return self._min_sequence(templates, states, "\n", self._render_template)
        if isinstance(item, Filter):
            node = _abstract_expr(item.expr, self.prefixes)
            text, out = self._render_expr(node, states, top=True)
            return "FILTER(" + text + ")", out
        if isinstance(item, NotExists):
            inner, out = self._render_group(item.pattern, states)
            return "FILTER NOT EXISTS " + inner, out
        if isinstance(item, Bind):
            node = _abstract_expr(item.expr, self.prefixes)
            text, out = self._render_expr(node, states, top=False)
            var_tokens = [("var", "?" + item.var.name)] \
                if item.var.marker == "?" else [URI_TOKEN]
            var_text, out = self._render_tokens(var_tokens, out)
            return f"BIND({text} AS {var_text})", out
        if isinstance(item, UnionPattern):
            left, mid = self._render_group(item.left, states)
            right, out = self._render_group(item.right, mid)
            return left + " UNION " + right, out
        if isinstance(item, Group):
            return self._render_group(item, states)
        raise TypeError(f"unknown graph pattern {item!r}")

    def _render_template(self, template: list, state: _Namer) -> tuple[str, list[_Namer]]:
        trial = state.clone()
        return trial.render(template), [trial]

    def _render_tokens(self, tokens: list, states: list[_Namer]) -> tuple[str, list[_Namer]]:
        outcomes = [self._render_template(tokens, s) for s in states]
        low = min(text for text, _ in outcomes)
        return low, _dedup_states(
            [nm for text, nms in outcomes if text == low for nm in nms])

    def _min_sequence(self, parts: list, states: list[_Namer], sep: str,
                      render_one) -> tuple[str, list[_Namer]]:
        """Minimal rendering of an orderable list, over all states."""
        if not parts:
            return "", states
        if not self.search:
            texts = []
            current = states
            for part in list(parts):
                outcomes = [render_one(part, s) for s in current]
                # source order: no reordering, but keep every naming state
                # that yields the minimal text so the result is a function
                # of the AST alone
                low = min(t for t, _ in outcomes)
                texts.append(low)
                current = _dedup_states(
                    [nm for t, nms in outcomes if t == low for nm in nms])
            return sep.join(texts), current

        # frontier entries: (remaining_parts, namer); every entry has
        # emitted the identical text so far
        frontier: list[tuple[list, _Namer]] = [(list(parts), s) for s in states]
        emitted: list[str] = []
        while frontier[0][0]:
            candidates = []
            for remaining, nm in frontier:
                for idx, part in enumerate(remaining):
                    self._bump()
                    text, outs = render_one(part, nm)
                    rest = remaining[:idx] + remaining[idx + 1:]
                    for out in outs:
                        candidates.append((text, rest, out))
            low = min(c[0] for c in candidates)
            emitted.append(low)
            survivors = [(rest, nm) for text, rest, nm in candidates if text == low]
            seen = set()
            frontier = []
            for rest, nm in survivors:
                key = (tuple(id(p) for p in rest),
                       tuple(sorted(nm.vars.items())),
                       tuple(sorted(nm.blanks.items())))
                if key not in seen:
                    seen.add(key)
                    frontier.append((rest, nm))
            self._bump(len(frontier))
        return sep.join(emitted), _dedup_states([nm for _, nm in frontier])

    def _render_expr(self, node: _ExprNode, states: list[_Namer], top: bool) -> tuple[str, list[_Namer]]:
        if node.kind == "term":
            return self._render_tokens(node.tokens, states)
        if node.kind == "cmp":
            return self._render_commutative_pair(node, states)
        if node.kind in ("and", "or"):
            sep = " && " if node.kind == "and" else " || "
            text, out = self._min_sequence(list(node.children), states, sep,
                                           self._expr_single)
            if not top:
                text = "(" + text + ")"
            return text, out
        if node.kind == "in":
            needle, current = self._render_expr(node.children[0], states, top=False)
            opts = []
            for child in node.children[1:]:
                text, current = self._render_expr(child, current, top=False)
                opts.append(text)
            return f"{needle} IN ({', '.join(opts)})", current
        if node.kind == "fn":
            args = []
            current = states
            for child in node.children:
                text, current = self._render_expr(child, current, top=False)
                args.append(text)
            return f"{node.op}({', '.join(args)})", current
        if node.kind == "arith":
            left, mid = self._render_expr(node.children[0], states, top=False)
            right, out = self._render_expr(node.children[1], mid, top=False)
            return f"({left} {node.op} {right})", out
        raise TypeError(f"unknown expression node kind {node.kind}")

    def _expr_single(self, node: _ExprNode, state: _Namer) -> tuple[str, list[_Namer]]:
        return self._render_expr(node, [state], top=False)

    def _render_commutative_pair(self, node: _ExprNode, states: list[_Namer]) -> tuple[str, list[_Namer]]:
        if node.op not in ("=", "!="):
            raise TypeError(f"unexpected comparison {node.op}")
        orders = ((0, 1), (1, 0)) if self.search else ((0, 1),)
        candidates: list[tuple[str, _Namer]] = []
        for state in states:
            for order in orders:
                self._bump()
                left, mids = self._render_expr(node.children[order[0]],
                                               [state], top=False)
                for mid in mids:
                    right, outs = self._render_expr(node.children[order[1]],
                                                    [mid], top=False)
                    for out in outs:
                        candidates.append((f"{left} {node.op} {right}", out))
        low = min(text for text, _ in candidates)
        return low, _dedup_states([nm for text, nm in candidates if text == low])


def canonicalize(ast: QueryAst, max_triples: int = DEFAULT_MAX_TRIPLES) -> Signature:
    """Compute the canonical URI-agnostic signature of a parsed query."""
    worker = _Canonicalizer(ast.prefixes(), max_triples)
    skeleton = worker.render_query(ast)
    return Signature(ast.verb, ast.distinct, skeleton)


def render_in_source_order(ast: QueryAst, max_triples: int = DEFAULT_MAX_TRIPLES) -> str:
    """Abstracted rendering that keeps the AST's own triple/conjunct order.

    This is the building block for brute-force oracles: the canonical
    skeleton must equal the minimum of this rendering over all permutations
    of the orderable parts.
    """
    worker = _Canonicalizer(ast.prefixes(), max_triples, search=False)
    return worker.render_query(ast)


@dataclass
class SignatureGroup:
    signature: Signature
    member_ids: list[str]

    @property
    def count(self) -> int:
        return len(self.member_ids)


def group_by_signature(
    queries: Iterable[tuple[str, QueryAst]],
    max_triples: int = DEFAULT_MAX_TRIPLES,
) -> tuple[list[SignatureGroup], list[tuple[str, str]]]:
    """Partition (id, ast) pairs into signature groups, biggest first.

    Returns the groups plus a list of (id, reason) pairs for queries that
    exceeded the canonicalization bounds; those are reported, never dropped
    silently.
    """
    by_skeleton: dict[str, SignatureGroup] = {}
    skipped: list[tuple[str, str]] = []
    for qid, ast in queries:
        try:
            sig = canonicalize(ast, max_triples=max_triples)
        except CanonicalizationLimitExceeded as exc:
            skipped.append((qid, str(exc)))
            continue
        group = by_skeleton.get(sig.skeleton)
        if group is None:
            by_skeleton[sig.skeleton] = SignatureGroup(sig, [qid])
        else:
            group.member_ids.append(qid)
    groups = sorted(
        by_skeleton.values(), key=lambda g: (-g.count, g.signature.skeleton)
    )
    for g in groups:
        g.member_ids.sort()
    return groups, skipped


def coverage_table(groups: Sequence[SignatureGroup]) -> list[dict]:
    """Per-group counts with cumulative coverage percentages."""
    total = sum(g.count for g in groups) or 1
    rows = []
    cumulative = 0
    for rank, g in enumerate(groups, start=1):
        cumulative += g.count
        rows.append(
            {
                "rank": rank,
                "verb": g.signature.verb,
                "distinct": g.signature.distinct,
                "count": g.count,
                "cumulative_pct": round(100.0 * cumulative / total, 1),
                "members": list(g.member_ids),
                "skeleton": g.signature.skeleton,
            }
        )
    return rows
