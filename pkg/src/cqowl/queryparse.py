"""Parser, AST and serializer for the SPARQL-OWL subset used in CQ corpora.

The grammar is deliberately the closed subset observed in published CQ
translation datasets: SELECT/ASK queries whose WHERE clause mixes triple
patterns in Turtle syntax (blank-node property lists, object lists,
collections, labeled blanks), property paths built from ``/`` and ``*``,
FILTER / FILTER NOT EXISTS, BIND and UNION.  Anything outside that subset
(OPTIONAL, GROUP BY, subqueries, named graphs, ...) is a hard parse error:
the parser never skips syntax silently.

Placeholder variables written ``$name`` are accepted wherever ``?name``
variables are, as a lexical extension; the marker is preserved through
serialization.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union as TUnion

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

WELL_KNOWN_PREFIXES = {
    "rdf": RDF_NS,
    "rdfs": RDFS_NS,
    "owl": OWL_NS,
    "xsd": XSD_NS,
}


class QueryParseError(ValueError):
    """Lexical or grammatical error, carrying the source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class PrefixResolutionError(KeyError):
    """A prefixed name uses a prefix absent from the query's prefix table."""


# ---------------------------------------------------------------------------
# AST node types


@dataclass(frozen=True)
class Iri:
    value: str

    def __str__(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True)
class PrefixedName:
    prefix: str
    local: str

    def __str__(self) -> str:
        return f"{self.prefix}:{self.local}"


@dataclass(frozen=True)
class BlankNodeLabel:
    label: str

    def __str__(self) -> str:
        return f"_:{self.label}"


@dataclass(frozen=True)
class AnonBlank:
    """A bare ``[]`` used as a term; ids are assigned in parse order."""

    anon_id: int

    def __str__(self) -> str:
        return "[]"


@dataclass(frozen=True)
class Variable:
    name: str
    marker: str = "?"  # "?" question variable, "$" placeholder variable

    def __str__(self) -> str:
        return f"{self.marker}{self.name}"


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: Optional["Term"] = None
    lang: Optional[str] = None

    def __str__(self) -> str:
        out = '"%s"' % self.lexical.replace("\\", "\\\\").replace('"', '\\"')
        if self.datatype is not None:
            out += f"^^{self.datatype}"
        elif self.lang:
            out += f"@{self.lang}"
        return out


@dataclass(frozen=True)
class KeywordA:
    """The Turtle ``a`` abbreviation for rdf:type."""

    def __str__(self) -> str:
        return "a"


Term = TUnion[Iri, PrefixedName, BlankNodeLabel, AnonBlank, Variable, Literal, KeywordA]


@dataclass(frozen=True)
class PathAtom:
    term: Term

    def __str__(self) -> str:
        return str(self.term)


@dataclass(frozen=True)
class PathZeroOrMore:
    inner: "PropertyPath"

    def __str__(self) -> str:
        return f"{self.inner}*"


@dataclass(frozen=True)
class PathSequence:
    parts: tuple["PropertyPath", ...]

    def __post_init__(self):
        if len(self.parts) < 2:
            raise ValueError("path sequence needs at least two parts")

    def __str__(self) -> str:
        return "/".join(str(p) for p in self.parts)


PropertyPath = TUnion[PathAtom, PathZeroOrMore, PathSequence]


@dataclass(frozen=True)
class Collection:
    items: tuple["Node", ...]


@dataclass(frozen=True)
class BlankPropertyList:
    """``[ p1 o1, o2 ; p2 o3 ]`` — predicate/object-list pairs."""

    pairs: tuple[tuple[TUnion[Term, PropertyPath], tuple["Node", ...]], ...]


Node = TUnion[Term, Collection, BlankPropertyList]


@dataclass(frozen=True)
class TriplePattern:
    """One subject/predicate with its full object list (``,`` kept intact)."""

    subject: Node
    predicate: TUnion[Term, PropertyPath]
    objects: tuple[Node, ...]


# Expressions -----------------------------------------------------------------


@dataclass(frozen=True)
class Compare:
    op: str  # "=" or "!="
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class And:
    parts: tuple["Expr", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Expr", ...]


@dataclass(frozen=True)
class In:
    needle: "Expr"
    options: tuple["Expr", ...]

    def __post_init__(self):
        if not self.options:
            raise ValueError("IN list must be nonempty")


@dataclass(frozen=True)
class FnCall:
    name: TUnion[str, Term]  # builtin name ("STRSTARTS", "now") or a cast term
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Arith:
    op: str  # "+" or "-"
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class TermRef:
    term: Term


@dataclass(frozen=True)
class Paren:
    inner: "Expr"


Expr = TUnion[Compare, And, Or, In, FnCall, Arith, TermRef, Paren]


# Graph patterns ---------------------------------------------------------------


@dataclass(frozen=True)
class Bgp:
    triples: tuple[TriplePattern, ...]


@dataclass(frozen=True)
class Filter:
    expr: Expr


@dataclass(frozen=True)
class NotExists:
    """``FILTER NOT EXISTS { ... }`` modeled as its own pattern node."""

    pattern: "Group"


@dataclass(frozen=True)
class Bind:
    expr: Expr
    var: Variable


@dataclass(frozen=True)
class UnionPattern:
    left: "Group"
    right: "Group"


@dataclass(frozen=True)
class Group:
    items: tuple["GraphPattern", ...]


GraphPattern = TUnion[Bgp, Filter, NotExists, Bind, UnionPattern, Group]


STAR = "*"


@dataclass(frozen=True)
class QueryAst:
    verb: str  # "SELECT" or "ASK"
    distinct: bool
    projection: TUnion[str, tuple[Variable, ...], None]  # STAR, vars, or None for ASK
    where: Group
    prefix_table: tuple[tuple[str, str], ...] = field(default=())

    def prefixes(self) -> dict[str, str]:
        return dict(self.prefix_table)


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_SPEC = [
    ("COMMENT", r"#[^\n]*"),
    ("IRIREF", r"<[^<>\"{}|^`\\\s]*>"),
    ("TYPED", r"\^\^"),
    ("VAR", r"[?$][A-Za-z_][A-Za-z_0-9]*"),
    ("BLANK", r"_:[A-Za-z_0-9]+"),
    ("STRING", r'"(?:[^"\\]|\\.)*"'),
    ("PNAME", r"[A-Za-z_][A-Za-z_0-9.-]*:[A-Za-z_0-9](?:[A-Za-z_0-9.-]*[A-Za-z_0-9-])?"),
    ("PNAMENS", r"[A-Za-z_][A-Za-z_0-9.-]*:"),
    ("COLONNAME", r":[A-Za-z_0-9](?:[A-Za-z_0-9.-]*[A-Za-z_0-9-])?"),
    ("COLON", r":"),
    ("INTEGER", r"[0-9]+"),
    ("NAME", r"[A-Za-z_][A-Za-z_0-9]*"),
    ("NEQ", r"!="),
    ("EQ", r"="),
    ("ANDAND", r"&&"),
    ("OROR", r"\|\|"),
    ("LANG", r"@[A-Za-z]+(?:-[A-Za-z0-9]+)*"),
    ("PUNCT", r"[{}()\[\].;,/*+-]"),
    ("WS", r"[ \t\r\n]+"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pat})" for name, pat in _TOKEN_SPEC))

_KEYWORDS = {
    "select", "ask", "where", "distinct", "filter", "bind", "union",
    "not", "exists", "in", "as", "prefix",
}


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QueryParseError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup or ""
        value = m.group()
        col = pos - line_start + 1
        if kind == "WS" or kind == "COMMENT":
            pass
        elif kind == "NAME" and value.lower() in _KEYWORDS:
            tokens.append(_Token("KW", value.upper(), line, col))
        else:
            tokens.append(_Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = m.end() - (len(value) - value.rfind("\n") - 1)
        pos = m.end()
    tokens.append(_Token("EOF", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser

_BUILTIN_FNS = {"strstarts": "STRSTARTS", "now": "now"}


class _Parser:
    def __init__(self, tokens: list[_Token], prefixes: dict[str, str]):
        self.tokens = tokens
        self.pos = 0
        self.prefixes = dict(prefixes)
        self.anon_counter = 0

    # token helpers --------------------------------------------------------

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, message: str) -> QueryParseError:
        tok = self.peek()
        shown = tok.value or "end of input"
        return QueryParseError(f"{message}, found {shown!r}", tok.line, tok.col)

    def expect_kw(self, word: str) -> _Token:
        tok = self.peek()
        if tok.kind == "KW" and tok.value == word:
            return self.next()
        raise self.error(f"expected {word}")

    def expect_punct(self, ch: str) -> _Token:
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.value == ch:
            return self.next()
        raise self.error(f"expected {ch!r}")

    def at_punct(self, ch: str) -> bool:
        tok = self.peek()
        return tok.kind == "PUNCT" and tok.value == ch

    def at_kw(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "KW" and tok.value == word

    # grammar --------------------------------------------------------------

    def parse_query(self) -> QueryAst:
        while self.at_kw("PREFIX"):
            self.next()
            label = self._parse_prefix_label()
            iri_tok = self.peek()
            if iri_tok.kind != "IRIREF":
                raise self.error("expected namespace IRI in PREFIX declaration")
            self.next()
            self.prefixes[label] = iri_tok.value[1:-1]

        tok = self.peek()
        if self.at_kw("SELECT"):
            self.next()
            distinct = False
            if self.at_kw("DISTINCT"):
                self.next()
                distinct = True
            projection = self._parse_projection()
            self.expect_kw("WHERE")
            where = self._parse_group()
            ast = QueryAst("SELECT", distinct, projection, where,
                           tuple(sorted(self.prefixes.items())))
        elif self.at_kw("ASK"):
            self.next()
            distinct = False
            if self.at_kw("WHERE"):
                self.next()
            where = self._parse_group()
            ast = QueryAst("ASK", False, None, where,
                           tuple(sorted(self.prefixes.items())))
        else:
            raise self.error("expected SELECT or ASK")
        if self.peek().kind != "EOF":
            raise self.error("unexpected trailing content")
        return ast

    def _parse_prefix_label(self) -> str:
        tok = self.peek()
        if tok.kind == "PNAMENS":
            self.next()
            return tok.value[:-1]
        if tok.kind == "COLON":
            self.next()
            return ""
        raise self.error("expected a prefix label like 'ex:'")

    def _parse_projection(self):
        if self.at_punct("*"):
            self.next()
            return STAR
        vars_: list[Variable] = []
        while self.peek().kind == "VAR":
            tok = self.next()
            vars_.append(Variable(tok.value[1:], tok.value[0]))
        if not vars_:
            raise self.error("expected '*' or at least one variable after SELECT")
        return tuple(vars_)

    def _parse_group(self) -> Group:
        self.expect_punct("{")
        items: list[GraphPattern] = []
        triples: list[TriplePattern] = []

        def flush():
            nonlocal triples
            if triples:
                items.append(Bgp(tuple(triples)))
                triples = []

        while not self.at_punct("}"):
            tok = self.peek()
            if tok.kind == "EOF":
                raise self.error("unterminated group, expected '}'")
            if self.at_kw("FILTER"):
                self.next()
                flush()
                if self.at_kw("NOT"):
                    self.next()
                    self.expect_kw("EXISTS")
                    inner = self._parse_group()
                    items.append(NotExists(inner))
                else:
                    items.append(Filter(self._parse_constraint()))
                self._skip_dot()
            elif self.at_kw("BIND"):
                self.next()
                flush()
                self.expect_punct("(")
                expr = self._parse_expr()
                self.expect_kw("AS")
                var_tok = self.peek()
                if var_tok.kind != "VAR":
                    raise self.error("expected variable after AS")
                self.next()
                self.expect_punct(")")
                items.append(Bind(expr, Variable(var_tok.value[1:], var_tok.value[0])))
                self._skip_dot()
            elif self.at_punct("{"):
                flush()
                first = self._parse_group()
                node: GraphPattern = first
                while self.at_kw("UNION"):
                    self.next()
                    right = self._parse_group()
                    node = UnionPattern(node if isinstance(node, Group) else Group((node,)), right)
                items.append(node)
                self._skip_dot()
            elif self.at_kw("SELECT") or self.at_kw("ASK"):
                raise self.error("subqueries are outside the supported subset")
            else:
                triples.extend(self._parse_triples_block())
        self.expect_punct("}")
        flush()
        return Group(tuple(items))

    def _skip_dot(self):
        if self.at_punct("."):
            self.next()

    # triples ---------------------------------------------------------------

    def _parse_triples_block(self) -> list[TriplePattern]:
        subject = self._parse_node(allow_literal=False)
        triples = self._parse_predicate_object_list(subject)
        if not triples:
            raise self.error("expected predicate after subject")
        self._skip_dot()
        return triples

    def _parse_predicate_object_list(self, subject: Node) -> list[TriplePattern]:
        triples: list[TriplePattern] = []
        while True:
            if self.at_punct("}") or self.at_punct(".") or self.peek().kind == "EOF":
                break
            predicate = self._parse_predicate()
            objects = [self._parse_node(allow_literal=True)]
            while self.at_punct(","):
                self.next()
                objects.append(self._parse_node(allow_literal=True))
            triples.append(TriplePattern(subject, predicate, tuple(objects)))
            if self.at_punct(";"):
                self.next()
                # tolerate a trailing ';' before '.', '}' or ']'
                continue
            break
        return triples

    def _parse_predicate(self) -> TUnion[Term, PropertyPath]:
        parts: list[PropertyPath] = [self._parse_path_elt()]
        while self.at_punct("/"):
            self.next()
            parts.append(self._parse_path_elt())
        if len(parts) == 1:
            only = parts[0]
            if isinstance(only, PathAtom):
                return only.term
            return only
        return PathSequence(tuple(parts))

    def _parse_path_elt(self) -> PropertyPath:
        tok = self.peek()
        if tok.kind == "NAME" and tok.value == "a":
            self.next()
            atom: PropertyPath = PathAtom(KeywordA())
        elif tok.kind in ("IRIREF", "PNAME", "COLONNAME", "VAR"):
            atom = PathAtom(self._parse_term())
        else:
            raise self.error("expected predicate")
        if self.at_punct("*"):
            self.next()
            return PathZeroOrMore(atom)
        return atom

    def _parse_node(self, allow_literal: bool) -> Node:
        tok = self.peek()
        if self.at_punct("["):
            return self._parse_blank_property_list()
        if self.at_punct("("):
            return self._parse_collection()
        if tok.kind in ("STRING", "INTEGER") and not allow_literal:
            raise self.error("literal not allowed in subject position")
        return self._parse_term()

    def _parse_blank_property_list(self) -> Node:
        self.expect_punct("[")
        if self.at_punct("]"):
            self.next()
            blank = AnonBlank(self.anon_counter)
            self.anon_counter += 1
            return blank
        pairs: list[tuple[TUnion[Term, PropertyPath], tuple[Node, ...]]] = []
        while not self.at_punct("]"):
            if self.peek().kind == "EOF":
                raise self.error("unterminated blank node property list")
            predicate = self._parse_predicate()
            objects = [self._parse_node(allow_literal=True)]
            while self.at_punct(","):
                self.next()
                objects.append(self._parse_node(allow_literal=True))
            pairs.append((predicate, tuple(objects)))
            if self.at_punct(";"):
                self.next()
        self.expect_punct("]")
        return BlankPropertyList(tuple(pairs))

    def _parse_collection(self) -> Collection:
        self.expect_punct("(")
        items: list[Node] = []
        while not self.at_punct(")"):
            if self.peek().kind == "EOF":
                raise self.error("unterminated collection")
            items.append(self._parse_node(allow_literal=True))
        self.expect_punct(")")
        return Collection(tuple(items))

    def _parse_term(self) -> Term:
        tok = self.peek()
        if tok.kind == "IRIREF":
            self.next()
            return Iri(tok.value[1:-1])
        if tok.kind == "PNAME":
            self.next()
            prefix, local = tok.value.split(":", 1)
            return PrefixedName(prefix, local)
        if tok.kind == "COLONNAME":
            self.next()
            return PrefixedName("", tok.value[1:])
        if tok.kind == "VAR":
            self.next()
            return Variable(tok.value[1:], tok.value[0])
        if tok.kind == "BLANK":
            self.next()
            return BlankNodeLabel(tok.value[2:])
        if tok.kind == "NAME" and tok.value == "a":
            self.next()
            return KeywordA()
        if tok.kind == "STRING":
            self.next()
            lexical = _unescape_string(tok.value[1:-1])
            if self.peek().kind == "TYPED":
                self.next()
                dt_tok = self.peek()
                if dt_tok.kind not in ("IRIREF", "PNAME", "COLONNAME"):
                    raise self.error("expected datatype after '^^'")
                datatype = self._parse_term()
                return Literal(lexical, datatype=datatype)
            if self.peek().kind == "LANG":
                lang = self.next().value[1:]
                return Literal(lexical, lang=lang)
            return Literal(lexical)
        if tok.kind == "INTEGER":
            self.next()
            return Literal(tok.value, datatype=PrefixedName("xsd", "integer"))
        raise self.error("expected a term")

    # expressions -------------------------------------------------------------

    def _parse_constraint(self) -> Expr:
        if self.at_punct("("):
            self.next()
            expr = self._parse_expr()
            self.expect_punct(")")
            return Paren(expr)
        # bare builtin call form: FILTER STRSTARTS(...)
        return self._parse_primary()

    def _parse_expr(self) -> Expr:
        return self._parse_or()

    def _parse_or(self) -> Expr:
        parts = [self._parse_and()]
        while self.peek().kind == "OROR":
            self.next()
            parts.append(self._parse_and())
        if len(parts) == 1:
            return parts[0]
        return Or(tuple(parts))

    def _parse_and(self) -> Expr:
        parts = [self._parse_relational()]
        while self.peek().kind == "ANDAND":
            self.next()
            parts.append(self._parse_relational())
        if len(parts) == 1:
            return parts[0]
        return And(tuple(parts))

    def _parse_relational(self) -> Expr:
        left = self._parse_additive()
        tok = self.peek()
        if tok.kind in ("EQ", "NEQ"):
            op = "=" if tok.kind == "EQ" else "!="
            self.next()
            right = self._parse_additive()
            return Compare(op, left, right)
        if self.at_kw("IN"):
            self.next()
            self.expect_punct("(")
            options = [self._parse_expr()]
            while self.at_punct(","):
                self.next()
                options.append(self._parse_expr())
            self.expect_punct(")")
            return In(left, tuple(options))
        return left

    def _parse_additive(self) -> Expr:
        left = self._parse_primary()
        while self.at_punct("+") or self.at_punct("-"):
            op = self.next().value
            right = self._parse_primary()
            left = Arith(op, left, right)
        return left

    def _parse_primary(self) -> Expr:
        tok = self.peek()
        if self.at_punct("("):
            self.next()
            inner = self._parse_expr()
            self.expect_punct(")")
            return Paren(inner)
        if tok.kind == "NAME" and tok.value.lower() in _BUILTIN_FNS:
            self.next()
            return self._parse_call(_BUILTIN_FNS[tok.value.lower()])
        if tok.kind in ("PNAME", "COLONNAME") and self.peek(1).kind == "PUNCT" \
                and self.peek(1).value == "(":
            fn_term = self._parse_term()
            return self._parse_call(fn_term)
        return TermRef(self._parse_term())

    def _parse_call(self, name) -> FnCall:
        self.expect_punct("(")
        args: list[Expr] = []
        if not self.at_punct(")"):
            args.append(self._parse_expr())
            while self.at_punct(","):
                self.next()
                args.append(self._parse_expr())
        self.expect_punct(")")
        return FnCall(name, tuple(args))


def _unescape_string(raw: str) -> str:
    return (
        raw.replace("\\\\", "\x00")
        .replace('\\"', '"')
        .replace("\\n", "\n")
        .replace("\\t", "\t")
        .replace("\x00", "\\")
    )


def parse_query(text: str, prefixes: Optional[dict[str, str]] = None) -> QueryAst:
    """Parse a SPARQL-OWL query into a :class:`QueryAst`.

    ``prefixes`` supplies the namespace table when the query text omits its
    PREFIX preamble (the usual case for per-ontology corpora); declarations
    in the text extend and override it.
    """
    if not text.strip():
        raise QueryParseError("empty query text", 1, 1)
    table = dict(WELL_KNOWN_PREFIXES)
    if prefixes:
        table.update(prefixes)
    return _Parser(_tokenize(text), table).parse_query()


# ---------------------------------------------------------------------------
# Serializer


def serialize_query(ast: QueryAst) -> str:
    """Pretty-print an AST; ``parse(serialize(ast))`` is structurally equal."""
    lines: list[str] = []
    if ast.verb == "SELECT":
        head = "SELECT"
        if ast.distinct:
            head += " DISTINCT"
        if ast.projection == STAR:
            head += " *"
        else:
            head += " " + " ".join(str(v) for v in ast.projection or ())
        lines.append(head)
    else:
        lines.append("ASK")
    lines.append("WHERE " + _render_group(ast.where, 0))
    return "\n".join(lines) + "\n"


def _render_group(group: Group, depth: int) -> str:
    pad = "    " * (depth + 1)
    out = ["{"]
    for item in group.items:
        out.append(_render_pattern(item, depth + 1, pad))
    out.append("    " * depth + "}")
    return "\n".join(out)


def _render_pattern(item: GraphPattern, depth: int, pad: str) -> str:
    if isinstance(item, Bgp):
        return "\n".join(pad + line for line in _render_bgp(item, depth))
    if isinstance(item, Filter):
        return pad + "FILTER " + _render_expr(item.expr)
    if isinstance(item, NotExists):
        return pad + "FILTER NOT EXISTS " + _render_group(item.pattern, depth)
    if isinstance(item, Bind):
        return pad + f"BIND({_render_expr(item.expr)} AS {item.var})"
    if isinstance(item, UnionPattern):
        left = _render_group(item.left, depth)
        right = _render_group(item.right, depth)
        return pad + left + " UNION " + right
    if isinstance(item, Group):
        return pad + _render_group(item, depth)
    raise TypeError(f"unknown graph pattern node {item!r}")


def _render_bgp(bgp: Bgp, depth: int) -> list[str]:
    lines: list[str] = []
    i = 0
    triples = bgp.triples
    while i < len(triples):
        subject = triples[i].subject
        run = [triples[i]]
        j = i + 1
        while j < len(triples) and triples[j].subject == subject:
            run.append(triples[j])
            j += 1
        subj_text = _render_node(subject, depth)
        parts = []
        for t in run:
            objs = ", ".join(_render_node(o, depth) for o in t.objects)
            parts.append(f"{_render_predicate(t.predicate)} {objs}")
        lines.append(subj_text + " " + " ; ".join(parts) + " .")
        i = j
    return lines


def _render_predicate(pred: TUnion[Term, PropertyPath]) -> str:
    if isinstance(pred, (PathAtom, PathZeroOrMore, PathSequence)):
        return str(pred)
    return str(pred)


def _render_node(node: Node, depth: int) -> str:
    if isinstance(node, BlankPropertyList):
        inner_pad = "    " * (depth + 1)
        parts = []
        for pred, objects in node.pairs:
            objs = ", ".join(_render_node(o, depth + 1) for o in objects)
            parts.append(f"{inner_pad}{_render_predicate(pred)} {objs}")
        return "[\n" + " ;\n".join(parts) + "\n" + "    " * depth + "]"
    if isinstance(node, Collection):
        return "( " + " ".join(_render_node(i, depth) for i in node.items) + " )"
    return str(node)


def _render_expr(expr: Expr) -> str:
    if isinstance(expr, Paren):
        return "(" + _render_expr(expr.inner) + ")"
    if isinstance(expr, Compare):
        return f"{_render_expr(expr.left)} {expr.op} {_render_expr(expr.right)}"
    if isinstance(expr, And):
        return " && ".join(_render_expr(p) for p in expr.parts)
    if isinstance(expr, Or):
        return " || ".join(_render_expr(p) for p in expr.parts)
    if isinstance(expr, In):
        opts = ", ".join(_render_expr(o) for o in expr.options)
        return f"{_render_expr(expr.needle)} IN ({opts})"
    if isinstance(expr, FnCall):
        name = expr.name if isinstance(expr.name, str) else str(expr.name)
        args = ", ".join(_render_expr(a) for a in expr.args)
        return f"{name}({args})"
    if isinstance(expr, Arith):
        return f"{_render_expr(expr.left)} {expr.op} {_render_expr(expr.right)}"
    if isinstance(expr, TermRef):
        return str(expr.term)
    raise TypeError(f"unknown expression node {expr!r}")


# ---------------------------------------------------------------------------
# Keyword analytics


KEYWORD_INVENTORY = (
    "WHERE",
    "rdfs:subClassOf",
    "SELECT",
    "owl:onProperty",
    "owl:someValuesFrom",
    "rdf:type / a",
    "DISTINCT",
    "owl:Restriction",
    "FILTER",
    "owl:Nothing",
    "ASK",
    "owl:hasValue",
    "NOT EXISTS",
    "owl:intersectionOf",
    "owl:unionOf",
    "UNION",
    "owl:disjointWith",
    "owl:allValuesFrom",
    "owl:cardinality",
    "rdf:first",
    "rdf:rest",
)

_VOCAB_KEYWORD_IRIS = {
    "rdfs:subClassOf": RDFS_NS + "subClassOf",
    "owl:onProperty": OWL_NS + "onProperty",
    "owl:someValuesFrom": OWL_NS + "someValuesFrom",
    "owl:Restriction": OWL_NS + "Restriction",
    "owl:Nothing": OWL_NS + "Nothing",
    "owl:hasValue": OWL_NS + "hasValue",
    "owl:intersectionOf": OWL_NS + "intersectionOf",
    "owl:unionOf": OWL_NS + "unionOf",
    "owl:disjointWith": OWL_NS + "disjointWith",
    "owl:allValuesFrom": OWL_NS + "allValuesFrom",
    "owl:cardinality": OWL_NS + "cardinality",
    "rdf:first": RDF_NS + "first",
    "rdf:rest": RDF_NS + "rest",
}
_RDF_TYPE_IRI = RDF_NS + "type"


def resolve_term(term: Term, prefixes: dict[str, str]) -> Optional[str]:
    """Resolve an IRI-valued term to its absolute IRI, or None for non-IRIs."""
    if isinstance(term, Iri):
        return term.value
    if isinstance(term, PrefixedName):
        ns = prefixes.get(term.prefix)
        if ns is None:
            raise PrefixResolutionError(
                f"prefix {term.prefix!r} is not declared for this query"
            )
        return ns + term.local
    if isinstance(term, KeywordA):
        return _RDF_TYPE_IRI
    return None


def _iter_terms(ast: QueryAst) -> Iterator[Term]:
    yield from _iter_pattern_terms(ast.where)


def _iter_pattern_terms(item: GraphPattern) -> Iterator[Term]:
    if isinstance(item, Group):
        for sub in item.items:
            yield from _iter_pattern_terms(sub)
    elif isinstance(item, Bgp):
        for t in item.triples:
            yield from _iter_node_terms(t.subject)
            yield from _iter_path_terms(t.predicate)
            for o in t.objects:
                yield from _iter_node_terms(o)
    elif isinstance(item, Filter):
        yield from _iter_expr_terms(item.expr)
    elif isinstance(item, NotExists):
        yield from _iter_pattern_terms(item.pattern)
    elif isinstance(item, Bind):
        yield from _iter_expr_terms(item.expr)
        yield item.var
    elif isinstance(item, UnionPattern):
        yield from _iter_pattern_terms(item.left)
        yield from _iter_pattern_terms(item.right)


def _iter_node_terms(node: Node) -> Iterator[Term]:
    if isinstance(node, BlankPropertyList):
        for pred, objects in node.pairs:
            yield from _iter_path_terms(pred)
            for o in objects:
                yield from _iter_node_terms(o)
    elif isinstance(node, Collection):
        for i in node.items:
            yield from _iter_node_terms(i)
    else:
        yield node


def _iter_expr_terms(expr: Expr) -> Iterator[Term]:
    if isinstance(expr, TermRef):
        yield expr.term
    elif isinstance(expr, Paren):
        yield from _iter_expr_terms(expr.inner)
    elif isinstance(expr, Compare):
        yield from _iter_expr_terms(expr.left)
        yield from _iter_expr_terms(expr.right)
    elif isinstance(expr, (And, Or)):
        for p in expr.parts:
            yield from _iter_expr_terms(p)
    elif isinstance(expr, In):
        yield from _iter_expr_terms(expr.needle)
        for o in expr.options:
            yield from _iter_expr_terms(o)
    elif isinstance(expr, FnCall):
        if not isinstance(expr.name, str):
            yield expr.name
        for a in expr.args:
            yield from _iter_expr_terms(a)
    elif isinstance(expr, Arith):
        yield from _iter_expr_terms(expr.left)
        yield from _iter_expr_terms(expr.right)


def _iter_path_terms(pred: TUnion[Term, PropertyPath]) -> Iterator[Term]:
    if isinstance(pred, PathAtom):
        yield pred.term
    elif isinstance(pred, PathZeroOrMore):
        yield from _iter_path_terms(pred.inner)
    elif isinstance(pred, PathSequence):
        for p in pred.parts:
            yield from _iter_path_terms(p)
    else:
        yield pred


def _has_node(item: GraphPattern, kind) -> bool:
    if isinstance(item, kind):
        return True
    if isinstance(item, Group):
        return any(_has_node(sub, kind) for sub in item.items)
    if isinstance(item, NotExists):
        return _has_node(item.pattern, kind)
    if isinstance(item, UnionPattern):
        return _has_node(item.left, kind) or _has_node(item.right, kind)
    return False


def keyword_presence(ast: QueryAst) -> set[str]:
    """Which of the fixed keyword inventory occurs in the query.

    Structural keywords come from AST shape; vocabulary keywords are matched
    on resolved IRIs so the result is invariant under prefix renaming.
    ``rdf:type`` and the Turtle ``a`` count as the single keyword
    ``"rdf:type / a"``.  A ``FILTER NOT EXISTS`` counts for both FILTER and
    NOT EXISTS, matching its surface syntax.
    """
    present: set[str] = {"WHERE", ast.verb}
    if ast.distinct:
        present.add("DISTINCT")
    if _has_node(ast.where, Filter) or _has_node(ast.where, NotExists):
        present.add("FILTER")
    if _has_node(ast.where, NotExists):
        present.add("NOT EXISTS")
    if _has_node(ast.where, UnionPattern):
        present.add("UNION")

    prefixes = ast.prefixes()
    iri_to_keyword = {iri: kw for kw, iri in _VOCAB_KEYWORD_IRIS.items()}
    for term in _iter_terms(ast):
        if isinstance(term, Literal):
            if term.datatype is not None:
                resolved = resolve_term(term.datatype, prefixes)
                if resolved in iri_to_keyword:
                    present.add(iri_to_keyword[resolved])
            continue
        resolved = resolve_term(term, prefixes)
        if resolved is None:
            continue
        if resolved == _RDF_TYPE_IRI:
            present.add("rdf:type / a")
        elif resolved in iri_to_keyword:
            present.add(iri_to_keyword[resolved])
    return present


def keyword_report(corpus) -> tuple[list[dict], list[tuple[str, str]]]:
    """Keyword usage per query over a corpus (presence, not occurrences).

    Returns rows of ``{"keyword", "total", "per_ontology"}`` sorted by
    descending total (inventory order breaks ties, which matches the
    published table layout), plus the list of queries that failed to parse
    and were therefore excluded.
    """
    asts, errors = corpus.parse_queries()
    onto_of = {q.id: q.ontology for q in corpus.questions}
    totals: dict[str, int] = {kw: 0 for kw in KEYWORD_INVENTORY}
    per_onto: dict[str, dict[str, int]] = {kw: {} for kw in KEYWORD_INVENTORY}
    for qid, ast in asts.items():
        onto = onto_of[qid]
        for kw in keyword_presence(ast):
            if kw not in totals:
                continue
            totals[kw] += 1
            per_onto[kw][onto] = per_onto[kw].get(onto, 0) + 1
    order = {kw: i for i, kw in enumerate(KEYWORD_INVENTORY)}
    rows = [
        {"keyword": kw, "total": totals[kw], "per_ontology": per_onto[kw]}
        for kw in KEYWORD_INVENTORY
        if totals[kw] > 0
    ]
    rows.sort(key=lambda r: (-r["total"], order[r["keyword"]]))
    return rows, errors
