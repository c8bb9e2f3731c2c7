"""Corpus model and loaders for CQ/SPARQL-OWL datasets.

The canonical on-disk format is JSON Lines: one CQ object per line with
fields ``id``, ``ontology``, ``cq``, optional ``query`` and ``answers``.
Placeholder spans are never stored; they are re-derived by scanning the CQ
text for ``[...]`` segments.  A directory layout with one query per file is
supported as an importer (``<root>/<ontology>/manifest.json`` plus
``questions/*.txt`` and ``queries/*.rq`` paired by basename).

CQs whose query text fails to parse are retained (the linguistic analyses
still need them) and surfaced through :meth:`Corpus.parse_queries`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .queryparse import QueryAst, QueryParseError, parse_query


class CorpusError(ValueError):
    """Structural problem in a corpus file; message carries file/line/field."""


@dataclass(frozen=True)
class OntologyId:
    short_name: str
    prefix_table: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if not self.short_name:
            raise CorpusError("ontology short_name must be nonempty")
        for prefix, iri in self.prefix_table:
            if not iri.startswith(("http://", "https://", "urn:")):
                raise CorpusError(
                    f"ontology {self.short_name}: namespace for prefix "
                    f"{prefix!r} is not an absolute IRI: {iri!r}"
                )

    def prefixes(self) -> dict[str, str]:
        return dict(self.prefix_table)


@dataclass(frozen=True)
class CompetencyQuestion:
    id: str
    ontology: str
    text: str
    placeholders: tuple[tuple[int, int], ...]
    query_text: Optional[str] = None
    expected_answers: tuple[str, ...] = ()

    @property
    def dematerialized(self) -> bool:
        return bool(self.placeholders)


@dataclass
class Corpus:
    ontologies: list[OntologyId]
    questions: list[CompetencyQuestion]
    _by_id: dict[str, CompetencyQuestion] = field(default_factory=dict, repr=False)
    _onto_by_name: dict[str, OntologyId] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._onto_by_name = {}
        for onto in self.ontologies:
            if onto.short_name in self._onto_by_name:
                raise CorpusError(f"duplicate ontology {onto.short_name!r}")
            self._onto_by_name[onto.short_name] = onto
        self._by_id = {}
        for q in self.questions:
            if q.id in self._by_id:
                raise CorpusError(f"duplicate CQ id {q.id!r}")
            if q.ontology not in self._onto_by_name:
                raise CorpusError(
                    f"CQ {q.id!r} references unknown ontology {q.ontology!r}"
                )
            self._by_id[q.id] = q

    def question(self, cq_id: str) -> CompetencyQuestion:
        return self._by_id[cq_id]

    def ontology(self, short_name: str) -> OntologyId:
        return self._onto_by_name[short_name]

    def ontology_names(self) -> list[str]:
        return [o.short_name for o in self.ontologies]

    def parse_queries(self) -> tuple[dict[str, QueryAst], list[tuple[str, str]]]:
        """Parse every query in the corpus.

        Returns (asts keyed by CQ id, list of (cq id, error) for queries
        that did not parse).  CQs without a query are simply absent from
        both.
        """
        asts: dict[str, QueryAst] = {}
        errors: list[tuple[str, str]] = []
        for q in self.questions:
            if q.query_text is None:
                continue
            prefixes = self.ontology(q.ontology).prefixes()
            try:
                asts[q.id] = parse_query(q.query_text, prefixes)
            except QueryParseError as exc:
                errors.append((q.id, str(exc)))
        return asts, errors


# ---------------------------------------------------------------------------
# Placeholder scanning


def placeholder_spans(text: str) -> tuple[tuple[int, int], ...]:
    """Character spans of ``[...]`` placeholders; same text, same spans."""
    spans: list[tuple[int, int]] = []
    start: Optional[int] = None
    for i, ch in enumerate(text):
        if ch == "[":
            if start is not None:
                raise CorpusError(f"nested '[' at offset {i} in {text!r}")
            start = i
        elif ch == "]":
            if start is None:
                raise CorpusError(f"unmatched ']' at offset {i} in {text!r}")
            spans.append((start, i + 1))
            start = None
    if start is not None:
        raise CorpusError(f"unclosed '[' at offset {start} in {text!r}")
    return tuple(spans)


# ---------------------------------------------------------------------------
# Prefix tables


def default_prefix_tables() -> dict[str, dict[str, str]]:
    """Built-in prefix tables for the ontologies of the published corpus."""
    data = resources.files("cqowl").joinpath("data/default_prefixes.json")
    return json.loads(data.read_text(encoding="utf-8"))


def _ontology_from_tables(
    name: str, tables: dict[str, dict[str, str]]
) -> OntologyId:
    table = tables.get(name, {})
    return OntologyId(name, tuple(sorted(table.items())))


# ---------------------------------------------------------------------------
# JSONL format


_ALLOWED_FIELDS = {"id", "ontology", "cq", "query", "answers"}


def load_jsonl(path: Path, prefix_tables: Optional[dict[str, dict[str, str]]] = None) -> Corpus:
    path = Path(path)
    if prefix_tables is None:
        sidecar = path.with_suffix(".prefixes.json")
        if sidecar.exists():
            prefix_tables = json.loads(sidecar.read_text(encoding="utf-8"))
        else:
            prefix_tables = default_prefix_tables()
    questions: list[CompetencyQuestion] = []
    names: list[str] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise CorpusError(f"{path}:{lineno}: expected an object")
        unknown = set(record) - _ALLOWED_FIELDS
        if unknown:
            raise CorpusError(
                f"{path}:{lineno}: unknown field(s) {sorted(unknown)}"
            )
        for fieldname in ("id", "ontology", "cq"):
            if fieldname not in record:
                raise CorpusError(f"{path}:{lineno}: missing field {fieldname!r}")
            if not isinstance(record[fieldname], str) or not record[fieldname]:
                raise CorpusError(
                    f"{path}:{lineno}: field {fieldname!r} must be a "
                    "nonempty string"
                )
        query = record.get("query")
        if query is not None and not isinstance(query, str):
            raise CorpusError(f"{path}:{lineno}: field 'query' must be a string")
        answers = record.get("answers", [])
        if not isinstance(answers, list) or any(
            not isinstance(a, str) for a in answers
        ):
            raise CorpusError(
                f"{path}:{lineno}: field 'answers' must be a list of strings"
            )
        try:
            spans = placeholder_spans(record["cq"])
        except CorpusError as exc:
            raise CorpusError(f"{path}:{lineno}: {exc}") from exc
        if record["ontology"] not in names:
            names.append(record["ontology"])
        questions.append(
            CompetencyQuestion(
                record["id"], record["ontology"], record["cq"], spans,
                query, tuple(answers),
            )
        )
    ontologies = [_ontology_from_tables(n, prefix_tables) for n in names]
    return Corpus(ontologies, questions)


def save_jsonl(corpus: Corpus, path: Path) -> None:
    lines = []
    for q in corpus.questions:
        record: dict = {"id": q.id, "ontology": q.ontology, "cq": q.text}
        if q.query_text is not None:
            record["query"] = q.query_text
        if q.expected_answers:
            record["answers"] = list(q.expected_answers)
        lines.append(json.dumps(record, ensure_ascii=False))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# dataset_dir importer


def load_dataset_dir(root: Path) -> Corpus:
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"{root} is not a directory")
    ontologies: list[OntologyId] = []
    questions: list[CompetencyQuestion] = []
    for onto_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        manifest_path = onto_dir / "manifest.json"
        if not manifest_path.exists():
            raise CorpusError(f"{onto_dir}: missing manifest.json")
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{manifest_path}: invalid JSON: {exc}") from exc
        name = manifest.get("ontology")
        prefixes = manifest.get("prefixes", {})
        if not isinstance(name, str) or not name:
            raise CorpusError(f"{manifest_path}: 'ontology' must be a nonempty string")
        if not isinstance(prefixes, dict):
            raise CorpusError(f"{manifest_path}: 'prefixes' must be an object")
        ontologies.append(OntologyId(name, tuple(sorted(prefixes.items()))))
        qdir = onto_dir / "questions"
        if not qdir.is_dir():
            raise CorpusError(f"{onto_dir}: missing questions/ directory")
        for qfile in sorted(qdir.glob("*.txt")):
            cq_id = qfile.stem
            text = qfile.read_text(encoding="utf-8").strip()
            if not text:
                raise CorpusError(f"{qfile}: empty CQ text")
            query_file = onto_dir / "queries" / f"{cq_id}.rq"
            query = query_file.read_text(encoding="utf-8") if query_file.exists() else None
            try:
                spans = placeholder_spans(text)
            except CorpusError as exc:
                raise CorpusError(f"{qfile}: {exc}") from exc
            questions.append(
                CompetencyQuestion(cq_id, name, text, spans, query)
            )
    return Corpus(ontologies, questions)


def load_corpus(path: Path, format: str = "jsonl") -> Corpus:
    if format == "jsonl":
        return load_jsonl(Path(path))
    if format == "dataset_dir":
        return load_dataset_dir(Path(path))
    raise CorpusError(f"unknown corpus format {format!r}")


# ---------------------------------------------------------------------------
# Translatability


@dataclass(frozen=True)
class TranslatabilityRow:
    ontology: str
    cq_count: int
    translated_count: int


def translatability_report(
    corpus: Corpus,
) -> tuple[list[TranslatabilityRow], list[tuple[str, str]]]:
    """Per-ontology CQ and translated-CQ counts, plus query parse failures.

    A CQ counts as translated when its query text parses; unparseable
    queries are reported separately and counted as untranslated.  Rows are
    ordered by descending CQ count and a Total row is appended.
    """
    asts, errors = corpus.parse_queries()
    rows = []
    for name in corpus.ontology_names():
        mine = [q for q in corpus.questions if q.ontology == name]
        translated = sum(1 for q in mine if q.id in asts)
        rows.append(TranslatabilityRow(name, len(mine), translated))
    rows.sort(key=lambda r: (-r.cq_count, r.ontology))
    rows.append(
        TranslatabilityRow(
            "Total",
            sum(r.cq_count for r in rows),
            sum(r.translated_count for r in rows),
        )
    )
    return rows, errors
