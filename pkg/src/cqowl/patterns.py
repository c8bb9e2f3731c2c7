"""Pattern inventories over CQ chunk templates.

A pattern candidate (one per CQ) becomes a pattern when it recurs: every
candidate from a dematerialized CQ counts by itself, while a candidate from
a materialized CQ needs a second CQ (from any ontology's set) producing the
same text.  Accepted patterns can be normalized further into higher-level
patterns by rewriting word variants into common forms and collapsing
preposition-joined entity chunks.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

LEVELS = ("candidate", "pattern", "higher")


@dataclass(frozen=True)
class CandidateRecord:
    """One CQ's pattern candidate, ready for filtering."""

    cq_id: str
    ontology: str
    dematerialized: bool
    text: str


@dataclass
class Pattern:
    text: str
    level: str
    support: list[str] = field(default_factory=list)
    ontologies: set[str] = field(default_factory=set)


@dataclass(frozen=True)
class RejectedCandidate:
    cq_id: str
    ontology: str
    text: str
    reason: str


@dataclass(frozen=True)
class CqFeatures:
    question_type: str  # Selection | Binary | Count
    polarity: str  # Positive | Negative | Both
    modifier: str  # None | Numeric | Superlative | Comparative | Difference | Extent
    dinde: frozenset[str]  # subset of Time/Location/Person/Period/Procedure


def canonical_text(text: str) -> str:
    """Pattern texts compare with the sentence-initial capital normalized."""
    text = text.strip()
    if not text:
        return text
    return text[0].upper() + text[1:]


# ---------------------------------------------------------------------------
# Candidate filtering


def filter_candidates(
    candidates: Sequence[CandidateRecord],
    overrides: Optional[dict[str, str]] = None,
) -> tuple[list[Pattern], list[RejectedCandidate]]:
    """Promote recurring candidates to patterns.

    ``overrides`` maps cq id to a hand-corrected candidate string and is
    applied before any grouping, mirroring a manual validation step.
    """
    seen_ids: set[str] = set()
    effective: list[CandidateRecord] = []
    for record in candidates:
        if record.cq_id in seen_ids:
            raise ValueError(f"duplicate candidate for CQ {record.cq_id}")
        seen_ids.add(record.cq_id)
        text = (overrides or {}).get(record.cq_id, record.text)
        effective.append(
            CandidateRecord(record.cq_id, record.ontology,
                            record.dematerialized, canonical_text(text))
        )

    by_text: dict[str, list[CandidateRecord]] = {}
    for record in effective:
        by_text.setdefault(record.text, []).append(record)

    patterns: list[Pattern] = []
    rejected: list[RejectedCandidate] = []
    for text, group in by_text.items():
        accepted = [r for r in group if r.dematerialized or len(group) >= 2]
        for r in group:
            if r not in accepted:
                rejected.append(
                    RejectedCandidate(
                        r.cq_id, r.ontology, text,
                        "materialized CQ with a unique candidate",
                    )
                )
        if accepted:
            patterns.append(
                Pattern(
                    text,
                    "pattern",
                    sorted(r.cq_id for r in accepted),
                    {r.ontology for r in accepted},
                )
            )
    patterns.sort(key=lambda p: p.text)
    rejected.sort(key=lambda r: r.cq_id)
    return patterns, rejected


# ---------------------------------------------------------------------------
# Higher-level normalization

# word rewrites applied in this order, each sweeping left-to-right; matching
# is case-insensitive and the sentence-initial capital survives rewriting
_WORD_REWRITES: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...] = (
    (("are",), ("is",)),
    (("any",), ()),
    (("did",), ("do",)),
    (("we",), ("I",)),
    (("does",), ("do",)),
    (("which", "of"), ("which",)),
    (("has",), ("have",)),
    (("which", "kind"), ("what", "kind")),
    (("will",), ("is",)),
    (("possible",), ()),
    (("are", "there"), ()),
)

_EC_SLOT = re.compile(r"EC\d+$")
_PC_SLOT = re.compile(r"PC\d+$")
_MERGE_PREPOSITIONS = {"for", "of", "in", "with", "from"}


def _rewrite_words(tokens: list[str]) -> list[str]:
    for pattern_words, replacement in _WORD_REWRITES:
        out: list[str] = []
        i = 0
        while i < len(tokens):
            window = tokens[i:i + len(pattern_words)]
            if len(window) == len(pattern_words) and all(
                w.lower() == p for w, p in zip(window, pattern_words)
            ):
                out.extend(replacement)
                i += len(pattern_words)
            else:
                out.append(tokens[i])
                i += 1
        tokens = out
    # sentence-initial "Which" becomes "What" (after the word table, so that
    # "which of"/"which kind" firings are not masked)
    if tokens and tokens[0].lower() == "which":
        tokens[0] = "What"
    return tokens


def _merge_ec_chains(tokens: list[str]) -> list[str]:
    out = list(tokens)
    changed = True
    while changed:
        changed = False
        for i in range(len(out) - 2):
            if (
                _EC_SLOT.match(out[i])
                and out[i + 1].lower() in _MERGE_PREPOSITIONS
                and _EC_SLOT.match(out[i + 2])
            ):
                out = out[: i + 1] + out[i + 3:]
                changed = True
                break
    return out


def _recompact_ordinals(tokens: list[str]) -> list[str]:
    mapping: dict[str, str] = {}
    counters = {"EC": 0, "PC": 0}
    out = []
    for tok in tokens:
        kind = "EC" if _EC_SLOT.match(tok) else "PC" if _PC_SLOT.match(tok) else None
        if kind is None:
            out.append(tok)
            continue
        if tok not in mapping:
            counters[kind] += 1
            mapping[tok] = f"{kind}{counters[kind]}"
        out.append(mapping[tok])
    return out


def normalize_text(text: str) -> str:
    """Fixpoint of the word-rewrite and EC-merge rules, ordinals recompacted."""
    tokens = text.split()
    while True:
        before = list(tokens)
        tokens = _rewrite_words(tokens)
        tokens = _merge_ec_chains(tokens)
        if tokens == before:
            break
    tokens = _recompact_ordinals(tokens)
    return canonical_text(" ".join(tokens))


def normalize_pattern(pattern: Pattern) -> Pattern:
    if pattern.level not in ("pattern", "higher"):
        raise ValueError(f"cannot normalize a {pattern.level}-level pattern")
    return Pattern(normalize_text(pattern.text), "higher",
                   list(pattern.support), set(pattern.ontologies))


def higher_level_inventory(patterns: Sequence[Pattern]) -> list[Pattern]:
    """Normalize accepted patterns and merge the ones that coincide."""
    merged: dict[str, Pattern] = {}
    for p in patterns:
        normalized = normalize_pattern(p)
        existing = merged.get(normalized.text)
        if existing is None:
            merged[normalized.text] = normalized
        else:
            existing.support = sorted(set(existing.support) | set(normalized.support))
            existing.ontologies |= normalized.ontologies
    return sorted(merged.values(), key=lambda p: p.text)


# ---------------------------------------------------------------------------
# Tables


@dataclass(frozen=True)
class CoverageRow:
    ontology: str
    candidates: int
    patterns: int
    distinct_patterns: int
    coverage_pct: float
    materialized: int
    dematerialized: int
    distinct_higher: int


def coverage_stats(
    candidates: Sequence[CandidateRecord],
    patterns: Sequence[Pattern],
    higher: Sequence[Pattern],
    ontology_order: Optional[Sequence[str]] = None,
) -> list[CoverageRow]:
    """Per-ontology pattern statistics plus a Total row."""
    ontologies = list(ontology_order) if ontology_order else sorted(
        {c.ontology for c in candidates}
    )
    covered_ids = {cq_id for p in patterns for cq_id in p.support}
    rows = []
    for onto in ontologies:
        mine = [c for c in candidates if c.ontology == onto]
        covered = [c for c in mine if c.cq_id in covered_ids]
        distinct = sum(1 for p in patterns if onto in p.ontologies)
        distinct_higher = sum(1 for p in higher if onto in p.ontologies)
        rows.append(
            CoverageRow(
                onto,
                len(mine),
                len(covered),
                distinct,
                _pct(len(covered), len(mine)),
                sum(1 for c in mine if not c.dematerialized),
                sum(1 for c in mine if c.dematerialized),
                distinct_higher,
            )
        )
    total_covered = sum(r.patterns for r in rows)
    total = sum(r.candidates for r in rows)
    rows.append(
        CoverageRow(
            "Total",
            total,
            total_covered,
            len(patterns),
            _pct(total_covered, total),
            sum(r.materialized for r in rows),
            sum(r.dematerialized for r in rows),
            len(higher),
        )
    )
    return rows


def _pct(part: int, whole: int) -> float:
    if whole == 0:
        return 0.0
    return round(100.0 * part / whole, 1)


def cross_set_reuse(patterns: Sequence[Pattern]) -> list[tuple[str, frozenset[str]]]:
    """Patterns whose support spans at least two ontology CQ sets."""
    rows = [
        (p.text, frozenset(p.ontologies))
        for p in patterns
        if len(p.ontologies) >= 2
    ]
    rows.sort(key=lambda r: (-len(r[1]), r[0]))
    return rows


def avg_cqs_per_pattern(
    candidates: Sequence[CandidateRecord],
    patterns: Sequence[Pattern],
    ontology_order: Optional[Sequence[str]] = None,
) -> list[tuple[str, float]]:
    """CQs covered per distinct pattern, by ontology (0 when no patterns)."""
    ontologies = list(ontology_order) if ontology_order else sorted(
        {c.ontology for c in candidates}
    )
    home = {c.cq_id: c.ontology for c in candidates}
    out = []
    for onto in ontologies:
        covered = {cq for p in patterns for cq in p.support if home.get(cq) == onto}
        distinct = sum(1 for p in patterns if onto in p.ontologies)
        out.append((onto, round(len(covered) / distinct, 2) if distinct else 0.0))
    return out


# ---------------------------------------------------------------------------
# Ren-style CQ feature classification (surface heuristics)

_BINARY_INITIAL = {"is", "are", "does", "do", "can", "did", "has", "have", "will"}
_SELECT_INITIAL = {"which", "what", "who", "where", "when"}
_SUPERLATIVE_BLOCK = {
    "interest", "test", "rest", "best", "forest", "request", "west",
    "harvest", "guest", "latest",
}
_NUMBER_WORDS = {"two", "three", "four", "five", "six", "seven", "eight",
                 "nine", "ten"}


def classify_cq(text: str, chunks=None) -> CqFeatures:
    """Question type, polarity, modifier and domain-independent elements.

    Works on either raw CQ text or pattern-level text (where numbers appear
    as the NUM token), so ``chunks`` are accepted but not needed by the
    surface rules.  These are heuristics; borderline wording can diverge
    from a human judgment and reports should be read accordingly.
    """
    del chunks
    if not text.strip():
        raise ValueError("empty CQ text")
    tokens = [t.strip("?.,!\"").lower() for t in text.split()]
    tokens = [t for t in tokens if t]
    lower = " ".join(tokens)
    first = tokens[0]

    if first in _BINARY_INITIAL:
        qtype = "Binary"
    elif lower.startswith("how many") or lower.startswith("how much"):
        qtype = "Count"
    else:
        qtype = "Selection"

    if "or not" in lower:
        polarity = "Both"
    elif "never" in tokens or "not" in tokens:
        polarity = "Negative"
    else:
        polarity = "Positive"

    modifier = "None"
    has_num = any(
        t == "num" or t.isdigit() or t in _NUMBER_WORDS for t in tokens
    )
    superlative = "best" in tokens or any(
        t.endswith("est") and len(t) > 4 and t not in _SUPERLATIVE_BLOCK
        for t in tokens
    )
    if has_num or "exactly" in tokens:
        modifier = "Numeric"
    elif superlative:
        modifier = "Superlative"
    elif "better" in tokens or "worse" in tokens \
            or re.search(r"\bmore\b.*\bthan\b", lower):
        modifier = "Comparative"
    elif re.search(r"\bdifferences?\s+between\b", lower):
        modifier = "Difference"
    elif lower.startswith("to what extent"):
        modifier = "Extent"

    dinde: set[str] = set()
    if first == "when" or lower.startswith("at what point") \
            or lower.startswith("how long"):
        dinde.add("Time")
    if first == "where" or lower.startswith("in which"):
        dinde.add("Location")
    if first == "who":
        dinde.add("Person")
    if lower.startswith("how long") or "period" in tokens:
        dinde.add("Period")
    if re.match(r"how (do|can) i\b", lower):
        dinde.add("Procedure")
    return CqFeatures(qtype, polarity, modifier, frozenset(dinde))
