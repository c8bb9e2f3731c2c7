"""End-to-end analysis pipeline shared by the CLI subcommands."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .corpus import Corpus
from .correspondence import (
    BUILTIN_RULES,
    DiscoveredSignal,
    MappingEdge,
    MappingSummary,
    SignalRow,
    SignalRule,
    build_mapping,
    discover_signals,
    mine_signals,
)
from .linguistics import AnnotatedSentence, annotate_sentence, to_pattern_candidate
from .patterns import (
    CandidateRecord,
    Pattern,
    RejectedCandidate,
    filter_candidates,
    higher_level_inventory,
)
from .queryparse import QueryAst
from .signatures import DEFAULT_MAX_TRIPLES, SignatureGroup, group_by_signature


@dataclass
class AnalysisBundle:
    corpus: Corpus
    sentences: dict[str, AnnotatedSentence]
    candidates: list[CandidateRecord]
    patterns: list[Pattern]
    higher: list[Pattern]
    rejected: list[RejectedCandidate]
    asts: dict[str, QueryAst]
    parse_errors: list[tuple[str, str]]
    signature_groups: list[SignatureGroup]
    signature_skipped: list[tuple[str, str]]
    skeleton_by_cq: dict[str, str] = field(default_factory=dict)

    def translated_rows(self) -> list[tuple[str, str, str, QueryAst, Optional[str]]]:
        """(cq id, raw text, pattern-level text, ast, skeleton) per translated CQ."""
        candidate_text = {c.cq_id: c.text for c in self.candidates}
        rows = []
        for q in self.corpus.questions:
            ast = self.asts.get(q.id)
            if ast is None:
                continue
            rows.append(
                (q.id, q.text, candidate_text.get(q.id, ""), ast,
                 self.skeleton_by_cq.get(q.id))
            )
        return rows


def run_pipeline(
    corpus: Corpus,
    tagger: str = "builtin",
    conllu_dir: Optional[Path] = None,
    overrides: Optional[dict[str, str]] = None,
    max_triples: int = DEFAULT_MAX_TRIPLES,
) -> AnalysisBundle:
    sentences: dict[str, AnnotatedSentence] = {}
    candidates: list[CandidateRecord] = []
    for q in corpus.questions:
        if tagger == "conllu":
            path = Path(conllu_dir or ".") / f"{q.id}.conllu"
            sentence = annotate_sentence(q.id, q.text, source="conllu",
                                         conllu_path=path)
        else:
            sentence = annotate_sentence(q.id, q.text, source="builtin")
        sentences[q.id] = sentence
        candidates.append(
            CandidateRecord(
                q.id, q.ontology, q.dematerialized,
                to_pattern_candidate(sentence),
            )
        )

    patterns, rejected = filter_candidates(candidates, overrides=overrides)
    higher = higher_level_inventory(patterns)

    asts, parse_errors = corpus.parse_queries()
    groups, skipped = group_by_signature(sorted(asts.items()),
                                         max_triples=max_triples)
    skeleton_by_cq = {
        qid: g.signature.skeleton for g in groups for qid in g.member_ids
    }
    return AnalysisBundle(
        corpus, sentences, candidates, patterns, higher, rejected,
        asts, parse_errors, groups, skipped, skeleton_by_cq,
    )


def mapping_for(bundle: AnalysisBundle, level: str = "pattern") \
        -> tuple[list[MappingEdge], MappingSummary]:
    inventory = bundle.patterns if level == "pattern" else bundle.higher
    return build_mapping(inventory, bundle.skeleton_by_cq)


def signals_for(
    bundle: AnalysisBundle, rules: Optional[list[SignalRule]] = None
) -> list[SignalRow]:
    return mine_signals(rules or list(BUILTIN_RULES), bundle.translated_rows())


def discovery_for(
    bundle: AnalysisBundle, min_support: int = 2,
    stoplist: Optional[frozenset[str]] = None,
) -> list[DiscoveredSignal]:
    from .correspondence import DEFAULT_STOPLIST

    return discover_signals(
        bundle.translated_rows(), min_support=min_support,
        stoplist=stoplist if stoplist is not None else DEFAULT_STOPLIST,
    )
