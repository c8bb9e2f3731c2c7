"""Command-line front end: one subcommand per analysis, plus ``report``.

All data outputs are deterministic files under ``--out``; diagnostics go to
standard error.  Exit codes: 0 success, 1 validation/input error, 2
internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__, reference
from .corpus import Corpus, CorpusError, load_corpus, translatability_report
from .correspondence import BUILTIN_RULES, load_rules
from .patterns import (
    avg_cqs_per_pattern,
    classify_cq,
    coverage_stats,
    cross_set_reuse,
)
from .pipeline import AnalysisBundle, discovery_for, mapping_for, run_pipeline, signals_for
from .queryparse import keyword_report, serialize_query
from .reporting import Table, write_jsonl
from .signatures import DEFAULT_MAX_TRIPLES, coverage_table

SUBCOMMANDS = (
    "validate", "chunk", "patterns", "classify", "parse", "keywords",
    "signatures", "map", "signals", "report",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cqowl",
        description="Corpus analytics for competency questions and their "
                    "SPARQL-OWL translations.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage")
        p.add_argument("--corpus", required=True, help="corpus path")
        p.add_argument("--format", choices=("jsonl", "dataset_dir"),
                       default="jsonl", help="corpus format")
        p.add_argument("--tagger", choices=("builtin", "conllu"),
                       default="builtin", help="annotation source")
        p.add_argument("--conllu-dir", type=Path, default=None,
                       help="directory of <cq id>.conllu files")
        p.add_argument("--overrides", type=Path, default=None,
                       help="JSON file mapping cq id to corrected candidate")
        p.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory")
        p.add_argument("--emit", default="csv,md",
                       help="comma-separated report formats (csv, md)")
        p.add_argument("--max-triples", type=int, default=DEFAULT_MAX_TRIPLES,
                       help="canonicalization bound per BGP")
        p.add_argument("--stoplist", type=Path, default=None,
                       help="newline-separated stopword file for discovery")
        p.add_argument("--min-support", type=int, default=2,
                       help="minimum subgroup size for discovered signals")
        p.add_argument("--rules", type=Path, default=None,
                       help="JSON signal-rule file (default: built-in rules)")
        p.add_argument("--paper-calibration", action="store_true",
                       help="emit delta tables against the published "
                            "reference values")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except CorpusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    corpus = load_corpus(Path(args.corpus), format=args.format)
    formats = [f.strip() for f in args.emit.split(",") if f.strip()]
    out: Path = args.out

    if args.command == "validate":
        return _cmd_validate(corpus)

    overrides = None
    if args.overrides is not None:
        overrides = json.loads(args.overrides.read_text(encoding="utf-8"))
    bundle = run_pipeline(
        corpus, tagger=args.tagger, conllu_dir=args.conllu_dir,
        overrides=overrides, max_triples=args.max_triples,
    )

    started = time.time()
    steps = {
        "chunk": _cmd_chunk,
        "patterns": _cmd_patterns,
        "classify": _cmd_classify,
        "parse": _cmd_parse,
        "keywords": _cmd_keywords,
        "signatures": _cmd_signatures,
        "map": _cmd_map,
        "signals": _cmd_signals,
    }
    if args.command == "report":
        for step in steps.values():
            step(bundle, out, formats, args)
    else:
        steps[args.command](bundle, out, formats, args)
    _write_manifest(out, args, started)
    return 0


def _cmd_validate(corpus: Corpus) -> int:
    # corpus structural invariants were enforced during loading; report
    # remaining data-quality findings (unparseable queries) and summarize
    rows, errors = translatability_report(corpus)
    for cq_id, message in errors:
        print(f"warning: query of {cq_id} does not parse: {message}",
              file=sys.stderr)
    total = rows[-1]
    print(
        f"corpus OK: {total.cq_count} CQs across "
        f"{len(corpus.ontologies)} ontologies, "
        f"{total.translated_count} with parseable queries",
        file=sys.stderr,
    )
    return 0


def _cmd_chunk(bundle: AnalysisBundle, out, formats, args) -> None:
    table = Table("chunks", ["cq_id", "ontology", "chunks", "candidate"])
    candidate_text = {c.cq_id: c.text for c in bundle.candidates}
    for q in bundle.corpus.questions:
        sentence = bundle.sentences[q.id]
        chunk_desc = "; ".join(
            f"{c.label}={c.surface_text}" for c in sentence.chunks
        )
        table.add(q.id, q.ontology, chunk_desc, candidate_text[q.id])
    table.write(out, formats)


def _cmd_patterns(bundle: AnalysisBundle, out, formats, args) -> None:
    order = bundle.corpus.ontology_names()

    coverage = Table("pattern_coverage", [
        "ontology", "candidates", "patterns", "distinct_patterns",
        "coverage_pct", "materialized", "dematerialized", "distinct_higher",
    ])
    rows = coverage_stats(bundle.candidates, bundle.patterns, bundle.higher,
                          ontology_order=order)
    for r in rows:
        coverage.add(r.ontology, r.candidates, r.patterns,
                     r.distinct_patterns, r.coverage_pct, r.materialized,
                     r.dematerialized, r.distinct_higher)
    coverage.write(out, formats)

    for level, inventory in (("pattern", bundle.patterns),
                             ("higher", bundle.higher)):
        shared = Table(f"shared_{level}s", ["pattern", "ontologies"])
        for text, ontos in cross_set_reuse(inventory):
            shared.add(text, ontos)
        shared.write(out, formats)

        averages = Table(f"avg_cqs_per_{level}", ["ontology", "average"])
        for onto, avg in avg_cqs_per_pattern(bundle.candidates, inventory,
                                             ontology_order=order):
            averages.add(onto, avg)
        averages.write(out, formats)

    write_jsonl(out / "pattern_inventory.jsonl", (
        {"text": p.text, "level": p.level, "support": p.support,
         "ontologies": sorted(p.ontologies)}
        for p in list(bundle.patterns) + list(bundle.higher)
    ))

    rejects = Table("rejected_candidates", ["cq_id", "ontology", "candidate",
                                            "reason"])
    for r in bundle.rejected:
        rejects.add(r.cq_id, r.ontology, r.text, r.reason)
    rejects.write(out, formats)

    if args.paper_calibration:
        _calibrate_coverage(rows, out, formats)


def _cmd_classify(bundle: AnalysisBundle, out, formats, args) -> None:
    table = Table("cq_features", [
        "cq_id", "ontology", "question_type", "polarity", "modifier", "dinde",
    ])
    candidate_text = {c.cq_id: c.text for c in bundle.candidates}
    for q in bundle.corpus.questions:
        features = classify_cq(candidate_text[q.id],
                               bundle.sentences[q.id].chunks)
        table.add(q.id, q.ontology, features.question_type,
                  features.polarity, features.modifier, features.dinde)
    table.write(out, formats)


def _cmd_parse(bundle: AnalysisBundle, out, formats, args) -> None:
    table = Table("parse_report", ["cq_id", "ontology", "status", "detail"])
    errors = dict(bundle.parse_errors)
    for q in bundle.corpus.questions:
        if q.query_text is None:
            continue
        if q.id in bundle.asts:
            table.add(q.id, q.ontology, "ok", "")
        else:
            table.add(q.id, q.ontology, "error", errors[q.id])
    table.write(out, formats)
    write_jsonl(out / "parsed_queries.jsonl", (
        {"cq_id": qid, "canonical_text": serialize_query(ast)}
        for qid, ast in sorted(bundle.asts.items())
    ))
    _cmd_translatability(bundle, out, formats, args)


def _cmd_keywords(bundle: AnalysisBundle, out, formats, args) -> None:
    rows, errors = keyword_report(bundle.corpus)
    onto_names = bundle.corpus.ontology_names()
    table = Table("keywords", ["keyword", "total", *onto_names])
    for r in rows:
        table.add(r["keyword"], r["total"],
                  *[r["per_ontology"].get(o, 0) for o in onto_names])
    table.write(out, formats)
    if errors:
        excluded = Table("keywords_excluded", ["cq_id", "error"])
        for qid, message in errors:
            excluded.add(qid, message)
        excluded.write(out, formats)
    if args.paper_calibration:
        calib = Table("keywords_calibration",
                      ["keyword", "computed", "reference", "delta"])
        for r in rows:
            ref = reference.KEYWORD_USAGE.get(r["keyword"], (0, {}))[0]
            calib.add(r["keyword"], r["total"], ref, r["total"] - ref)
        calib.write(out, formats)


def _cmd_signatures(bundle: AnalysisBundle, out, formats, args) -> None:
    table = Table("signatures", [
        "rank", "verb", "distinct", "count", "cumulative_pct", "members",
        "skeleton",
    ])
    rows = coverage_table(bundle.signature_groups)
    for r in rows:
        table.add(r["rank"], r["verb"], r["distinct"], r["count"],
                  r["cumulative_pct"], r["members"],
                  r["skeleton"].replace("\n", " "))
    table.write(out, formats)
    write_jsonl(out / "signature_inventory.jsonl", (
        {"skeleton": g.signature.skeleton, "verb": g.signature.verb,
         "distinct": g.signature.distinct, "members": g.member_ids,
         "count": g.count}
        for g in bundle.signature_groups
    ))
    skipped = Table("signatures_skipped", ["cq_id", "reason"])
    for qid, reason in bundle.signature_skipped:
        skipped.add(qid, reason)
    skipped.write(out, formats)
    if args.paper_calibration:
        computed = len(bundle.signature_groups)
        top9 = rows[8]["cumulative_pct"] if len(rows) >= 9 else (
            rows[-1]["cumulative_pct"] if rows else 0.0
        )
        calib = Table("signatures_calibration",
                      ["metric", "computed", "reference", "delta"])
        calib.add("distinct signatures", computed, reference.SIGNATURE_COUNT,
                  computed - reference.SIGNATURE_COUNT)
        calib.add("top-9 coverage pct", top9,
                  reference.TOP9_SIGNATURE_COVERAGE_PCT,
                  round(top9 - reference.TOP9_SIGNATURE_COVERAGE_PCT, 1))
        calib.write(out, formats)


def _cmd_map(bundle: AnalysisBundle, out, formats, args) -> None:
    for level in ("pattern", "higher"):
        edges, summary = mapping_for(bundle, level=level)
        table = Table(f"mapping_{level}", [
            "pattern", "signature", "witnesses",
        ])
        for e in edges:
            table.add(e.pattern_text, e.signature_skeleton.replace("\n", " "),
                      e.witness_cq_ids)
        table.write(out, formats)
        stats = Table(f"mapping_{level}_summary", ["metric", "value"])
        stats.add("edges", summary.edges)
        stats.add("patterns with 2+ signatures",
                  summary.patterns_with_multiple_signatures)
        stats.add("signatures with 2+ patterns",
                  summary.signatures_with_multiple_patterns)
        stats.add("pattern degree histogram",
                  _fmt_hist(summary.pattern_degree_histogram))
        stats.add("signature degree histogram",
                  _fmt_hist(summary.signature_degree_histogram))
        stats.write(out, formats)


def _fmt_hist(hist) -> str:
    return "; ".join(f"degree {d}: {n}" for d, n in hist)


def _cmd_signals(bundle: AnalysisBundle, out, formats, args) -> None:
    rules = list(BUILTIN_RULES)
    if args.rules is not None:
        rules = load_rules(args.rules)
    rows = signals_for(bundle, rules)
    table = Table("signals", [
        "rule", "signal", "target", "support", "non_evidential",
    ])
    for r in rows:
        table.add(r.rule_id, r.signal, r.target.replace("\n", " "),
                  r.fraction, r.non_evidential)
    table.write(out, formats)

    stoplist = None
    if args.stoplist is not None:
        stoplist = frozenset(
            w.strip().lower()
            for w in args.stoplist.read_text(encoding="utf-8").splitlines()
            if w.strip()
        )
    discovered = discovery_for(bundle, min_support=args.min_support,
                               stoplist=stoplist)
    disc = Table("discovered_signals", [
        "ngram", "group_size", "subgroup_size", "ratio_pct", "skeleton",
    ])
    for d in discovered:
        disc.add(" ".join(d.ngram), d.group_size, d.subgroup_size,
                 round(100.0 * d.ratio, 1), d.skeleton.replace("\n", " "))
    disc.write(out, formats)

    if args.paper_calibration:
        calib = Table("signals_calibration", [
            "rule", "computed", "reference", "delta_numerator",
            "delta_denominator",
        ])
        for r in rows:
            ref = reference.SIGNAL_SUPPORT.get(r.rule_id)
            if ref is None:
                continue
            calib.add(r.rule_id, f"{r.numerator}/{r.denominator}",
                      f"{ref[0]}/{ref[1]}", r.numerator - ref[0],
                      r.denominator - ref[1])
        calib.write(out, formats)


def _cmd_translatability(bundle: AnalysisBundle, out, formats, args) -> None:
    rows, errors = translatability_report(bundle.corpus)
    table = Table("translatability", ["ontology", "cq_count", "translated"])
    for r in rows:
        table.add(r.ontology, r.cq_count, r.translated_count)
    table.write(out, formats)
    if errors:
        bad = Table("untranslatable_queries", ["cq_id", "error"])
        for qid, msg in errors:
            bad.add(qid, msg)
        bad.write(out, formats)
    if args.paper_calibration:
        calib = Table("translatability_calibration", [
            "ontology", "computed_cqs", "computed_translated",
            "reference_cqs", "reference_translated",
        ])
        for r in rows:
            ref = reference.TRANSLATABILITY.get(r.ontology, (0, 0))
            calib.add(r.ontology, r.cq_count, r.translated_count, *ref)
        calib.write(out, formats)


def _calibrate_coverage(rows, out, formats) -> None:
    calib = Table("pattern_coverage_calibration", [
        "ontology", "computed_distinct", "reference_distinct",
        "computed_higher", "reference_higher",
    ])
    for r in rows:
        ref = reference.PATTERN_COVERAGE.get(r.ontology)
        if ref is None:
            continue
        calib.add(r.ontology, r.distinct_patterns, ref[2],
                  r.distinct_higher, ref[6])
    calib.write(out, formats)


def _write_manifest(out: Path, args, started: float) -> None:
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool": "cqowl",
        "version": __version__,
        "command": args.command,
        "corpus": str(args.corpus),
        "format": args.format,
        "tagger": args.tagger,
        "max_triples": args.max_triples,
        "min_support": args.min_support,
        "elapsed_seconds": round(time.time() - started, 3),
    }
    (out / "run_manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )


if __name__ == "__main__":
    sys.exit(main())
