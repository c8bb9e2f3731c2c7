"""CSV and Markdown table emission.

Every analysis emits plain files so results stay diffable; no timestamps
go into data files (run metadata lives in a separate manifest written by
the CLI).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(
                f"table {self.name}: expected {len(self.columns)} values, "
                f"got {len(values)}"
            )
        self.rows.append([_cell(v) for v in values])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)
        return buf.getvalue()

    def to_markdown(self) -> str:
        widths = [
            max(len(str(c)), *(len(str(r[i])) for r in self.rows)) if self.rows
            else len(str(c))
            for i, c in enumerate(self.columns)
        ]
        def line(cells):
            return "| " + " | ".join(
                str(c).ljust(w) for c, w in zip(cells, widths)
            ) + " |"
        out = [line(self.columns),
               "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
        out.extend(line(r) for r in self.rows)
        return "\n".join(out) + "\n"

    def write(self, out_dir: Path, formats: Sequence[str]) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for fmt in formats:
            if fmt == "csv":
                target = out_dir / f"{self.name}.csv"
                target.write_text(self.to_csv(), encoding="utf-8")
            elif fmt == "md":
                target = out_dir / f"{self.name}.md"
                target.write_text(self.to_markdown(), encoding="utf-8")
            else:
                raise ValueError(f"unknown report format {fmt!r}")
            written.append(target)
        return written


def _cell(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:g}"
    if isinstance(value, frozenset) or isinstance(value, set):
        return ", ".join(sorted(value))
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return str(value)


def write_jsonl(path: Path, records: Iterable[dict]) -> None:
    import json

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps(r, ensure_ascii=False, sort_keys=True) for r in records]
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
