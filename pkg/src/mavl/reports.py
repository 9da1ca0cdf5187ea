"""Rendering of evaluation results as CSV, JSON, and text tables.

Every function here is a pure mapping from already-computed results to text,
so identical inputs always produce byte-identical output.  Nothing in this
module looks at the clock, the environment, or dict iteration quirks: rows
are sorted explicitly and floats are formatted with fixed precision.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .dataset import StatsReport
from .languages import Language
from .metrics import CorpusReport, GroupStats, LineScore, ReferenceKind

__all__ = [
    "EvaluationRow",
    "rows_to_csv",
    "report_to_json",
    "render_report_table",
    "render_grid",
    "render_stats_table",
]

LANGUAGE_ORDER = [Language.EN, Language.ES, Language.FR, Language.KO, Language.JA]


@dataclass(frozen=True)
class EvaluationRow:
    """One dataset line in one language: either scored or skipped."""

    song_id: str
    language: Language
    section: int
    line: int
    hypothesis: str | None = None
    skip_reason: str | None = None
    original_reference: str | None = None
    dubbed_reference: str | None = None
    original_score: LineScore | None = None
    dubbed_score: LineScore | None = None
    notes: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "skipped" if self.skip_reason else "scored"

    def sort_key(self):
        return (self.song_id, self.language.value, self.section, self.line)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _score_cells(score: LineScore | None) -> list[str]:
    if score is None:
        return [""] * 7
    return [
        _fmt(score.c_ref),
        _fmt(score.c_pred),
        _fmt(score.se),
        _fmt(score.scd),
        _fmt(score.mismatch),
        _fmt(score.semantic),
        _fmt(score.phonetic),
    ]


_SCORE_FIELDS = ["c_ref", "c_pred", "se", "scd", "mismatch", "semantic", "phonetic"]

CSV_HEADER = (
    ["song_id", "language", "section", "line", "status", "skip_reason", "hypothesis"]
    + ["original_reference"]
    + [f"original_{name}" for name in _SCORE_FIELDS]
    + ["original_errors"]
    + ["dubbed_reference"]
    + [f"dubbed_{name}" for name in _SCORE_FIELDS]
    + ["dubbed_errors"]
)


def _errors_cell(score: LineScore | None) -> str:
    if score is None:
        return ""
    return "|".join(
        f"{name}: {msg}" for name, msg in sorted(score.component_errors.items())
    )


def rows_to_csv(rows: list[EvaluationRow]) -> str:
    """One CSV row per dataset line, both reference blocks side by side."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in sorted(rows, key=EvaluationRow.sort_key):
        writer.writerow(
            [
                row.song_id,
                row.language.value,
                row.section,
                row.line,
                row.status,
                row.skip_reason or "",
                row.hypothesis or "",
                row.original_reference or "",
            ]
            + _score_cells(row.original_score)
            + [_errors_cell(row.original_score)]
            + [row.dubbed_reference or ""]
            + _score_cells(row.dubbed_score)
            + [_errors_cell(row.dubbed_score)]
        )
    return buf.getvalue()


def report_to_json(report: CorpusReport) -> str:
    groups = {}
    for (lang, kind), stats in report.groups.items():
        groups[f"{lang.value}/{kind.value}"] = {
            "line_count": stats.line_count,
            "error_rate": stats.error_rate,
            "mean_se": stats.mean_se,
            "mean_scd": stats.mean_scd,
            "mean_semantic": stats.mean_semantic,
            "mean_phonetic": stats.mean_phonetic,
        }
    payload = {
        "provider": report.provider,
        "line_count": report.line_count,
        "error_rate": report.error_rate,
        "groups": groups,
    }
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


_METRIC_ROWS = [
    ("lines", "line_count", "d"),
    ("error rate", "error_rate", "f"),
    ("mean SE", "mean_se", "f"),
    ("mean SCD", "mean_scd", "f"),
    ("mean semantic", "mean_semantic", "f"),
    ("mean phonetic", "mean_phonetic", "f"),
]


def _stat_cell(stats: GroupStats | None, attr: str, kind: str) -> str:
    if stats is None:
        return "-"
    value = getattr(stats, attr)
    if value is None:
        return "-"
    if kind == "d":
        return str(value)
    return f"{value:.3f}"


def render_grid(title: str, col_labels: list[str], row_labels: list[str],
                cells: list[list[str]]) -> str:
    """Fixed-width text table; first column holds the row labels."""
    head = [title] + col_labels
    table = [head] + [[label] + row for label, row in zip(row_labels, cells)]
    widths = [max(len(row[i]) for row in table) for i in range(len(head))]
    lines = []
    for r, row in enumerate(table):
        rendered = "  ".join(
            cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
            for i, cell in enumerate(row)
        )
        lines.append(rendered.rstrip())
        if r == 0:
            lines.append("-" * len(rendered.rstrip()))
    return "\n".join(lines) + "\n"


def render_report_table(report: CorpusReport,
                        languages: list[Language] | None = None) -> str:
    """Metric-by-language grid, one block per reference kind.

    Languages with no scored lines show dashes so the layout is stable no
    matter which subset of the corpus was evaluated.
    """
    languages = languages or LANGUAGE_ORDER
    blocks = []
    for kind in (ReferenceKind.ORIGINAL_EN, ReferenceKind.DUBBED):
        cells = []
        for label, attr, fmt in _METRIC_ROWS:
            row = []
            for lang in languages:
                stats = report.groups.get((lang, kind))
                row.append(_stat_cell(stats, attr, fmt))
            cells.append(row)
        title = f"vs {kind.value}"
        blocks.append(
            render_grid(title, [lang.value for lang in languages],
                        [label for label, _, _ in _METRIC_ROWS], cells)
        )
    footer = ""
    if report.provider:
        footer = f"provider: {report.provider}\n"
    return "\n".join(blocks) + footer


def render_stats_table(stats: StatsReport,
                       languages: list[Language] | None = None) -> str:
    """Songs/sections/lines per language.

    A language absent from a non-empty corpus renders as dashes; a fully
    empty corpus renders zeros (nothing is "missing", there is just no data).
    """
    languages = languages or LANGUAGE_ORDER
    empty_corpus = not stats.per_language
    cells = []
    row_labels = ["songs", "sections", "lines"]
    for attr in row_labels:
        row = []
        for lang in languages:
            per = stats.per_language.get(lang)
            if per is None:
                row.append("0" if empty_corpus else "-")
            else:
                row.append(str(getattr(per, attr)))
        cells.append(row)
    return render_grid("", [lang.value for lang in languages], row_labels, cells)
