"""Report rendering: CSV, JSON payloads, and aligned text tables."""

from __future__ import annotations

import csv
import io
import os
from pathlib import Path
from typing import Mapping, Sequence

from .scoring import Evidence
from .simulate import SUMMARY_METRICS, SUMMARY_STATS, SimulationReport
from .spectral import SelectionResult

SELECTION_COLUMNS = (
    "rank",
    "item_id",
    "relevance",
    "weight",
    "utility",
    "leverage",
    "selected",
    "related_terms",
)


def format_count(weight: float) -> str:
    """Render an incidence count, dropping a trailing .0 for whole numbers."""
    if float(weight).is_integer():
        return str(int(weight))
    return repr(float(weight))


def related_terms_field(evidence: Sequence[Evidence]) -> str:
    """``term [count]`` entries joined by ``;``."""
    return ";".join(f"{e.term} [{format_count(e.weight)}]" for e in evidence)


def selection_to_csv(result: SelectionResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SELECTION_COLUMNS)
    for rank, cand in enumerate(result.ranked, start=1):
        writer.writerow(
            [
                rank,
                cand.item_id,
                repr(cand.relevance),
                repr(cand.weight_normalized),
                repr(cand.utility),
                repr(cand.leverage),
                "true" if cand.selected else "false",
                related_terms_field(cand.evidence),
            ]
        )
    return buf.getvalue()


def selection_to_payload(result: SelectionResult) -> dict:
    """JSON-ready selection report; the HTTP service returns this verbatim."""
    return {
        "k_optimal": result.k_optimal,
        "info": result.info_threshold,
        "explained_curve": [float(x) for x in result.explained_curve],
        "items": [
            {
                "rank": rank,
                "item_id": cand.item_id,
                "relevance": cand.relevance,
                "weight": cand.weight_normalized,
                "utility": cand.utility,
                "leverage": cand.leverage,
                "selected": cand.selected,
                "related_terms": [
                    {"term": e.term, "similarity": e.similarity, "count": e.weight}
                    for e in cand.evidence
                ],
            }
            for rank, cand in enumerate(result.ranked, start=1)
        ],
    }


def selection_to_table(result: SelectionResult) -> str:
    """Human-readable ranking with 3-decimal scores."""
    header = ("Rank", "Item", "Relevance", "Weight", "Utility", "Leverage", "Sel", "Related terms [count]")
    rows = [
        (
            str(rank),
            cand.item_id,
            f"{cand.relevance:.3f}",
            f"{cand.weight_normalized:.3f}",
            f"{cand.utility:.3f}",
            f"{cand.leverage:.3f}",
            "*" if cand.selected else "",
            related_terms_field(cand.evidence),
        )
        for rank, cand in enumerate(result.ranked, start=1)
    ]
    widths = [max(len(header[c]), *(len(r[c]) for r in rows)) if rows else len(header[c])
              for c in range(len(header))]
    lines = ["  ".join(h.ljust(widths[c]) for c, h in enumerate(header)).rstrip()]
    for row in rows:
        lines.append("  ".join(v.ljust(widths[c]) for c, v in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


_STAT_LABELS = {"mean": "Mean", "std": "Std", "min": "Min", "median": "Median", "max": "Max"}
_METRIC_LABELS = {
    "size_simulated": "SizeSimulated",
    "recall": "Recall",
    "precision": "Precision",
    "f1": "F1",
}


def simulation_table(summary: Mapping[str, Mapping[str, float]]) -> str:
    """Aggregate table: Mean/Std/Min/Median/Max rows, one column per metric."""
    col_width = 14
    header = "".ljust(8) + "".join(
        _METRIC_LABELS[m].rjust(col_width) for m in SUMMARY_METRICS
    )
    lines = [header.rstrip()]
    for stat in SUMMARY_STATS:
        cells = "".join(
            f"{summary[m][stat]:.2f}".rjust(col_width) for m in SUMMARY_METRICS
        )
        lines.append(_STAT_LABELS[stat].ljust(8) + cells)
    return "\n".join(lines) + "\n"


def simulation_report_table(report: SimulationReport) -> str:
    return simulation_table(report.summary)


def tpir_csv(rows: Sequence[tuple[str, float | None, float]]) -> str:
    """CSV of (item, max off-diagonal similarity, TPIR) for plotting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["item_id", "max_similarity", "tpir"])
    for item_id, max_sim, rate in rows:
        writer.writerow([item_id, "" if max_sim is None else repr(max_sim), repr(rate)])
    return buf.getvalue()


def write_text(path: str | os.PathLike, text: str) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    target = Path(path)
    tmp = target.with_name(target.name + f".tmp{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, target)
