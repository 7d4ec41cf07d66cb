"""Summary report over label and metrics artifacts.

Reproduces the aggregate arithmetic of the study the pipeline models:
share of mutants that mimic, share of vulnerabilities mimicked, share
of mutants failing at least one test, a per-project breakdown, and the
Ochiai score distribution. Rendered as Markdown with a JSON twin
carrying the same numbers.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .semantics import MIMICKING, LabelRecord

HISTOGRAM_BUCKETS = ("0", "(0,0.25)", "[0.25,0.5)", "[0.5,0.75)", "[0.75,1)", "1")


def aggregate_pct(part: int, whole: int) -> str:
    """One-decimal percentage used for corpus-level shares, e.g. '3.9%'."""
    if whole == 0:
        return "0%"
    return f"{100.0 * part / whole:.1f}%"


def project_pct(part: int, whole: int) -> str:
    """Two-decimal percentage with trailing zeros trimmed, e.g. '2.13%', '0%'."""
    if whole == 0:
        return "0%"
    return f"{round(100.0 * part / whole, 2):g}%"


def ochiai_bucket(score: float) -> str:
    if score == 0.0:
        return "0"
    if score == 1.0:
        return "1"
    if score < 0.25:
        return "(0,0.25)"
    if score < 0.5:
        return "[0.25,0.5)"
    if score < 0.75:
        return "[0.5,0.75)"
    return "[0.75,1)"


@dataclass(frozen=True)
class ProjectRow:
    project: str
    mutants: int
    mimicking: int
    pct: str


@dataclass(frozen=True)
class ReportDoc:
    aggregates: dict
    projects: tuple[ProjectRow, ...]
    histogram: dict[str, int]
    classifier: dict | None

    def to_json(self) -> dict:
        return {
            "aggregates": dict(self.aggregates),
            "projects": [
                {
                    "project": r.project,
                    "mutants": r.mutants,
                    "mimicking": r.mimicking,
                    "pct": r.pct,
                }
                for r in self.projects
            ],
            "histogram": dict(self.histogram),
            "classifier": self.classifier,
        }


def build_report(
    labels: Sequence[LabelRecord], classifier_metrics: Mapping | None = None
) -> ReportDoc:
    n_mutants = len(labels)
    n_mimicking = sum(1 for r in labels if r.label == MIMICKING)
    n_killed = sum(1 for r in labels if r.ochiai > 0.0)

    projects = sorted({r.project for r in labels})
    mimicked = {r.project for r in labels if r.label == MIMICKING}
    killed_projects = {r.project for r in labels if r.ochiai > 0.0}

    rows = []
    for project in projects:
        total = sum(1 for r in labels if r.project == project)
        mim = sum(1 for r in labels if r.project == project and r.label == MIMICKING)
        rows.append(
            ProjectRow(project=project, mutants=total, mimicking=mim, pct=project_pct(mim, total))
        )

    histogram = {b: 0 for b in HISTOGRAM_BUCKETS}
    for r in labels:
        histogram[ochiai_bucket(r.ochiai)] += 1

    aggregates = {
        "mutants": n_mutants,
        "mimicking": n_mimicking,
        "mimicking_pct": aggregate_pct(n_mimicking, n_mutants),
        "vulnerabilities": len(projects),
        "vulnerabilities_mimicked": len(mimicked),
        "vulnerabilities_mimicked_pct": aggregate_pct(len(mimicked), len(projects)),
        "killing": n_killed,
        "killing_pct": aggregate_pct(n_killed, n_mutants),
        "vulnerabilities_killed": len(killed_projects),
        "vulnerabilities_killed_pct": aggregate_pct(len(killed_projects), len(projects)),
    }
    return ReportDoc(
        aggregates=aggregates,
        projects=tuple(rows),
        histogram=histogram,
        classifier=dict(classifier_metrics) if classifier_metrics is not None else None,
    )


def _classifier_section(metrics: Mapping) -> list[str]:
    lines = ["", "## Classifier", ""]
    pooled = metrics.get("pooled")
    if pooled:
        lines.append(
            f"Pooled: MCC {pooled['mcc']:.2f}, Precision {pooled['precision']:.2f},"
            f" Recall {pooled['recall']:.2f}"
        )
    averaged = metrics.get("averaged")
    if averaged:
        lines.append(
            f"Averaged over folds: MCC {averaged['mcc']:.2f},"
            f" Precision {averaged['precision']:.2f}, Recall {averaged['recall']:.2f}"
        )
    folds = metrics.get("folds")
    if folds:
        lines.extend(["", "| Fold | Groups | MCC | Precision | Recall |", "|---|---|---|---|---|"])
        for f in folds:
            rep = f["report"]
            lines.append(
                f"| {f['fold_index']} | {len(f['test_groups'])} | {rep['mcc']:.2f}"
                f" | {rep['precision']:.2f} | {rep['recall']:.2f} |"
            )
    return lines


def render_markdown(doc: ReportDoc) -> str:
    agg = doc.aggregates
    lines = [
        "# Vulnerability-Mimicking Mutant Report",
        "",
        "## Aggregates",
        "",
        f"- Mutants: {agg['mutants']}",
        f"- Mimicking mutants: {agg['mimicking']} ({agg['mimicking_pct']} of mutants)",
        f"- Vulnerabilities: {agg['vulnerabilities']}",
        f"- Vulnerabilities mimicked: {agg['vulnerabilities_mimicked']}"
        f" ({agg['vulnerabilities_mimicked_pct']})",
        f"- Mutants with ochiai > 0: {agg['killing']} ({agg['killing_pct']} of mutants)",
        f"- Vulnerabilities with ochiai > 0: {agg['vulnerabilities_killed']}"
        f" ({agg['vulnerabilities_killed_pct']})",
        "",
        "## Per-project breakdown",
        "",
        "| Project | Mutants | Mimicking | % |",
        "|---|---|---|---|",
    ]
    for row in doc.projects:
        lines.append(f"| {row.project} | {row.mutants} | {row.mimicking} | {row.pct} |")
    lines.extend(["", "## Ochiai score distribution", "", "| Bucket | Count |", "|---|---|"])
    for bucket in HISTOGRAM_BUCKETS:
        lines.append(f"| {bucket} | {doc.histogram[bucket]} |")
    if doc.classifier is not None:
        lines.extend(_classifier_section(doc.classifier))
    lines.append("")
    return "\n".join(lines)


def write_report(md_path, json_path, doc: ReportDoc) -> None:
    with open(md_path, "w", encoding="utf-8") as fh:
        fh.write(render_markdown(doc))
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(doc.to_json(), fh, sort_keys=True, indent=2)
        fh.write("\n")
