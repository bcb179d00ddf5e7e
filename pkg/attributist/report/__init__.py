"""
attributist.report
~~~~~~~~~~~~~~~~~~
Renders the results of a run as text, CSV and Graphviz DOT. The layouts are
Mako templates kept in `tmpl/`.

Examples
========

The dendrogram of a clustering run::

    matrix, tree = cluster(corpus, stats, variant="eder")
    dot = render_dot(tree)
    text = render_cluster_report(matrix, tree, config=[("delta", "eder")])

The per text reports of an attribution run, plus one CSV for all texts::

    report = attribute(corpus)
    for result in report.results:
        text = render_attribution_report(result, report.config)
    csv_text = render_attribution_csv(report)

All numbers are written with 4 decimals.
"""

from __future__ import annotations

import math
from os import path
from typing import TYPE_CHECKING, Optional

from mako.lookup import TemplateLookup

from attributist.clustering import format_length, render_ascii

if TYPE_CHECKING:
    from collections.abc import Sequence

    from attributist.attribution import AttributionReport, AttributionResult
    from attributist.clustering import ClusterTree, DistanceMatrix

_LOOKUP: Optional[TemplateLookup] = None


def render_dot(tree: ClusterTree) -> str:
    """Graphviz digraph of `tree`, edges labelled with branch lengths."""
    ids = {}
    leaves, internal, edges = [], [], []
    for number, (_, node) in enumerate(tree.root.walk()):
        node_id = f"n{number}"
        ids[id(node)] = node_id
        if node.is_leaf:
            leaves.append((node_id, _dot_quote(node.label or "")))
        else:
            internal.append((node_id, format_number(node.height)))
    for _, node in tree.root.walk():
        for child in node.children:
            edges.append(
                (ids[id(node)], ids[id(child)], format_length(node.height - child.height))
            )

    return (
        get_lookup()
        .get_template("dendrogram.dot.mako")
        .render(linkage=tree.linkage, leaves=leaves, internal=internal, edges=edges)
    )


def render_cluster_report(
    matrix: DistanceMatrix,
    tree: ClusterTree,
    config: Sequence[tuple[str, str]] = (),
) -> str:
    """
    Human readable summary of a clustering run.

    :param :matrix The pairwise distances
    :param :tree The dendrogram built from `matrix`
    :param :config Ordered `(key, value)` pairs written as the header
    """
    header = ["", *matrix.labels]
    rows = [
        [label, *(format_number(v) for v in row)]
        for label, row in zip(matrix.labels, matrix.values)
    ]
    siblings = [(a, b, format_number(h)) for a, b, h in tree.siblings()]
    return (
        get_lookup()
        .get_template("cluster_report.mako")
        .render(
            config=list(config),
            labels=matrix.labels,
            distance_lines=align([header, *rows]),
            siblings=siblings,
            dendrogram=render_ascii(tree).rstrip("\n"),
        )
    )


def render_attribution_report(
    result: AttributionResult, config: Sequence[tuple[str, str]] = ()
) -> str:
    """
    Human readable report of one unknown text: raw, normalized and mean
    scores, the ranking and the data-quality notes.
    """
    table = result.table
    measure_header = ["author", *(m.label for m in table.measures)]

    def score_lines(scores) -> list[str]:
        rows = [
            [author, *(format_number(scores[m][author]) for m in table.measures)]
            for author in table.authors
        ]
        return align([measure_header, *rows])

    mean_rows = [
        [str(r.rank), r.author, format_number(r.score)] for r in result.verdict.ranking
    ]
    verdict = result.verdict
    return (
        get_lookup()
        .get_template("attribution_report.mako")
        .render(
            title=table.unknown_title,
            config=list(config),
            raw_lines=score_lines(table.raw),
            normalized_lines=score_lines(table.normalized),
            mean_lines=align([["rank", "author", "mean"], *mean_rows]),
            best=verdict.best,
            margin="n/a" if verdict.margin is None else format_number(verdict.margin),
            tied=verdict.tied,
            notes=table.flags(),
        )
    )


def render_attribution_csv(report: AttributionReport) -> str:
    """
    One row per (unknown text, author), best author first, with the mean
    and the raw and normalized score of every measure.
    """
    measures = report.results[0].table.measures if report.results else ()
    rows = []
    for result in report.results:
        table = result.table
        for ranked in result.verdict.ranking:
            cells = [table.unknown_title, ranked.author, str(ranked.rank)]
            cells.append(format_number(ranked.score))
            for m in measures:
                cells.append(format_number(table.raw[m][ranked.author]))
                cells.append(format_number(table.normalized[m][ranked.author]))
            rows.append(cells)
    header = ["unknown", "author", "rank", "mean"]
    for m in measures:
        header += [f"{m}_raw", f"{m}_normalized"]
    return (
        get_lookup()
        .get_template("attribution.csv.mako")
        .render(header=header, rows=rows, q=_csv_quote)
    )


# --- Formatting


def format_number(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return f"{value:.4f}"


def align(rows: Sequence[Sequence[str]]) -> list[str]:
    """Left-align the first column and right-align the others."""
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return [
        "  ".join(
            cell.ljust(w) if i == 0 else cell.rjust(w)
            for i, (cell, w) in enumerate(zip(row, widths))
        ).rstrip()
        for row in rows
    ]


def _dot_quote(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _csv_quote(text: str) -> str:
    if any(c in text for c in ',"\n\r'):
        return '"{}"'.format(text.replace('"', '""'))
    return text


def get_lookup() -> TemplateLookup:
    global _LOOKUP

    if not _LOOKUP:
        file_path = path.dirname(path.abspath(__file__))
        _LOOKUP = TemplateLookup(
            directories=[path.join(file_path, "tmpl")],
            input_encoding="utf-8",
            encoding_errors="replace",
        )

    return _LOOKUP


__all__ = [
    "render_dot",
    "render_cluster_report",
    "render_attribution_report",
    "render_attribution_csv",
]
