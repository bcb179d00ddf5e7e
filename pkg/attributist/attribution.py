"""
attributist.attribution
~~~~~~~~~~~~~~~~~~~~~~~
Profile based attribution: every unknown text is scored against the merged
profile of every candidate author, the scores of each measure are min-max
normalized across the authors and the normalized scores are averaged.
The author with the lowest mean is the most likely one.

Example::

    report = attribute(corpus, mfw_size=250, char_n=7)
    for result in report.results:
        print(result.unknown_title, result.verdict.best)

The fixtures shipped in `attributist/data` hold a published table of
normalized scores and the table of their means; `check_published_means`
recomputes the means from the former and compares them with the latter.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from os import path
from typing import TYPE_CHECKING, Optional, Union

from attributist.distances import (
    DEFAULT_SMOOTHING,
    PROFILE_MEASURES,
    MeasureContext,
    MeasureId,
    score,
)
from attributist.errors import AttributionError, MeasureError
from attributist.features import (
    DEFAULT_CHAR_N,
    DEFAULT_MFW_SIZE,
    WORD_UNIGRAM,
    build_profiles,
    compute_corpus_stats,
)
from attributist.parallel import parallel_map

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from attributist.corpus import Document
    from attributist.features import AuthorProfile

logger = logging.getLogger(__name__)

DATA_DIR = path.join(path.dirname(path.abspath(__file__)), "data")
NORMALIZED_SCORES = "normalized_scores.csv"
MEAN_SCORES = "mean_scores.csv"

# Absolute tolerance of the recomputed means against the published ones
MEAN_TOLERANCE = 0.0005

# Raw score standing in for a measure that cannot be computed for an author
MISSING_SCORE = math.inf


@dataclass(frozen=True)
class Normalization:
    values: tuple[float, ...]
    degenerate: bool = False
    # Positions whose raw score was the infinite sentinel
    missing: tuple[int, ...] = ()


@dataclass(frozen=True)
class ScoreTable:
    """Raw and normalized scores of one unknown text, per measure per author."""

    unknown_title: str
    authors: tuple[str, ...]
    measures: tuple[MeasureId, ...]
    raw: dict[MeasureId, dict[str, float]]
    normalized: dict[MeasureId, dict[str, float]] = field(default_factory=dict)
    # Measures whose raw scores were all equal
    degenerate: frozenset[MeasureId] = frozenset()
    # Authors a measure could not be computed for
    missing: dict[MeasureId, tuple[str, ...]] = field(default_factory=dict)

    @property
    def is_normalized(self) -> bool:
        return bool(self.normalized)

    def flags(self) -> list[str]:
        """Human readable data-quality notes."""
        notes = [f"{m}: all raw scores equal" for m in self.measures if m in self.degenerate]
        notes += [
            f"{m}: not computable for {', '.join(authors)}"
            for m, authors in self.missing.items()
            if authors
        ]
        return notes


@dataclass(frozen=True)
class RankedAuthor:
    author: str
    score: float
    rank: int


@dataclass(frozen=True)
class Verdict:
    ranking: tuple[RankedAuthor, ...]
    # Mean of the runner-up minus mean of the best author
    margin: Optional[float]
    tied: bool

    @property
    def best(self) -> tuple[str, ...]:
        return tuple(r.author for r in self.ranking if r.rank == 1)


@dataclass(frozen=True)
class AttributionResult:
    table: ScoreTable
    means: dict[str, float]
    verdict: Verdict

    @property
    def unknown_title(self) -> str:
        return self.table.unknown_title


@dataclass(frozen=True)
class AttributionReport:
    results: tuple[AttributionResult, ...]
    # Ordered (key, value) pairs describing the run
    config: tuple[tuple[str, str], ...] = ()

    def __len__(self) -> int:
        return len(self.results)


# --- Scoring


def score_all(
    profiles: Sequence[AuthorProfile],
    unknown: Document,
    ctx: MeasureContext,
    measures: Sequence[MeasureId] = PROFILE_MEASURES,
    jobs: Optional[int] = None,
) -> ScoreTable:
    """
    One raw score per (measure, author).

    A score that cannot be computed (no n-gram shared by the profile and the
    text, a projection onto the MFW that is all zero, an infinite divergence
    without smoothing) is recorded as `MISSING_SCORE`, logged and flagged.
    The other cells and the other unknown texts are still scored.

    :param :profiles The candidate authors, at least 2
    :param :unknown The text to attribute
    :param :ctx Corpus statistics and measure parameters
    :param :jobs Worker threads for the (measure, author) pairs
    """
    if len(profiles) < 2:
        raise AttributionError(
            f"{unknown.title}: at least 2 candidate authors are needed, got {len(profiles)}"
        )
    if not unknown.text.strip():
        raise AttributionError(f"{unknown.title}: the text is empty")
    measures = tuple(MeasureId(m) for m in measures)
    pairs = [(m, p) for m in measures for p in profiles]

    def one(pair) -> float:
        measure, profile = pair
        try:
            return score(measure, profile, unknown, ctx).value
        except MeasureError as err:
            logger.warning("%s vs %s: %s: %s", unknown.title, profile.author, measure, err)
            return MISSING_SCORE

    values = parallel_map(one, pairs, jobs)
    raw: dict[MeasureId, dict[str, float]] = {m: {} for m in measures}
    for (measure, profile), value in zip(pairs, values):
        raw[measure][profile.author] = value

    authors = tuple(p.author for p in profiles)
    missing = {
        m: tuple(a for a in authors if math.isinf(raw[m][a]))
        for m in measures
        if any(math.isinf(v) for v in raw[m].values())
    }
    return ScoreTable(
        unknown_title=unknown.title,
        authors=authors,
        measures=measures,
        raw=raw,
        missing=missing,
    )


# --- Normalization and combination


def minmax_normalize(scores: Sequence[float]) -> Normalization:
    """
    `(x - min) / (max - min)` over the finite scores.

    Infinite scores become 1. If every score is equal the result is all 0 and
    flagged as degenerate.
    """
    if len(scores) < 2:
        raise AttributionError(f"at least 2 scores are needed, got {len(scores)}")
    if any(math.isnan(x) or x < 0 for x in scores):
        raise AttributionError(f"scores must be non-negative numbers: {list(scores)}")

    missing = tuple(i for i, x in enumerate(scores) if math.isinf(x))
    finite = [x for x in scores if math.isfinite(x)]
    if not finite:
        return Normalization((0.0,) * len(scores), degenerate=True, missing=missing)

    lo, hi = min(finite), max(finite)
    if lo == hi:
        values = tuple(1.0 if math.isinf(x) else 0.0 for x in scores)
        return Normalization(values, degenerate=not missing, missing=missing)

    span = hi - lo
    values = tuple(1.0 if math.isinf(x) else (x - lo) / span for x in scores)
    return Normalization(values, missing=missing)


def normalize_table(table: ScoreTable) -> ScoreTable:
    """The same table with the normalized scores and flags filled in."""
    normalized: dict[MeasureId, dict[str, float]] = {}
    degenerate = set()
    for measure in table.measures:
        column = table.raw[measure]
        result = minmax_normalize([column[a] for a in table.authors])
        normalized[measure] = dict(zip(table.authors, result.values))
        if result.degenerate:
            degenerate.add(measure)
            logger.warning(
                "%s: every author has the same %s score", table.unknown_title, measure
            )
    return replace(table, normalized=normalized, degenerate=frozenset(degenerate))


def mean_combine(
    normalized: Mapping[Union[MeasureId, str], Mapping[str, float]],
) -> dict[str, float]:
    """
    Per author, the plain mean of its normalized scores over all measures.

    :raises AttributionError: when a measure has no score for some author
    """
    if not normalized:
        raise AttributionError("no measure to combine")
    authors = list(
        dict.fromkeys(a for column in normalized.values() for a in column)
    )
    means = {}
    for author in authors:
        lacking = [str(m) for m, column in normalized.items() if author not in column]
        if lacking:
            raise AttributionError(f"{author}: missing score for {', '.join(lacking)}")
        values = [normalized[m][author] for m in normalized]
        means[author] = math.fsum(values) / len(values)
    return means


def rank_authors(means: Mapping[str, float]) -> Verdict:
    """
    Authors sorted by ascending mean; equal means share a rank.

    The margin is the gap between the first two positions, `None` with a
    single author.
    """
    if not means:
        raise AttributionError("no author to rank")
    ordered = sorted(means.items(), key=lambda item: (item[1], item[0]))
    ranking = tuple(
        RankedAuthor(author, value, 1 + sum(1 for v in means.values() if v < value))
        for author, value in ordered
    )
    if len(ranking) < 2:
        return Verdict(ranking, margin=None, tied=False)
    margin = ranking[1].score - ranking[0].score
    return Verdict(ranking, margin=margin, tied=ranking[1].rank == 1)


# --- Pipeline


def attribution_config(
    mfw_size: int = DEFAULT_MFW_SIZE,
    char_n: int = DEFAULT_CHAR_N,
    smoothing: float = DEFAULT_SMOOTHING,
    measures: Sequence[MeasureId] = PROFILE_MEASURES,
) -> tuple[tuple[str, str], ...]:
    return (
        ("mfw_size", str(mfw_size)),
        ("char_n", str(char_n)),
        ("smoothing", f"{smoothing:g}"),
        ("measures", ",".join(str(m) for m in measures)),
        ("perplexity", "shared n-grams, not renormalized"),
        ("stats scope", "all documents in run"),
    )


def attribute(
    corpus: Sequence[Document],
    mfw_size: int = DEFAULT_MFW_SIZE,
    char_n: int = DEFAULT_CHAR_N,
    smoothing: float = DEFAULT_SMOOTHING,
    measures: Sequence[MeasureId] = PROFILE_MEASURES,
    jobs: Optional[int] = None,
    config: Optional[Sequence[tuple[str, str]]] = None,
) -> AttributionReport:
    """
    Attribute every `unknown` text of `corpus` to one of its labeled authors.

    The MFW statistics are computed over all the documents of the run, the
    unknown ones included.

    :param :config Run description echoed in the report; built from the
        other arguments when left out
    """
    profiles = build_profiles(corpus)
    unknowns = [doc for doc in corpus if doc.is_unknown]
    if len(profiles) < 2:
        raise AttributionError(
            f"at least 2 labeled authors are needed, the corpus has {len(profiles)}"
        )
    if not unknowns:
        raise AttributionError("the corpus has no text with author 'unknown'")

    measures = tuple(MeasureId(m) for m in measures)
    stats = compute_corpus_stats(corpus, WORD_UNIGRAM, mfw_size, jobs=jobs)
    ctx = MeasureContext(word_stats=stats, char_n=char_n, smoothing=smoothing)

    results = []
    for unknown in unknowns:
        table = normalize_table(score_all(profiles, unknown, ctx, measures, jobs))
        means = mean_combine(table.normalized)
        verdict = rank_authors(means)
        logger.info(
            "%s: %s (margin %s)",
            unknown.title,
            ", ".join(verdict.best),
            "n/a" if verdict.margin is None else f"{verdict.margin:.4f}",
        )
        results.append(AttributionResult(table, means, verdict))

    if config is None:
        config = attribution_config(mfw_size, char_n, smoothing, measures)
    return AttributionReport(tuple(results), tuple(config))


# --- Fixtures


def _read_fixture(filename: str, fixtures_dir: Optional[str]) -> list[dict[str, str]]:
    fixture_path = path.join(fixtures_dir or DATA_DIR, filename)
    try:
        with open(fixture_path, encoding="utf-8", newline="") as f:
            lines = [line for line in f if line.strip() and not line.startswith("#")]
    except OSError as err:
        raise AttributionError(f"cannot read fixture {fixture_path}: {err}") from err
    return list(csv.DictReader(lines))


def _value(row: dict[str, str], filename: str) -> float:
    try:
        return float(row["value"])
    except (KeyError, TypeError, ValueError) as err:
        raise AttributionError(f"{filename}: bad value in row {row}") from err


def load_normalized_scores(
    fixtures_dir: Optional[str] = None,
) -> dict[str, dict[MeasureId, dict[str, float]]]:
    """Normalized scores: `{unknown: {measure: {author: value}}}`."""
    table: dict[str, dict[MeasureId, dict[str, float]]] = {}
    for row in _read_fixture(NORMALIZED_SCORES, fixtures_dir):
        try:
            measure = MeasureId(row["measure"])
        except (KeyError, ValueError) as err:
            raise AttributionError(f"{NORMALIZED_SCORES}: bad measure in row {row}") from err
        by_measure = table.setdefault(row["unknown"], {})
        by_measure.setdefault(measure, {})[row["author"]] = _value(row, NORMALIZED_SCORES)
    return table


def load_mean_scores(fixtures_dir: Optional[str] = None) -> dict[str, dict[str, float]]:
    """Mean scores: `{unknown: {author: value}}`."""
    table: dict[str, dict[str, float]] = {}
    for row in _read_fixture(MEAN_SCORES, fixtures_dir):
        table.setdefault(row["unknown"], {})[row["author"]] = _value(row, MEAN_SCORES)
    return table


@dataclass(frozen=True)
class MeanCheck:
    unknown: str
    author: str
    expected: float
    actual: Optional[float]

    @property
    def ok(self) -> bool:
        return (
            self.actual is not None
            and abs(self.actual - self.expected) <= MEAN_TOLERANCE
        )


def check_published_means(fixtures_dir: Optional[str] = None) -> list[MeanCheck]:
    """Recompute every published mean from the normalized scores."""
    normalized = load_normalized_scores(fixtures_dir)
    checks = []
    for unknown, expected in load_mean_scores(fixtures_dir).items():
        means = mean_combine(normalized[unknown]) if unknown in normalized else {}
        checks.extend(
            MeanCheck(unknown, author, value, means.get(author))
            for author, value in expected.items()
        )
    return checks
