"""
attributist.distances
~~~~~~~~~~~~~~~~~~~~~
Distance measures between texts. Lower always means more similar.

Instance based (over z-scores of the most frequent words):

* Burrows Delta: Manhattan distance of two z-score vectors
* Eder Delta: the same, every feature weighted down by its MFW rank

Profile based (author profile against an unknown text):

* Kullback-Leibler: mean of both KL divergences of the MFW distributions
* Perplexity: of the test text's character n-grams under the author model
* Rank based: out-of-place distance of the two word rankings
* Cosine: one minus the cosine of the two MFW frequency vectors

Every measure is also reachable through `score`, which looks it up in
`MEASURES`::

    ctx = MeasureContext(word_stats=stats)
    score(MeasureId.COSINE, profile, unknown_doc, ctx).value
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np
from scipy.stats import entropy

from attributist.errors import InvariantError, MeasureError
from attributist.features import (
    DEFAULT_CHAR_N,
    WORD_UNIGRAM,
    char_ngram,
    zscore_vector,
)

if TYPE_CHECKING:
    from collections.abc import Sequence

    from attributist.features import CorpusStats, FeatureKind, FeatureVector

logger = logging.getLogger(__name__)

# Add-one (Laplace) smoothing of the raw counts before Kullback-Leibler
DEFAULT_SMOOTHING = 1.0


class MeasureId(str, Enum):
    BURROWS_DELTA = "burrows_delta"
    EDER_DELTA = "eder_delta"
    KULLBACK_LEIBLER = "kullback_leibler"
    PERPLEXITY = "perplexity"
    RANK_BASED = "rank_based"
    COSINE = "cosine"

    def __str__(self) -> str:
        return self.value

    @property
    def label(self) -> str:
        return MEASURE_LABELS[self]


MEASURE_LABELS = {
    MeasureId.BURROWS_DELTA: "Burrows Delta",
    MeasureId.EDER_DELTA: "Eder (Stylo-compatible)",
    MeasureId.KULLBACK_LEIBLER: "Kullback-Leibler",
    MeasureId.PERPLEXITY: "Perplexity",
    MeasureId.RANK_BASED: "Ranking",
    MeasureId.COSINE: "Cosine",
}

# The four measures combined by default in profile-based attribution
PROFILE_MEASURES = (
    MeasureId.PERPLEXITY,
    MeasureId.KULLBACK_LEIBLER,
    MeasureId.RANK_BASED,
    MeasureId.COSINE,
)


@dataclass(frozen=True)
class MeasureScore:
    measure: MeasureId
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 0:
            raise InvariantError(f"{self.measure}: invalid distance {self.value!r}")


def parse_measures(names: Sequence[str]) -> tuple[MeasureId, ...]:
    """Measure ids from user input like `["perplexity", "cosine"]`."""
    try:
        measures = tuple(dict.fromkeys(MeasureId(name.strip()) for name in names))
    except ValueError as err:
        valid = ", ".join(m.value for m in MeasureId)
        raise MeasureError(f"{err}; valid measures: {valid}") from err
    if not measures:
        raise MeasureError("no measure selected")
    return measures


# --- Delta


def _check_aligned(z1: np.ndarray, z2: np.ndarray, measure: MeasureId) -> None:
    if len(z1) != len(z2):
        raise MeasureError(
            f"z-score vectors differ in length ({len(z1)} != {len(z2)})", measure
        )


def burrows_delta(z1: Sequence[float], z2: Sequence[float]) -> MeasureScore:
    """Δ = Σ |z1_i - z2_i|"""
    z1, z2 = np.asarray(z1, dtype=float), np.asarray(z2, dtype=float)
    _check_aligned(z1, z2, MeasureId.BURROWS_DELTA)
    return MeasureScore(MeasureId.BURROWS_DELTA, math.fsum(np.abs(z1 - z2)))


def eder_delta(
    z1: Sequence[float], z2: Sequence[float], ranks: Optional[Sequence[float]] = None
) -> MeasureScore:
    """
    Δ_E = Σ |z1_i - z2_i| · (n - r_i + 1) / n

    :param :ranks MFW rank of every feature (1 = most frequent); defaults to
        the feature order itself
    """
    z1, z2 = np.asarray(z1, dtype=float), np.asarray(z2, dtype=float)
    _check_aligned(z1, z2, MeasureId.EDER_DELTA)
    n = len(z1)
    r = np.arange(1, n + 1, dtype=float) if ranks is None else np.asarray(ranks, dtype=float)
    _check_aligned(z1, r, MeasureId.EDER_DELTA)
    weights = (n - r + 1) / n
    return MeasureScore(MeasureId.EDER_DELTA, math.fsum(np.abs(z1 - z2) * weights))


# --- Profile measures


def _distribution(
    vector: FeatureVector, vocab: Sequence[str], smoothing: float
) -> np.ndarray:
    counts = vector.project_counts(vocab) + smoothing
    total = counts.sum()
    if total <= 0:
        raise MeasureError(
            "no vocabulary feature occurs in the text", MeasureId.KULLBACK_LEIBLER
        )
    return counts / total


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p, q) in bits; both are probability vectors over the same support."""
    if np.any((q == 0) & (p > 0)):
        raise MeasureError("divergence is infinite (q has zeros)", MeasureId.KULLBACK_LEIBLER)
    return float(entropy(p, q, base=2))


def kl_distance(
    a: FeatureVector,
    t: FeatureVector,
    vocab: Sequence[str],
    smoothing: float = DEFAULT_SMOOTHING,
) -> MeasureScore:
    """
    Symmetrized Kullback-Leibler divergence over `vocab`.

    Both count tables are restricted to `vocab`, smoothed by adding
    `smoothing` to every count and renormalized. `smoothing=0` uses the
    plain restricted frequencies.
    """
    if not vocab:
        raise MeasureError("empty vocabulary", MeasureId.KULLBACK_LEIBLER)
    if a.kind != t.kind:
        raise MeasureError(f"cannot compare {a.kind} with {t.kind}", MeasureId.KULLBACK_LEIBLER)
    p = _distribution(a, vocab, smoothing)
    q = _distribution(t, vocab, smoothing)
    value = (kl_divergence(p, q) + kl_divergence(q, p)) / 2
    return MeasureScore(MeasureId.KULLBACK_LEIBLER, max(value, 0.0))


def perplexity_distance(m: FeatureVector, t: FeatureVector) -> MeasureScore:
    """
    PP = 2^(-Σ T(g) · log2 M(g)) over the n-grams g found in both the test
    text T and the author model M.

    Frequencies are not renormalized over the shared n-grams, so PP can be
    below 1. Only the order of PP across authors is meaningful.
    """
    if m.kind != t.kind:
        raise MeasureError(f"cannot compare {m.kind} with {t.kind}", MeasureId.PERPLEXITY)
    shared = [g for g in t.entries if g in m.entries]
    if not shared:
        raise MeasureError("no shared n-grams", MeasureId.PERPLEXITY)
    cross_entropy = -math.fsum(t.entries[g] * math.log2(m.entries[g]) for g in shared)
    return MeasureScore(MeasureId.PERPLEXITY, 2.0**cross_entropy)


def rank_distance(
    rank_a: Sequence[str], rank_t: Sequence[str], k: int
) -> MeasureScore:
    """
    Out-of-place distance over the top `k` features of the test ranking.

    A feature missing from the author's top `k` counts as rank `k + 1`.
    """
    if k < 1:
        raise MeasureError(f"k must be positive, got {k}", MeasureId.RANK_BASED)
    author_ranks = {f: r for r, f in enumerate(rank_a[:k], start=1)}
    value = sum(
        abs(author_ranks.get(f, k + 1) - r) for r, f in enumerate(rank_t[:k], start=1)
    )
    return MeasureScore(MeasureId.RANK_BASED, float(value))


def cosine_distance(
    a: FeatureVector, t: FeatureVector, vocab: Sequence[str]
) -> MeasureScore:
    """1 - cos(A, T) with both vectors projected onto `vocab`."""
    if not vocab:
        raise MeasureError("empty vocabulary", MeasureId.COSINE)
    x, y = a.project(vocab), t.project(vocab)
    xx, yy = math.fsum(x * x), math.fsum(y * y)
    if xx == 0 or yy == 0:
        raise MeasureError("projected vector is all zero", MeasureId.COSINE)
    similarity = math.fsum(x * y) / math.sqrt(xx * yy)
    return MeasureScore(MeasureId.COSINE, min(max(1.0 - similarity, 0.0), 1.0))


# --- Dispatch


@dataclass(frozen=True)
class MeasureContext:
    """What the profile measures need besides the two texts."""

    word_stats: CorpusStats
    char_n: int = DEFAULT_CHAR_N
    smoothing: float = DEFAULT_SMOOTHING

    @property
    def vocab(self) -> tuple[str, ...]:
        return self.word_stats.mfw

    @property
    def k(self) -> int:
        return self.word_stats.mfw_size

    @property
    def char_kind(self) -> FeatureKind:
        return char_ngram(self.char_n)


def _burrows(ctx: MeasureContext, author, test) -> MeasureScore:
    return burrows_delta(
        zscore_vector(author, ctx.word_stats, author.vector(WORD_UNIGRAM)),
        zscore_vector(test, ctx.word_stats, test.vector(WORD_UNIGRAM)),
    )


def _eder(ctx: MeasureContext, author, test) -> MeasureScore:
    return eder_delta(
        zscore_vector(author, ctx.word_stats, author.vector(WORD_UNIGRAM)),
        zscore_vector(test, ctx.word_stats, test.vector(WORD_UNIGRAM)),
        ctx.word_stats.ranks,
    )


def _kullback_leibler(ctx: MeasureContext, author, test) -> MeasureScore:
    return kl_distance(
        author.vector(WORD_UNIGRAM), test.vector(WORD_UNIGRAM), ctx.vocab, ctx.smoothing
    )


def _perplexity(ctx: MeasureContext, author, test) -> MeasureScore:
    return perplexity_distance(author.vector(ctx.char_kind), test.vector(ctx.char_kind))


def _rank_based(ctx: MeasureContext, author, test) -> MeasureScore:
    return rank_distance(
        author.vector(WORD_UNIGRAM).ranked(ctx.k),
        test.vector(WORD_UNIGRAM).ranked(ctx.k),
        ctx.k,
    )


def _cosine(ctx: MeasureContext, author, test) -> MeasureScore:
    return cosine_distance(author.vector(WORD_UNIGRAM), test.vector(WORD_UNIGRAM), ctx.vocab)


MEASURES: dict[MeasureId, Callable[..., MeasureScore]] = {
    MeasureId.BURROWS_DELTA: _burrows,
    MeasureId.EDER_DELTA: _eder,
    MeasureId.KULLBACK_LEIBLER: _kullback_leibler,
    MeasureId.PERPLEXITY: _perplexity,
    MeasureId.RANK_BASED: _rank_based,
    MeasureId.COSINE: _cosine,
}


def score(measure: MeasureId, author, test, ctx: MeasureContext) -> MeasureScore:
    """
    Distance of `test` from `author` under `measure`.

    :param :author An author profile (or any source with a cached
        `vector(kind)`); always the model side of asymmetric measures
    :param :test The text being attributed
    """
    result = MEASURES[MeasureId(measure)](ctx, author, test)
    logger.debug("%s(%s, %s) = %r", measure, author.name, test.name, result.value)
    return result
