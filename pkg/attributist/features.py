"""
attributist.features
~~~~~~~~~~~~~~~~~~~~
Tokenization, frequency profiles and corpus statistics.

Two kinds of features are supported: word unigrams (tokens) and character
n-grams. Every document becomes a `FeatureVector` of relative frequencies;
`compute_corpus_stats` ranks the most frequent features (MFW) over a corpus
and keeps their mean and standard deviation so documents can be turned into
z-scores::

    stats = compute_corpus_stats(corpus, WORD_UNIGRAM, mfw_size=250)
    z = zscore_vector(corpus[0], stats)

Author profiles merge all the texts of one author into a single document::

    profile = build_profile("Tirso", [doc1, doc2, doc3])
    profile.vector(char_ngram(7))
"""

from __future__ import annotations

import csv
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal, Optional, Protocol

import numpy as np
import regex

from attributist.errors import FeatureError, InvariantError
from attributist.parallel import parallel_map

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence
    from pathlib import Path

    from attributist.corpus import Document

logger = logging.getLogger(__name__)

# Most frequent words used for Delta and the word based measures
DEFAULT_MFW_SIZE = 250

# Width of the character n-grams of the perplexity model
DEFAULT_CHAR_N = 7

# Joins the texts of one author; a line break never forms part of a token
PROFILE_SEPARATOR = "\n"

# A token is a maximal run of letters, combining marks stay attached
_TOKEN_RE = regex.compile(r"\p{L}[\p{L}\p{M}]*")
_WHITESPACE_RE = regex.compile(r"\s+")


class TextSource(Protocol):
    """Anything that can be vectorized: documents and author profiles."""

    @property
    def name(self) -> str: ...

    @property
    def text(self) -> str: ...


# --- Feature kinds


@dataclass(frozen=True)
class FeatureKind:
    name: Literal["word_unigram", "char_ngram"]
    n: Optional[int] = None

    def __post_init__(self):
        if self.name == "word_unigram":
            if self.n is not None:
                raise FeatureError("word unigrams take no n")
        elif self.name == "char_ngram":
            if self.n is None or self.n < 1:
                raise FeatureError(f"character n-grams need n >= 1, got {self.n}")
        else:
            raise FeatureError(f"unknown feature kind {self.name!r}")

    def __str__(self) -> str:
        if self.name == "char_ngram":
            return f"char_ngram({self.n})"
        return self.name


WORD_UNIGRAM = FeatureKind("word_unigram")


def char_ngram(n: int) -> FeatureKind:
    return FeatureKind("char_ngram", n)


# --- Vectors


@dataclass(frozen=True)
class FeatureVector:
    """
    Relative frequencies of the features of one text.

    `counts` and `entries` are ordered most frequent first, ties broken
    lexicographically, so the key order is the feature ranking. Zero-count
    features are never stored.
    """

    kind: FeatureKind
    counts: Mapping[str, int]
    entries: Mapping[str, float]
    total_count: int

    @classmethod
    def from_counts(cls, kind: FeatureKind, counts: Mapping[str, int]):
        ordered = sorted(
            ((f, c) for f, c in counts.items() if c > 0), key=lambda fc: (-fc[1], fc[0])
        )
        total = sum(c for _, c in ordered)
        if total == 0:
            raise FeatureError(f"empty {kind} vector")
        return cls(
            kind=kind,
            counts=dict(ordered),
            entries={f: c / total for f, c in ordered},
            total_count=total,
        )

    def __len__(self) -> int:
        return len(self.counts)

    def __contains__(self, feature: str) -> bool:
        return feature in self.counts

    def ranked(self, k: Optional[int] = None) -> tuple[str, ...]:
        """Features most frequent first, optionally only the top `k`."""
        features = tuple(self.counts)
        return features if k is None else features[:k]

    def project(self, vocab: Sequence[str]) -> np.ndarray:
        """Relative frequencies over `vocab`, missing features are 0."""
        return np.array([self.entries.get(f, 0.0) for f in vocab], dtype=float)

    def project_counts(self, vocab: Sequence[str]) -> np.ndarray:
        return np.array([self.counts.get(f, 0) for f in vocab], dtype=float)

    def merge(self, other: FeatureVector) -> FeatureVector:
        """Vector of the two underlying texts counted together."""
        if other.kind != self.kind:
            raise FeatureError(f"cannot merge {self.kind} with {other.kind}")
        return FeatureVector.from_counts(
            self.kind, Counter(self.counts) + Counter(other.counts)
        )


def tokenize(text: str) -> list[str]:
    """
    Split preprocessed text into lowercased word tokens.

    Digits, punctuation and whitespace separate tokens and are dropped::

        tokenize("¿Tan largo me lo fiáis?")  # ['tan', 'largo', 'me', 'lo', 'fiáis']
    """
    return [token.lower() for token in _TOKEN_RE.findall(text)]


def collapse_whitespace(text: str) -> str:
    return _WHITESPACE_RE.sub(" ", text)


def word_vector(doc: TextSource) -> FeatureVector:
    tokens = tokenize(doc.text)
    if not tokens:
        raise FeatureError(f"{doc.name}: no tokens")
    return FeatureVector.from_counts(WORD_UNIGRAM, Counter(tokens))


def char_ngram_vector(doc: TextSource, n: int = DEFAULT_CHAR_N) -> FeatureVector:
    """
    Sliding window of width `n` over the text, whitespace runs collapsed to
    a single space (the space is part of the n-grams).
    """
    kind = char_ngram(n)
    text = collapse_whitespace(doc.text)
    if len(text) < n:
        raise FeatureError(f"{doc.name}: text shorter than {n} characters")
    grams = Counter(text[i : i + n] for i in range(len(text) - n + 1))
    return FeatureVector.from_counts(kind, grams)


def vectorize(doc: TextSource, kind: FeatureKind) -> FeatureVector:
    if kind.name == "char_ngram":
        return char_ngram_vector(doc, kind.n)  # type: ignore[arg-type]
    return word_vector(doc)


def vectorize_all(
    docs: Iterable[TextSource], kind: FeatureKind, jobs: Optional[int] = None
) -> list[FeatureVector]:
    """Vectors of `docs` in order, reusing the per-document cache when present."""

    def one(doc: TextSource) -> FeatureVector:
        cached = getattr(doc, "vector", None)
        return cached(kind) if cached is not None else vectorize(doc, kind)

    return parallel_map(one, docs, jobs)


# --- Corpus statistics


@dataclass(frozen=True, eq=False)
class CorpusStats:
    """
    MFW ranking plus mean and population standard deviation of the relative
    frequency of every MFW feature across the documents of a corpus.
    """

    feature_kind: FeatureKind
    mfw: tuple[str, ...]
    mean: np.ndarray
    stddev: np.ndarray
    mfw_size: int
    document_count: int

    @property
    def variable(self) -> np.ndarray:
        """Mask of the features that can be z-scored (σ > 0)."""
        return self.stddev > 0

    @property
    def zscore_features(self) -> tuple[str, ...]:
        return tuple(f for f, keep in zip(self.mfw, self.variable) if keep)

    @property
    def ranks(self) -> np.ndarray:
        """MFW rank (1 = most frequent) of every z-scored feature."""
        return np.arange(1, len(self.zscore_features) + 1, dtype=float)

    def standardize(self, frequencies: np.ndarray) -> np.ndarray:
        """z-scores of relative frequencies given in `mfw` order."""
        mask = self.variable
        return (frequencies[mask] - self.mean[mask]) / self.stddev[mask]


def compute_corpus_stats(
    corpus: Sequence[TextSource],
    kind: FeatureKind = WORD_UNIGRAM,
    mfw_size: int = DEFAULT_MFW_SIZE,
    vectors: Optional[Sequence[FeatureVector]] = None,
    jobs: Optional[int] = None,
) -> CorpusStats:
    """
    Rank features by summed raw counts across `corpus` and compute the
    per-feature mean and population standard deviation over the documents.

    :param :corpus The documents, at least one
    :param :kind Feature kind to count
    :param :mfw_size How many of the most frequent features to keep
    :param :vectors Already computed vectors of `corpus`, in the same order
    :param :jobs Worker threads used for vectorizing
    """
    if not corpus:
        raise FeatureError("cannot compute statistics over an empty corpus")
    if mfw_size < 1:
        raise FeatureError(f"mfw_size must be positive, got {mfw_size}")
    if vectors is None:
        vectors = vectorize_all(corpus, kind, jobs)
    if len(vectors) != len(corpus):
        raise InvariantError("one vector per document expected")

    totals: Counter[str] = Counter()
    for vector in vectors:
        if vector.kind != kind:
            raise FeatureError(f"expected {kind} vectors, got {vector.kind}")
        totals.update(vector.counts)
    ranking = sorted(totals.items(), key=lambda fc: (-fc[1], fc[0]))
    mfw = tuple(f for f, _ in ranking[:mfw_size])

    freqs = np.vstack([v.project(mfw) for v in vectors])
    n_docs = len(vectors)
    # fsum keeps the result independent of document order
    mean = np.array([math.fsum(column) / n_docs for column in freqs.T])
    stddev = np.array(
        [
            math.sqrt(math.fsum((x - mu) ** 2 for x in column) / n_docs)
            for column, mu in zip(freqs.T, mean)
        ]
    )

    stats = CorpusStats(
        feature_kind=kind,
        mfw=mfw,
        mean=mean,
        stddev=stddev,
        mfw_size=mfw_size,
        document_count=n_docs,
    )
    dropped = len(mfw) - len(stats.zscore_features)
    if dropped and n_docs > 1:
        logger.warning("%d of %d MFW features have zero variance", dropped, len(mfw))
    logger.info(
        "Computed %s statistics over %d documents (%d features)", kind, n_docs, len(mfw)
    )
    return stats


def zscore_vector(
    doc: TextSource, stats: CorpusStats, vector: Optional[FeatureVector] = None
) -> np.ndarray:
    """
    z-scores of `doc` over the MFW of `stats`, `(f_i - μ_i) / σ_i`.

    Features with σ_i = 0 are left out, so every vector built from the same
    stats has the same length and feature order.
    """
    if vector is None:
        (vector,) = vectorize_all([doc], stats.feature_kind)
    if vector.kind != stats.feature_kind:
        raise FeatureError(f"expected a {stats.feature_kind} vector, got {vector.kind}")
    return stats.standardize(vector.project(stats.mfw))


# --- Author profiles


@dataclass(frozen=True)
class AuthorProfile:
    """All the texts of one author merged into one document."""

    author: str
    merged_text: str
    titles: tuple[str, ...]
    _vectors: dict[FeatureKind, FeatureVector] = field(
        default_factory=dict, compare=False, repr=False
    )

    @property
    def name(self) -> str:
        return self.author

    @property
    def text(self) -> str:
        return self.merged_text

    def vector(self, kind: FeatureKind) -> FeatureVector:
        if kind not in self._vectors:
            self._vectors[kind] = vectorize(self, kind)
        return self._vectors[kind]


def build_profile(author: str, docs: Sequence[Document]) -> AuthorProfile:
    if not docs:
        raise FeatureError(f"{author}: no documents to build a profile from")
    strangers = [d.title for d in docs if d.author_label != author]
    if strangers:
        raise FeatureError(f"{author}: documents by other authors: {', '.join(strangers)}")
    return AuthorProfile(
        author=author,
        merged_text=PROFILE_SEPARATOR.join(d.text for d in docs),
        titles=tuple(d.title for d in docs),
    )


def build_profiles(corpus: Iterable[Document]) -> list[AuthorProfile]:
    """One profile per labeled author, in order of first appearance."""
    by_author: dict[str, list[Document]] = {}
    for doc in corpus:
        if not doc.is_unknown:
            by_author.setdefault(doc.author_label, []).append(doc)
    return [build_profile(author, docs) for author, docs in by_author.items()]


# --- Debugging dumps


def dump_vector(vector: FeatureVector, path: Path) -> None:
    """Write `feature<TAB>relative frequency`, most frequent first."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        writer.writerow(["feature", "value"])
        for feature, value in vector.entries.items():
            writer.writerow([feature, repr(value)])


def dump_stats(stats: CorpusStats, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        writer.writerow(["rank", "feature", "mean", "stddev"])
        for rank, (feature, mu, sigma) in enumerate(
            zip(stats.mfw, stats.mean, stats.stddev), start=1
        ):
            writer.writerow([rank, feature, repr(float(mu)), repr(float(sigma))])
