"""
attributist.synthetic
~~~~~~~~~~~~~~~~~~~~~
Seeded synthetic corpora with a known ground truth.

Every synthetic author draws words from the same small vocabulary, each with
its own Zipf-like weighting. Texts are lines of words sampled independently,
so two texts by one author differ only by sampling noise.

Two corpora are provided:

* `desk_corpus`: 4 authors, 3 training texts plus 1 held-out text each
* `near_duplicate_corpus`: a text, a variant sharing 60% of its lines and
  10 texts by other authors

Example::

    texts = desk_corpus(seed=7)
    corpus = to_corpus(texts)
    manifest_path = write_corpus(texts, "/tmp/desk")
"""

from __future__ import annotations

import logging
import string
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Optional, Union

import numpy as np

from attributist.corpus import (
    UNKNOWN_AUTHOR,
    Document,
    Manifest,
    ManifestEntry,
    write_manifest,
)

if TYPE_CHECKING:
    from collections.abc import Sequence

    from attributist.corpus import Corpus

logger = logging.getLogger(__name__)

DEFAULT_SEED = 1616
TOKENS_PER_TEXT = 3000
WORDS_PER_LINE = 8
ZIPF_EXPONENT = 0.8
SHARED_LINES = 0.6

# No word is shorter than 6 letters: a character 7-gram then spans at most
# two words, and a few thousand tokens cover nearly every n-gram an author uses.
VOCABULARY = (
    "aunque",
    "siempre",
    "nuestro",
    "señora",
    "cuando",
    "porque",
    "mientras",
    "entonces",
    "corazón",
    "hermosa",
    "caballero",
    "palabra",
    "esperanza",
    "fortuna",
    "ventura",
    "honrado",
)


@dataclass(frozen=True)
class SyntheticText:
    title: str
    author: str
    text: str
    held_out: bool = False

    @property
    def label(self) -> str:
        """The author as written in a manifest."""
        return UNKNOWN_AUTHOR if self.held_out else self.author


@dataclass(frozen=True)
class SyntheticAuthor:
    name: str
    # Word indexes from most to least frequent
    order: tuple[int, ...]
    exponent: float = ZIPF_EXPONENT

    @property
    def weights(self) -> np.ndarray:
        """Probability of every word of `VOCABULARY`."""
        zipf = 1.0 / np.arange(1, len(self.order) + 1) ** self.exponent
        weights = np.empty(len(self.order))
        weights[np.asarray(self.order)] = zipf
        return weights / weights.sum()

    @property
    def top_words(self) -> tuple[str, ...]:
        return tuple(VOCABULARY[i] for i in self.order)

    def lines(self, rng: np.random.Generator, tokens: int = TOKENS_PER_TEXT) -> list[str]:
        words = rng.choice(len(VOCABULARY), size=tokens, p=self.weights)
        return [
            " ".join(VOCABULARY[i] for i in words[start : start + WORDS_PER_LINE])
            for start in range(0, tokens, WORDS_PER_LINE)
        ]

    def write(self, rng: np.random.Generator, tokens: int = TOKENS_PER_TEXT) -> str:
        return join_lines(self.lines(rng, tokens))


def join_lines(lines: Sequence[str]) -> str:
    return "\n".join(lines) + "\n"


def rotated_authors(count: int, step: Optional[int] = None) -> list[SyntheticAuthor]:
    """
    Authors whose rankings are rotations of each other by `step` words, so
    no two of them share a most frequent word.
    """
    size = len(VOCABULARY)
    if not 1 <= count <= size:
        raise ValueError(f"between 1 and {size} authors, got {count}")
    step = step or size // count
    return [
        SyntheticAuthor(
            name=f"author_{string.ascii_lowercase[i]}",
            order=tuple((i * step + r) % size for r in range(size)),
        )
        for i in range(count)
    ]


def desk_corpus(
    seed: int = DEFAULT_SEED,
    authors: int = 4,
    training: int = 3,
    held_out: int = 1,
    tokens: int = TOKENS_PER_TEXT,
) -> list[SyntheticText]:
    """
    `training` labeled texts and `held_out` texts with author `unknown` per
    author, all of `tokens` words.
    """
    rng = np.random.default_rng(seed)
    texts = []
    for author in rotated_authors(authors):
        for number in range(1, training + 1):
            texts.append(
                SyntheticText(f"{author.name}_{number}", author.name, author.write(rng, tokens))
            )
        for number in range(1, held_out + 1):
            texts.append(
                SyntheticText(
                    f"{author.name}_heldout_{number}",
                    author.name,
                    author.write(rng, tokens),
                    held_out=True,
                )
            )
    logger.info("Generated desk corpus of %d texts (seed %d)", len(texts), seed)
    return texts


def near_duplicate_corpus(
    seed: int = DEFAULT_SEED,
    distractors: int = 10,
    shared: float = SHARED_LINES,
    tokens: int = TOKENS_PER_TEXT,
) -> list[SyntheticText]:
    """
    A `base` text, a `variant` keeping `shared` of its lines (the rest newly
    written by the same author) and `distractors` texts by as many other
    authors. The first two texts are the base and the variant.
    """
    if not 0 <= shared <= 1:
        raise ValueError(f"shared must be within [0, 1], got {shared}")
    rng = np.random.default_rng(seed)
    size = len(VOCABULARY)
    author = SyntheticAuthor("author_base", tuple(range(size)))

    base = author.lines(rng, tokens)
    kept = set(rng.choice(len(base), size=round(shared * len(base)), replace=False).tolist())
    fresh = author.lines(rng, tokens)
    variant = [line if i in kept else fresh[i] for i, line in enumerate(base)]

    texts = [
        SyntheticText("base", author.name, join_lines(base)),
        SyntheticText("variant", author.name, join_lines(variant)),
    ]
    for number in range(1, distractors + 1):
        other = SyntheticAuthor(
            f"author_{number}", tuple(int(i) for i in rng.permutation(size))
        )
        texts.append(SyntheticText(f"distractor_{number}", other.name, other.write(rng, tokens)))
    logger.info("Generated near-duplicate corpus of %d texts (seed %d)", len(texts), seed)
    return texts


def to_corpus(texts: Sequence[SyntheticText]) -> Corpus:
    return [Document.from_text(t.title, t.label, t.text, source="synthetic") for t in texts]


def write_corpus(
    texts: Sequence[SyntheticText],
    directory: Union[str, Path],
    manifest_name: str = "manifest.csv",
) -> Path:
    """
    Write every text to `directory/texts/<title>.txt` plus a manifest.

    :return The path of the manifest
    """
    directory = Path(directory)
    text_dir = directory / "texts"
    text_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for t in texts:
        text_path = text_dir / f"{t.title}.txt"
        text_path.write_text(t.text, encoding="utf-8")
        entries.append(ManifestEntry(path=text_path, title=t.title, author=t.label, source="synthetic"))

    manifest_path = directory / manifest_name
    write_manifest(Manifest(tuple(entries)), manifest_path)
    logger.info("Wrote %d texts and %s", len(entries), manifest_path)
    return manifest_path
