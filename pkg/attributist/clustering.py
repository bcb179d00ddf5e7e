"""
attributist.clustering
~~~~~~~~~~~~~~~~~~~~~~
Instance based attribution: every text is compared with every other one and
the texts are grouped by agglomerative clustering.

Example::

    stats = compute_corpus_stats(corpus, WORD_UNIGRAM, 250)
    matrix = delta_matrix(corpus, stats, variant="eder")
    tree = agglomerate(matrix, linkage="ward")
    print(serialize_tree(tree, "ascii"))

Trees are written as Newick (branch lengths are height differences), as a
Graphviz DOT dendrogram or as indented ASCII. `parse_newick` reads Newick
back.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Literal, Optional

import numpy as np
import regex

from attributist.distances import burrows_delta, eder_delta
from attributist.errors import ClusteringError, InvariantError, TreeParseError
from attributist.features import vectorize_all, zscore_vector
from attributist.parallel import parallel_map

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence

    from attributist.corpus import Document
    from attributist.features import CorpusStats

logger = logging.getLogger(__name__)

DELTA_VARIANTS = ("burrows", "eder")
DEFAULT_DELTA = "burrows"
DEFAULT_LINKAGE = "ward"

TreeFormat = Literal["newick", "dot", "ascii"]

_NEWICK_PLAIN_LABEL_RE = regex.compile(r"[^\s(),:;\[\]']+")
_NEWICK_LENGTH_RE = regex.compile(r"[-+0-9.eE]+")


# --- Distance matrix


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        n = len(self.labels)
        if self.values.shape != (n, n):
            raise InvariantError(f"{n} labels but a {self.values.shape} matrix")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise InvariantError("distances must be finite and non-negative")
        if not np.array_equal(self.values, self.values.T):
            raise InvariantError("distance matrix is not symmetric")
        if np.any(np.diag(self.values) != 0):
            raise InvariantError("distance matrix diagonal is not zero")

    def __len__(self) -> int:
        return len(self.labels)

    def distance(self, a: str, b: str) -> float:
        i, j = self.labels.index(a), self.labels.index(b)
        return float(self.values[i, j])

    def permuted(self, order: Sequence[int]) -> DistanceMatrix:
        """The same distances with the documents reordered."""
        idx = np.asarray(order)
        return DistanceMatrix(
            tuple(self.labels[i] for i in order), self.values[np.ix_(idx, idx)]
        )

    def to_csv(self) -> str:
        """CSV with a header row of labels; values with 4 decimals."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["", *self.labels])
        for label, row in zip(self.labels, self.values):
            writer.writerow([label, *(f"{v:.4f}" for v in row)])
        return buf.getvalue()


def delta_matrix(
    corpus: Sequence[Document],
    stats: CorpusStats,
    variant: str = DEFAULT_DELTA,
    jobs: Optional[int] = None,
) -> DistanceMatrix:
    """
    Pairwise Delta over the z-score vectors of the documents.

    :param :corpus Two documents or more
    :param :stats Corpus statistics the z-scores are computed against
    :param :variant `burrows` or `eder`
    :param :jobs Worker threads for filling the matrix
    """
    if len(corpus) < 2:
        raise ClusteringError("at least 2 documents are needed for a distance matrix")
    if variant not in DELTA_VARIANTS:
        raise ClusteringError(f"unknown Delta variant {variant!r}")

    vectors = vectorize_all(corpus, stats.feature_kind, jobs)
    z = [zscore_vector(doc, stats, v) for doc, v in zip(corpus, vectors)]
    ranks = stats.ranks

    def pair_distance(pair: tuple[int, int]) -> float:
        i, j = pair
        if variant == "eder":
            return eder_delta(z[i], z[j], ranks).value
        return burrows_delta(z[i], z[j]).value

    pairs = list(itertools.combinations(range(len(corpus)), 2))
    values = np.zeros((len(corpus), len(corpus)))
    for (i, j), d in zip(pairs, parallel_map(pair_distance, pairs, jobs)):
        values[i, j] = values[j, i] = d

    logger.info("Filled %s Delta matrix over %d documents", variant, len(corpus))
    return DistanceMatrix(tuple(doc.title for doc in corpus), values)


# --- Agglomeration


@dataclass(frozen=True)
class ClusterNode:
    height: float = 0.0
    label: Optional[str] = None
    children: tuple[ClusterNode, ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> tuple[str, ...]:
        if self.is_leaf:
            return (self.label,)  # type: ignore[return-value]
        return tuple(itertools.chain.from_iterable(c.leaves() for c in self.children))

    def walk(self, depth: int = 0) -> Iterator[tuple[int, ClusterNode]]:
        """Pre-order traversal yielding `(depth, node)`."""
        yield depth, self
        for child in self.children:
            yield from child.walk(depth + 1)

    def canonical(self, precision: int = 6):
        """Order-free form of the subtree, equal for isomorphic trees."""
        if self.is_leaf:
            return self.label
        return (
            round(self.height, precision),
            frozenset(c.canonical(precision) for c in self.children),
        )


@dataclass(frozen=True)
class ClusterTree:
    root: ClusterNode
    linkage: str = DEFAULT_LINKAGE
    # Internal nodes in the order they were merged
    merges: tuple[ClusterNode, ...] = ()

    @property
    def labels(self) -> tuple[str, ...]:
        return self.root.leaves()

    def siblings(self) -> list[tuple[str, str, float]]:
        """Pairs of leaves merged directly with each other."""
        return [
            (node.children[0].label, node.children[1].label, node.height)  # type: ignore[misc]
            for _, node in self.root.walk()
            if len(node.children) == 2 and all(c.is_leaf for c in node.children)
        ]


def _single(d_ik, d_jk, d_ij, n_i, n_j, n_k):
    return np.minimum(d_ik, d_jk)


def _complete(d_ik, d_jk, d_ij, n_i, n_j, n_k):
    return np.maximum(d_ik, d_jk)


def _average(d_ik, d_jk, d_ij, n_i, n_j, n_k):
    return (n_i * d_ik + n_j * d_jk) / (n_i + n_j)


def _ward(d_ik, d_jk, d_ij, n_i, n_j, n_k):
    squared = ((n_i + n_k) * d_ik**2 + (n_j + n_k) * d_jk**2 - n_k * d_ij**2) / (
        n_i + n_j + n_k
    )
    return np.sqrt(np.maximum(squared, 0.0))


# Lance-Williams updates: distance of every other cluster k to the union of i, j
LINKAGES: dict[str, Callable[..., np.ndarray]] = {
    "ward": _ward,
    "complete": _complete,
    "average": _average,
    "single": _single,
}


def agglomerate(matrix: DistanceMatrix, linkage: str = DEFAULT_LINKAGE) -> ClusterTree:
    """
    Agglomerative clustering of `matrix`.

    On equal distances the pair whose smaller document index is least is
    merged first (then the one whose larger index is least). A merged cluster
    keeps the smaller index of its two parts.
    """
    if linkage not in LINKAGES:
        raise ClusteringError(
            f"unknown linkage {linkage!r}; choose from {', '.join(LINKAGES)}"
        )
    update = LINKAGES[linkage]
    n = len(matrix)
    if n == 0:
        raise ClusteringError("cannot cluster an empty matrix")

    dist = matrix.values.astype(float).copy()
    nodes = [ClusterNode(label=label) for label in matrix.labels]
    sizes = np.ones(n)
    active = list(range(n))
    merges: list[ClusterNode] = []

    while len(active) > 1:
        idx = np.array(active)
        rows, cols = np.triu_indices(len(idx), k=1)
        candidates = dist[idx[rows], idx[cols]]
        # triu order is row-major, so the first minimum is the tie-break winner
        best = int(np.flatnonzero(candidates == candidates.min())[0])
        i, j = int(idx[rows[best]]), int(idx[cols[best]])
        height = float(dist[i, j])
        if merges:
            height = max(height, merges[-1].height)

        others = np.array([k for k in active if k not in (i, j)], dtype=int)
        if len(others):
            updated = update(
                dist[i, others], dist[j, others], dist[i, j], sizes[i], sizes[j], sizes[others]
            )
            dist[i, others] = updated
            dist[others, i] = updated

        node = ClusterNode(height=height, children=(nodes[i], nodes[j]))
        logger.debug("Merged %s at %.6f", node.leaves(), height)
        nodes[i] = node
        sizes[i] += sizes[j]
        active.remove(j)
        merges.append(node)

    return ClusterTree(root=nodes[active[0]], linkage=linkage, merges=tuple(merges))


def cluster(
    corpus: Sequence[Document],
    stats: CorpusStats,
    variant: str = DEFAULT_DELTA,
    linkage: str = DEFAULT_LINKAGE,
    jobs: Optional[int] = None,
) -> tuple[DistanceMatrix, ClusterTree]:
    matrix = delta_matrix(corpus, stats, variant, jobs)
    return matrix, agglomerate(matrix, linkage)


# --- Serialization


def format_length(value: float) -> str:
    """4 decimals, trailing zeros dropped: `1.0` -> `1`."""
    text = f"{value:.4f}".rstrip("0").rstrip(".")
    return "0" if text in ("", "-0") else text


def newick_label(label: str) -> str:
    if _NEWICK_PLAIN_LABEL_RE.fullmatch(label):
        return label
    return "'{}'".format(label.replace("'", "''"))


def to_newick(tree: ClusterTree) -> str:
    def subtree(node: ClusterNode, parent_height: Optional[float]) -> str:
        text = (
            newick_label(node.label or "")
            if node.is_leaf
            else "({})".format(",".join(subtree(c, node.height) for c in node.children))
        )
        if parent_height is not None:
            text += ":" + format_length(parent_height - node.height)
        return text

    return subtree(tree.root, None) + ";"


def render_ascii(tree: ClusterTree) -> str:
    """One line per node, merges with their height, indented by depth."""
    lines = []
    for depth, node in tree.root.walk():
        indent = "  " * depth
        if node.is_leaf:
            lines.append(f"{indent}- {node.label}")
        else:
            lines.append(f"{indent}+ {node.height:.4f}")
    return "\n".join(lines) + "\n"


def serialize_tree(tree: ClusterTree, format: TreeFormat = "newick") -> str:
    if format == "newick":
        return to_newick(tree) + "\n"
    if format == "dot":
        from attributist.report import render_dot

        return render_dot(tree)
    if format == "ascii":
        return render_ascii(tree)
    raise ClusteringError(f"unknown tree format {format!r}")


class _NewickReader:
    """Recursive descent over `subtree := '(' subtree (',' subtree)* ')' label? length? | label length?`"""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> TreeParseError:
        return TreeParseError(f"malformed Newick at offset {self.pos}: {message}")

    def peek(self) -> str:
        self.skip_blanks()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_blanks(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, char: str) -> None:
        if self.peek() != char:
            raise self.error(f"expected {char!r}")
        self.pos += 1

    def label(self) -> str:
        if self.peek() == "'":
            self.pos += 1
            chars = []
            while True:
                end = self.text.find("'", self.pos)
                if end < 0:
                    raise self.error("unterminated quoted label")
                chars.append(self.text[self.pos : end])
                self.pos = end + 1
                if self.text[self.pos : self.pos + 1] == "'":
                    chars.append("'")
                    self.pos += 1
                else:
                    return "".join(chars)
        match = _NEWICK_PLAIN_LABEL_RE.match(self.text, self.pos)
        if not match:
            return ""
        self.pos = match.end()
        return match.group()

    def length(self) -> float:
        if self.peek() != ":":
            return 0.0
        self.pos += 1
        self.skip_blanks()
        match = _NEWICK_LENGTH_RE.match(self.text, self.pos)
        if not match:
            raise self.error("expected a branch length")
        self.pos = match.end()
        try:
            return float(match.group())
        except ValueError as err:
            raise self.error(f"bad branch length {match.group()!r}") from err

    def subtree(self) -> tuple[str, float, list]:
        children = []
        if self.peek() == "(":
            self.pos += 1
            children.append(self.subtree())
            while self.peek() == ",":
                self.pos += 1
                children.append(self.subtree())
            self.expect(")")
        name = self.label()
        if not children and not name:
            raise self.error("leaf without a label")
        return name, self.length(), children


def parse_newick(text: str, linkage: str = DEFAULT_LINKAGE) -> ClusterTree:
    """
    Read a Newick tree written by `to_newick`.

    Heights are rebuilt bottom-up from the branch lengths, leaves at 0.
    """
    reader = _NewickReader(text.strip())
    parsed = reader.subtree()
    reader.expect(";")
    if reader.peek():
        raise reader.error("trailing data after ';'")

    def build(parsed) -> ClusterNode:
        name, _, children = parsed
        if not children:
            return ClusterNode(label=name)
        nodes = tuple(build(c) for c in children)
        first_length = children[0][1]
        return ClusterNode(height=nodes[0].height + first_length, children=nodes)

    root = build(parsed)
    internal = sorted(
        (node for _, node in root.walk() if not node.is_leaf), key=lambda node: node.height
    )
    return ClusterTree(root=root, linkage=linkage, merges=tuple(internal))

