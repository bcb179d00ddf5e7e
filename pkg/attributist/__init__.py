"""
attributist
~~~~~~~~~~~
Stylometric authorship attribution for plain-text corpora.

Two ways of answering "who wrote this text?" are implemented:

* Instance based: every text against every other with Burrows or Eder Delta
  over the z-scores of the most frequent words, grouped by agglomerative
  clustering into a dendrogram
* Profile based: the texts of each candidate author are merged into one
  profile and every unknown text is scored against each profile with four
  measures (perplexity of character n-grams, Kullback-Leibler divergence,
  out-of-place rank distance and cosine distance). The scores are min-max
  normalized per measure and averaged; the lowest mean names the most
  likely author.

Lower scores always mean closer texts.

Examples
========

Load a corpus::

    from attributist import ingest, load_manifest

    corpus = ingest(load_manifest("corpus/manifest.csv"))

Cluster it::

    from attributist import cluster, compute_corpus_stats, serialize_tree

    stats = compute_corpus_stats(corpus, mfw_size=250)
    matrix, tree = cluster(corpus, stats, variant="eder", linkage="ward")
    print(serialize_tree(tree, "newick"))

Attribute the texts whose author is `unknown`::

    from attributist import attribute

    report = attribute(corpus, mfw_size=250, char_n=7)
    for result in report.results:
        print(result.unknown_title, result.verdict.best, result.verdict.margin)

The same is available from the command line, see `attributist --help`.
"""

from attributist.attribution import (
    AttributionReport,
    ScoreTable,
    attribute,
    mean_combine,
    minmax_normalize,
    normalize_table,
    rank_authors,
    score_all,
)
from attributist.clustering import (
    ClusterTree,
    DistanceMatrix,
    agglomerate,
    cluster,
    delta_matrix,
    parse_newick,
    serialize_tree,
    to_newick,
)
from attributist.corpus import (
    UNKNOWN_AUTHOR,
    Corpus,
    Document,
    Manifest,
    ingest,
    load_manifest,
    preprocess,
)
from attributist.distances import (
    MeasureContext,
    MeasureId,
    burrows_delta,
    cosine_distance,
    eder_delta,
    kl_distance,
    perplexity_distance,
    rank_distance,
    score,
)
from attributist.errors import AttributistError
from attributist.features import (
    WORD_UNIGRAM,
    AuthorProfile,
    CorpusStats,
    FeatureKind,
    FeatureVector,
    build_profile,
    build_profiles,
    char_ngram,
    char_ngram_vector,
    compute_corpus_stats,
    tokenize,
    word_vector,
    zscore_vector,
)

__all__ = [
    "UNKNOWN_AUTHOR",
    "WORD_UNIGRAM",
    "AttributionReport",
    "AttributistError",
    "AuthorProfile",
    "ClusterTree",
    "Corpus",
    "CorpusStats",
    "DistanceMatrix",
    "Document",
    "FeatureKind",
    "FeatureVector",
    "Manifest",
    "MeasureContext",
    "MeasureId",
    "ScoreTable",
    "agglomerate",
    "attribute",
    "build_profile",
    "build_profiles",
    "burrows_delta",
    "char_ngram",
    "char_ngram_vector",
    "cluster",
    "compute_corpus_stats",
    "cosine_distance",
    "delta_matrix",
    "eder_delta",
    "ingest",
    "kl_distance",
    "load_manifest",
    "mean_combine",
    "minmax_normalize",
    "normalize_table",
    "parse_newick",
    "perplexity_distance",
    "preprocess",
    "rank_authors",
    "rank_distance",
    "score",
    "score_all",
    "serialize_tree",
    "tokenize",
    "to_newick",
    "word_vector",
    "zscore_vector",
]
