import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import attributist
from attributist.distances import (
    MEASURES,
    PROFILE_MEASURES,
    MeasureContext,
    MeasureId,
    MeasureScore,
    burrows_delta,
    cosine_distance,
    eder_delta,
    kl_distance,
    parse_measures,
    perplexity_distance,
    rank_distance,
    score,
)
from attributist.errors import InvariantError, MeasureError
from attributist.features import (
    WORD_UNIGRAM,
    FeatureVector,
    build_profiles,
    char_ngram,
    compute_corpus_stats,
)
from attributist.synthetic import desk_corpus, to_corpus

SEEDS = range(100)
SEVEN = char_ngram(7)


def vector(counts, kind=WORD_UNIGRAM):
    return FeatureVector.from_counts(kind, counts)


def random_counts(rng, n_features, prefix="w"):
    counts = rng.integers(0, 20, size=n_features)
    counts[0] += 1
    return {f"{prefix}{i}": int(c) for i, c in enumerate(counts) if c > 0}


# --- Examples


@pytest.mark.parametrize(
    ("z1", "z2", "expected"),
    [
        ([0.5, -1.0, 2.0], [0.5, -1.0, 2.0], 0.0),
        ([1, 0], [0, 1], 2.0),
        ([3.0], [-1.0], 4.0),
    ],
)
def test_burrows_delta(z1, z2, expected):
    result = burrows_delta(z1, z2)
    assert result.measure == MeasureId.BURROWS_DELTA
    assert result.value == pytest.approx(expected)


@pytest.mark.parametrize(
    ("z1", "z2", "ranks", "expected"),
    [
        ([0.5, -1.0], [0.5, -1.0], None, 0.0),
        ([1, 1], [0, 0], None, 1.5),
        ([1, 1], [0, 0], [2, 1], 1.5),
        ([1, 0], [0, 0], [2, 1], 0.5),
    ],
)
def test_eder_delta(z1, z2, ranks, expected):
    assert eder_delta(z1, z2, ranks).value == pytest.approx(expected)


def test_eder_weights_favour_frequent_features():
    for n in range(2, 20):
        first = eder_delta([1] + [0] * (n - 1), [0] * n).value
        last = eder_delta([0] * (n - 1) + [1], [0] * n).value
        assert first > last


@pytest.mark.parametrize("fn", [burrows_delta, eder_delta])
def test_delta_length_mismatch(fn):
    with pytest.raises(MeasureError, match="differ in length"):
        fn([1, 2, 3], [1, 2])


def test_kl_distance_without_smoothing():
    a, t = vector({"x": 1, "y": 1}), vector({"x": 1, "y": 3})
    assert kl_distance(a, t, ["x", "y"], smoothing=0).value == pytest.approx(0.1981, abs=1e-4)


def test_kl_distance_identical():
    a = vector({"x": 3, "y": 1, "z": 7})
    assert kl_distance(a, a, ["x", "y", "q"]).value == 0.0


def test_kl_distance_symmetric():
    a, t = vector({"x": 3, "y": 1}), vector({"x": 1, "z": 5})
    vocab = ["x", "y", "z"]
    assert kl_distance(a, t, vocab).value == kl_distance(t, a, vocab).value


def test_kl_distance_errors():
    a = vector({"x": 1})
    with pytest.raises(MeasureError, match="empty vocabulary"):
        kl_distance(a, a, [])
    with pytest.raises(MeasureError, match="infinite"):
        kl_distance(a, vector({"y": 1}), ["x", "y"], smoothing=0)


def test_perplexity_single_ngram():
    t = vector({"g": 1}, SEVEN)
    m = vector({"g": 1, "h": 1}, SEVEN)
    assert perplexity_distance(m, t).value == pytest.approx(2.0)


@pytest.mark.parametrize("k", [1, 2, 5, 40])
def test_perplexity_uniform(k):
    counts = {f"g{i}": 1 for i in range(k)}
    assert perplexity_distance(vector(counts, SEVEN), vector(counts, SEVEN)).value == (
        pytest.approx(k)
    )


def test_perplexity_only_counts_shared_ngrams():
    # the half of T that M never saw adds nothing
    t = vector({"g": 1, "u": 1}, SEVEN)
    m = vector({"g": 1}, SEVEN)
    assert perplexity_distance(m, t).value == pytest.approx(1.0)
    m = vector({"g": 3, "h": 1}, SEVEN)
    assert perplexity_distance(m, t).value == pytest.approx(2 ** (-0.5 * math.log2(0.75)))
    assert perplexity_distance(m, t).value < 1.2


def test_perplexity_identity_can_lose_on_small_overlap():
    # B shares only the most frequent n-gram of T, with probability 1 in B
    a = vector({"zz": 1, "qq": 1, "ab": 2}, SEVEN)
    b = vector({"ab": 4}, SEVEN)
    assert perplexity_distance(a, a).value == pytest.approx(2**1.5)
    assert perplexity_distance(b, a).value == pytest.approx(1.0)
    assert perplexity_distance(b, a).value < perplexity_distance(a, a).value


def test_perplexity_errors():
    with pytest.raises(MeasureError, match="no shared"):
        perplexity_distance(vector({"a": 1}, SEVEN), vector({"b": 1}, SEVEN))
    with pytest.raises(MeasureError, match="cannot compare"):
        perplexity_distance(vector({"a": 1}), vector({"a": 1}, SEVEN))


@pytest.mark.parametrize(
    ("rank_a", "rank_t", "k", "expected"),
    [
        (["a", "b", "c"], ["a", "b", "c"], 3, 0),
        (["a", "b"], ["b", "a"], 2, 2),
        (["a", "b", "d"], ["a", "b", "c"], 3, 1),
        (["x", "y"], ["a", "b"], 2, 3),
        # only the top k of either list counts
        (["a", "b", "z"], ["a", "b", "c"], 2, 0),
    ],
)
def test_rank_distance(rank_a, rank_t, k, expected):
    assert rank_distance(rank_a, rank_t, k).value == expected


def test_rank_distance_bad_k():
    with pytest.raises(MeasureError, match="k must be positive"):
        rank_distance(["a"], ["a"], 0)


@pytest.mark.parametrize(
    ("a", "t", "expected"),
    [
        ({"x": 1, "y": 1}, {"x": 1}, 1 - 1 / math.sqrt(2)),
        ({"x": 1}, {"y": 1}, 1.0),
        ({"x": 2, "y": 5}, {"x": 2, "y": 5}, 0.0),
    ],
)
def test_cosine_distance(a, t, expected):
    assert cosine_distance(vector(a), vector(t), ["x", "y"]).value == pytest.approx(expected)


def test_cosine_distance_errors():
    a = vector({"x": 1})
    with pytest.raises(MeasureError, match="empty vocabulary"):
        cosine_distance(a, a, [])
    with pytest.raises(MeasureError, match="all zero"):
        cosine_distance(a, vector({"y": 1}), ["x"])


@pytest.mark.parametrize("value", [-0.1, math.inf, math.nan])
def test_measure_score_invariant(value):
    with pytest.raises(InvariantError):
        MeasureScore(MeasureId.COSINE, value)


def test_parse_measures():
    assert parse_measures(["perplexity", " cosine", "perplexity"]) == (
        MeasureId.PERPLEXITY,
        MeasureId.COSINE,
    )
    with pytest.raises(MeasureError, match="valid measures"):
        parse_measures(["jaccard"])
    with pytest.raises(MeasureError, match="no measure"):
        parse_measures([])


def test_labels():
    assert MeasureId.EDER_DELTA.label == "Eder (Stylo-compatible)"
    assert str(MeasureId.RANK_BASED) == "rank_based"
    assert set(MEASURES) == set(MeasureId)


@pytest.mark.parametrize(
    "fn",
    [burrows_delta, eder_delta, kl_distance, perplexity_distance, rank_distance, cosine_distance],
)
def test_measures_exported(fn):
    assert fn.__name__ in attributist.__all__
    assert getattr(attributist, fn.__name__) is fn


# --- Oracles


@pytest.mark.parametrize("seed", SEEDS)
def test_burrows_delta_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 301))
    z1, z2 = rng.normal(size=n).tolist(), rng.normal(size=n).tolist()
    expected = 0.0
    for a, b in zip(z1, z2):
        expected += abs(a - b)
    assert burrows_delta(z1, z2).value == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("seed", SEEDS)
def test_eder_delta_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 301))
    z1, z2 = rng.normal(size=n).tolist(), rng.normal(size=n).tolist()
    expected = 0.0
    for i in range(n):
        rank = i + 1
        expected += abs(z1[i] - z2[i]) * (n - rank + 1) / n
    assert eder_delta(z1, z2).value == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("seed", SEEDS)
def test_kl_distance_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 301))
    a_counts, t_counts = random_counts(rng, n), random_counts(rng, n)
    vocab = [f"w{i}" for i in rng.permutation(n + 10)[: int(rng.integers(1, n + 10))]]

    p = [a_counts.get(f, 0) + 1 for f in vocab]
    q = [t_counts.get(f, 0) + 1 for f in vocab]
    p_total, q_total = sum(p), sum(q)
    p = [x / p_total for x in p]
    q = [x / q_total for x in q]
    kl_pq = sum(x * math.log2(x / y) for x, y in zip(p, q))
    kl_qp = sum(y * math.log2(y / x) for x, y in zip(p, q))

    result = kl_distance(vector(a_counts), vector(t_counts), vocab)
    assert result.value == pytest.approx((kl_pq + kl_qp) / 2, abs=1e-9)


@pytest.mark.parametrize("seed", SEEDS)
def test_perplexity_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 301))
    m_counts = random_counts(rng, n, prefix="g")
    t_counts = random_counts(rng, n, prefix="g")
    m_total, t_total = sum(m_counts.values()), sum(t_counts.values())

    exponent = 0.0
    for g, count in t_counts.items():
        if g in m_counts:
            exponent -= count / t_total * math.log2(m_counts[g] / m_total)

    result = perplexity_distance(vector(m_counts, SEVEN), vector(t_counts, SEVEN))
    assert result.value == pytest.approx(2.0**exponent, rel=1e-6)


@pytest.mark.parametrize("seed", SEEDS)
def test_rank_distance_oracle(seed):
    rng = np.random.default_rng(seed)
    universe = [f"w{i}" for i in range(int(rng.integers(1, 301)))]
    rank_a = [universe[i] for i in rng.permutation(len(universe))]
    rank_t = [universe[i] for i in rng.permutation(len(universe))]
    k = int(rng.integers(1, len(universe) + 1))

    top_a = rank_a[:k]
    expected = 0
    for position, feature in enumerate(rank_t[:k]):
        rank_in_a = top_a.index(feature) + 1 if feature in top_a else k + 1
        expected += abs(rank_in_a - (position + 1))
    assert rank_distance(rank_a, rank_t, k).value == expected


@pytest.mark.parametrize("seed", SEEDS)
def test_cosine_distance_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 301))
    a_counts, t_counts = random_counts(rng, n), random_counts(rng, n)
    vocab = ["w0", *(f"w{i}" for i in rng.permutation(n + 5)[: int(rng.integers(0, n + 5))])]
    vocab = list(dict.fromkeys(vocab))

    a_total, t_total = sum(a_counts.values()), sum(t_counts.values())
    x = [a_counts.get(f, 0) / a_total for f in vocab]
    y = [t_counts.get(f, 0) / t_total for f in vocab]
    dot = sum(i * j for i, j in zip(x, y))
    norm = math.sqrt(sum(i * i for i in x)) * math.sqrt(sum(j * j for j in y))

    result = cosine_distance(vector(a_counts), vector(t_counts), vocab)
    assert result.value == pytest.approx(1 - dot / norm, abs=1e-9)


# --- Axioms

z_vectors = st.integers(min_value=1, max_value=40).flatmap(
    lambda n: st.tuples(
        *(
            st.lists(
                st.floats(min_value=-50, max_value=50, allow_nan=False),
                min_size=n,
                max_size=n,
            )
            for _ in range(2)
        )
    )
)

count_tables = st.dictionaries(
    st.sampled_from([f"w{i}" for i in range(30)]),
    st.integers(min_value=1, max_value=50),
    min_size=1,
)

vocabularies = st.lists(
    st.sampled_from([f"w{i}" for i in range(35)]), min_size=1, max_size=35, unique=True
)


@settings(max_examples=200)
@given(z_vectors)
def test_delta_axioms(pair):
    z1, z2 = pair
    for fn in (burrows_delta, eder_delta):
        assert fn(z1, z1).value == 0.0
        assert fn(z1, z2).value == fn(z2, z1).value
        assert fn(z1, z2).value >= 0


@settings(max_examples=200)
@given(z_vectors, st.floats(min_value=-10, max_value=10, allow_nan=False))
def test_burrows_delta_translation_invariant(pair, shift):
    z1, z2 = pair
    shifted = burrows_delta([x + shift for x in z1], [x + shift for x in z2]).value
    assert shifted == pytest.approx(burrows_delta(z1, z2).value, abs=1e-9 * (len(z1) + 1) * 100)


@settings(max_examples=200)
@given(count_tables, count_tables, vocabularies)
def test_kl_distance_axioms(a_counts, t_counts, vocab):
    a, t = vector(a_counts), vector(t_counts)
    assert kl_distance(a, a, vocab).value == 0.0
    assert kl_distance(a, t, vocab).value == kl_distance(t, a, vocab).value
    assert kl_distance(a, t, vocab).value >= 0


@settings(max_examples=200)
@given(count_tables, count_tables, vocabularies)
def test_cosine_distance_axioms(a_counts, t_counts, vocab):
    a, t = vector(a_counts), vector(t_counts)
    vocab = list(dict.fromkeys([*vocab, *a_counts, *t_counts]))
    assert cosine_distance(a, a, vocab).value == 0.0
    value = cosine_distance(a, t, vocab).value
    assert value == cosine_distance(t, a, vocab).value
    assert 0.0 <= value <= 1.0


@settings(max_examples=200)
@given(st.permutations([f"w{i}" for i in range(12)]), st.integers(min_value=1, max_value=12))
def test_rank_distance_axioms(ranking, k):
    reference = [f"w{i}" for i in range(12)]
    assert rank_distance(ranking, ranking, k).value == 0
    if k == len(reference):
        assert rank_distance(ranking, reference, k).value == rank_distance(
            reference, ranking, k
        ).value
    assert rank_distance(ranking, reference, k).value >= 0


@settings(max_examples=100)
@given(count_tables, count_tables)
def test_perplexity_positive(m_counts, t_counts):
    m, t = vector(m_counts, SEVEN), vector(t_counts, SEVEN)
    if set(m_counts) & set(t_counts):
        assert perplexity_distance(m, t).value > 0


# --- Through the registry


@pytest.fixture(scope="module")
def two_authors():
    corpus = to_corpus(desk_corpus(seed=11, authors=2))
    stats = compute_corpus_stats(corpus, WORD_UNIGRAM, 250)
    return corpus, build_profiles(corpus), MeasureContext(word_stats=stats)


@pytest.mark.parametrize("measure", list(MeasureId))
def test_held_out_text_closest_to_its_author(two_authors, measure):
    corpus, profiles, ctx = two_authors
    held_out = [doc for doc in corpus if doc.is_unknown]
    assert len(held_out) == 2
    for doc, true_author in zip(held_out, ("author_a", "author_b")):
        scores = {p.author: score(measure, p, doc, ctx).value for p in profiles}
        other = next(a for a in scores if a != true_author)
        assert scores[true_author] < scores[other]


@pytest.mark.parametrize(
    "measure",
    [
        MeasureId.BURROWS_DELTA,
        MeasureId.EDER_DELTA,
        MeasureId.KULLBACK_LEIBLER,
        MeasureId.COSINE,
        MeasureId.RANK_BASED,
    ],
)
def test_identical_text_scores_zero(two_authors, measure):
    corpus, _, ctx = two_authors
    assert score(measure, corpus[0], corpus[0], ctx).value == 0.0


def test_profile_measures_are_the_four():
    assert set(PROFILE_MEASURES) == {
        MeasureId.PERPLEXITY,
        MeasureId.KULLBACK_LEIBLER,
        MeasureId.RANK_BASED,
        MeasureId.COSINE,
    }
