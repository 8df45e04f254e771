import io
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from s2vaudit.embed_store import EmbeddingTable, cosine, knn, load_embeddings, save_embeddings
from s2vaudit.errors import DegenerateVector, DuplicateWord, FormatError, InvalidK, WordNotFound

from conftest import random_table

finite = st.floats(-1e300, 1e300, allow_nan=False, allow_infinity=False, allow_subnormal=False)


def nonzero_vectors(n, dim):
    return hnp.arrays(np.float64, (n, dim), elements=finite).filter(lambda a: bool(np.all(np.any(a != 0.0, axis=1))))


def test_single_entry():
    t = load_embeddings("a 1.0 2.0\n")
    assert t.dim == 2 and t.words == ("a",)
    assert t["a"].tolist() == [1.0, 2.0]


def test_header_detected_and_checked():
    t = load_embeddings("2 3\nx 1 2 3\ny 4 5 6\n")
    assert len(t) == 2 and t.dim == 3
    with pytest.raises(FormatError):
        load_embeddings("3 3\nx 1 2 3\ny 4 5 6\n")


def test_headerless_two_component_rows_are_not_a_header():
    t = load_embeddings("a 1 2\nb 3 4\n")
    assert t.words == ("a", "b")


def test_words_lowercased_and_order_kept():
    t = load_embeddings("Zeta 1 0\nalpha 0 1\nMid 1 1\n")
    assert t.words == ("zeta", "alpha", "mid")


def test_format_errors_carry_line_numbers():
    with pytest.raises(FormatError) as e:
        load_embeddings("a 1 2\nb 1 2 3\n")
    assert e.value.line == 2
    with pytest.raises(FormatError) as e:
        load_embeddings("a 1 2\nb 1 x\n")
    assert e.value.line == 2


def test_duplicate_word_after_lowercasing():
    with pytest.raises(DuplicateWord) as e:
        load_embeddings("Cat 1 2\ncat 3 4\n")
    assert e.value.word == "cat"


def test_round_trip_100_random_tables():
    rng = np.random.default_rng(2024)
    for k in range(100):
        n = int(rng.integers(1, 30))
        dim = int(rng.integers(1, 12))
        scale = 10.0 ** rng.integers(-8, 8)
        table = EmbeddingTable([f"w{k}_{i}" for i in range(n)], rng.normal(size=(n, dim)) * scale)
        text = save_embeddings(table)
        back = load_embeddings(text)
        assert back == table
        assert save_embeddings(back) == text
        assert np.array_equal(back.vectors, table.vectors)


@given(nonzero_vectors(4, 3))
def test_round_trip_exact_property(vecs):
    t = EmbeddingTable(["a", "b", "c", "d"], vecs)
    for header in (True, False):
        assert load_embeddings(save_embeddings(t, header=header)) == t


def test_save_to_stream():
    t = load_embeddings("a 1.5 -2\n")
    buf = io.StringIO()
    assert save_embeddings(t, buf) is None
    assert buf.getvalue() == "1 2\na 1.5 -2.0\n"


def test_cosine_basic_cases():
    t = EmbeddingTable.from_dict({"x": [1.0, 0.0], "y": [0.0, 1.0], "z": [3.0, 4.0], "zero": [0.0, 0.0]})
    assert cosine(t, "x", "y") == 0.0
    assert cosine(t, "z", "z") == 1.0
    assert math.isclose(cosine(t, "x", "z"), 0.6, rel_tol=1e-15)
    with pytest.raises(WordNotFound):
        cosine(t, "x", "nope")
    with pytest.raises(DegenerateVector):
        cosine(t, "x", "zero")


@given(nonzero_vectors(5, 4))
def test_cosine_symmetric_and_bounded(vecs):
    t = EmbeddingTable(list("abcde"), vecs)
    for a in "abcde":
        for b in "abcde":
            c = t.cosine(a, b)
            assert c == t.cosine(b, a)
            assert -1.0 <= c <= 1.0


@given(nonzero_vectors(5, 4), st.integers(-20, 20))
def test_power_of_two_scaling_is_bit_exact(vecs, e):
    scale = 2.0**e
    # exact only while scaled components stay normal
    assume(np.all((vecs == 0) | (np.abs(vecs * scale) >= np.finfo(float).tiny)))
    t1 = EmbeddingTable(list("abcde"), vecs)
    t2 = EmbeddingTable(list("abcde"), vecs * scale)
    for a in "abcde":
        for b in "abcde":
            assert t1.cosine(a, b) == t2.cosine(a, b)


@given(nonzero_vectors(5, 4), st.floats(1e-3, 1e3))
def test_general_positive_scaling_within_rounding(vecs, scale):
    t1 = EmbeddingTable(list("abcde"), vecs)
    t2 = EmbeddingTable(list("abcde"), vecs * scale)
    for a in "abcde":
        for b in "abcde":
            assert abs(t1.cosine(a, b) - t2.cosine(a, b)) <= 1e-14


def test_cosine_matches_scan():
    t = random_table(np.random.default_rng(1), 30, 7)
    for w in t.words[:5]:
        sims = t.similarities(w)
        for i, v in enumerate(t.words):
            assert sims[i] == t.cosine(w, v)


def test_knn_two_words():
    t = EmbeddingTable.from_dict({"a": [1.0, 0.0], "b": [0.0, 1.0]})
    assert [w for w, _ in knn(t, "a", 1)] == ["b"]


def brute_knn(table, q, k):
    qv = table[q] / np.linalg.norm(table[q])
    scored = []
    for w in table.words:
        if w == q:
            continue
        v = table[w] / np.linalg.norm(table[w])
        scored.append((-float(qv @ v), w))
    scored.sort()
    return [w for _, w in scored[:k]]


def test_knn_matches_exhaustive_sort():
    rng = np.random.default_rng(77)
    for _ in range(20):
        t = random_table(rng, 10, 5)
        for q in t.words:
            for k in (1, 3, 9):
                assert [w for w, _ in t.knn(q, k)] == brute_knn(t, q, k)


def test_knn_ties_break_lexicographically():
    t = EmbeddingTable.from_dict({"q": [1.0, 0.0], "zz": [2.0, 0.0], "aa": [1.0, 0.0], "mm": [0.0, 1.0]})
    assert [w for w, _ in t.knn("q", 3)] == ["aa", "zz", "mm"]


@given(st.integers(0, 10_000), st.integers(3, 15))
def test_knn_prefix_property(seed, n):
    t = random_table(np.random.default_rng(seed), n, 3)
    q = t.words[seed % n]
    prev = t.knn(q, 1)
    for k in range(2, n):
        cur = t.knn(q, k)
        assert cur[: k - 1] == prev
        prev = cur


def test_knn_descending_similarity():
    t = random_table(np.random.default_rng(3), 40, 6)
    sims = [s for _, s in t.knn("w0", 39)]
    assert sims == sorted(sims, reverse=True)


def test_knn_bad_k():
    t = random_table(np.random.default_rng(3), 4, 2)
    for k in (0, 4, -1):
        with pytest.raises(InvalidK):
            t.knn("w0", k)
    with pytest.raises(WordNotFound):
        t.knn("nope", 1)


def test_table_is_immutable():
    t = random_table(np.random.default_rng(0), 3, 2)
    with pytest.raises(ValueError):
        t.vectors[0, 0] = 5.0
