import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from s2vaudit.errors import InvalidDistances, TooFewPoints
from s2vaudit.mds import classical_mds, pairwise_distances
from s2vaudit.rng import Xoshiro256


def plane_in_50d(rng, n=30):
    flat = rng.normal(size=(n, 2)) * 3.0
    basis, _ = np.linalg.qr(rng.normal(size=(50, 2)))
    return flat @ basis.T + rng.normal(size=50)


def random_rotation(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    return q * np.sign(np.diag(r))


def test_two_points_rejected():
    with pytest.raises(TooFewPoints):
        classical_mds(np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_collinear_distances_one_one_two():
    D = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    m = classical_mds(distances=D)
    assert np.allclose(pairwise_distances(m.coords), D, atol=1e-9, rtol=0)
    assert np.all(np.abs(m.coords[:, 1]) < 1e-9)


def test_plane_recovered():
    rng = np.random.default_rng(0)
    for _ in range(5):
        X = plane_in_50d(rng)
        m = classical_mds(X)
        assert np.max(np.abs(pairwise_distances(m.coords) - pairwise_distances(X))) < 1e-8


@given(st.integers(0, 2**32 - 1))
def test_rotation_changes_only_orientation(seed):
    rng = np.random.default_rng(seed)
    X = plane_in_50d(rng, 12)
    Y = X @ random_rotation(rng, 50).T
    a, b = classical_mds(X), classical_mds(Y)
    assert np.max(np.abs(pairwise_distances(a.coords) - pairwise_distances(b.coords))) < 1e-8


@given(st.integers(0, 2**32 - 1), st.integers(3, 20))
def test_centered_and_sign_canonical(seed, n):
    X = np.random.default_rng(seed).normal(size=(n, 5))
    m = classical_mds(X)
    assert np.all(np.abs(m.coords.mean(axis=0)) < 1e-9)
    for k in range(2):
        j = np.argmax(np.abs(m.coords[:, k]))
        assert m.coords[j, k] >= 0
    again = classical_mds(X)
    assert np.array_equal(again.coords, m.coords)


def test_distance_matrix_validation():
    D = np.array([[0, 1, 2], [1, 0, 1], [2, 1.5, 0]])
    with pytest.raises(InvalidDistances):
        classical_mds(distances=D)
    with pytest.raises(InvalidDistances):
        classical_mds(distances=np.array([[1.0, 1, 1], [1, 0, 1], [1, 1, 0]]))
    with pytest.raises(InvalidDistances):
        classical_mds(distances=-np.ones((3, 3)) + np.eye(3))
    with pytest.raises(InvalidDistances):
        classical_mds(distances=np.zeros((3, 4)))
    with pytest.raises(ValueError):
        classical_mds()


def test_non_euclidean_clamped(caplog):
    # violates the triangle inequality badly
    D = np.array([[0, 1, 10], [1, 0, 1], [10, 1, 0]], dtype=float)
    m = classical_mds(distances=D)
    assert np.all(np.isfinite(m.coords))


def test_csv_layout():
    m = classical_mds(np.eye(3), labels=[("ate", 0), ("ate", 4), ("eight", 1)])
    lines = m.to_csv().splitlines()
    assert lines[0] == "label,occurrence_id,x,y"
    assert lines[2].startswith("ate,4,")


def test_homophone_occurrences_mix(desk_run):
    # first synthetic homophone pair plays the role of {ate, eight}
    from s2vaudit.speech2vec.corpus import pad_or_truncate
    from s2vaudit.speech2vec.model import encode_batch

    corpus, config, params = desk_run["corpus"], desk_run["config"], desk_run["params"]
    a, b = corpus.homophone_pairs[0]
    in_pairs = {w for p in corpus.homophone_pairs for w in p}
    vocab = corpus.vocabulary
    others = [w for w, _ in sorted(vocab.items(), key=lambda kv: (-kv[1], kv[0])) if w not in in_pairs][:2]
    rename = {a: "ate", b: "eight", others[0]: others[0], others[1]: others[1]}

    occ = {w: [] for w in rename}
    for sent in corpus.sentences:
        for sw in sent:
            if sw.label in occ:
                occ[sw.label].append(sw)
    rng = Xoshiro256(1)
    labels, frames = [], []
    for w in rename:
        picks = sorted(rng.sample_indices(len(occ[w]), min(50, len(occ[w]))))
        for k in picks:
            labels.append((rename[w], k))
            frames.append(pad_or_truncate(occ[w][k].frames, config.fixed_frames))
    X = np.stack([f for f, _ in frames])
    L = np.array([n for _, n in frames])
    emb = encode_batch(params, config.model_config(), X, L)
    m = classical_mds(emb, labels=labels)

    names = [lab for lab, _ in labels]
    cent = {w: m.coords[[i for i, n in enumerate(names) if n == w]].mean(axis=0) for w in rename.values()}
    homo = np.linalg.norm(cent["ate"] - cent["eight"])
    keys = list(cent)
    cross = [np.linalg.norm(cent[p] - cent[q]) for i, p in enumerate(keys) for q in keys[i + 1 :] if {p, q} != {"ate", "eight"}]
    assert homo < min(cross)
