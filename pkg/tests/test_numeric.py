"""Membership-term and objective arithmetic."""

import numpy as np
import pytest

from bigfcm.numeric import (fcm_objective, membership_terms, sqdist_matrix,
                            squared_euclidean, terms_matrix)


def test_squared_euclidean_values():
    assert squared_euclidean([0.0], [0.0]) == 0.0
    assert squared_euclidean([0.0, 0.0], [3.0, 4.0]) == 25.0
    assert squared_euclidean([1.0, 2.0, 3.0], [1.0, 2.0, 3.5]) == 0.25


def test_squared_euclidean_symmetry_and_mismatch():
    a, b = [1.0, 2.0], [4.0, 6.0]
    assert squared_euclidean(a, b) == squared_euclidean(b, a)
    with pytest.raises(ValueError, match="2.*3|3.*2"):
        squared_euclidean([1.0, 2.0], [1.0, 2.0, 3.0])


def test_membership_terms_textbook_point():
    # Oracle: hand arithmetic. d2 = [0.25, 2.25] gives memberships
    # u = [1/(1 + 1/9), 1/(9 + 1)] = [0.9, 0.1]; terms are u^2.
    terms = membership_terms([0.5], [[0.0], [2.0]], m=2.0)
    assert terms == pytest.approx([0.81, 0.01], abs=1e-12)


def test_membership_terms_coincident_center():
    terms = membership_terms([0.0], [[0.0], [2.0]], m=2.0)
    assert terms.tolist() == [1.0, 0.0]


def test_membership_terms_equidistant():
    # u = [0.5, 0.5], squared.
    terms = membership_terms([1.0], [[0.0], [2.0]], m=2.0)
    assert terms == pytest.approx([0.25, 0.25], abs=1e-12)


def test_membership_terms_multiple_coincident_split():
    terms = membership_terms([1.0, 1.0], [[1.0, 1.0], [1.0, 1.0], [5.0, 5.0]],
                             m=2.0)
    assert terms == pytest.approx([0.25, 0.25, 0.0], abs=0.0)


def test_membership_terms_rejects_bad_fuzzifier():
    with pytest.raises(ValueError, match="m must be > 1"):
        membership_terms([0.5], [[0.0], [2.0]], m=1.0)
    with pytest.raises(ValueError):
        membership_terms([0.5], [[0.0], [2.0]], m=0.5)


def test_recovered_memberships_sum_to_one():
    # Fuzz: the terms are u^m, so sum_i terms^(1/m) must be 1.
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        d = rng.integers(1, 5)
        c = rng.integers(1, 6)
        m = float(rng.uniform(1.01, 4.0))
        x = rng.normal(0, 10, d)
        centers = rng.normal(0, 10, (c, d))
        terms = membership_terms(x, centers, m)
        assert np.all(terms >= 0.0) and np.all(terms <= 1.0 + 1e-15)
        u = terms ** (1.0 / m)
        assert abs(u.sum() - 1.0) < 1e-9


def test_terms_permutation_equivariant():
    rng = np.random.default_rng(9)
    x = rng.normal(size=3)
    centers = rng.normal(size=(5, 3))
    perm = rng.permutation(5)
    direct = membership_terms(x, centers, 2.5)
    permuted = membership_terms(x, centers[perm], 2.5)
    assert permuted == pytest.approx(direct[perm], rel=1e-12)


def test_terms_translation_invariant():
    rng = np.random.default_rng(10)
    x = rng.normal(size=4)
    centers = rng.normal(size=(3, 4))
    shift = rng.normal(size=4) * 50
    base = membership_terms(x, centers, 1.7)
    moved = membership_terms(x + shift, centers + shift, 1.7)
    assert moved == pytest.approx(base, abs=1e-9)


def test_terms_matrix_matches_single_point_route():
    rng = np.random.default_rng(77)
    pts = rng.normal(size=(40, 3))
    centers = rng.normal(size=(4, 3))
    pts[5] = centers[2]  # one exact coincidence
    d2 = sqdist_matrix(pts, centers)
    rows = terms_matrix(d2, 1.8)
    for i in range(len(pts)):
        expected = membership_terms(pts[i], centers, 1.8)
        assert rows[i] == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_objective_trivial_cases():
    assert fcm_objective([[0.0], [2.0]], [1.0, 1.0], [[0.0], [2.0]], 2.0) == 0.0
    assert fcm_objective([[1.0]], [1.0], [[0.0]], 2.0) == pytest.approx(1.0)
    assert fcm_objective([[0.0], [1.0]], [1.0, 1.0], [[0.5]], 2.0) \
        == pytest.approx(0.5)


def test_objective_weight_scaling():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(30, 2))
    w = rng.uniform(0.5, 2.0, 30)
    centers = rng.normal(size=(3, 2))
    base = fcm_objective(pts, w, centers, 2.0)
    for lam in (0.5, 2.0, 10.0):
        scaled = fcm_objective(pts, lam * w, centers, 2.0)
        assert scaled == pytest.approx(lam * base, rel=1e-12)


def test_objective_unit_weights_match_unweighted_form():
    # Independent unweighted evaluation straight from the definitions.
    rng = np.random.default_rng(4)
    pts = rng.normal(size=(25, 2))
    centers = rng.normal(size=(3, 2))
    m = 2.0
    q_direct = 0.0
    for x in pts:
        terms = membership_terms(x, centers, m)
        for i, center in enumerate(centers):
            q_direct += terms[i] * squared_euclidean(x, center)
    q = fcm_objective(pts, np.ones(25), centers, m)
    assert q == pytest.approx(q_direct, rel=1e-12)


def test_objective_rejects_bad_weights():
    with pytest.raises(ValueError, match="> 0"):
        fcm_objective([[0.0], [1.0]], [1.0, 0.0], [[0.5]], 2.0)
    with pytest.raises(ValueError, match="weight"):
        fcm_objective([[0.0], [1.0]], [1.0], [[0.5]], 2.0)
