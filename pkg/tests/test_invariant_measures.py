import numpy as np
import pytest
from hypothesis import given, settings

from potlab.classification import is_m_recurrent
from potlab.errors import NotProbability
from potlab.fixtures import fixture
from potlab.invariant_measures import (decomposition_witness, extremality_report, gm_set, invariant_probabilities,
                                       is_member, singularity_check, stationary_distribution)
from potlab.oracles import random_instance, stationary_oracle
from potlab.resolvent import validate_generator, weighted_space

from conftest import seeds


def test_invariant_probability_examples():
    C2, _ = fixture("C2")
    R3, _ = fixture("R3")
    T2, _ = fixture("T2")
    assert np.allclose(invariant_probabilities(C2).extreme_points, [[0.5, 0.5]])
    assert np.allclose(invariant_probabilities(R3).extreme_points, [[0, 1, 0], [0, 0, 1]])
    assert invariant_probabilities(T2).extreme_points == ()


def test_gm_examples():
    gm = gm_set(*fixture("C2"))
    assert gm.dim == 1 and np.allclose(gm.density_basis[:, 0], 1)
    gen, w = fixture("R3")
    gm = gm_set(gen, w)
    assert gm.dim == 2 and gm.equals_iac is True
    ext = gm.extreme_measures(w.m)
    assert np.allclose(ext, [[0, 1, 0], [0, 0, 1]])
    assert gm_set(*fixture("A2")).dim == 1


def test_extremality_examples():
    rep = extremality_report(*fixture("C2"))
    assert rep.consistent and rep.verdict is True
    gen, w = fixture("R3")
    rep = extremality_report(gen, w)
    assert rep.consistent and not rep["T2.26.i"] and not rep["T2.26.iii"] and rep["P3.8"]
    alpha, mu1, mu2 = rep.witnesses["T2.26.iii"]
    assert alpha == pytest.approx(0.5)
    assert np.allclose(mu1, [0, 1, 0]) and np.allclose(mu2, [0, 0, 1])


def test_not_probability():
    gen = validate_generator([[-1, 1], [1, -1]])
    with pytest.raises(NotProbability):
        extremality_report(gen, weighted_space(gen, [1.0, 1.0]))


def test_weakly_connected_not_irreducible():
    # one invariant density but a nontrivial absorbing set
    gen = validate_generator([[-1, 1], [0, -1]])
    rep = extremality_report(gen, weighted_space(gen, [0.5, 0.5]))
    assert rep.consistent and not rep["T2.26.i"] and rep["T2.26.ii"] and rep["T2.26.iii"]


def test_stationary_oracle_agrees():
    gen, _ = fixture("N2")
    assert np.allclose(stationary_distribution(gen.L), stationary_oracle(gen.L), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_extremality_random(seed):
    rng = np.random.default_rng(seed)
    gen, w = random_instance(rng)
    rep = extremality_report(gen, w)
    assert rep.consistent, rep.violations
    # m invariant iff m-recurrent
    assert np.allclose(w.m @ gen.L, 0, atol=1e-10) == bool(is_m_recurrent(gen, w).verdict)
    # members built from atoms pass the membership test and are sub-invariant
    gm = gm_set(gen, w)
    for mu in gm.extreme_measures(w.m):
        assert is_member(gen, w, mu)
        assert np.all(mu @ gen.L <= 1e-10)
    # the proof's splitting stays inside the set
    u = np.zeros(gen.n)
    u[w.idx] = gm.density_basis @ rng.uniform(0.1, 2.0, gm.dim)
    u /= u @ w.m
    split = decomposition_witness(gen, w, u)
    if split is not None:
        a, mu1, mu2 = split
        assert is_member(gen, w, mu1) and is_member(gen, w, mu2)
        assert np.allclose(a * mu1 + (1 - a) * mu2, w.m)
    assert singularity_check(gen)
    pts = invariant_probabilities(gen).extreme_points
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            assert not np.any((pts[i] > 0) & (pts[j] > 0))
