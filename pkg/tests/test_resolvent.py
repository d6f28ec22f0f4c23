import numpy as np
import pytest
from hypothesis import given, settings

from potlab.errors import EmptyMatrix, NegativeOffDiagonal, NotSquare, NotSubInvariant, NotSupermedianModM, PositiveRowSum
from potlab.fixtures import fixture
from potlab.oracles import random_instance
from potlab.potential import reduced_function
from potlab.resolvent import (adjoint_generator, cone_membership, duality_residual, excessive_regularize,
                              resolvent_at, resolvent_identity_residual, validate_generator, weighted_space)

from conftest import seeds


def test_validate_examples():
    assert validate_generator([[-1]]).n == 1
    assert validate_generator([[-1, 1], [1, -1]]).is_conservative()
    with pytest.raises(PositiveRowSum) as e:
        validate_generator([[-1, 2], [1, -1]])
    assert e.value.i == 0
    with pytest.raises(EmptyMatrix):
        validate_generator(np.zeros((0, 0)))
    with pytest.raises(NotSquare):
        validate_generator([[1, 2, 3]])
    with pytest.raises(NegativeOffDiagonal) as e:
        validate_generator([[-1, 0, 0], [0, -1, -0.5], [-1, 0, -1]])
    assert (e.value.i, e.value.j) == (1, 2)


def test_resolvent_examples():
    K1, _ = fixture("K1")
    C2, _ = fixture("C2")
    C3, _ = fixture("C3")
    assert np.allclose(resolvent_at(K1, 1).M, [[0.5]], atol=1e-15)
    assert np.allclose(resolvent_at(C2, 1).M, [[2 / 3, 1 / 3], [1 / 3, 2 / 3]], atol=1e-15)
    assert np.allclose(resolvent_at(C3, 1).M, np.array([[4, 2, 1], [1, 4, 2], [2, 1, 4]]) / 7, atol=1e-15)
    with pytest.raises(ValueError):
        resolvent_at(K1, 0)


def test_adjoint_examples():
    C3, w3 = fixture("C3")
    assert np.allclose(adjoint_generator(C3, w3).L, C3.L.T)
    C2, w2 = fixture("C2")
    assert np.allclose(adjoint_generator(C2, w2).L, C2.L)
    A2, wa = fixture("A2")
    assert np.allclose(adjoint_generator(A2, wa).L, [[-1, 0], [0, 0]])


def test_duality_examples():
    C3, w3 = fixture("C3")
    e = np.eye(3)
    assert duality_residual(C3, adjoint_generator(C3, w3), w3, 1.0, e[0], e[1]) <= 1e-12
    A2, wa = fixture("A2")
    assert duality_residual(A2, adjoint_generator(A2, wa), wa, 1.0, [1, 0], [0, 1]) == 0


def test_not_sub_invariant():
    C2, _ = fixture("C2")
    A2, _ = fixture("A2")
    with pytest.raises(NotSubInvariant) as e:
        weighted_space(A2, [1.0, 0.0])
    assert e.value.column == 1
    weighted_space(C2, [1.0, 1.0])


def test_cone_examples():
    C2, _ = fixture("C2")
    assert cone_membership([1, 1], C2).is_excessive
    assert not cone_membership([1, 0], C2).is_supermedian
    assert cone_membership([1, 0.5], C2, beta=1).is_supermedian


def test_excessive_regularize_examples():
    A2, wa = fixture("A2")
    assert np.allclose(excessive_regularize([0, 1], A2, wa), [1, 1])
    C2, w2 = fixture("C2")
    assert np.allclose(excessive_regularize([3, 3], C2, w2), [3, 3])
    with pytest.raises(NotSupermedianModM):
        excessive_regularize([1, 0.5], C2, w2)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_regularized_is_excessive_and_bounded(seed):
    rng = np.random.default_rng(seed)
    gen, w = random_instance(rng, n_max=8)
    # a reduced function is excessive, so it satisfies the precondition on the support
    v = reduced_function(gen, rng.uniform(size=gen.n), 0.0)
    out = excessive_regularize(v, gen, w)
    assert cone_membership(out, gen, 0.0, tol=1e-9).is_excessive
    assert np.allclose(out[w.idx], v[w.idx])
    assert out.max() <= v.max() + 1e-9


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_resolvent_algebra(seed):
    rng = np.random.default_rng(seed)
    gen, w = random_instance(rng, n_max=12)
    grid = (1e-3, 1.0, 1e3)
    for a in grid:
        M = resolvent_at(gen, a).M
        assert M.min() >= -1e-12
        assert (a * M.sum(axis=1)).max() <= 1 + 1e-12
        for b in grid:
            assert resolvent_identity_residual(gen, a, b) <= 1e-9 * max(1.0, 1 / min(a, b))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_adjoint_involution_and_sub_invariance(seed):
    rng = np.random.default_rng(seed)
    gen, w = random_instance(rng)
    star = adjoint_generator(gen, w)
    validate_generator(star.L, tol=1e-9)
    weighted_space(star, w.m, tol=1e-9)
    back = adjoint_generator(star, w)
    idx = w.idx
    assert np.abs(back.L[np.ix_(idx, idx)] - gen.L[np.ix_(idx, idx)]).max() <= 1e-10


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_cone_matches_sampling(seed):
    rng = np.random.default_rng(seed)
    gen, _ = random_instance(rng, n_max=6)
    v = rng.uniform(0, 1, gen.n)
    beta = float(rng.choice([0.0, 0.5, 2.0]))
    direct = all(np.all(a * resolvent_at(gen, a + beta).M @ v <= v + 1e-12) for a in (1, 10, 100, 1e6))
    assert cone_membership(v, gen, beta).is_supermedian == direct
