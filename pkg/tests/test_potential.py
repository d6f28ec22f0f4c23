import numpy as np
import pytest
from hypothesis import given, settings

from potlab.errors import NonNegativeInputRequired
from potlab.fixtures import fixture
from potlab.oracles import random_instance, reduced_lp_oracle
from potlab.potential import RECURRENT, TRANSIENT, class_decomposition, potential_kernel, reduced_function
from potlab.resolvent import _resolvent, cone_membership

from conftest import seeds

INF = np.inf


def test_class_examples():
    C2, _ = fixture("C2")
    A2, _ = fixture("A2")
    T2, _ = fixture("T2")
    d = class_decomposition(C2)
    assert d.classes == ((0, 1),) and d.class_type == (RECURRENT,)
    d = class_decomposition(A2)
    assert d.classes == ((0,), (1,)) and d.class_type == (TRANSIENT, RECURRENT)
    d = class_decomposition(T2)
    assert d.class_type == (TRANSIENT, TRANSIENT)


def test_potential_examples():
    K1, _ = fixture("K1")
    A2, _ = fixture("A2")
    R3, _ = fixture("R3")
    assert np.array_equal(potential_kernel(K1).U, [[1.0]])
    assert np.array_equal(potential_kernel(A2).U, [[1, INF], [0, INF]])
    assert np.array_equal(potential_kernel(R3).U, [[0.5, INF, INF], [0, INF, 0], [0, 0, INF]])


def test_apply_convention():
    A2, _ = fixture("A2")
    pot = potential_kernel(A2)
    assert np.array_equal(pot.apply([1, 0]), [1, 0])
    assert np.array_equal(pot.apply([0, 1]), [INF, INF])
    with pytest.raises(NonNegativeInputRequired):
        pot.apply([-1, 0])


def test_reduced_examples():
    C2, _ = fixture("C2")
    assert np.allclose(reduced_function(C2, [1, 0], 1.0), [1, 0.5], atol=1e-12)
    assert np.allclose(reduced_function(C2, [1, 0], 0.0), [1, 1], atol=1e-12)
    assert np.array_equal(reduced_function(C2, [0, 0], 3.0), [0, 0])
    with pytest.raises(NonNegativeInputRequired):
        reduced_function(C2, [-1, 0])


def test_reduced_recurrent_pocket():
    # the smallest majorant, not the largest fixed point
    R3, _ = fixture("R3")
    assert np.allclose(reduced_function(R3, [0, 1, 0], 0.0), [0.5, 1, 0], atol=1e-12)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_finite_entries_match_abel_limit(seed):
    rng = np.random.default_rng(seed)
    gen, _ = random_instance(rng)
    pot = potential_kernel(gen)
    fin = np.isfinite(pot.U)
    small = _resolvent(gen.L, 1e-9)
    assert np.allclose(small[fin], pot.U[fin], rtol=1e-6, atol=1e-6)
    # infinite entries blow up along the sweep
    assert np.all(small[~fin] > 1e6)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_reduced_properties(seed):
    rng = np.random.default_rng(seed)
    gen, _ = random_instance(rng)
    f = rng.uniform(size=gen.n) * (rng.uniform(size=gen.n) < 0.6)
    prev = None
    for beta in (10.0, 1.0, 0.1, 0.0):
        v = reduced_function(gen, f, beta)
        assert np.all(v >= f - 1e-12)
        assert cone_membership(v, gen, beta, tol=1e-9).is_supermedian
        slack = (v - f) * (beta * v - gen.L @ v)
        assert np.abs(slack).max() <= 1e-8
        assert np.allclose(v, reduced_lp_oracle(gen, f, beta), atol=1e-8)
        if prev is not None:
            assert np.all(prev <= v + 1e-10)
        # lowering any coordinate breaks feasibility
        i = int(rng.integers(gen.n))
        if v[i] > 1e-9:
            lower = v.copy()
            lower[i] -= 1e-6 * max(1.0, v[i])
            ok = np.all(lower >= f - 1e-12) and cone_membership(lower, gen, beta, tol=1e-12).is_supermedian
            assert not ok
        prev = v


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_balayage_on_a_set(seed):
    rng = np.random.default_rng(seed)
    gen, _ = random_instance(rng)
    u = reduced_function(gen, rng.uniform(size=gen.n), 0.0)
    A = rng.uniform(size=gen.n) < 0.5
    r = reduced_function(gen, u * A, 0.0)
    assert np.allclose(r[A], u[A], atol=1e-9)
    assert np.all(r <= u + 1e-9)
