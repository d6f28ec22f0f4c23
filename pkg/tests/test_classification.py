import numpy as np
import pytest
from hypothesis import given, settings

from potlab.classification import (absorbing_report, absorbing_sets, invariant_function_space,
                                   invariant_function_test, invariant_partition, is_m_irreducible,
                                   is_m_recurrent, is_m_transient)
from potlab.errors import SupportTooLargeForEnumeration
from potlab.fixtures import fixture
from potlab.oracles import random_instance
from potlab.resolvent import adjoint_generator, weighted_space

from conftest import seeds


def S(*xs):
    return frozenset(xs)


@pytest.mark.parametrize("name,transient,recurrent,irreducible", [
    ("T2", True, False, False),
    ("C2", False, True, True),
    ("A2", False, True, True),
    ("R3", False, True, False),
    ("K1", True, False, True),
])
def test_fixture_classes(name, transient, recurrent, irreducible):
    gen, w = fixture(name)
    t, r = is_m_transient(gen, w), is_m_recurrent(gen, w)
    irr, rep = is_m_irreducible(gen, w)
    assert t.consistent and r.consistent and rep.consistent
    assert t.verdict is transient and r.verdict is recurrent and irr is irreducible
    assert len(t.verdicts) == 4


def test_absorbing_examples():
    assert absorbing_sets(*fixture("C2")).sets == (S(), S(0, 1))
    assert set(absorbing_sets(*fixture("R3")).sets) == {S(), S(1), S(2), S(1, 2)}
    assert set(absorbing_sets(*fixture("T2")).sets) == {S(), S(0), S(1), S(0, 1)}
    lat = absorbing_sets(*fixture("R3"), with_witnesses=True)
    for A, u in lat.witnesses.items():
        assert np.array_equal(np.abs(u[[1, 2]]) <= 1e-12, [1 in A, 2 in A])


def test_absorbing_cap(monkeypatch):
    gen, w = fixture("T2")
    lat = absorbing_sets(gen, w, cap=1)
    assert not lat.exhaustive and lat.atoms == (S(0), S(1))
    with pytest.raises(SupportTooLargeForEnumeration):
        absorbing_sets(gen, w, cap=1, strict=True)
    monkeypatch.setenv("POTLAB_SUBSET_CAP", "1")
    assert not absorbing_sets(gen, w).exhaustive


def test_partition_examples():
    assert invariant_partition(*fixture("C2")) == ((0, 1),)
    assert invariant_partition(*fixture("R3")) == ((1,), (2,))
    assert invariant_partition(*fixture("A2")) == ((1,),)


def test_invariant_function_examples():
    gen, w = fixture("C2")
    rep = invariant_function_test(gen, w, [2.0, 2.0])
    assert rep.consistent and rep.verdict is True
    rep = invariant_function_test(gen, w, [1.0, 0.0])
    assert rep.consistent and rep.verdict is False
    gen, w = fixture("R3")
    rep = invariant_function_test(gen, w, [0.0, 1.0, 0.0])
    assert rep.consistent and rep.verdict is True


def test_irreducible_dichotomy_example():
    irr, rep = is_m_irreducible(*fixture("C2"))
    assert irr and rep["P2.9.i"] and rep["P2.5"]
    irr, rep = is_m_irreducible(*fixture("T2"))
    assert not irr and rep["P2.5"]


def test_one_sided_identity_recorded():
    # killing makes the one-point identities informative without forcing invariance
    gen, w = fixture("K1")
    rep = invariant_function_test(gen, w, [1.0], p=np.inf)
    assert "R2.16.iii" in rep.verdicts and rep.consistent


@settings(max_examples=120, deadline=None)
@given(seeds)
def test_harnesses_consistent(seed):
    rng = np.random.default_rng(seed)
    gen, w = random_instance(rng)
    star = adjoint_generator(gen, w)
    t, r = is_m_transient(gen, w, star), is_m_recurrent(gen, w, star)
    irr, rep = is_m_irreducible(gen, w, star)
    assert t.consistent and r.consistent and rep.consistent
    # duality stability
    ws = weighted_space(star, w.m, tol=1e-9)
    assert is_m_transient(star, ws).verdict == t.verdict
    assert is_m_recurrent(star, ws).verdict == r.verdict
    assert is_m_irreducible(star, ws)[0] == irr
    if irr:
        assert t.verdict != r.verdict


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_absorbing_reports_and_lattice(seed):
    rng = np.random.default_rng(seed)
    gen, w = random_instance(rng, n_max=8)
    lat = absorbing_sets(gen, w)
    assert lat.closure_verified
    fam = set(lat.sets)
    for a in fam:
        for b in fam:
            assert a | b in fam and a & b in fam
    for A in lat.sets:
        assert absorbing_report(gen, w, A).consistent
    # a few non-absorbing subsets too
    sup = list(w.support)
    for _ in range(3):
        A = frozenset(x for x in sup if rng.uniform() < 0.5)
        rep = absorbing_report(gen, w, A)
        assert rep.consistent and (rep.verdict is (A in fam))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_invariant_functions(seed):
    rng = np.random.default_rng(seed)
    gen, w = random_instance(rng, n_max=8)
    rec = is_m_recurrent(gen, w).verdict
    atoms = invariant_partition(gen, w)
    u = np.zeros(gen.n)
    for a in atoms:
        u[list(a)] = rng.normal()
    rep = invariant_function_test(gen, w, u, recurrent=rec)
    assert rep.consistent and rep["T2.19.v"] and rep["T2.19.iii"]
    # lattice operations keep invariance
    for v in (np.abs(u), np.maximum(u, 0), np.maximum(-u, 0), np.minimum(u, 0.3)):
        assert invariant_function_test(gen, w, v, recurrent=rec)["T2.19.iii"]
    # random vectors: consistent either way
    rep = invariant_function_test(gen, w, rng.normal(size=gen.n), recurrent=rec)
    assert rep.consistent
    # invariant functions span the atom indicators
    assert invariant_function_space(gen, w).shape[1] == len(atoms)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_recurrent_irreducible_iff_bounded_invariants_constant(seed):
    rng = np.random.default_rng(seed)
    gen, w = random_instance(rng, n_max=8)
    if not is_m_recurrent(gen, w).verdict:
        return
    irr = is_m_irreducible(gen, w)[0]
    assert irr == (invariant_function_space(gen, w).shape[1] == 1)
    # absorbing sets are exactly the invariant sets
    lat = absorbing_sets(gen, w)
    atoms = invariant_partition(gen, w)
    unions = {frozenset().union(*[frozenset(a) for a, keep in zip(atoms, bits) if keep])
              for bits in np.ndindex(*(2,) * len(atoms))}
    assert set(lat.sets) == unions
