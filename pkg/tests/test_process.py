import numpy as np
import pytest
from hypothesis import given, settings

from potlab.errors import NotInessential
from potlab.fixtures import fixture
from potlab.oracles import random_instance
from potlab.process import (inessential_closure, inessential_iterates, m_version_residual,
                            modification_equivalence_report, restriction, strict_classify, trivial_modification)
from potlab.resolvent import cone_membership

from conftest import seeds


def test_strict_examples():
    gen, w = fixture("C2")
    r = strict_classify(gen, [w.m])
    assert r.strict_recurrent and r.strict_irreducible and r.reference_measure_ok == (True,)
    gen, w = fixture("A2")
    r = strict_classify(gen, [[0, 1], [1, 1]])
    assert not r.strict_irreducible and r.reference_measure_ok == (False, True)
    gen, w = fixture("T2")
    r = strict_classify(gen, [w.m])
    assert r.strict_transient and not r.strict_irreducible


def test_strict_recurrence_is_global():
    gen, w = fixture("R3")
    sub, _ = restriction(gen, w, [1, 2])
    r = strict_classify(sub)
    assert r.every_state_recurrent and not r.strict_recurrent


def test_restriction_examples():
    gen, w = fixture("A2")
    sub, ws = restriction(gen, w, [1])
    assert np.array_equal(sub.L, [[0.0]]) and np.array_equal(ws.m, [1.0])
    gen, w = fixture("C2")
    sub, _ = restriction(gen, w, [0, 1])
    assert np.array_equal(sub.L, gen.L)
    with pytest.raises(NotInessential):
        restriction(gen, w, [0])


def test_modification_examples():
    gen, w = fixture("A2")
    assert np.array_equal(trivial_modification(gen, w, [1]).L, [[-1, 0], [0, 0]])
    gen, w = fixture("C2")
    assert np.array_equal(trivial_modification(gen, w, [0, 1]).L, gen.L)
    gen, w = fixture("R3")
    assert np.array_equal(trivial_modification(gen, w, [1, 2]).L, [[-1, 0, 0], [0, 0, 0], [0, 0, 0]])


def test_closure_examples():
    assert inessential_closure(*fixture("A2"), [1]) == (1,)
    assert inessential_closure(*fixture("C2"), [0, 1]) == (0, 1)
    assert inessential_closure(*fixture("R3"), [1, 2]) == (1, 2)


def test_report_examples():
    rep = modification_equivalence_report(*fixture("T2"))
    assert rep.consistent and rep["P2.1.14.ii"] and rep.witnesses["P2.1.14.ii"] == (0, 1)
    rep = modification_equivalence_report(*fixture("A2"))
    assert rep.consistent and rep["P2.1.18.ii"] and rep.witnesses["P2.1.18.ii"] == (1,)
    rep = modification_equivalence_report(*fixture("R3"))
    assert rep.consistent and not rep["P2.1.18.ii"] and rep.notes


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_modifications_random(seed):
    rng = np.random.default_rng(seed)
    gen, w = random_instance(rng)
    rep = modification_equivalence_report(gen, w)
    assert rep.consistent, rep.violations
    E0 = sorted(set(w.support) | {x for x in range(gen.n) if rng.uniform() < 0.5})
    seq = inessential_iterates(gen, E0)
    assert len(seq) - 1 <= gen.n
    F = inessential_closure(gen, w, E0)
    out = np.ones(gen.n)
    out[list(F)] = 0
    assert cone_membership(out, gen, 0.0).is_excessive
    mod = trivial_modification(gen, w, F)
    assert m_version_residual(gen, mod, w) <= 1e-12
    sr = strict_classify(gen, [], w)
    assert sr.report.consistent
