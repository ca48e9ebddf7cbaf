from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zxsurgery import rewrite as rw
from zxsurgery import tensorcore as tc
from zxsurgery import zxgraph as zg

S2 = 1 / np.sqrt(2)


def _sound(before, after, tol=1e-10):
    return tc.max_abs_diff(zg.evaluate(before), zg.evaluate(after)) <= tol


def _chain(colors_phases):
    """in - s1 - s2 - ... - out"""
    d = zg.ZXDiagram()
    prev = d.add_input()
    out = d.add_output()
    for color, phase in colors_phases:
        s = d.add_spider(color, phase)
        d.add_edge(prev, s)
        prev = s
    d.add_edge(prev, out)
    return d


def test_fuse_series_adds_phases():
    d = _chain([(zg.GREEN, Fraction(1, 4)), (zg.GREEN, Fraction(1, 2))])
    a, b = d.spiders()
    out, step = rw.fuse_spiders(d, a, b)
    assert step.scalar_delta == 1 and step.rule == rw.SPIDER_FUSION
    (s,) = out.spiders()
    assert out.nodes[s].phase == Fraction(3, 4)
    assert _sound(d, out)


def test_fuse_prep_into_copy_spider():
    d = zg.ZXDiagram()
    o1, o2 = d.add_output(), d.add_output()
    p = d.add_spider(zg.GREEN)
    c = d.add_spider(zg.GREEN)
    for a, b in ((p, c), (c, o1), (c, o2)):
        d.add_edge(a, b)
    out, step = rw.fuse_spiders(d, p, c)
    assert step.scalar_delta == pytest.approx(S2)
    assert out.degree(out.spiders()[0]) == 2
    assert tc.approx_equal(zg.evaluate(out), tc.ket("00") * S2 + tc.ket("11") * S2)
    assert _sound(d, out)


def test_fuse_double_edge_is_specialness():
    d = zg.ZXDiagram()
    i, o = d.add_input(), d.add_output()
    a, b = d.add_spider(zg.GREEN), d.add_spider(zg.GREEN)
    for x, y in ((i, a), (a, b), (a, b), (b, o)):
        d.add_edge(x, y)
    out, step = rw.fuse_spiders(d, a, b)
    assert step.scalar_delta == 1
    assert out.degree(out.spiders()[0]) == 2
    assert _sound(d, out)


def test_fuse_to_closed_scalar():
    d = zg.ZXDiagram()
    a, b = d.add_spider(zg.RED, Fraction(1, 2)), d.add_spider(zg.RED, Fraction(1, 4))
    d.add_edge(a, b)
    out, step = rw.fuse_spiders(d, a, b)
    assert not out.nodes
    assert _sound(d, out)
    d.set_phase(b, Fraction(1, 2))
    with pytest.raises(rw.RewriteError, match="zero"):
        rw.fuse_spiders(d, a, b)


def test_fuse_errors():
    d = zg.cnot_diagram()
    g, r = d.spiders()
    with pytest.raises(rw.RewriteError, match="colours"):
        rw.fuse_spiders(d, g, r)
    d2 = zg.compose_parallel(zg.spider_diagram(zg.GREEN), zg.spider_diagram(zg.GREEN))
    a, b = d2.spiders()
    with pytest.raises(rw.RewriteError, match="adjacent"):
        rw.fuse_spiders(d2, a, b)


def test_remove_identity_cases():
    d = _chain([(zg.GREEN, 0)])
    out, step = rw.remove_identity(d, d.spiders()[0])
    assert not out.spiders() and step.scalar_delta == 1
    assert tc.approx_equal(zg.evaluate(out), tc.I2)
    d = _chain([(zg.GREEN, Fraction(1, 4)), (zg.RED, 0), (zg.GREEN, 1)])
    g1, r, g2 = d.spiders()
    out, _ = rw.remove_identity(d, r)
    assert out.edge_count(g1, g2) == 1
    assert _sound(d, out)
    with pytest.raises(rw.RewriteError, match="phase"):
        rw.remove_identity(d, g1)
    with pytest.raises(rw.RewriteError):
        rw.remove_identity(zg.cnot_diagram(), zg.cnot_diagram().spiders()[0])


def test_remove_identity_refuses_self_loop():
    d = zg.ZXDiagram()
    i = d.add_input()
    a, b = d.add_spider(zg.GREEN, Fraction(1, 2)), d.add_spider(zg.RED)
    d.add_edge(i, a)
    d.add_edge(a, b)
    d.add_edge(a, b)
    with pytest.raises(rw.RewriteError, match="self-loop"):
        rw.remove_identity(d, b)


def _pi_below(spider_color, pi_color, alpha=0):
    d = zg.ZXDiagram()
    i = d.add_input()
    o1, o2 = d.add_output(), d.add_output()
    p = d.add_spider(pi_color, 1)
    s = d.add_spider(spider_color, alpha)
    for a, b in ((i, p), (p, s), (s, o1), (s, o2)):
        d.add_edge(a, b)
    return d, p, s


@pytest.mark.parametrize("spider,pi", [(zg.GREEN, zg.RED), (zg.RED, zg.GREEN)])
def test_copy_pi_through_examples(spider, pi):
    d, p, s = _pi_below(spider, pi)
    out, step = rw.copy_pi_through(d, p, s)
    assert step.scalar_delta == 1
    pis = [n for n in out.spiders() if out.nodes[n].phase == 1]
    assert len(pis) == 2 and all(out.nodes[n].kind == pi for n in pis)
    assert all(out.edge_count(n, s) == 1 for n in pis)
    assert _sound(d, out)
    # reflected orientation
    dd = zg.dagger_diagram(d)
    out2, _ = rw.copy_pi_through(dd, p, s)
    assert _sound(dd, out2)


def test_copy_pi_with_phase_negates_it():
    d, p, s = _pi_below(zg.GREEN, zg.RED, Fraction(1, 4))
    out, step = rw.copy_pi_through(d, p, s)
    assert out.nodes[s].phase == Fraction(7, 4)
    assert step.scalar_delta == pytest.approx(np.exp(1j * np.pi / 4))
    assert _sound(d, out)


def test_copy_pi_errors():
    d, p, s = _pi_below(zg.GREEN, zg.GREEN)
    with pytest.raises(rw.RewriteError, match="opposite"):
        rw.copy_pi_through(d, p, s)
    d, p, s = _pi_below(zg.GREEN, zg.RED)
    d.set_phase(p, Fraction(1, 2))
    with pytest.raises(rw.RewriteError, match="only π"):
        rw.copy_pi_through(d, p, s)


def test_absorb_pi():
    d = zg.ZXDiagram()
    o = d.add_output()
    a = d.add_spider(zg.GREEN, Fraction(1, 4))
    p = d.add_spider(zg.RED, 1)
    d.add_edge(a, p)
    d.add_edge(p, o)
    out, step = rw.absorb_pi(d, p, a)
    assert out.spiders() == [a] and out.nodes[a].phase == Fraction(7, 4)
    assert _sound(d, out)


def _t_negative():
    d = zg.ZXDiagram()
    i, o = d.add_input(), d.add_output()
    m = d.add_spider(zg.GREEN)
    a = d.add_spider(zg.GREEN, Fraction(1, 4))
    p = d.add_spider(zg.RED, 1)
    for x, y in ((i, m), (m, o), (a, p), (p, m)):
        d.add_edge(x, y)
    return d


def test_normalize_t_negative_branch():
    d = _t_negative()
    out, steps = rw.normalize(d)
    (s,) = out.spiders()
    assert out.nodes[s].kind == zg.GREEN and out.nodes[s].phase == Fraction(7, 4)
    assert out.degree(s) == 2
    assert complex(out.scalar) == pytest.approx(np.exp(1j * np.pi / 4) * S2)
    assert [st.rule for st in steps] == [rw.PI_ABSORB, rw.SPIDER_FUSION]
    assert _sound(d, out)


def test_normalize_examples():
    c = zg.cnot_diagram()
    out, steps = rw.normalize(c)
    assert out == c and steps == []
    chain = _chain([(zg.GREEN, 0)] * 5)
    out, _ = rw.normalize(chain)
    assert not out.spiders() and tc.approx_equal(zg.evaluate(out), tc.I2)


def test_frobenius_shapes():
    # unit law: a copy spider with one leg capped by |+> is the identity
    unit = zg.ZXDiagram()
    i, o = unit.add_input(), unit.add_output()
    c, u = unit.add_spider(zg.GREEN), unit.add_spider(zg.GREEN)
    for a, b in ((i, c), (c, o), (c, u)):
        unit.add_edge(a, b)
    ident = zg.wire()
    ident.scalar = S2
    out, _ = rw.normalize(unit)
    assert rw.semantics_equal(unit, ident) and rw.semantics_equal(out, ident)
    # Frobenius slide: (copy ⊗ 1)(1 ⊗ merge) = merge then copy
    left = zg.compose_sequential(
        zg.compose_parallel(zg.wire(), zg.spider_diagram(zg.GREEN, 0, 1, 2)),
        zg.compose_parallel(zg.spider_diagram(zg.GREEN, 0, 2, 1), zg.wire()),
    )
    right = zg.compose_sequential(
        zg.spider_diagram(zg.GREEN, 0, 2, 1), zg.spider_diagram(zg.GREEN, 0, 1, 2)
    )
    assert rw.semantics_equal(rw.normalize(left)[0], right)
    assert rw.semantics_equal(rw.normalize(left)[0], rw.normalize(right)[0])
    # specialness: copy then merge is the identity
    special = zg.compose_sequential(
        zg.spider_diagram(zg.GREEN, 0, 1, 2), zg.spider_diagram(zg.GREEN, 0, 2, 1)
    )
    out, _ = rw.normalize(special)
    assert not out.spiders()
    assert rw.semantics_equal(special, zg.wire())


def test_semantics_equal():
    d = rw.random_diagram(3)
    assert rw.semantics_equal(d, rw.normalize(d)[0])
    assert not rw.semantics_equal(zg.spider_diagram(zg.GREEN, 1), zg.spider_diagram(zg.RED, 1))
    assert not rw.semantics_equal(zg.wire(), zg.wire(2))
    ok, err, reason = rw.semantics_diff(zg.wire(), zg.wire(2))
    assert not ok and "signatures" in reason
    neg = zg.spider_diagram(zg.GREEN, 1)
    neg.scalar = -1
    assert rw.semantics_equal(neg, zg.spider_diagram(zg.GREEN, 1), "sign")
    assert not rw.semantics_equal(neg, zg.spider_diagram(zg.GREEN, 1), "exact")


def test_random_diagram_deterministic():
    assert rw.random_diagram(0) == rw.random_diagram(0)
    for seed in range(200):
        d = rw.random_diagram(seed)
        assert zg.validate(d) == []
        assert len(d.inputs) + len(d.outputs) <= 4 and len(d.spiders()) <= 6
        assert all(1 <= d.degree(s) <= 4 for s in d.spiders())


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**7))
def test_every_rule_application_is_sound(seed):
    d = rw.random_diagram(seed)
    for rule, site in rw.all_sites(d):
        try:
            after, step = rw.apply_rule(d, rule, site)
        except rw.RewriteError:
            continue
        assert step.scalar_delta != 0
        assert _sound(d, after)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**7))
def test_normalize_sound_and_terminating(seed):
    d = rw.random_diagram(seed)
    out, steps = rw.normalize(d)
    assert len(steps) <= len(d.nodes)
    assert _sound(d, out)
    assert rw.normalize(out)[1] == []


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**7))
def test_normalize_commutes_with_dagger(seed):
    d = rw.random_diagram(seed)
    a = rw.normalize(zg.dagger_diagram(d))[0]
    b = zg.dagger_diagram(rw.normalize(d)[0])
    assert rw.semantics_equal(a, b, "exact")
