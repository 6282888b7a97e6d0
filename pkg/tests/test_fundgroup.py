import itertools

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ksba import exact
from ksba.chains import Chain, hj_eval
from ksba.curveconfig import Bridge, ContractionSpec, Curve, CurveConfig, intersection_matrix
from ksba.fundgroup import (BridgeError, FactBase, Presentation, PresentationError, abelianization,
                            format_word, group_order, link_order, mumford_presentation, trivialize)
from oracles import chain_matrix, cofactor_det, star_matrix


def make(curves, inc, kz=0, **kw):
    return CurveConfig(tuple(Curve(*c) for c in curves), {frozenset(k): m for k, m in inc.items()}, kz, **kw)


def chain_config(entries):
    names = [f"E{i}" for i in range(len(entries))]
    cfg = make([(n, -e) for n, e in zip(names, entries)],
               {(names[i], names[i + 1]): 1 for i in range(len(names) - 1)})
    return cfg, ContractionSpec("W", tuple(names))


def star_config(legs, center):
    cfg = make([("g", -center)] + [(f"a{i + 1}", -w) for i, w in enumerate(legs)],
               {("g", f"a{i + 1}"): 1 for i in range(3)})
    return cfg, ContractionSpec("Q", ("a1", "a2", "a3", "g"), "g")


# link orders

def test_link_order_examples():
    assert link_order(*chain_config([6, 2, 2])) == 16
    assert link_order(*chain_config([4])) == 4
    assert link_order(*chain_config([2, 7, 2, 2, 3])) == 81 == abs(cofactor_det(chain_matrix([2, 7, 2, 2, 3])))


def test_link_order_needs_negative_definite():
    with pytest.raises(PresentationError):
        link_order(make([("A", 0)], {}), ContractionSpec("S", ("A",)))


def test_link_order_equals_hj_numerator():
    for length in range(1, 6):
        for entries in itertools.product(range(2, 8), repeat=length):
            assert link_order(*chain_config(entries)) == hj_eval(Chain(entries))[0]


# presentations

def test_mumford_presentation_424_3():
    p = mumford_presentation(*star_config((4, 2, 4), 3))
    assert p.generators == ("a1", "a2", "a3", "g")
    rel = [format_word(w) for w in p.relators]
    assert rel[:4] == ["g a1^-4", "g a2^-2", "g a3^-4", "a1 a2 a3 g^-3"]
    assert len(rel) == 7  # three commutators with the centre
    assert "a1 g a1^-1 g^-1" in rel


def test_mumford_presentation_236_2():
    p = mumford_presentation(*star_config((2, 3, 6), 2))
    assert [format_word(w) for w in p.relators[:4]] == ["g a1^-2", "g a2^-3", "g a3^-6", "a1 a2 a3 g^-2"]


def test_mumford_presentation_single_curve():
    p = mumford_presentation(*chain_config([4]))
    assert p == Presentation(("E0",), ((("E0", -4),),))
    assert str(p) == "< E0 | E0^-4 >"
    assert abelianization(p) == [4]


def test_mumford_presentation_rejects_cycles_and_genus():
    cyc = make([("A", -3), ("B", -3), ("C", -3)], {("A", "B"): 1, ("B", "C"): 1, ("A", "C"): 1})
    with pytest.raises(PresentationError):
        mumford_presentation(cyc, ContractionSpec("S", ("A", "B", "C")))
    with pytest.raises(PresentationError):
        mumford_presentation(make([("A", -3, 1)], {}), ContractionSpec("S", ("A",)))
    double = make([("A", -3), ("B", -3)], {("A", "B"): 2})
    with pytest.raises(PresentationError):
        mumford_presentation(double, ContractionSpec("S", ("A", "B")))


@pytest.mark.parametrize("legs,center,order", [((3, 3, 3), 4, 81), ((4, 2, 4), 3, 64), ((2, 3, 6), 2, 36)])
def test_qeq_abelianization_orders(legs, center, order):
    cfg, spec = star_config(legs, center)
    assert group_order(abelianization(mumford_presentation(cfg, spec))) == order
    assert abs(cofactor_det(star_matrix(legs, center))) == order
    assert link_order(cfg, spec) == order


def test_two_generator_form_loses_a_relator():
    # eliminating g and a2 from the [4,2,4;3] relations leaves a1^4 = a3^4 only, an infinite group
    short = Presentation(("a1", "a3"), ((("a1", 4), ("a3", -4)),))
    assert group_order(abelianization(short)) is None
    assert group_order(abelianization(mumford_presentation(*star_config((4, 2, 4), 3)))) == 64


def test_group_order():
    assert group_order([2, 4]) == 8
    assert group_order([1, 0]) is None
    assert group_order([]) == 1


@st.composite
def plumbing_trees(draw):
    n = draw(st.integers(1, 6))
    parents = [draw(st.integers(0, i - 1)) for i in range(1, n)]
    weights = draw(st.lists(st.integers(2, 8), min_size=n, max_size=n))
    names = [f"v{i}" for i in range(n)]
    cfg = make([(v, -w) for v, w in zip(names, weights)],
               {(names[i + 1], names[p]): 1 for i, p in enumerate(parents)})
    return cfg, ContractionSpec("T", tuple(names))


@settings(max_examples=300, deadline=None)
@given(plumbing_trees())
def test_abelianization_order_is_det(data):
    cfg, spec = data
    m = intersection_matrix(cfg, spec.curves)
    assume(exact.is_negative_definite(m))
    p = mumford_presentation(cfg, spec)
    assert group_order(abelianization(p)) == abs(exact.int_det(m)) == abs(cofactor_det(m))


# fact base

def test_fact_base_gcd_and_union():
    f = FactBase()
    for g in "abc":
        f.add(g)
    assert f.order("a") == 0
    f.restrict("a", 4)
    f.restrict("b", 9)
    assert f.union("a", "b")
    assert f.trivial("a") and f.trivial("b")
    assert not f.union("b", "a")
    assert not f.restrict("c", 0)


# trivialisation engine

def test_single_curve_without_bridges_is_inconclusive():
    cfg, spec = chain_config([4])
    t = trivialize(cfg, [spec], [])
    assert not t.trivial and t.verdict == "inconclusive"
    assert t.remaining == {"E0": 4}
    assert t.abelian_factors == [4]


@pytest.mark.parametrize("name", ["s31", "s32", "s33", "s41", "s42", "s43"])
def test_bundled_bridges_trivialise(configs, name):
    cfg = configs[name]
    t = trivialize(cfg, cfg.contractions)
    assert t.trivial, t.log
    assert t.remaining == {}
    # the same rules replay to the same log
    assert trivialize(cfg, cfg.contractions).log == t.log
    assert all(line.split(":")[0] in {"seed", "A", "B", "C", "D"} for line in t.log)


def test_s31_uses_coprime_orders(configs):
    t = trivialize(configs["s31"], configs["s31"].contractions)
    assert any(line.startswith("B:") for line in t.log)
    assert any("G10" in line and line.startswith("A:") for line in t.log)


def test_s33_order_16_against_order_3(configs):
    cfg = configs["s33"]
    w = next(s for s in cfg.contractions if s.center is None)
    assert link_order(cfg, w) == 16
    t = trivialize(cfg, cfg.contractions)
    assert t.trivial
    assert any("G3" in line for line in t.log)


@pytest.mark.parametrize("name", ["s31", "s32", "s33", "s41", "s42", "s43"])
def test_trivialize_is_monotone_in_bridges(configs, name):
    cfg = configs[name]
    bridges = list(cfg.bridges)
    verdicts = {}
    for r in range(len(bridges) + 1):
        for sub in itertools.combinations(range(len(bridges)), r):
            verdicts[sub] = trivialize(cfg, cfg.contractions, [bridges[i] for i in sub]).trivial
    for sub, ok in verdicts.items():
        if ok:
            for extra in range(len(bridges)):
                bigger = tuple(sorted(set(sub) | {extra}))
                assert verdicts[bigger]


def test_bridge_errors(configs):
    cfg = configs["s31"]
    with pytest.raises(BridgeError):  # G10 also meets L4
        trivialize(cfg, cfg.contractions, [Bridge("G10", ("E1",))])
    with pytest.raises(BridgeError):  # a contracted curve cannot be a bridge
        trivialize(cfg, cfg.contractions, [Bridge("F", ("E1", "L4"))])
    with pytest.raises(BridgeError):
        trivialize(cfg, cfg.contractions, [Bridge("x", ("E1", "E1"), external=True)])
    with pytest.raises(BridgeError):
        trivialize(cfg, cfg.contractions, [Bridge("x", ("E1", "G2"), external=True)])
