import copy
from dataclasses import replace

import pytest

from ksba.curveconfig import Curve, Fiber
from ksba.obstruction import RULES, ScriptError, Step, check_derivation, parse_script, surfaces

NAMES = ["s31", "s32", "s33", "s41", "s42", "s43"]


def script(cfg):
    return copy.deepcopy([dict(s) for s in cfg.derivation])


@pytest.mark.parametrize("name", NAMES)
def test_bundled_scripts_validate(configs, name):
    v = check_derivation(configs[name])
    assert v.valid, str(v)
    assert str(v) == "valid"


@pytest.mark.parametrize("name", NAMES)
def test_start_surface_is_rational_elliptic(configs, name):
    """Blowing down every scripted exceptional curve leaves a relatively minimal elliptic surface."""
    cfg = configs[name]
    steps = parse_script(cfg.derivation, cfg)
    blown = [c for s in steps if s.kind == "seed_fibration" for c in s.curves]
    blown += [s.curves[0] for s in steps if s.kind == "add_blowup_curve"]
    y = surfaces(cfg, blown)[0]
    assert y.kz_squared == 0
    for f in cfg.fibers:
        present = [y.curve(c) for c in f.curves if c in y]
        if len(present) == 1:
            # irreducible singular fibre: nodal curve with F^2 = 0
            assert (present[0].self_int, present[0].genus) == (0, 1)
        else:
            assert all((c.self_int, c.genus) == (-2, 0) for c in present)


def test_deleting_a_minus_two_curve_is_rejected(configs):
    cfg = configs["s31"]
    s = script(cfg)
    s.insert(2, {"step": "delete_minus_one_curve", "curve": "L4"})
    v = check_derivation(cfg, s)
    assert not v.valid
    assert (v.step, v.rule) == (2, RULES["delete_minus_one_curve"]) == (2, "(-1)-curve lemma")
    assert "C^2=-2" in v.reason
    assert "(-1)-curve lemma" in str(v)


def test_ade_touching_d_is_rejected(configs):
    cfg = configs["s31"]
    s = script(cfg)
    s.insert(2, {"step": "add_ade", "curves": ["L6"]})
    v = check_derivation(cfg, s)
    assert not v.valid
    assert v.rule == "ADE lemma"
    assert "disjoint" in v.reason


def test_ade_must_be_minus_two(configs):
    cfg = configs["s31"]
    s = script(cfg)
    s[1] = {"step": "add_ade", "curves": ["L4", "L5", "E1"]}
    v = check_derivation(cfg, s)
    assert not v.valid and v.rule == "ADE lemma" and v.step == 1


def test_missing_curve_fails_coverage(configs):
    cfg = configs["s31"]
    s = [step for step in script(cfg) if step.get("curve") != "E2"]
    v = check_derivation(cfg, s)
    assert not v.valid
    assert v.rule == "coverage" and "E2" in v.reason


def test_dropping_transverse_assertion_is_rejected(configs):
    cfg = configs["s33"]
    s = script(cfg)
    for step in s:
        step.pop("transverse", None)
    v = check_derivation(cfg, s)
    assert not v.valid
    assert v.rule == "(-1)-curve lemma" and "multiplicity 2" in v.reason


def test_seed_must_come_first(configs):
    cfg = configs["s31"]
    s = script(cfg)
    s[0], s[1] = s[1], s[0]
    v = check_derivation(cfg, s)
    assert not v.valid


def test_seed_needs_nodal_or_snc_fibre(configs):
    cfg = configs["s31"]
    other = tuple(replace(f, kind="other") if f.name == "F" else f for f in cfg.fibers)
    v = check_derivation(replace(cfg, fibers=other))
    assert not v.valid and v.rule == "fibration seed lemma" and v.step == 0


def test_seed_node_marker_must_sit_on_the_fibre(configs):
    cfg = configs["s31"]
    s = script(cfg)
    s[0] = {"step": "seed_fibration", "fibers": ["F"], "nodes": ["G1", "G6"]}
    v = check_derivation(cfg, s)
    assert not v.valid and v.rule == "fibration seed lemma"


def test_reordering_independent_steps_keeps_validity(configs):
    cfg = configs["s31"]
    s = script(cfg)
    s[2], s[3] = s[3], s[2]  # E1 and E2 are added independently
    assert check_derivation(cfg, s).valid


def test_appending_disjoint_ade_keeps_validity(configs):
    cfg = configs["s31"]
    extra = replace(cfg, curves=cfg.curves + (Curve("A1", -2), Curve("A2", -2)),
                    incidences={**cfg.incidences, frozenset(("A1", "A2")): 1})
    s = script(cfg) + [{"step": "add_ade", "curves": ["A1", "A2"]}]
    assert check_derivation(extra, s).valid


def test_inconsistent_blow_up_order(configs):
    cfg = configs["s43"]
    s = script(cfg)
    # G3 is blown up at a point of G2, so G2 cannot be the last blow-up
    i = next(i for i, step in enumerate(s) if step.get("curve") == "G2")
    s.append(s.pop(i))
    v = check_derivation(cfg, s)
    assert not v.valid
    assert v.rule == "blow-up lemma"


@pytest.mark.parametrize("bad", [
    [{"step": "teleport", "curve": "E1"}],
    [{"step": "add_minus_one_curve", "curve": "NOPE"}],
    [{"step": "seed_fibration", "fibers": ["NOPE"]}],
    [{"step": "add_minus_one_curve"}],
    [{"step": "add_ade", "curves": ["L4"], "colour": "red"}],
])
def test_malformed_scripts_raise(configs, bad):
    with pytest.raises(ScriptError):
        check_derivation(configs["s31"], bad)


def test_blowing_up_twice_raises(configs):
    cfg = configs["s31"]
    s = script(cfg) + [{"step": "add_blowup_curve", "curve": "G2"}]
    with pytest.raises(ScriptError):
        check_derivation(cfg, s)


def test_empty_script_is_invalid(configs):
    v = check_derivation(configs["s31"], [])
    assert not v.valid and v.step == 0


def test_step_round_trip(configs):
    cfg = configs["s33"]
    steps = parse_script(cfg.derivation, cfg)
    assert [s.to_dict() for s in steps] == [dict(s) for s in cfg.derivation]
    assert check_derivation(cfg, steps).valid
    assert Step("add_ade", ("L1",)).to_dict() == {"step": "add_ade", "curves": ["L1"]}


def test_i0_star_seeded_as_snc(configs):
    cfg = configs["s41"]
    assert cfg.fiber("I0*").kind == "snc-reduced"
    assert isinstance(cfg.fiber("I0*"), Fiber)
    assert check_derivation(cfg).valid
