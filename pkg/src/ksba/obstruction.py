"""Replay checker for derivations of vanishing local-to-global obstructions.

A derivation grows an SNC divisor ``D`` step by step with moves that keep
``H^2`` of the log tangent sheaf unchanged (or start from a fibration where
it is known to vanish).  Only the side conditions of each move are checked;
no cohomology is computed.

Moves (``"step"`` values in the ``derivation`` array of a configuration):

``seed_fibration``  ``{"fibers": [...], "nodes": [...]}``
    Start from one or two fibres of the elliptic fibration.  ``nodes`` are the
    exceptional curves of blow-ups at nodes of the fibres; they are performed
    first and join ``D``.
``add_blowup_curve``  ``{"curve": name}``
    Blow up a point and add the exceptional curve to ``D``.
``add_minus_one_curve`` / ``delete_minus_one_curve``  ``{"curve": name}``
    Add or remove a smooth rational (-1)-curve meeting ``D`` transversally.

The add/delete moves accept ``"transverse": [names]``: the script asserts
that the curve meets each listed member of ``D`` in distinct transverse
points, so an intersection number above 1 is still a normal crossing.  The
configuration only stores total intersection numbers and cannot tell this
apart from a tangency, so without the assertion any multiplicity above 1 is
rejected.
``add_ade``  ``{"curves": [...]}``
    Add (-2)-trees (ADE configurations) disjoint from ``D``.

Blow-ups happen in script order, so the surface at the start of the script
is the configuration with every scripted exceptional curve blown down in
reverse order.  Conditions are checked on the surface as it is at that step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .contraction import _graph, _is_tree
from .curveconfig import ConfigError, ContractionSpec, CurveConfig, blow_down

# move -> name of the rule it relies on
RULES = {
    "seed_fibration": "fibration seed lemma",
    "add_blowup_curve": "blow-up lemma",
    "add_minus_one_curve": "(-1)-curve lemma",
    "delete_minus_one_curve": "(-1)-curve lemma",
    "add_ade": "ADE lemma",
}

_FIELDS = {
    "seed_fibration": ({"fibers"}, {"nodes"}),
    "add_blowup_curve": ({"curve"}, {"transverse"}),
    "add_minus_one_curve": ({"curve"}, {"transverse"}),
    "delete_minus_one_curve": ({"curve"}, {"transverse"}),
    "add_ade": ({"curves"}, set()),
}


class ScriptError(ValueError):
    """Malformed script or reference to something that does not exist."""


@dataclass(frozen=True)
class Step:
    kind: str
    curves: Tuple[str, ...] = ()
    fibers: Tuple[str, ...] = ()
    transverse: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        if self.kind == "seed_fibration":
            return {"step": self.kind, "fibers": list(self.fibers), "nodes": list(self.curves)}
        if self.kind == "add_ade":
            return {"step": self.kind, "curves": list(self.curves)}
        out = {"step": self.kind, "curve": self.curves[0]}
        if self.transverse:
            out["transverse"] = list(self.transverse)
        return out


@dataclass(frozen=True)
class DerivationVerdict:
    valid: bool
    step: Optional[int] = None
    rule: str = ""
    reason: str = ""

    def __str__(self) -> str:
        if self.valid:
            return "valid"
        return f"invalid at step {self.step} ({self.rule}): {self.reason}"


def parse_script(raw: Sequence[Mapping], config: CurveConfig) -> List[Step]:
    steps = []
    for i, item in enumerate(raw):
        kind = item.get("step")
        if kind not in _FIELDS:
            raise ScriptError(f"step {i}: unknown move {kind!r}")
        required, optional = _FIELDS[kind]
        keys = set(item) - {"step"}
        if not required <= keys or keys - required - optional:
            raise ScriptError(f"step {i}: {kind} takes {sorted(required | optional)}, got {sorted(keys)}")
        if kind == "seed_fibration":
            fibers = tuple(item["fibers"])
            for f in fibers:
                try:
                    config.fiber(f)
                except KeyError:
                    raise ScriptError(f"step {i}: unknown fiber {f!r}") from None
            step = Step(kind, tuple(item.get("nodes", ())), fibers)
        elif kind == "add_ade":
            step = Step(kind, tuple(item["curves"]))
        else:
            step = Step(kind, (item["curve"],), transverse=tuple(item.get("transverse", ())))
        for c in step.curves + step.transverse:
            if c not in config:
                raise ScriptError(f"step {i}: unknown curve {c!r}")
        steps.append(step)
    return steps


def _blowups(steps: Sequence[Step]) -> List[str]:
    out = []
    for s in steps:
        if s.kind == "seed_fibration":
            out.extend(s.curves)
        elif s.kind == "add_blowup_curve":
            out.append(s.curves[0])
    return out


def surfaces(config: CurveConfig, blowups: Sequence[str]) -> List[CurveConfig]:
    """``[Y, Y_1, ..., Z]``: the configuration after each scripted blow-up."""
    bare = CurveConfig(config.curves, config.incidences, config.kz_squared)
    states = [bare]
    for name in reversed(blowups):
        states.append(blow_down(states[-1], name))
    return states[::-1]


class _Invalid(Exception):
    def __init__(self, reason: str):
        self.reason = reason


def _transversal(state: CurveConfig, curve: str, divisor: set, transverse=()):
    c = state.curve(curve)
    if c.genus:
        raise _Invalid(f"{curve} is not smooth rational (p_a={c.genus})")
    for other in divisor:
        if other != curve and other not in transverse and state.meet(curve, other) > 1:
            raise _Invalid(f"{curve} meets {other} with multiplicity {state.meet(curve, other)}; D + {curve} is not nodal")


def _minus_one(state: CurveConfig, curve: str):
    c = state.curve(curve)
    if c.self_int != -1 or c.genus != 0:
        raise _Invalid(f"{curve} is not a (-1)-curve here (C^2={c.self_int}, p_a={c.genus})")


def check_derivation(config: CurveConfig, script=None, sets: Optional[Sequence[ContractionSpec]] = None
                     ) -> DerivationVerdict:
    """Replay ``script`` (default: the configuration's own derivation) and check every move."""
    raw = config.derivation if script is None else script
    steps = raw if raw and isinstance(raw[0], Step) else parse_script(raw, config)
    if sets is None:
        sets = config.contractions
    if not steps:
        return DerivationVerdict(False, 0, RULES["seed_fibration"], "empty derivation")
    blowups = _blowups(steps)
    if len(set(blowups)) != len(blowups):
        raise ScriptError("a curve is blown up twice")
    try:
        states = surfaces(config, blowups)
    except ConfigError as exc:
        return DerivationVerdict(False, None, RULES["add_blowup_curve"], f"blow-up order is inconsistent: {exc}")
    level = 0
    divisor: set = set()
    for i, step in enumerate(steps):
        rule = RULES[step.kind]
        try:
            if step.kind == "seed_fibration":
                if i != 0:
                    raise _Invalid("the fibration seed must be the first move")
                if not 1 <= len(step.fibers) <= 2:
                    raise _Invalid("seed one or two fibres")
                level += len(step.curves)
                state = states[level]
                _seed(state, config, step, divisor)
            elif step.kind == "add_blowup_curve":
                level += 1
                state = states[level]
                _transversal(state, step.curves[0], divisor, step.transverse)
                divisor.add(step.curves[0])
            elif step.kind == "add_minus_one_curve":
                state = states[level]
                (g,) = step.curves
                if g in divisor:
                    raise _Invalid(f"{g} is already in D")
                _minus_one(state, g)
                _transversal(state, g, divisor, step.transverse)
                divisor.add(g)
            elif step.kind == "delete_minus_one_curve":
                state = states[level]
                (g,) = step.curves
                if g not in divisor:
                    raise _Invalid(f"{g} is not in D")
                _minus_one(state, g)
                _transversal(state, g, divisor, step.transverse)
                divisor.discard(g)
            elif step.kind == "add_ade":
                state = states[level]
                _ade(state, step.curves, divisor)
                divisor.update(step.curves)
        except _Invalid as exc:
            return DerivationVerdict(False, i, rule, exc.reason)
    missing = sorted({n for s in sets for n in s.curves} - divisor)
    if missing:
        return DerivationVerdict(False, len(steps), "coverage", f"D misses contracted curves {missing}")
    return DerivationVerdict(True)


def _seed(state: CurveConfig, config: CurveConfig, step: Step, divisor: set):
    exceptional = set(step.curves)
    later = set(config.names) - set(state.names)
    comps_by_fiber: Dict[str, List[str]] = {}
    for f in step.fibers:
        fiber = config.fiber(f)
        if fiber.kind == "other":
            raise _Invalid(f"fibre {f} is neither nodal nor reduced SNC")
        comps = [c for c in fiber.curves if c not in later and c not in exceptional]
        if not comps:
            raise _Invalid(f"fibre {f} has no components on this surface")
        comps_by_fiber[f] = comps
    for f, comps in comps_by_fiber.items():
        nodes = [g for g in step.curves if any(state.meet(g, c) for c in comps)]
        total = {g: sum(state.meet(g, c) for c in comps) for g in nodes}
        if config.fiber(f).kind == "nodal":
            if len(nodes) != 1 or total[nodes[0]] != 2:
                raise _Invalid(f"fibre {f} needs exactly one blown-up node, found {sorted(nodes)}")
        for a in comps:
            if state.curve(a).genus:
                raise _Invalid(f"{a} is still singular after the node blow-ups")
            for b in comps:
                if a < b and state.meet(a, b) > 1:
                    raise _Invalid(f"fibre components {a} and {b} meet with multiplicity {state.meet(a, b)}")
        divisor.update(comps)
    for g in step.curves:
        if not any(state.meet(g, c) for comps in comps_by_fiber.values() for c in comps):
            raise _Invalid(f"node marker {g} does not lie over a seeded fibre")
    divisor.update(step.curves)


def _ade(state: CurveConfig, curves: Sequence[str], divisor: set):
    for c in curves:
        cur = state.curve(c)
        if cur.self_int != -2 or cur.genus:
            raise _Invalid(f"{c} is not a smooth rational (-2)-curve here (C^2={cur.self_int})")
        if c in divisor:
            raise _Invalid(f"{c} is already in D")
        touching = sorted(d for d in divisor if state.meet(c, d))
        if touching:
            raise _Invalid(f"{c} meets D along {touching}; ADE configurations must be disjoint from D")
    adj = _graph(state, list(curves))
    if adj is None:
        raise _Invalid("ADE curves meet with multiplicity > 1")
    # every connected component must be a tree
    todo = set(curves)
    while todo:
        start = todo.pop()
        comp = {start}
        stack = [start]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in comp:
                    comp.add(nb)
                    stack.append(nb)
        todo -= comp
        if not _is_tree({n: [m for m in adj[n] if m in comp] for n in comp}):
            raise _Invalid(f"{sorted(comp)} is not a tree")
