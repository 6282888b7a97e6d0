"""Dual-graph model of a curve configuration on a smooth rational surface.

A configuration records named curves with their self-intersections and
arithmetic genera, total pairwise intersection numbers, and ``K_Z^2`` of the
ambient surface.  Configurations are immutable; :func:`blow_up` and
:func:`blow_down` return new ones.

The JSON file format (see ``data/*.json``)::

    {"kz_squared": int,
     "curves": [{"name": str, "self_int": int, "genus": int?}, ...],
     "incidences": [{"a": str, "b": str, "mult": int}, ...],
     "fibers": [{"name": str, "kind": str?, "components": [{"curve": str, "mult": int}]}]?,
     "contractions": [{"name": str, "curves": [str, ...], "center": str?}, ...],
     "bridges": [{"curve": str, "ends": [str, ...], "external": bool?}]?,
     "pullback": {str: "p/q"}?,
     "canonical_class": {str: "p/q"}?,
     "derivation": [{"step": str, ...}]?,
     "notes": [str]?}
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

TOP_KEYS = {
    "kz_squared", "curves", "incidences", "fibers", "contractions", "bridges",
    "pullback", "canonical_class", "derivation", "notes",
}
FIBER_KINDS = ("nodal", "snc-reduced", "other")


class ConfigError(ValueError):
    """Invalid configuration data; ``location`` points into the document."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


@dataclass(frozen=True)
class Curve:
    name: str
    self_int: int
    genus: int = 0


@dataclass(frozen=True)
class Fiber:
    name: str
    components: Tuple[Tuple[str, int], ...]
    kind: str = "nodal"

    @property
    def curves(self) -> Tuple[str, ...]:
        return tuple(c for c, _ in self.components)


@dataclass(frozen=True)
class ContractionSpec:
    """A named set of curves to contract; ``center`` marks the node of a star."""

    name: str
    curves: Tuple[str, ...]
    center: Optional[str] = None


@dataclass(frozen=True)
class Bridge:
    """A rational curve whose complement relation links loops around ``ends``.

    ``external`` bridges are curves of the surface that are not drawn in the
    configuration (e.g. an extra section); their contacts are taken on trust.
    """

    curve: str
    ends: Tuple[str, ...]
    external: bool = False


@dataclass(frozen=True)
class BlowUpSpec:
    """Blow up a point lying on ``center`` curves with the given multiplicities."""

    center: Tuple[Tuple[str, int], ...]
    new_name: str

    def __post_init__(self):
        names = [c for c, _ in self.center]
        if len(set(names)) != len(names):
            raise ValueError("a curve may be listed only once in a blow-up centre")
        if any(m < 1 for _, m in self.center):
            raise ValueError("multiplicities must be >= 1")


def _key(a: str, b: str) -> FrozenSet[str]:
    return frozenset((a, b))


@dataclass(frozen=True)
class CurveConfig:
    curves: Tuple[Curve, ...]
    incidences: Mapping[FrozenSet[str], int]
    kz_squared: int
    fibers: Tuple[Fiber, ...] = ()
    contractions: Tuple[ContractionSpec, ...] = ()
    bridges: Tuple[Bridge, ...] = ()
    pullback: Mapping[str, Fraction] = field(default_factory=dict)
    canonical_class: Mapping[str, Fraction] = field(default_factory=dict)
    derivation: Tuple[Mapping, ...] = ()
    notes: Tuple[str, ...] = ()

    def __post_init__(self):
        seen = set()
        for c in self.curves:
            if c.name in seen:
                raise ConfigError(f"duplicate curve name {c.name!r}")
            if c.genus < 0:
                raise ConfigError(f"negative genus on {c.name!r}")
            seen.add(c.name)
        inc = {}
        for k, m in self.incidences.items():
            if len(k) != 2:
                raise ConfigError(f"self-pair in incidences: {sorted(k)}")
            for name in k:
                if name not in seen:
                    raise ConfigError(f"incidence references unknown curve {name!r}")
            if m < 0:
                raise ConfigError(f"negative incidence {sorted(k)}")
            if m:
                inc[frozenset(k)] = int(m)
        object.__setattr__(self, "incidences", inc)
        object.__setattr__(self, "_by_name", {c.name: c for c in self.curves})

    def __hash__(self):
        return hash((self.curves, frozenset(self.incidences.items()), self.kz_squared))

    # lookups

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(c.name for c in self.curves)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def curve(self, name: str) -> Curve:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown curve {name!r}") from None

    def meet(self, a: str, b: str) -> int:
        """Intersection number ``a . b`` (self-intersection when ``a == b``)."""
        if a == b:
            return self.curve(a).self_int
        self.curve(a), self.curve(b)
        return self.incidences.get(_key(a, b), 0)

    def neighbors(self, name: str) -> Dict[str, int]:
        self.curve(name)
        out = {}
        for k, m in self.incidences.items():
            if name in k:
                (other,) = k - {name}
                out[other] = m
        return out

    def dot(self, divisor: Mapping[str, Fraction], name: str) -> Fraction:
        """Intersection of a Q-divisor supported on configuration curves with a curve."""
        return sum((Fraction(c) * self.meet(d, name) for d, c in divisor.items()), Fraction(0))

    def contraction(self, name: str) -> ContractionSpec:
        for s in self.contractions:
            if s.name == name:
                return s
        raise KeyError(f"unknown contraction set {name!r}")

    def fiber(self, name: str) -> Fiber:
        for f in self.fibers:
            if f.name == name:
                return f
        raise KeyError(f"unknown fiber {name!r}")


def canonical_degree(config: CurveConfig, curve_name: str) -> int:
    """``K . C = 2 p_a - 2 - C^2`` by adjunction."""
    c = config.curve(curve_name)
    return 2 * c.genus - 2 - c.self_int


def intersection_matrix(config: CurveConfig, subset: Sequence[str]) -> List[List[int]]:
    return [[config.meet(a, b) for b in subset] for a in subset]


def _referenced(config: CurveConfig) -> set:
    refs = set(config.pullback) | set(config.canonical_class)
    for f in config.fibers:
        refs.update(f.curves)
    for s in config.contractions:
        refs.update(s.curves)
    for b in config.bridges:
        refs.update(b.ends)
        refs.add(b.curve)
    return refs


def blow_up(config: CurveConfig, spec: BlowUpSpec) -> CurveConfig:
    """Blow up one point; the exceptional curve gets self-intersection -1.

    A curve passing through the point with multiplicity ``m`` loses ``m^2`` from
    its self-intersection and ``m(m-1)/2`` from its arithmetic genus; two curves
    through the point lose ``m_i m_j`` of their intersection number.
    """
    if spec.new_name in config:
        raise ConfigError(f"curve {spec.new_name!r} already exists")
    for name, m in spec.center:
        config.curve(name)
    curves = {c.name: c for c in config.curves}
    inc = dict(config.incidences)
    center = list(spec.center)
    for i, (a, ma) in enumerate(center):
        for b, mb in center[i + 1:]:
            left = inc.get(_key(a, b), 0) - ma * mb
            if left < 0:
                raise ConfigError(f"the point is not on both {a!r} and {b!r} with these multiplicities")
            inc[_key(a, b)] = left
    for a, m in center:
        c = curves[a]
        genus = c.genus - m * (m - 1) // 2
        if genus < 0:
            raise ConfigError(f"{a!r} has no point of multiplicity {m}")
        curves[a] = replace(c, self_int=c.self_int - m * m, genus=genus)
        inc[_key(a, spec.new_name)] = m
    new = Curve(spec.new_name, -1, 0)
    return replace(
        config,
        curves=tuple(curves[c.name] for c in config.curves) + (new,),
        incidences=inc,
        kz_squared=config.kz_squared - 1,
    )


def blow_down(config: CurveConfig, curve_name: str) -> CurveConfig:
    """Contract a smooth rational (-1)-curve, inverting :func:`blow_up`."""
    e = config.curve(curve_name)
    if e.self_int != -1 or e.genus != 0:
        raise ConfigError(f"{curve_name!r} is not a (-1)-curve (C^2={e.self_int}, p_a={e.genus})")
    if curve_name in _referenced(config):
        raise ConfigError(f"{curve_name!r} is referenced by fibers, contractions or bridges")
    nb = config.neighbors(curve_name)
    curves = {c.name: c for c in config.curves if c.name != curve_name}
    inc = {k: m for k, m in config.incidences.items() if curve_name not in k}
    items = sorted(nb.items())
    for i, (a, ma) in enumerate(items):
        c = curves[a]
        curves[a] = replace(c, self_int=c.self_int + ma * ma, genus=c.genus + ma * (ma - 1) // 2)
        for b, mb in items[i + 1:]:
            inc[_key(a, b)] = inc.get(_key(a, b), 0) + ma * mb
    return replace(
        config,
        curves=tuple(curves[c.name] for c in config.curves if c.name != curve_name),
        incidences=inc,
        kz_squared=config.kz_squared + 1,
    )


# -- serialisation ---------------------------------------------------------

_RATIONAL = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(text, location: str = "") -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise ConfigError(f"expected a rational 'p/q' string, got {text!r}", location)
    m = _RATIONAL.match(str(text))
    if not m or (m.group(2) is not None and int(m.group(2)) == 0):
        raise ConfigError(f"malformed rational {text!r}", location)
    return Fraction(int(m.group(1)), int(m.group(2) or 1))


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _expect(obj, kind, location):
    if not isinstance(obj, kind) or isinstance(obj, bool) and kind is int:
        raise ConfigError(f"expected {kind.__name__}, got {type(obj).__name__}", location)
    return obj


def _keys(obj: dict, allowed: Iterable[str], required: Iterable[str], location: str):
    _expect(obj, dict, location)
    extra = set(obj) - set(allowed)
    if extra:
        raise ConfigError(f"unknown key(s) {sorted(extra)}", location)
    for k in required:
        if k not in obj:
            raise ConfigError(f"missing key {k!r}", location)


def config_from_dict(doc: Mapping) -> CurveConfig:
    _keys(doc, TOP_KEYS, ("kz_squared", "curves"), "$")
    curves = []
    names = set()
    for i, c in enumerate(_expect(doc["curves"], list, "$.curves")):
        loc = f"$.curves[{i}]"
        _keys(c, ("name", "self_int", "genus"), ("name", "self_int"), loc)
        name = _expect(c["name"], str, loc + ".name")
        if name in names:
            raise ConfigError(f"duplicate curve name {name!r}", loc)
        names.add(name)
        curves.append(Curve(name, _expect(c["self_int"], int, loc + ".self_int"),
                            _expect(c.get("genus", 0), int, loc + ".genus")))

    def ref(name, loc):
        if name not in names:
            raise ConfigError(f"unknown curve {name!r}", loc)
        return name

    inc: Dict[FrozenSet[str], int] = {}
    for i, e in enumerate(_expect(doc.get("incidences", []), list, "$.incidences")):
        loc = f"$.incidences[{i}]"
        _keys(e, ("a", "b", "mult"), ("a", "b", "mult"), loc)
        a, b = ref(e["a"], loc + ".a"), ref(e["b"], loc + ".b")
        if a == b:
            raise ConfigError("self-pair", loc)
        m = _expect(e["mult"], int, loc + ".mult")
        if m < 0:
            raise ConfigError("negative multiplicity", loc)
        k = _key(a, b)
        if k in inc and inc[k] != m:
            raise ConfigError(f"asymmetric incidence for {a!r}/{b!r}: {inc[k]} vs {m}", loc)
        inc[k] = m

    fibers = []
    for i, f in enumerate(_expect(doc.get("fibers", []), list, "$.fibers")):
        loc = f"$.fibers[{i}]"
        _keys(f, ("name", "kind", "components"), ("name", "components"), loc)
        kind = f.get("kind", "nodal")
        if kind not in FIBER_KINDS:
            raise ConfigError(f"fiber kind must be one of {FIBER_KINDS}", loc + ".kind")
        comps = []
        for j, comp in enumerate(_expect(f["components"], list, loc + ".components")):
            cl = f"{loc}.components[{j}]"
            _keys(comp, ("curve", "mult"), ("curve", "mult"), cl)
            comps.append((ref(comp["curve"], cl + ".curve"), _expect(comp["mult"], int, cl + ".mult")))
        fibers.append(Fiber(_expect(f["name"], str, loc + ".name"), tuple(comps), kind))

    sets = []
    for i, s in enumerate(_expect(doc.get("contractions", []), list, "$.contractions")):
        loc = f"$.contractions[{i}]"
        _keys(s, ("name", "curves", "center"), ("name", "curves"), loc)
        members = tuple(ref(n, f"{loc}.curves[{j}]") for j, n in enumerate(_expect(s["curves"], list, loc)))
        center = s.get("center")
        if center is not None and center not in members:
            raise ConfigError(f"centre {center!r} is not a member of the set", loc + ".center")
        sets.append(ContractionSpec(_expect(s["name"], str, loc + ".name"), members, center))

    bridges = []
    for i, b in enumerate(_expect(doc.get("bridges", []), list, "$.bridges")):
        loc = f"$.bridges[{i}]"
        _keys(b, ("curve", "ends", "external"), ("curve", "ends"), loc)
        external = _expect(b.get("external", False), bool, loc + ".external")
        curve = _expect(b["curve"], str, loc + ".curve")
        if not external:
            ref(curve, loc + ".curve")
        ends = tuple(ref(n, f"{loc}.ends[{j}]") for j, n in enumerate(_expect(b["ends"], list, loc)))
        bridges.append(Bridge(curve, ends, external))

    def qmap(key):
        out = {}
        for name, v in _expect(doc.get(key, {}), dict, f"$.{key}").items():
            out[ref(name, f"$.{key}.{name}")] = parse_rational(v, f"$.{key}.{name}")
        return out

    derivation = []
    for i, step in enumerate(_expect(doc.get("derivation", []), list, "$.derivation")):
        _expect(step, dict, f"$.derivation[{i}]")
        if "step" not in step:
            raise ConfigError("missing key 'step'", f"$.derivation[{i}]")
        derivation.append(dict(step))
    notes = tuple(_expect(n, str, f"$.notes[{i}]") for i, n in enumerate(_expect(doc.get("notes", []), list, "$.notes")))

    return CurveConfig(
        curves=tuple(curves),
        incidences=inc,
        kz_squared=_expect(doc["kz_squared"], int, "$.kz_squared"),
        fibers=tuple(fibers),
        contractions=tuple(sets),
        bridges=tuple(bridges),
        pullback=qmap("pullback"),
        canonical_class=qmap("canonical_class"),
        derivation=tuple(derivation),
        notes=notes,
    )


def parse_config(text: str) -> CurveConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from None
    return config_from_dict(doc)


def load_config(path) -> CurveConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_to_dict(config: CurveConfig) -> dict:
    doc: dict = {"kz_squared": config.kz_squared}
    doc["curves"] = [
        {"name": c.name, "self_int": c.self_int, **({"genus": c.genus} if c.genus else {})}
        for c in config.curves
    ]
    order = {n: i for i, n in enumerate(config.names)}
    pairs = sorted((sorted(k, key=order.get), m) for k, m in config.incidences.items())
    pairs.sort(key=lambda p: (order[p[0][0]], order[p[0][1]]))
    doc["incidences"] = [{"a": a, "b": b, "mult": m} for (a, b), m in pairs]
    if config.fibers:
        doc["fibers"] = [
            {"name": f.name, **({"kind": f.kind} if f.kind != "nodal" else {}),
             "components": [{"curve": c, "mult": m} for c, m in f.components]}
            for f in config.fibers
        ]
    doc["contractions"] = [
        {"name": s.name, "curves": list(s.curves), **({"center": s.center} if s.center else {})}
        for s in config.contractions
    ]
    if config.bridges:
        doc["bridges"] = [
            {"curve": b.curve, "ends": list(b.ends), **({"external": True} if b.external else {})}
            for b in config.bridges
        ]
    for key in ("pullback", "canonical_class"):
        m = getattr(config, key)
        if m:
            doc[key] = {k: format_rational(v) for k, v in m.items()}
    if config.derivation:
        doc["derivation"] = [dict(s) for s in config.derivation]
    if config.notes:
        doc["notes"] = list(config.notes)
    return doc


def dump_config(config: CurveConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2, ensure_ascii=False) + "\n"
