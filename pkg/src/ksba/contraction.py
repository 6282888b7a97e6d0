"""Contractibility, discrepancies, K^2 and nef/ample certificates for a contraction Z -> X."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import exact
from .chains import Chain, QeqStar, WahlParams, qeq_classify, wahl_params
from .curveconfig import ContractionSpec, CurveConfig, canonical_degree, intersection_matrix


class ContractionError(ValueError):
    """A contraction request that cannot be processed."""


class ConsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""


@dataclass(frozen=True)
class Classification:
    kind: str  # "Wahl", "QEq", "ADE" or "Other"
    wahl: Optional[WahlParams] = None
    qeq: Optional[str] = None
    shape: str = "other"  # "chain", "star", "tree" or "other"
    order: Tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.kind == "Wahl":
            return f"Wahl({self.wahl.n},{self.wahl.a})"
        if self.kind == "QEq":
            return f"QEq({self.qeq})"
        return self.kind


@dataclass(frozen=True)
class Contractibility:
    contractible: bool
    classification: Optional[Classification] = None
    reason: str = ""

    def __str__(self) -> str:
        if self.contractible:
            return f"contractible, {self.classification}"
        return f"not contractible ({self.reason})"


@dataclass(frozen=True)
class PullbackClass:
    """``f^*(K_X) = K_Z + sum d_i E_i``; ``square`` is its self-intersection."""

    coefficients: Dict[str, Fraction]
    square: Fraction


@dataclass
class NefReport:
    values: Dict[str, Fraction]
    contracted: Tuple[str, ...]
    negatives: List[str] = field(default_factory=list)
    zero_curves: List[str] = field(default_factory=list)

    @property
    def nef(self) -> bool:
        return not self.negatives


@dataclass(frozen=True)
class AmpleVerdict:
    status: str  # "ample", "nef_not_ample", "not_nef", "inconclusive"
    curves: Tuple[str, ...] = ()
    reason: str = ""

    def __str__(self) -> str:
        if self.status == "ample":
            return "ample"
        if self.status == "inconclusive":
            return f"inconclusive ({self.reason})"
        return f"{self.status}({', '.join(self.curves)})"


# -- shape recognition -----------------------------------------------------

def _graph(config: CurveConfig, names: Sequence[str]) -> Optional[Dict[str, List[str]]]:
    """Adjacency of the induced dual graph, or None if some pair meets more than once."""
    adj: Dict[str, List[str]] = {n: [] for n in names}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            m = config.meet(a, b)
            if m > 1:
                return None
            if m == 1:
                adj[a].append(b)
                adj[b].append(a)
    return adj


def _is_tree(adj: Dict[str, List[str]]) -> bool:
    nodes = list(adj)
    if not nodes:
        return False
    edges = sum(len(v) for v in adj.values()) // 2
    if edges != len(nodes) - 1:
        return False
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(nodes)


def chain_order(config: CurveConfig, names: Sequence[str]) -> Optional[Tuple[str, ...]]:
    """Members ordered along the chain, starting from the end listed first; None if not a chain."""
    adj = _graph(config, names)
    if adj is None or not _is_tree(adj) or any(len(v) > 2 for v in adj.values()):
        return None
    if len(names) == 1:
        return tuple(names)
    ends = [n for n in names if len(adj[n]) == 1]
    start = min(ends, key=list(names).index)
    out = [start]
    prev = None
    while len(out) < len(names):
        nxt = next(n for n in adj[out[-1]] if n != prev)
        prev = out[-1]
        out.append(nxt)
    return tuple(out)


def star_center(config: CurveConfig, names: Sequence[str]) -> Optional[str]:
    """The centre of a four-vertex star with three single-curve legs, if it is one."""
    if len(names) != 4:
        return None
    adj = _graph(config, names)
    if adj is None or not _is_tree(adj):
        return None
    hubs = [n for n in names if len(adj[n]) == 3]
    return hubs[0] if len(hubs) == 1 else None


def classify(config: CurveConfig, spec: ContractionSpec) -> Classification:
    names = spec.curves
    order = chain_order(config, names)
    if order is not None:
        chain = Chain(tuple(-config.meet(n, n) for n in order)) if all(
            config.meet(n, n) <= -2 for n in order) else None
        w = wahl_params(chain) if chain else None
        if w is not None:
            return Classification("Wahl", wahl=w, shape="chain", order=order)
    center = star_center(config, names)
    if center is not None and (spec.center is None or spec.center == center):
        legs = [n for n in names if n != center]
        t = qeq_classify(QeqStar(tuple(-config.meet(n, n) for n in legs), -config.meet(center, center)))
        if t is not None:
            return Classification("QEq", qeq=t, shape="star", order=tuple(legs) + (center,))
    adj = _graph(config, names)
    tree = adj is not None and _is_tree(adj)
    shape = "chain" if order is not None else "star" if center is not None else "tree" if tree else "other"
    if tree and all(config.meet(n, n) == -2 for n in names):
        return Classification("ADE", shape=shape, order=order or tuple(names))
    return Classification("Other", shape=shape, order=order or tuple(names))


# -- operations ------------------------------------------------------------

def _require_rational(config: CurveConfig, spec: ContractionSpec):
    for n in spec.curves:
        if config.curve(n).genus > 0:
            raise ContractionError(f"{n!r} in {spec.name!r} has positive genus; only rational curves are supported")
    if len(set(spec.curves)) != len(spec.curves):
        raise ContractionError(f"{spec.name!r} lists a curve twice")


def check_contractible(config: CurveConfig, spec: ContractionSpec) -> Contractibility:
    _require_rational(config, spec)
    m = intersection_matrix(config, spec.curves)
    if not exact.is_negative_definite(m):
        return Contractibility(False, reason="intersection matrix is not negative definite")
    return Contractibility(True, classify(config, spec))


def discrepancies(config: CurveConfig, spec: ContractionSpec) -> Dict[str, Fraction]:
    """Coefficients ``d_i`` with ``(K_Z + sum d_i E_i) . E_j = 0`` for every member."""
    _require_rational(config, spec)
    names = spec.curves
    m = intersection_matrix(config, names)
    rhs = [-canonical_degree(config, n) for n in names]
    try:
        d = exact.rat_solve(m, rhs)
    except exact.SingularMatrixError as exc:
        raise ConsistencyError(f"{spec.name!r}: singular intersection matrix at {names[exc.row]!r}") from exc
    return dict(zip(names, d))


def _check_disjoint(sets: Sequence[ContractionSpec]):
    seen: Dict[str, str] = {}
    for s in sets:
        for n in s.curves:
            if n in seen:
                raise ContractionError(f"{n!r} belongs to both {seen[n]!r} and {s.name!r}")
            seen[n] = s.name


def k_squared(config: CurveConfig, sets: Sequence[ContractionSpec]) -> int:
    """``K_X^2 = K_Z^2 + sum of the numbers of contracted curves``.

    Each Wahl or QEq set contributes its size; ADE sets are crepant and add
    nothing.  Other sets have no such formula and are rejected.
    """
    _check_disjoint(sets)
    total = config.kz_squared
    for s in sets:
        v = check_contractible(config, s)
        if not v.contractible:
            raise ContractionError(f"{s.name!r} is {v}")
        kind = v.classification.kind
        if kind == "Other":
            raise ContractionError(f"{s.name!r} is neither Wahl, QEq nor ADE; no K^2 formula applies")
        if kind != "ADE":
            total += len(s.curves)
    return total


def pullback_class(config: CurveConfig, sets: Sequence[ContractionSpec]) -> PullbackClass:
    k2 = k_squared(config, sets)
    coeffs: Dict[str, Fraction] = {}
    for s in sets:
        coeffs.update(discrepancies(config, s))
    for e in coeffs:
        if config.dot(coeffs, e) != -canonical_degree(config, e):
            raise ConsistencyError(f"(f*K).{e} is not zero")
    square = Fraction(config.kz_squared)
    square += 2 * sum(d * canonical_degree(config, e) for e, d in coeffs.items())
    square += sum(coeffs[a] * coeffs[b] * config.meet(a, b) for a in coeffs for b in coeffs)
    if square != k2:
        raise ConsistencyError(f"(f*K)^2 = {square} but K_X^2 = {k2}")
    return PullbackClass(coeffs, square)


def nef_report(config: CurveConfig, sets: Sequence[ContractionSpec]) -> NefReport:
    pb = pullback_class(config, sets)
    contracted = tuple(n for s in sets for n in s.curves)
    values = {c: canonical_degree(config, c) + config.dot(pb.coefficients, c) for c in config.names}
    report = NefReport(values, contracted)
    for c, v in values.items():
        if c in pb.coefficients:
            if v != 0:
                raise ConsistencyError(f"contracted curve {c!r} meets f*K in {v}")
        elif v < 0:
            report.negatives.append(c)
        elif v == 0:
            report.zero_curves.append(c)
    return report


def effective_representative(config: CurveConfig, sets: Sequence[ContractionSpec]) -> Optional[Dict[str, Fraction]]:
    """The stored ``K_Z`` representative plus the discrepancies, if the file has one.

    The representative is only trusted after its intersection with every
    configuration curve has been checked against adjunction.
    """
    if not config.canonical_class:
        return None
    for c in config.names:
        if config.dot(config.canonical_class, c) != canonical_degree(config, c):
            raise ConsistencyError(
                f"stored canonical class meets {c!r} in {config.dot(config.canonical_class, c)},"
                f" adjunction gives {canonical_degree(config, c)}")
    out = {k: Fraction(v) for k, v in config.canonical_class.items()}
    for e, d in pullback_class(config, sets).coefficients.items():
        out[e] = out.get(e, Fraction(0)) + d
    return {k: v for k, v in out.items() if v != 0}


def ample_certificate(config: CurveConfig, sets: Sequence[ContractionSpec], fiber_name: str) -> AmpleVerdict:
    """Nakai-Moishezon certificate through a fibre contained in the support of ``f^*K_X``."""
    try:
        fiber = config.fiber(fiber_name)
    except KeyError:
        raise ContractionError(f"fiber {fiber_name!r} is not declared in the configuration") from None
    report = nef_report(config, sets)
    if report.negatives:
        return AmpleVerdict("not_nef", tuple(report.negatives))
    if report.zero_curves:
        return AmpleVerdict("nef_not_ample", tuple(report.zero_curves))
    if pullback_class(config, sets).square <= 0:
        return AmpleVerdict("inconclusive", reason="K_X^2 is not positive")
    support = effective_representative(config, sets)
    if support is None:
        return AmpleVerdict("inconclusive", reason="no effective representative of K_Z stored")
    negative = sorted(k for k, v in support.items() if v < 0)
    if negative:
        return AmpleVerdict("inconclusive", tuple(negative), "representative is not effective")
    missing = [c for c in fiber.curves if support.get(c, 0) <= 0]
    if missing:
        return AmpleVerdict("inconclusive", tuple(missing), f"fiber {fiber_name!r} is not in the support")
    return AmpleVerdict("ample")
