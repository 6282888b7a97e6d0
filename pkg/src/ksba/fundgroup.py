"""Link fundamental groups of plumbed configurations and the trivialisation engine.

Words are tuples of ``(generator, exponent)`` syllables.  Generators are
named after the curves they loop around.

The engine proves loops trivial in the complement of the contracted
configurations using four rules, applied until nothing changes:

A. a rational curve meeting two contracted curves once each (and no other
   contracted curve) identifies the two loops;
B. an order bound of 1 makes a loop trivial (identified loops share the gcd
   of their bounds, so coprime link orders kill both);
C. a relator whose syllables are all known to vanish except one or two
   gives an order bound for the survivors;
D. a trivial end of a chain kills the whole chain, since either end
   generates the cyclic link group.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from . import exact
from .contraction import chain_order, star_center
from .curveconfig import Bridge, ContractionSpec, CurveConfig, intersection_matrix

Word = Tuple[Tuple[str, int], ...]


class PresentationError(ValueError):
    pass


class BridgeError(ValueError):
    pass


@dataclass(frozen=True)
class Presentation:
    generators: Tuple[str, ...]
    relators: Tuple[Word, ...]

    def __str__(self) -> str:
        rels = ", ".join(format_word(w) for w in self.relators)
        return f"< {', '.join(self.generators)} | {rels} >"


def format_word(w: Word) -> str:
    if not w:
        return "1"
    return " ".join(g if e == 1 else f"{g}^{e}" for g, e in w)


def link_order(config: CurveConfig, spec: ContractionSpec) -> int:
    """Order of the first homology of the link: ``|det|`` of the intersection matrix."""
    m = intersection_matrix(config, spec.curves)
    if not exact.is_negative_definite(m):
        raise PresentationError(f"{spec.name!r} is not negative definite")
    return abs(exact.int_det(m))


def mumford_presentation(config: CurveConfig, spec: ContractionSpec) -> Presentation:
    """Loops around the curves of a plumbing tree.

    For each curve: (product of neighbouring loops) * (own loop)^(self-intersection) = 1,
    and adjacent loops commute.
    """
    names = list(spec.curves)
    for n in names:
        if config.curve(n).genus:
            raise PresentationError(f"{n!r} is not rational")
    edges = []
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            m = config.meet(a, b)
            if m > 1:
                raise PresentationError(f"{a!r} and {b!r} meet {m} times; only plumbing trees are supported")
            if m:
                edges.append((a, b))
    if len(edges) != len(names) - 1 or (chain_order(config, names) is None and not _connected(names, edges)):
        raise PresentationError(f"{spec.name!r} is not a tree")
    center = spec.center or star_center(config, names)
    order = names
    if center is not None:
        order = [n for n in names if n != center] + [center]
    elif (path := chain_order(config, names)) is not None:
        order = list(path)
    relators: List[Word] = []
    for v in order:
        nbrs = [u for u in order if (u, v) in edges or (v, u) in edges]
        relators.append(tuple((u, 1) for u in nbrs) + ((v, config.meet(v, v)),))
    for a, b in edges:
        relators.append(((a, 1), (b, 1), (a, -1), (b, -1)))
    return Presentation(tuple(order), tuple(relators))


def _connected(names, edges) -> bool:
    adj = {n: set() for n in names}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {names[0]}
    stack = [names[0]]
    while stack:
        for nb in adj[stack.pop()] - seen:
            seen.add(nb)
            stack.append(nb)
    return len(seen) == len(names)


def relation_matrix(p: Presentation) -> List[List[int]]:
    idx = {g: i for i, g in enumerate(p.generators)}
    rows = []
    for w in p.relators:
        row = [0] * len(p.generators)
        for g, e in w:
            row[idx[g]] += e
        rows.append(row)
    return rows


def abelianization(p: Presentation) -> List[int]:
    """Invariant factors of the abelianised group, one per generator (0 = free summand)."""
    m = relation_matrix(p)
    if not m:
        return [0] * len(p.generators)
    diag = exact.smith_normal_form(m)
    return (diag + [0] * len(p.generators))[: len(p.generators)]


def group_order(factors: Sequence[int]) -> Optional[int]:
    """Order of ``Z/d1 + Z/d2 + ...``; None when some factor is 0 (infinite group)."""
    out = 1
    for d in factors:
        if d == 0:
            return None
        out *= d
    return out


# -- trivialisation engine -------------------------------------------------

@dataclass
class FactBase:
    """Order bounds on classes of identified loops.

    ``bound[root] == 0`` means nothing is known; 1 means trivial.
    """

    parent: Dict[str, str] = field(default_factory=dict)
    bound: Dict[str, int] = field(default_factory=dict)

    def add(self, g: str):
        self.parent.setdefault(g, g)
        self.bound.setdefault(g, 0)

    def find(self, g: str) -> str:
        while self.parent[g] != g:
            self.parent[g] = self.parent[self.parent[g]]
            g = self.parent[g]
        return g

    def order(self, g: str) -> int:
        return self.bound[self.find(g)]

    def trivial(self, g: str) -> bool:
        return self.order(g) == 1

    def restrict(self, g: str, d: int) -> bool:
        r = self.find(g)
        new = gcd(self.bound[r], d)
        if new != self.bound[r]:
            self.bound[r] = new
            return True
        return False

    def union(self, a: str, b: str) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        ra, rb = sorted((ra, rb))
        self.parent[rb] = ra
        self.bound[ra] = gcd(self.bound[ra], self.bound.pop(rb))
        return True


@dataclass
class Trivialization:
    trivial: bool
    log: List[str]
    remaining: Dict[str, int]
    abelian_factors: List[int]

    @property
    def verdict(self) -> str:
        return "trivial" if self.trivial else "inconclusive"


def _bridge_word(config: CurveConfig, bridge: Bridge, contracted: Dict[str, str]) -> Word:
    if not bridge.external:
        if bridge.curve in contracted:
            raise BridgeError(f"bridge {bridge.curve!r} is itself contracted")
        touched = {n for n, m in config.neighbors(bridge.curve).items() if n in contracted}
        listed = set(bridge.ends)
        if touched != listed:
            raise BridgeError(
                f"bridge {bridge.curve!r} meets contracted curves {sorted(touched)}, declared {sorted(listed)}")
    if len(set(bridge.ends)) != len(bridge.ends) or not bridge.ends:
        raise BridgeError(f"bridge {bridge.curve!r} has malformed ends {list(bridge.ends)}")
    for e in bridge.ends:
        if e not in contracted:
            raise BridgeError(f"bridge end {e!r} is not a contracted curve")
    mult = (lambda e: 1) if bridge.external else (lambda e: config.meet(bridge.curve, e))
    return tuple((e, mult(e)) for e in bridge.ends)


def trivialize(config: CurveConfig, sets: Sequence[ContractionSpec],
               bridges: Optional[Sequence[Bridge]] = None) -> Trivialization:
    """Run the deduction rules to a fixpoint and report whether every loop dies."""
    if bridges is None:
        bridges = config.bridges
    contracted = {n: s.name for s in sets for n in s.curves}
    facts = FactBase()
    log: List[str] = []
    for n in contracted:
        facts.add(n)

    chains: List[Tuple[str, ...]] = []
    relators: List[Tuple[str, Word]] = []
    presentations = []
    for s in sets:
        p = mumford_presentation(config, s)
        presentations.append(p)
        relators.extend((f"Mumford relation of {s.name}", w) for w in p.relators)
        path = chain_order(config, s.curves)
        if path is not None and s.center is None:
            chains.append(path)
            order = link_order(config, s)
            for end in {path[0], path[-1]}:
                facts.restrict(end, order)
                log.append(f"seed: loop around {end} has order dividing {order} (end of {s.name})")

    identifications = []
    for b in bridges:
        word = _bridge_word(config, b, contracted)
        if len(word) == 2 and all(e == 1 for _, e in word):
            identifications.append((b.curve, word[0][0], word[1][0]))
        else:
            relators.append((f"curve {b.curve}", word))

    changed = True
    while changed:
        changed = False
        for curve, a, c in identifications:
            if facts.union(a, c):
                changed = True
                log.append(f"A: {curve} makes loops around {a} and {c} homotopic"
                           f" (order divides {facts.order(a)})")
                if facts.trivial(a):
                    log.append(f"B: loops around {a} and {c} are trivial")
        for source, word in relators:
            for g, d in _relator_bounds(facts, word):
                if facts.restrict(g, d):
                    changed = True
                    log.append(f"C: {source} [{format_word(word)}] bounds the order of {g} by {facts.order(g)}"
                               + (" (trivial)" if facts.trivial(g) else ""))
        for path in chains:
            if (facts.trivial(path[0]) or facts.trivial(path[-1])) and not all(facts.trivial(n) for n in path):
                for n in path:
                    facts.restrict(n, 1)
                changed = True
                log.append(f"D: a trivial end kills the chain {','.join(path)}")

    remaining = {n: facts.order(n) for n in contracted if not facts.trivial(n)}
    whole = Presentation(
        tuple(contracted),
        tuple(w for p in presentations for w in p.relators)
        + tuple(((a, 1), (c, -1)) for _, a, c in identifications)
        + tuple(w for src, w in relators if src.startswith("curve ")),
    )
    return Trivialization(not remaining, log, remaining, abelianization(whole))


def _relator_bounds(facts: FactBase, word: Word) -> List[Tuple[str, int]]:
    """Order bounds implied by a relator once known-trivial syllables are dropped."""
    syl = [(facts.find(g), e) for g, e in word]
    syl = [(r, e) for r, e in syl if not (facts.bound[r] and e % facts.bound[r] == 0)]
    merged: List[List] = []
    for r, e in syl:
        if merged and merged[-1][0] == r:
            merged[-1][1] += e
        else:
            merged.append([r, e])
    if len(merged) > 1 and merged[0][0] == merged[-1][0]:
        merged[0][1] += merged.pop()[1]
    merged = [(r, e) for r, e in merged if not (facts.bound[r] and e % facts.bound[r] == 0)]
    if len(merged) == 1:
        r, e = merged[0]
        return [(r, abs(e))] if e else []
    if len(merged) == 2 and merged[0][0] != merged[1][0]:
        out = []
        for (r, a), (s, b) in (merged, merged[::-1]):
            d = facts.bound[s]
            if d:
                out.append((r, abs(a) * (d // gcd(d, b))))
        return out
    return []
