"""Hirzebruch-Jung continued fractions, Wahl chains and elliptic quotient stars."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, isqrt
from typing import Iterable, Optional, Set, Tuple


@dataclass(frozen=True)
class Chain:
    """A Hirzebruch-Jung string ``[e1, ..., es]`` with every ``ei >= 2``."""

    entries: Tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if not entries:
            raise ValueError("a chain needs at least one entry")
        if any(e < 2 for e in entries):
            raise ValueError(f"chain entries must be >= 2, got {list(entries)}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, *entries: int) -> "Chain":
        return cls(tuple(entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.entries)) + "]"

    @classmethod
    def parse(cls, text: str) -> "Chain":
        body = text.strip().strip("[]")
        return cls(tuple(int(x) for x in body.split(",") if x.strip()))


@dataclass(frozen=True, order=True)
class WahlParams:
    """Wahl singularity ``1/n^2 (1, na - 1)``, normalised so ``a <= n - a``."""

    n: int
    a: int

    def __post_init__(self):
        if self.n < 2 or not 0 < self.a < self.n or gcd(self.n, self.a) != 1:
            raise ValueError(f"invalid Wahl parameters (n={self.n}, a={self.a})")
        if self.a > self.n - self.a:
            object.__setattr__(self, "a", self.n - self.a)


@dataclass(frozen=True)
class QeqStar:
    """Star ``[-E1^2, -E2^2, -E3^2; -F^2]`` with three legs around a centre."""

    leg_weights: Tuple[int, int, int]
    center_weight: int

    def __str__(self) -> str:
        return "[{},{},{};{}]".format(*self.leg_weights, self.center_weight)


QEQ_TYPES = {
    ((3, 3, 3), 4): "Z3",
    ((2, 4, 4), 3): "Z4",
    ((2, 3, 6), 2): "Z6",
}


def hj_expand(p: int, q: int) -> Chain:
    """Expand ``p/q`` as ``e1 - 1/(e2 - 1/(...))``."""
    if not p > q >= 1 or gcd(p, q) != 1:
        raise ValueError(f"need coprime p > q >= 1, got p={p}, q={q}")
    out = []
    while q:
        e = -(-p // q)
        out.append(e)
        p, q = q, e * q - p
    return Chain(tuple(out))


def hj_eval(c: Chain) -> Tuple[int, int]:
    """Numerator and denominator of the continued fraction of ``c``."""
    p, q = 1, 0
    for e in reversed(c.entries):
        p, q = e * p - q, p
    return p, q


def wahl_params(c: Chain) -> Optional[WahlParams]:
    p, q = hj_eval(c)
    n = isqrt(p)
    if n * n != p or n < 2 or (q + 1) % n:
        return None
    a = (q + 1) // n
    if not 0 < a < n or gcd(n, a) != 1:
        return None
    return WahlParams(n, a)


def wahl_chain(n: int, a: int) -> Chain:
    """The chain of ``1/n^2 (1, na - 1)`` as read left to right."""
    return hj_expand(n * n, n * a - 1)


def wahl_generate(max_length: int) -> Set[Chain]:
    """All Wahl chains of length ``<= max_length``, grown from ``[4]``."""
    if max_length < 1:
        raise ValueError("max_length must be >= 1")
    seen = {Chain.of(4)}
    frontier = [Chain.of(4)]
    while frontier:
        nxt = []
        for c in frontier:
            if len(c) >= max_length:
                continue
            e = c.entries
            for child in (Chain((e[0] + 1,) + e[1:] + (2,)), Chain((2,) + e[:-1] + (e[-1] + 1,))):
                if child not in seen:
                    seen.add(child)
                    nxt.append(child)
        frontier = nxt
    return seen


def chain_dual(c: Chain) -> Chain:
    """The reversed chain; it resolves the same singularity with ``q`` inverted mod ``p``."""
    return Chain(tuple(reversed(c.entries)))


def qeq_classify(s: QeqStar) -> Optional[str]:
    key = (tuple(sorted(s.leg_weights)), s.center_weight)
    return QEQ_TYPES.get(key)


def matches_wahl(chain: Chain, n: int, a: int) -> bool:
    """True when ``chain`` or its reverse is the expansion for ``(n, a)`` or ``(n, n - a)``."""
    if not 0 < a < n or gcd(n, a) != 1:
        return False
    candidates: Iterable[Chain] = (wahl_chain(n, a), wahl_chain(n, n - a))
    return any(chain == w or chain_dual(chain) == w for w in candidates)
