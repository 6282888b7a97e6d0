"""Wahl singularity tables: parsing and the (n, a) <-> chain consistency check.

A table file is a JSON array of rows::

    {"k_squared": 1, "n": 7, "a": 3, "chain": [2, 6, 2, 3], "tmmr": "Rat", "reference": "PSU13"}

``tmmr`` (type of the minimal model of the resolution) and ``reference`` are
carried along as metadata and never computed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import gcd
from typing import Iterable, List, Optional, Sequence, Tuple

from .chains import Chain, hj_eval, matches_wahl, wahl_chain

TMMR_TYPES = ("Rat", "Dol(2,3)", "GenType1", "GenType2", "GenType3")
_ROW_KEYS = {"k_squared", "n", "a", "chain", "tmmr", "reference"}


class TableError(ValueError):
    """A table file that does not parse; ``row`` is the 1-based row number."""

    def __init__(self, message: str, row: Optional[int] = None):
        super().__init__(f"row {row}: {message}" if row else message)
        self.row = row


@dataclass(frozen=True)
class TableRow:
    k_squared: int
    n: int
    a: int
    chain: Chain
    tmmr: str
    reference: str

    @property
    def key(self) -> Tuple[int, int, int]:
        return (self.k_squared, self.n, self.a)

    def label(self) -> str:
        return f"K2={self.k_squared} ({self.n},{self.a}) {self.chain}"


@dataclass(frozen=True)
class RowResult:
    index: int  # 1-based position in the file
    row: TableRow
    ok: bool
    reason: str = ""
    erratum: bool = False

    def to_dict(self) -> dict:
        return {"row": self.index, "k_squared": self.row.k_squared, "n": self.row.n, "a": self.row.a,
                "chain": list(self.row.chain.entries), "status": "pass" if self.ok else "fail",
                "known_erratum": self.erratum, "reason": self.reason}


@dataclass(frozen=True)
class TableReport:
    results: Tuple[RowResult, ...]

    @property
    def failures(self) -> List[RowResult]:
        return [r for r in self.results if not r.ok]

    @property
    def unexpected(self) -> List[RowResult]:
        return [r for r in self.results if not r.ok and not r.erratum]

    @property
    def stale_errata(self) -> List[RowResult]:
        """Rows on the errata list that nevertheless pass."""
        return [r for r in self.results if r.ok and r.erratum]

    def passed(self, allow_errata: bool = False) -> bool:
        if allow_errata:
            return not self.unexpected and not self.stale_errata
        return not self.failures


def _row(obj, i: int) -> TableRow:
    if not isinstance(obj, dict):
        raise TableError("expected an object", i)
    missing = _ROW_KEYS - set(obj)
    extra = set(obj) - _ROW_KEYS
    if missing or extra:
        raise TableError(f"missing keys {sorted(missing)}, unknown keys {sorted(extra)}", i)
    for k in ("k_squared", "n", "a"):
        if not isinstance(obj[k], int) or isinstance(obj[k], bool):
            raise TableError(f"{k} must be an integer", i)
    if not 1 <= obj["k_squared"] <= 4:
        raise TableError(f"k_squared must be in 1..4, got {obj['k_squared']}", i)
    if obj["tmmr"] not in TMMR_TYPES:
        raise TableError(f"unknown TMMR {obj['tmmr']!r}", i)
    if not isinstance(obj["chain"], list) or not all(isinstance(e, int) for e in obj["chain"]):
        raise TableError("chain must be a list of integers", i)
    try:
        chain = Chain(tuple(obj["chain"]))
    except ValueError as exc:
        raise TableError(str(exc), i) from None
    return TableRow(obj["k_squared"], obj["n"], obj["a"], chain, obj["tmmr"], str(obj["reference"]))


def parse_tables(text: str) -> List[TableRow]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TableError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, list):
        raise TableError("a table file is a JSON array of rows")
    return [_row(obj, i) for i, obj in enumerate(doc, 1)]


def load_tables(path) -> List[TableRow]:
    with open(path, encoding="utf-8") as fh:
        return parse_tables(fh.read())


def parse_errata(text: str) -> set:
    """Keys ``(k_squared, n, a)`` of rows expected to fail."""
    try:
        doc = json.loads(text)
        return {(int(e["k_squared"]), int(e["n"]), int(e["a"])) for e in doc}
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise TableError(f"bad errata list: {exc}") from None


def load_errata(path) -> set:
    with open(path, encoding="utf-8") as fh:
        return parse_errata(fh.read())


def check_row(row: TableRow) -> Tuple[bool, str]:
    n, a = row.n, row.a
    if n < 2 or not 0 < a < n or gcd(n, a) != 1:
        return False, f"({n},{a}) is not a valid Wahl index pair"
    if matches_wahl(row.chain, n, a):
        return True, ""
    p, q = hj_eval(row.chain)
    return False, (f"expected {wahl_chain(n, a)} (or its reverse) for {n}^2/({n}*{a}-1) = {n * n}/{n * a - 1};"
                   f" the listed chain {row.chain} evaluates to {p}/{q}")


def verify_tables(rows: Sequence[TableRow], errata: Iterable[Tuple[int, int, int]] = ()) -> TableReport:
    errata = set(errata)
    out = []
    for i, row in enumerate(rows, 1):
        ok, reason = check_row(row)
        out.append(RowResult(i, row, ok, reason, row.key in errata))
    return TableReport(tuple(out))
