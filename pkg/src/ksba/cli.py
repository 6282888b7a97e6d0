"""``ksba`` command line.

Exit status: 0 when every check passes, 1 when a verification fails, 2 on a
usage or parse error.  Output depends only on the inputs and flags.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import List, Optional

import click

from . import chains, contraction, exact, fundgroup, obstruction, tables
from .curveconfig import (BlowUpSpec, ConfigError, CurveConfig, blow_up, dump_config, format_rational,
                          load_config)

DATA = resources.files("ksba") / "data"


class Failed(Exception):
    """A verification ran and did not pass (exit status 1)."""


def _fmt(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else format_rational(x)


def _emit(obj):
    click.echo(json.dumps(obj, indent=2, sort_keys=True))


def _data_path(name: str) -> Path:
    """Resolve a file argument, falling back to the bundled data directory."""
    p = Path(name)
    if p.exists():
        return p
    bundled = DATA / p.name
    if bundled.is_file():
        return Path(str(bundled))
    raise click.BadParameter(f"no such file: {name}", param_hint="FILE")


def _load(name: str) -> CurveConfig:
    try:
        return load_config(_data_path(name))
    except ConfigError as exc:
        raise click.UsageError(f"{name}: {exc}") from None


def _sets(config: CurveConfig, names):
    if not names:
        return list(config.contractions)
    try:
        return [config.contraction(n) for n in names]
    except KeyError as exc:
        raise click.UsageError(str(exc.args[0])) from None


def _chain_arg(text: str) -> chains.Chain:
    try:
        return chains.Chain.parse(text)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="CHAIN") from None


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except Failed as exc:
            if str(exc):
                click.echo(str(exc), err=True)
            ctx.exit(1)
        except (contraction.ContractionError, contraction.ConsistencyError, fundgroup.PresentationError,
                fundgroup.BridgeError) as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(1)
        except (ConfigError, obstruction.ScriptError, tables.TableError) as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(2)


json_opt = click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
report_opt = click.option("--report", is_flag=True, help="Prose report.")


@click.group(cls=_Group)
def main():
    """Exact verification of Wahl and QEq contractions on rational surfaces."""


# -- chains ----------------------------------------------------------------

@main.command()
@click.argument("p", type=int)
@click.argument("q", type=int)
@json_opt
def hj(p, q, as_json):
    """Hirzebruch-Jung expansion of P/Q."""
    try:
        c = chains.hj_expand(p, q)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None
    _emit({"p": p, "q": q, "chain": list(c.entries)}) if as_json else click.echo(str(c))


@main.command("eval")
@click.argument("chain")
@json_opt
def eval_(chain, as_json):
    """Evaluate a chain such as [3,5,2] to p/q."""
    c = _chain_arg(chain)
    p, q = chains.hj_eval(c)
    _emit({"chain": list(c.entries), "p": p, "q": q}) if as_json else click.echo(f"{p}/{q}")


@main.command()
@click.argument("chain")
@json_opt
def wahl(chain, as_json):
    """Recognise a Wahl chain; exit 1 if it is not one."""
    c = _chain_arg(chain)
    w = chains.wahl_params(c)
    if as_json:
        _emit({"chain": list(c.entries), "wahl": None if w is None else {"n": w.n, "a": w.a}})
    elif w is not None:
        click.echo(f"({w.n},{w.a})")
    if w is None:
        raise Failed("" if as_json else f"{c} is not a Wahl chain")


@main.command("wahl-gen")
@click.argument("max_length", type=click.IntRange(1, 12))
@json_opt
def wahl_gen(max_length, as_json):
    """All Wahl chains up to MAX_LENGTH entries, sorted by length then entries."""
    found = sorted(chains.wahl_generate(max_length), key=lambda c: (len(c), c.entries))
    rows = [(c, chains.wahl_params(c)) for c in found]
    if as_json:
        _emit([{"chain": list(c.entries), "n": w.n, "a": w.a} for c, w in rows])
        return
    for c, w in rows:
        click.echo(f"{c} ({w.n},{w.a})")


@main.command()
@click.argument("star")
@json_opt
def qeq(star, as_json):
    """Classify a star written as a,b,c;d and report its link order."""
    try:
        legs_text, center_text = star.strip().strip("[]").split(";")
        legs = tuple(int(x) for x in legs_text.split(","))
        center = int(center_text)
        if len(legs) != 3:
            raise ValueError
    except ValueError:
        raise click.BadParameter("expected a star like [3,3,3;4]", param_hint="STAR") from None
    s = chains.QeqStar(legs, center)
    kind = chains.qeq_classify(s)
    m = [[-center, 1, 1, 1]] + [[1] + [-legs[i] if j == i else 0 for j in range(3)] for i in range(3)]
    order = abs(exact.int_det(m))
    if as_json:
        _emit({"star": str(s), "type": kind, "link_order": order})
    else:
        click.echo(f"{s} {kind or 'not a QEq star'} order {order}")
    if kind is None:
        raise Failed()


# -- configurations --------------------------------------------------------

@main.command()
@click.argument("file")
@click.option("--at", "at", multiple=True, required=True, metavar="CURVE[:MULT]",
              help="A curve through the blown-up point (repeatable).")
@click.option("--name", required=True, help="Name of the exceptional curve.")
def blowup(file, at, name):
    """Blow up a point of FILE and print the new configuration."""
    center = []
    for item in at:
        curve, _, mult = item.partition(":")
        try:
            center.append((curve, int(mult) if mult else 1))
        except ValueError:
            raise click.BadParameter(f"bad multiplicity in {item!r}", param_hint="--at") from None
    config = _load(file)
    try:
        out = blow_up(config, BlowUpSpec(tuple(center), name))
    except KeyError as exc:
        raise click.UsageError(str(exc.args[0])) from None
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    click.echo(dump_config(out), nl=False)


def _k2_sum(config: CurveConfig, sets) -> str:
    terms = [str(config.kz_squared)] + [str(len(s.curves)) for s in sets]
    total = contraction.k_squared(config, sets)
    return f"K_X^2 = {' + '.join(terms).replace('+ -', '- ')} = {total}"


def _ample_any(config: CurveConfig, sets, fiber: Optional[str]):
    if fiber:
        return fiber, contraction.ample_certificate(config, sets, fiber)
    if not config.fibers:
        return None, contraction.AmpleVerdict("inconclusive", reason="no fiber declared")
    first = None
    for f in config.fibers:
        v = contraction.ample_certificate(config, sets, f.name)
        if v.status == "ample":
            return f.name, v
        first = first or (f.name, v)
    return first


@main.command()
@click.argument("file")
@click.option("--set", "set_names", multiple=True, help="Contraction set to use (default: all).")
@json_opt
@report_opt
def contract(file, set_names, as_json, report):
    """Contractibility, discrepancies and K^2 of the contraction."""
    config = _load(file)
    sets = _sets(config, set_names)
    verdicts = [(s, contraction.check_contractible(config, s)) for s in sets]
    bad = [s.name for s, v in verdicts if not v.contractible]
    if bad:
        if as_json:
            _emit({"contractible": False, "sets": {s.name: str(v) for s, v in verdicts}})
        else:
            for s, v in verdicts:
                click.echo(f"{s.name}: {v}")
        raise Failed(f"not contractible: {', '.join(bad)}")
    pb = contraction.pullback_class(config, sets)
    nef = contraction.nef_report(config, sets)
    fiber, amp = _ample_any(config, sets, None)
    if as_json:
        _emit({
            "sets": {s.name: {"classification": str(v.classification), "curves": list(s.curves),
                              "discrepancies": {n: _fmt(pb.coefficients[n]) for n in s.curves}}
                     for s, v in verdicts},
            "kz_squared": config.kz_squared,
            "k_squared": contraction.k_squared(config, sets),
            "pullback_square": _fmt(pb.square),
            "zero_curves": nef.zero_curves,
            "negative_curves": nef.negatives,
            "ample": {"status": amp.status, "curves": list(amp.curves), "fiber": fiber, "reason": amp.reason},
        })
        return
    for s, v in verdicts:
        click.echo(f"{s.name}: {v}")
        if report:
            click.echo("  discrepancies: " + ", ".join(f"{n} {_fmt(pb.coefficients[n])}" for n in s.curves))
    click.echo(_k2_sum(config, sets))
    if report:
        click.echo(f"(f*K)^2 = {_fmt(pb.square)}")
        click.echo("zero curves: " + (", ".join(nef.zero_curves) or "none"))
        click.echo("negative curves: " + (", ".join(nef.negatives) or "none"))
        click.echo(f"ample verdict: {amp}" + (f" (fiber {fiber})" if fiber else ""))


@main.command()
@click.argument("file")
@click.option("--set", "set_names", multiple=True, help="Contraction set to use (default: all).")
@json_opt
@report_opt
def nef(file, set_names, as_json, report):
    """Intersections of f*K_X with every uncontracted curve; exit 1 if not nef."""
    config = _load(file)
    sets = _sets(config, set_names)
    r = contraction.nef_report(config, sets)
    if as_json:
        _emit({"nef": r.nef, "zero_curves": r.zero_curves, "negative_curves": r.negatives,
               "values": {c: _fmt(v) for c, v in r.values.items() if c not in r.contracted}})
    else:
        if report:
            for c in config.names:
                if c not in r.contracted:
                    click.echo(f"{c}: {_fmt(r.values[c])}")
        click.echo(("nef" if r.nef else "not nef") + "; zero curves: " + (", ".join(r.zero_curves) or "none"))
        if r.negatives:
            click.echo("negative curves: " + ", ".join(r.negatives))
    if not r.nef:
        raise Failed()


@main.command()
@click.argument("file")
@click.option("--fiber", help="Fibre used for the certificate (default: try each declared fibre).")
@click.option("--set", "set_names", multiple=True, help="Contraction set to use (default: all).")
@json_opt
def ample(file, fiber, set_names, as_json):
    """Ampleness certificate for K_X; exit 1 unless ample."""
    config = _load(file)
    sets = _sets(config, set_names)
    used, v = _ample_any(config, sets, fiber)
    if as_json:
        _emit({"status": v.status, "curves": list(v.curves), "fiber": used, "reason": v.reason})
    else:
        click.echo(str(v) + (f" (fiber {used})" if used and v.status == "ample" else ""))
    if v.status != "ample":
        raise Failed()


@main.command()
@click.argument("file")
@json_opt
@report_opt
def pi1(file, as_json, report):
    """Run the loop-trivialisation rules on the bundled bridges; exit 1 if inconclusive."""
    config = _load(file)
    t = fundgroup.trivialize(config, config.contractions)
    if as_json:
        _emit({"verdict": t.verdict, "log": t.log, "remaining": t.remaining,
               "abelian_factors": t.abelian_factors})
    else:
        if report:
            for line in t.log:
                click.echo(line)
        click.echo(t.verdict + ("" if t.trivial else f"; remaining orders {t.remaining}"))
    if not t.trivial:
        raise Failed()


@main.command("obstruction")
@click.argument("file")
@click.option("--script", type=click.Path(exists=True, dir_okay=False),
              help="Derivation script (JSON array); default: the one in FILE.")
@json_opt
def obstruction_(file, script, as_json):
    """Check the side conditions of a derivation script; exit 1 if invalid."""
    config = _load(file)
    raw = None
    if script:
        try:
            raw = json.loads(Path(script).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise click.UsageError(f"{script}: invalid JSON: {exc.msg}") from None
    v = obstruction.check_derivation(config, raw)
    if as_json:
        _emit({"valid": v.valid, "step": v.step, "rule": v.rule, "reason": v.reason})
    else:
        click.echo(str(v))
    if not v.valid:
        raise Failed()


# -- tables ----------------------------------------------------------------

@main.group("tables")
def tables_group():
    """Wahl singularity tables."""


@tables_group.command("verify")
@click.argument("file")
@click.option("--expect-known-errata", "errata", is_flag=False, flag_value="known_errata.json", default=None,
              metavar="[ERRATA_FILE]", help="Allow the rows listed in ERRATA_FILE (default: bundled list) to fail.")
@json_opt
def tables_verify(file, errata, as_json):
    """Check every (n,a) row against its chain."""
    rows = tables.load_tables(_data_path(file))
    allowed = tables.load_errata(_data_path(errata)) if errata else set()
    r = tables.verify_tables(rows, allowed)
    ok = r.passed(allow_errata=bool(errata))
    if as_json:
        _emit({"rows": len(r.results), "passed": ok, "failures": [x.to_dict() for x in r.failures],
               "stale_errata": [x.to_dict() for x in r.stale_errata]})
    else:
        for x in r.failures:
            tag = "KNOWN ERRATUM" if x.erratum and errata else "FAIL"
            click.echo(f"{tag} row {x.index} {x.row.label()}: {x.reason}")
        for x in r.stale_errata:
            click.echo(f"FAIL row {x.index} {x.row.label()}: listed as erratum but passes")
        n_fail = len(r.failures)
        click.echo(f"{len(r.results) - n_fail}/{len(r.results)} rows pass")
    if not ok:
        raise Failed()


def run(argv: Optional[List[str]] = None) -> int:
    """Run the command line in-process and return the exit status."""
    try:
        rv = main.main(args=argv, prog_name="ksba", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 2
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
