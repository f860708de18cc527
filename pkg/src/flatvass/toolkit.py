"""Text formats and the ``flatvass`` command line.

Instance files::

    vass 2
    state p
    state q
    trans p q 2 -1        # transitions are numbered from 0 in file order
    query p 0 0 -> q 3 1

Certificates list the scheme with transition indices; endpoints come from
the query they answer::

    cert N2
    seg 0
    cyc 1 0 exp 12
    seg
"""
from __future__ import annotations

import decimal
import json
import re
import sys
from dataclasses import dataclass
from typing import Optional

import click

from .core import (AllIntegers, Configuration, Intersection, LinearPathScheme, LShape, N2,
                   NonNegative, Outside, Region, ResourceCap, Transition, Vass, VassError)

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

EXIT_TRUE, EXIT_FALSE, EXIT_ERROR, EXIT_GIVEUP = 0, 1, 2, 3


class ParseError(VassError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(frozen=True)
class Instance:
    vass: Vass
    src: Optional[Configuration] = None
    tgt: Optional[Configuration] = None


# ------------------------------------------------------------ instances

def _int(tok: str, line: int) -> int:
    if not re.fullmatch(r"[+-]?\d+", tok):
        raise ParseError(line, f"not an integer: {tok!r}")
    return int(decimal.Decimal(tok))  # no digit limit, unlike int(str)


def _dec(n: int) -> str:
    return str(decimal.Decimal(n))


def parse_instance(text: str) -> Instance:
    dim = None
    states: list = []
    trans: list = []
    query = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kw = tok[0]
        if kw == "vass":
            if dim is not None:
                raise ParseError(n, "duplicate header")
            if len(tok) != 2:
                raise ParseError(n, "expected: vass <d>")
            dim = _int(tok[1], n)
            if dim < 1:
                raise ParseError(n, "dimension must be positive")
            continue
        if dim is None:
            raise ParseError(n, "missing 'vass <d>' header")
        if kw == "state":
            if len(tok) != 2 or not _NAME.match(tok[1]):
                raise ParseError(n, "expected: state <name>")
            if tok[1] in states:
                raise ParseError(n, f"state {tok[1]} declared twice")
            states.append(tok[1])
        elif kw == "trans":
            if len(tok) != 3 + dim:
                raise ParseError(n, f"expected {dim} update entries, got {len(tok) - 3}")
            for s in tok[1:3]:
                if s not in states:
                    raise ParseError(n, f"undeclared state {s}")
            trans.append(Transition(tok[1], tuple(_int(x, n) for x in tok[3:]), tok[2]))
        elif kw == "query":
            if query is not None:
                raise ParseError(n, "duplicate query")
            if "->" not in tok:
                raise ParseError(n, "expected: query <p> <u..> -> <q> <v..>")
            k = tok.index("->")
            left, right = tok[1:k], tok[k + 1:]
            if len(left) != 1 + dim or len(right) != 1 + dim:
                raise ParseError(n, f"query configurations need a state and {dim} counters")
            for s in (left[0], right[0]):
                if s not in states:
                    raise ParseError(n, f"undeclared state {s}")
            query = (Configuration(left[0], tuple(_int(x, n) for x in left[1:])),
                     Configuration(right[0], tuple(_int(x, n) for x in right[1:])))
        else:
            raise ParseError(n, f"unknown keyword {kw!r}")
    if dim is None:
        raise ParseError(0, "empty instance")
    v = Vass(dim, tuple(states), tuple(trans))
    return Instance(v, *(query or (None, None)))


def _config_text(c: Configuration) -> str:
    return " ".join([str(c.state)] + [str(x) for x in c.counters])


def serialize_instance(inst: Instance) -> str:
    v = inst.vass
    lines = [f"vass {v.dim}"]
    lines += [f"state {q}" for q in v.states]
    lines += [" ".join(["trans", str(t.src), str(t.dst)] + [str(z) for z in t.update]) for t in v.transitions]
    if inst.src is not None:
        lines.append(f"query {_config_text(inst.src)} -> {_config_text(inst.tgt)}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ certificates

def region_name(r: Region) -> str:
    if isinstance(r, NonNegative):
        return "N2"
    if isinstance(r, AllIntegers):
        return "Z"
    if isinstance(r, Outside):
        return f"O{r.D}"
    if isinstance(r, LShape):
        return f"L{r.D}"
    if isinstance(r, Intersection):
        return f"{region_name(r.left)}&{region_name(r.right)}"
    raise ValueError(f"region {r!r} has no text form")


def parse_region(text: str) -> Region:
    if "&" in text:
        left, right = text.split("&", 1)
        return Intersection(parse_region(left), parse_region(right))
    if text == "N2":
        return N2
    if text == "Z":
        return AllIntegers()
    m = re.fullmatch(r"([OL])(\d+)", text)
    if not m:
        raise ValueError(f"unknown region {text!r}")
    return (Outside if m.group(1) == "O" else LShape)(int(m.group(2)))


def serialize_certificate(cert) -> str:
    rho, exps = cert.scheme, cert.exponents
    lines = [f"cert {region_name(cert.region)}"]
    for n, a in enumerate(rho.alphas):
        if n > 0:
            b = " ".join(map(str, rho.cycles[n - 1]))
            lines.append(f"cyc {b} exp {_dec(exps[n - 1])}")
        lines.append(" ".join(["seg"] + [str(i) for i in a]))
    return "\n".join(lines) + "\n"


def parse_certificate(text: str, src: Configuration, tgt: Configuration):
    from .solver import Certificate
    lines = [(n, l.split("#", 1)[0].split()) for n, l in enumerate(text.splitlines(), 1)]
    lines = [(n, t) for n, t in lines if t]
    if not lines or lines[0][1][0] != "cert" or len(lines[0][1]) != 2:
        raise ParseError(lines[0][0] if lines else 0, "expected: cert <region>")
    try:
        region = parse_region(lines[0][1][1])
    except ValueError as exc:
        raise ParseError(lines[0][0], str(exc)) from None
    alphas, cycles, exps = [], [], []
    expect = "seg"
    for n, tok in lines[1:]:
        if tok[0] != expect:
            raise ParseError(n, f"expected a {expect} line")
        if tok[0] == "seg":
            alphas.append(tuple(_int(x, n) for x in tok[1:]))
            expect = "cyc"
        else:
            if len(tok) < 4 or tok[-2] != "exp":
                raise ParseError(n, "expected: cyc <t..> exp <n>")
            e = _int(tok[-1], n)
            if e < 0:
                raise ParseError(n, "negative exponent")
            cycles.append(tuple(_int(x, n) for x in tok[1:-2]))
            exps.append(e)
            expect = "seg"
    if expect != "cyc":
        raise ParseError(lines[-1][0], "a certificate ends with a seg line")
    return Certificate(LinearPathScheme(tuple(alphas), tuple(cycles)), tuple(exps), src, tgt, region)


# ------------------------------------------------------------ reports

def _emit(report: dict, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(report, indent=2))
        return
    for key, val in report.items():
        if isinstance(val, str) and "\n" in val:
            click.echo(f"{key}:")
            click.echo(val.rstrip("\n"))
        else:
            click.echo(f"{key}: {val}")


def _load(path: str, need_query: bool = True) -> Instance:
    with open(path, encoding="utf-8") as fh:
        inst = parse_instance(fh.read())
    if need_query and inst.src is None:
        raise click.UsageError(f"{path} has no query line")
    return inst


def _path_text(pi) -> str:
    return " ".join(map(str, pi))


class _Cli(click.Group):
    """Maps library errors onto the exit-code table."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except ResourceCap as exc:
            click.echo(f"give-up: {exc}", err=True)
            ctx.exit(EXIT_GIVEUP)
        except (VassError, OSError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_ERROR)


@click.group(cls=_Cli)
def cli():
    """Reachability tools for vector addition systems with states."""


def _json_flag(f):
    return click.option("--json", "as_json", is_flag=True, help="Print the report as JSON.")(f)


@cli.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--strategy", type=click.Choice(["auto", "bounded", "flatten"]), default="auto")
@click.option("--caps", type=int, default=None, help="Counter cap for the explicit strategy.")
@click.option("--cert-out", type=click.Path(dir_okay=False), default=None)
@_json_flag
@click.pass_context
def reach(ctx, instance, strategy, caps, cert_out, as_json):
    """Decide the query of a 2-dimensional instance."""
    from .solver import reach2
    inst = _load(instance)
    dec = reach2(inst.vass, inst.src, inst.tgt, strategy, cap=caps)
    report = {"verdict": "reachable" if dec.reachable else "unreachable", "strategy": dec.strategy}
    if dec.reachable:
        text = serialize_certificate(dec.certificate)
        report["certificate"] = text
        if cert_out:
            with open(cert_out, "w", encoding="utf-8") as fh:
                fh.write(text)
    _emit(report, as_json)
    ctx.exit(EXIT_TRUE if dec.reachable else EXIT_FALSE)


@cli.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--dump-system", is_flag=True, help="Print the witness exponent equations.")
@_json_flag
@click.pass_context
def zreach(ctx, instance, dump_system, as_json):
    """Decide the query over the integers (counters may go negative)."""
    from .dioph import build_target_equations, dump_system as dump
    from .solver import Certificate
    from .zreach import z_reachable
    inst = _load(instance)
    res = z_reachable(inst.vass, inst.src, inst.tgt)
    report = {"verdict": "reachable" if res else "unreachable"}
    if res:
        cert = Certificate(res.scheme, res.exponents, inst.src, inst.tgt, AllIntegers())
        report["certificate"] = serialize_certificate(cert)
        if dump_system:
            report["system"] = dump(build_target_equations(inst.vass, inst.src.counters,
                                                           inst.tgt.counters, res.scheme))
    _emit(report, as_json)
    ctx.exit(EXIT_TRUE if res else EXIT_FALSE)


@cli.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@_json_flag
@click.pass_context
def cover(ctx, instance, as_json):
    """Can the source reach some configuration at or above the target?"""
    from .solver import coverable
    inst = _load(instance)
    res = coverable(inst.vass, inst.src, inst.tgt)
    report = {"verdict": "coverable" if res else "not coverable"}
    if res:
        report["path"] = _path_text(res.path)
        report["reached"] = _config_text(res.reached)
    _emit(report, as_json)
    ctx.exit(EXIT_TRUE if res else EXIT_FALSE)


@cli.command("bounded")
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@_json_flag
@click.pass_context
def bounded_cmd(ctx, instance, as_json):
    """Is the set of configurations reachable from the query source finite?"""
    from .solver import bounded
    inst = _load(instance)
    ok = bounded(inst.vass, inst.src)
    _emit({"verdict": "bounded" if ok else "unbounded"}, as_json)
    ctx.exit(EXIT_TRUE if ok else EXIT_FALSE)


@cli.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--dump-system", is_flag=True, help="Print the exponent system of the witness scheme.")
@click.option("--cert-out", type=click.Path(dir_okay=False), default=None)
@_json_flag
@click.pass_context
def flatten(ctx, instance, dump_system, cert_out, as_json):
    """Decide the query by flattening and print the linear path scheme."""
    from .dioph import build_lps_system, build_target_equations, conjoin, dump_system as dump
    from .solver import reach2
    inst = _load(instance)
    dec = reach2(inst.vass, inst.src, inst.tgt, "flatten")
    report = {"verdict": "reachable" if dec.reachable else "unreachable", "strategy": dec.strategy}
    if dec.reachable:
        cert = dec.certificate
        report["cycles"] = cert.scheme.k
        report["certificate"] = serialize_certificate(cert)
        if cert_out:
            with open(cert_out, "w", encoding="utf-8") as fh:
                fh.write(report["certificate"])
        if dump_system:
            rho = cert.scheme
            report["system"] = dump(conjoin(build_lps_system(inst.vass, inst.src.counters, rho),
                                            build_target_equations(inst.vass, inst.src.counters,
                                                                   inst.tgt.counters, rho)))
    _emit(report, as_json)
    ctx.exit(EXIT_TRUE if dec.reachable else EXIT_FALSE)


@cli.command("verify")
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.argument("certificate", type=click.Path(exists=True, dir_okay=False))
@_json_flag
@click.pass_context
def verify_cmd(ctx, instance, certificate, as_json):
    """Check a certificate against the query of an instance."""
    from .solver import verify
    inst = _load(instance)
    with open(certificate, encoding="utf-8") as fh:
        cert = parse_certificate(fh.read(), inst.src, inst.tgt)
    res = verify(inst.vass, cert)
    report = {"verdict": "valid" if res else "invalid"}
    if not res:
        report.update(segment=res.segment, coordinate=res.coordinate, reason=res.reason)
    _emit(report, as_json)
    ctx.exit(EXIT_TRUE if res else EXIT_FALSE)


@cli.group()
def gen():
    """Write generated instance files."""


def _write(inst: Instance, out: Optional[str]) -> None:
    text = serialize_instance(inst)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


_out = click.option("-o", "--out", type=click.Path(dir_okay=False), default=None)


@gen.command("random")
@click.option("--states", type=int, default=3)
@click.option("--trans", type=int, default=5)
@click.option("--norm", type=int, default=2)
@click.option("--seed", type=int, default=0)
@_out
def gen_random_cmd(states, trans, norm, seed, out):
    """Random connected 2-VASS with a random query."""
    from .gen import gen_query, gen_random
    v = gen_random(states, trans, norm, seed)
    _write(Instance(v, *gen_query(v, seed)), out)


@gen.command("graph")
@click.option("--m", "m", type=int, required=True, help="Number of vertices.")
@click.option("--n", "n", type=int, required=True, help="Number of edges.")
@click.option("--seed", type=int, default=0)
@_out
def gen_graph_cmd(m, n, seed, out):
    """Flat 2-VASS simulating reachability in a random digraph."""
    from .gen import graph_to_flat_2vass, random_graph
    v, src, tgt = graph_to_flat_2vass(m, random_graph(seed, m, n))
    _write(Instance(v, src, tgt), out)


@gen.command("oca")
@click.option("--states", type=int, default=4)
@click.option("--trans", type=int, default=6)
@click.option("--bound", type=int, default=16)
@click.option("--seed", type=int, default=0)
@_out
def gen_oca_cmd(states, trans, bound, seed, out):
    """2-VASS image of a random bounded one-counter automaton."""
    import random
    from .gen import boca_to_2vass, random_oca
    b = random_oca(seed, states, trans, bound=bound)
    v, phi = boca_to_2vass(b)
    rng = random.Random(seed)
    src = phi(b.states[0], rng.randint(0, bound))
    tgt = phi(rng.choice(b.states), rng.randint(0, bound))
    _write(Instance(v, src, tgt), out)


@gen.command("doubling")
@click.option("--n", "n", type=int, required=True)
@_out
def gen_doubling_cmd(n, out):
    """Chained transfer loops whose only run peaks at 2^n."""
    from .gen import gen_doubling_family
    d = gen_doubling_family(n)
    _write(Instance(d.vass, d.src, d.tgt), out)


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="flatvass", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_ERROR
    except click.exceptions.Abort:
        return EXIT_ERROR
    return rv if isinstance(rv, int) else EXIT_TRUE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
