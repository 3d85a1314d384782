"""Command-line front end.

    interfere <command> SPEC [--tol T] [--solver S] [--format F] ...

SPEC is a JSON object; see README.md for the keys each ``kind`` accepts.
Exit status: 0 success, 2 invalid input, 3 internal-consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

from .achievable import achievable_rate, count_pieces, sample_rate_surface
from .capacity import LadderError, build_ladder, verify_capacity
from .decodable import max_decodable_subset, region_constraints
from .errors import ConsistencyError
from .gic import (InterferenceNetwork, all_orderings, is_generalized_one_sided, is_strong_one_sided,
                  strong_one_sided_membership, successive_maximize)
from .setfn import TOL, BinaryAdderView, GaussianReceiverView, RateVector, UserSet
from .sfm import NotSubmodularError, SolverError

KINDS = {
    "gaussian-single-receiver": ({"kind", "powers"}, {"noise", "rates", "intended"}),
    "binary-adder": ({"kind", "users"}, {"rates", "intended"}),
    "gaussian-network": ({"kind", "gains", "powers"}, {"noises", "rates"}),
}


class SpecError(ValueError):
    pass


def fmt(x: float) -> str:
    return f"{x:.9f}"


@dataclass(frozen=True)
class ChannelSpec:
    kind: str
    powers: tuple[float, ...] = ()
    noise: float = 1.0
    noises: tuple[float, ...] = ()
    gains: tuple[tuple[float, ...], ...] = ()
    rates: tuple[float, ...] | None = None
    intended: int | None = None
    users: int = 0

    @property
    def size(self) -> int:
        return self.users if self.kind == "binary-adder" else len(self.powers)

    def view(self):
        if self.kind == "gaussian-single-receiver":
            return GaussianReceiverView.from_powers(self.powers, self.noise, self.intended or 1)
        if self.kind == "binary-adder":
            return BinaryAdderView(self.users, self.intended or 1)
        raise SpecError(f"kind '{self.kind}' has no single-receiver view")

    def network(self) -> InterferenceNetwork:
        if self.kind != "gaussian-network":
            raise SpecError(f"this command needs kind 'gaussian-network', got '{self.kind}'")
        return InterferenceNetwork(self.gains, self.powers, self.noises)

    def full_rates(self) -> RateVector:
        if self.rates is None:
            raise SpecError("field 'rates': required by this command")
        if len(self.rates) != self.size:
            raise SpecError(f"field 'rates': expected {self.size} entries, got {len(self.rates)}")
        return RateVector(self.rates)

    def interferer_rates(self) -> RateVector:
        """Rates for a view with an intended user; accepts M or M-1 entries."""
        if self.rates is not None and len(self.rates) == self.size - 1:
            return RateVector.for_interferers(self.size, self.intended or 1, self.rates)
        return self.full_rates()


def _line_of(text: str, key: str) -> str:
    pos = text.find(f'"{key}"')
    return f"line {text.count(chr(10), 0, pos) + 1}: " if pos >= 0 else ""


def _number(value, where: str, *, positive: bool = False, nonneg: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise SpecError(f"{where}: expected a finite number, got {value!r}")
    if positive and not value > 0:
        raise SpecError(f"{where}: must be positive, got {value!r}")
    if nonneg and value < 0:
        raise SpecError(f"{where}: must be nonnegative, got {value!r}")
    return float(value)


def _vector(obj, key: str, **kw) -> tuple[float, ...]:
    value = obj[key]
    if not isinstance(value, list) or not value:
        raise SpecError(f"field '{key}': expected a nonempty list of numbers")
    return tuple(_number(v, f"field '{key}[{k}]'", **kw) for k, v in enumerate(value))


def parse_spec(text: str) -> ChannelSpec:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise SpecError("line 1: spec must be a JSON object")
    kind = obj.get("kind")
    if kind not in KINDS:
        raise SpecError(f"{_line_of(text, 'kind')}field 'kind': expected one of {sorted(KINDS)}, got {kind!r}")
    required, optional = KINDS[kind]
    for key in sorted(required - obj.keys()):
        raise SpecError(f"field '{key}': required for kind '{kind}'")
    for key in sorted(obj.keys() - required - optional):
        raise SpecError(f"{_line_of(text, key)}field '{key}': not allowed for kind '{kind}'")
    try:
        return _build(obj, kind)
    except SpecError as exc:
        key = str(exc).split("'")[1] if "'" in str(exc) else ""
        raise SpecError(f"{_line_of(text, key.split('[')[0])}{exc}") from None


def _build(obj: dict, kind: str) -> ChannelSpec:
    kw: dict = {"kind": kind}
    if "rates" in obj:
        kw["rates"] = _vector(obj, "rates", nonneg=True)
    if kind == "binary-adder":
        users = obj["users"]
        if isinstance(users, bool) or not isinstance(users, int) or not 1 <= users <= 63:
            raise SpecError(f"field 'users': expected an integer in 1..63, got {users!r}")
        kw["users"] = users
    else:
        kw["powers"] = _vector(obj, "powers", nonneg=kind != "gaussian-network",
                               positive=kind == "gaussian-network")
    M = kw["users"] if kind == "binary-adder" else len(kw["powers"])
    if "intended" in obj:
        i = obj["intended"]
        if isinstance(i, bool) or not isinstance(i, int) or not 1 <= i <= M:
            raise SpecError(f"field 'intended': expected a user index in 1..{M}, got {i!r}")
        kw["intended"] = i
    if "noise" in obj:
        kw["noise"] = _number(obj["noise"], "field 'noise'", positive=True)
    if kind == "gaussian-network":
        gains = obj["gains"]
        if not isinstance(gains, list) or len(gains) != M:
            raise SpecError(f"field 'gains': expected {M} rows")
        rows = []
        for r, row in enumerate(gains):
            if not isinstance(row, list) or len(row) != M:
                raise SpecError(f"field 'gains[{r}]': expected a row of {M} numbers")
            rows.append(tuple(_number(v, f"field 'gains[{r}][{c}]'") for c, v in enumerate(row)))
            if rows[-1][r] == 0:
                raise SpecError(f"field 'gains[{r}][{r}]': diagonal gain must be nonzero")
        kw["gains"] = tuple(rows)
        kw["noises"] = _vector(obj, "noises", positive=True) if "noises" in obj else (1.0,) * M
        if len(kw["noises"]) != M:
            raise SpecError(f"field 'noises': expected {M} entries")
    return ChannelSpec(**kw)


def parse_grid(text: str) -> list[tuple[float, float, float]]:
    axes = []
    for part in text.split(","):
        bits = part.split(":")
        if len(bits) != 3:
            raise SpecError(f"--grid: axis '{part}' must be start:stop:step")
        try:
            start, stop, step = (float(b) for b in bits)
        except ValueError:
            raise SpecError(f"--grid: axis '{part}' is not numeric") from None
        if step <= 0 or stop < start:
            raise SpecError(f"--grid: axis '{part}' needs step > 0 and stop >= start")
        axes.append((start, stop, step))
    return axes


def _emit(rows: list[list], header: list[str], form: str, extra: dict | None = None) -> str:
    if form == "json":
        payload = dict(extra or {})
        payload["rows"] = [dict(zip(header, r)) for r in rows]
        return json.dumps(payload, indent=2) + "\n"
    if form == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(header))]
    lines = [f"{k}: {v}" for k, v in (extra or {}).items()]
    for r in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def cmd_mds(spec: ChannelSpec, args) -> tuple[str, int]:
    view, rates = spec.view(), spec.full_rates()
    E = UserSet.full(spec.size)
    S = max_decodable_subset(view, E, rates, args.tol, args.solver)
    cons = region_constraints(view, E, S, rates, args.tol)
    rows = [[c.kind, c.users.render(), fmt(c.lhs), fmt(c.rhs), fmt(c.slack), "pass" if c.holds else "fail"]
            for c in cons]
    ok = all(c.holds for c in cons)
    out = _emit(rows, ["constraint", "set", "lhs", "rhs", "slack", "status"], args.format, {"S": S.render()})
    if not ok:
        raise ConsistencyError(f"maximum decodable subset {S.render()} violates its own region inequalities")
    return out, 0


def cmd_rate(spec: ChannelSpec, args) -> tuple[str, int]:
    d = achievable_rate(spec.view(), spec.interferer_rates(), args.tol, args.solver)
    rows = [[f"R_{d.intended}", fmt(d.rate)], ["W", d.W_first.render()],
            ["U", d.U_joint.render()], ["V", d.V_noise.render()]]
    return _emit(rows, ["field", "value"], args.format), 0


def cmd_surface(spec: ChannelSpec, args) -> tuple[str, int]:
    if not args.grid:
        raise SpecError("--grid is required for 'surface'")
    view = spec.view()
    me = view.intended_user
    pts = sample_rate_surface(view, parse_grid(args.grid), args.tol, args.solver, args.workers)
    others = [j for j in range(1, spec.size + 1) if j != me]
    header = [f"R_{j}" for j in others] + [f"R_{me}", "region", "active_set"]
    rows = [[fmt(r) for r in p.interferer_rates] + [fmt(p.rate), p.region.render(), p.active.render()]
            for p in pts]
    pieces = count_pieces(pts)
    form = args.format if args.format != "table" else "csv"
    if form == "csv":
        args.note = f"pieces={pieces}"
        return _emit(rows, header, "csv"), 0
    return _emit(rows, header, form, {"pieces": pieces}), 0


def cmd_ladder(spec: ChannelSpec, args) -> tuple[str, int]:
    if spec.kind != "gaussian-single-receiver":
        raise SpecError("'ladder' needs kind 'gaussian-single-receiver'")
    lad = build_ladder(spec.powers, spec.full_rates())
    rows = [[k + 1, fmt(lv.noise), lv.users.render()] for k, lv in enumerate(lad.levels)]
    return _emit(rows, ["level", "noise", "users"], args.format), 0


def cmd_certify(spec: ChannelSpec, args) -> tuple[str, int]:
    if spec.kind != "gaussian-single-receiver":
        raise SpecError("'certify' needs kind 'gaussian-single-receiver'")
    cert = verify_capacity(spec.view(), spec.interferer_rates(), args.tol, args.solver)
    rows = [[c.name, fmt(c.lhs), c.relation, fmt(c.rhs), fmt(c.slack), "pass" if c.passed else "fail"]
            for c in cert.checks]
    d = cert.decomposition
    extra = {"capacity": fmt(d.rate), "V": d.V_noise.render(), "U": d.U_joint.render(),
             "W": d.W_first.render(), "certificate": "pass" if cert.passed else "fail"}
    out = _emit(rows, ["constraint", "lhs", "rel", "rhs", "slack", "status"], args.format, extra)
    return out, 0 if cert.passed else 3


def _parse_order(text: str, M: int) -> list[int]:
    try:
        order = [int(t) for t in text.split(",")]
    except ValueError:
        raise SpecError(f"--order: '{text}' is not a comma-separated permutation") from None
    if sorted(order) != list(range(1, M + 1)):
        raise SpecError(f"--order: '{text}' is not a permutation of 1..{M}")
    return order


def cmd_extreme(spec: ChannelSpec, args) -> tuple[str, int]:
    net = spec.network()
    if args.order == "all":
        points = all_orderings(net, args.tol, args.solver)
    else:
        order = _parse_order(args.order, net.size) if args.order else list(range(1, net.size + 1))
        points = [successive_maximize(net, order, args.tol, args.solver)]
    header = ["ordering"] + [f"R_{i}" for i in range(1, net.size + 1)] + ["strategy"]
    rows = [[",".join(map(str, p.ordering))] + [fmt(r) for r in p.rates.rates] + [p.strategy.render()]
            for p in points]
    return _emit(rows, header, args.format), 0


def cmd_classify(spec: ChannelSpec, args) -> tuple[str, int]:
    net = spec.network()
    order = is_generalized_one_sided(net)
    strong = is_strong_one_sided(net) if order is not None else False
    rows = [["generalized_one_sided", "yes" if order is not None else "no"],
            ["relabeling", ",".join(map(str, order)) if order is not None else "-"],
            ["strong_one_sided", "yes" if strong else "no"]]
    return _emit(rows, ["property", "value"], args.format), 0


def cmd_member(spec: ChannelSpec, args) -> tuple[str, int]:
    net = spec.network()
    if is_generalized_one_sided(net) is None or not is_strong_one_sided(net):
        raise SpecError("'member' needs a strong one-sided network")
    ok, witness = strong_one_sided_membership(net, spec.full_rates(), args.tol)
    rows = [["member", "yes" if ok else "no"],
            ["receiver", str(witness[0]) if witness else "-"],
            ["violated_set", witness[1].render() if witness else "-"]]
    return _emit(rows, ["field", "value"], args.format), 0


COMMANDS = {
    "mds": (cmd_mds, "maximum decodable subset and its region inequalities"),
    "rate": (cmd_rate, "achievable rate of the intended user with its V/U/W split"),
    "surface": (cmd_surface, "sampled rate surface as CSV plus piece count"),
    "ladder": (cmd_ladder, "degraded broadcast ladder for powers and rates"),
    "certify": (cmd_certify, "capacity certificate for a single receiver"),
    "extreme": (cmd_extreme, "successive-maximisation points of a network"),
    "classify": (cmd_classify, "one-sided / strong one-sided classification"),
    "member": (cmd_member, "strong one-sided capacity membership with witness"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="interfere", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        s = sub.add_parser(name, help=help_)
        s.add_argument("spec", help="JSON channel spec file, or - for stdin")
        s.add_argument("--tol", type=float, default=TOL)
        s.add_argument("--solver", choices=["exhaustive", "minnorm", "auto"], default="auto")
        s.add_argument("--format", choices=["table", "csv", "json"], default="table")
        if name == "surface":
            s.add_argument("--grid", help="start:stop:step per interferer, comma separated")
            s.add_argument("--workers", type=int, default=None)
        if name == "extreme":
            s.add_argument("--order", help="permutation like 2,1,3 or 'all'")
    return p


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        if args.tol <= 0:
            raise SpecError("--tol must be positive")
        try:
            text = sys.stdin.read() if args.spec == "-" else open(args.spec, encoding="utf-8").read()
        except OSError as exc:
            raise SpecError(f"cannot read spec file: {exc.strerror}") from None
        spec = parse_spec(text)
        out, code = COMMANDS[args.command][0](spec, args)
    except (ConsistencyError, SolverError, NotSubmodularError) as exc:
        print(f"internal consistency failure: {exc}", file=stderr)
        return 3
    except (SpecError, LadderError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    stdout.write(out)
    if getattr(args, "note", None):
        print(args.note, file=stderr)
    return code


def main() -> None:
    sys.exit(run())
