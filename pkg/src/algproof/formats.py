"""Text syntax for polynomials and the on-disk formats built on it.

Polynomials look like ``4*x[1]^2 - 1/2*~x[1] + 3``; on a grid space the
variables render as ``x[i,j]``.  Terms are written in graded-lexicographic
order so that serialization is deterministic.
"""

from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .core import (
    ConstraintSystem, Monomial, Polynomial, Var, VariableSpace, bitlen, check_bits,
)


class ParseError(ValueError):
    pass


# --- scalars and polynomials ---------------------------------------------------


def format_rational(r: Fraction) -> str:
    r = Fraction(r)
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    m = re.fullmatch(r"([+-]?\d+)(?:\s*/\s*(\d+))?", text)
    if not m:
        raise ParseError(f"not a rational: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ParseError("zero denominator")
    check_bits(max(bitlen(num), bitlen(den)))
    return Fraction(num, den)


def format_var(space: VariableSpace, v: Var) -> str:
    prefix = "~" if v.neg else ""
    if space.grid is not None:
        i, j = space.grid_position(v.pair)
        return f"{prefix}x[{i},{j}]"
    return f"{prefix}x[{v.pair}]"


def format_monomial(space: VariableSpace, m: Monomial) -> str:
    if m.is_one():
        return "1"
    return "*".join(format_var(space, v) + (f"^{e}" if e > 1 else "") for v, e in m.powers)


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for k, (m, c) in enumerate(p.sorted_terms()):
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if m.is_one():
            body = format_rational(a)
        elif a == 1:
            body = format_monomial(p.space, m)
        else:
            body = f"{format_rational(a)}*{format_monomial(p.space, m)}"
        if k == 0:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts)


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<var>~?x\[\s*\d+\s*(?:,\s*\d+\s*)?\])|(?P<op>[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected input at {pos}: {text[pos:pos + 12]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, space: VariableSpace):
        self.toks = _tokenize(text)
        self.i = 0
        self.space = space

    def peek(self) -> Optional[tuple[str, str]]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, value: Optional[str] = None) -> tuple[str, str]:
        tok = self.peek()
        if tok is None or (value is not None and tok[1] != value):
            raise ParseError(f"expected {value or 'token'}, got {tok}")
        self.i += 1
        return tok

    def expr(self) -> Polynomial:
        sign = 1
        tok = self.peek()
        if tok and tok[1] in "+-":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        acc = self.term().scale(sign)
        while (tok := self.peek()) and tok[1] in "+-":
            self.take()
            t = self.term()
            acc = acc + t if tok[1] == "+" else acc - t
        return acc

    def term(self) -> Polynomial:
        acc = self.power()
        while (tok := self.peek()) and tok[1] in "*/":
            self.take()
            rhs = self.power()
            if tok[1] == "*":
                acc = acc * rhs
            else:
                c = rhs.constant_value()
                if c is None or c == 0:
                    raise ParseError("division only by a nonzero constant")
                acc = acc.scale(1 / c)
        return acc

    def power(self) -> Polynomial:
        base = self.atom()
        tok = self.peek()
        if tok and tok[1] == "^":
            self.take()
            kind, val = self.take()
            if kind != "num":
                raise ParseError("exponent must be a nonnegative integer")
            base = base ** int(val)
        return base

    def atom(self) -> Polynomial:
        kind, val = self.take()
        if kind == "num":
            check_bits(bitlen(int(val)))
            return self.space.const(int(val))
        if kind == "var":
            neg = val.startswith("~")
            idx = [int(s) for s in re.findall(r"\d+", val)]
            try:
                if len(idx) == 2:
                    return self.space.grid_var(idx[0], idx[1], neg)
                return self.space.var(idx[0], neg)
            except ValueError as exc:
                raise ParseError(str(exc)) from None
        if val == "(":
            inner = self.expr()
            self.take(")")
            return inner
        if val == "-":
            return -self.power()
        raise ParseError(f"unexpected {val!r}")


def parse_polynomial(text: str, space: VariableSpace) -> Polynomial:
    parser = _Parser(text, space)
    if not parser.toks:
        raise ParseError("empty polynomial")
    p = parser.expr()
    if parser.peek() is not None:
        raise ParseError(f"trailing input: {parser.peek()}")
    return p


def parse_monomial(text: str, space: VariableSpace) -> Monomial:
    p = parse_polynomial(text, space)
    if len(p) != 1 or next(iter(p.terms.values())) != 1:
        raise ParseError(f"not a monomial: {text!r}")
    return next(iter(p.terms))


# --- headers -------------------------------------------------------------------


def _content_lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def format_space_header(space: VariableSpace) -> list[str]:
    out = [f"pairs: {space.n_pairs}"]
    if space.grid is not None:
        out.append(f"grid: {space.grid[0]} {space.grid[1]}")
    return out


def _parse_space_header(fields: dict[str, str]) -> VariableSpace:
    grid = None
    if "grid" in fields:
        try:
            rows, cols = map(int, fields["grid"].split())
        except ValueError:
            raise ParseError(f"bad grid header {fields['grid']!r}") from None
        grid = (rows, cols)
    if "pairs" not in fields:
        if grid is None:
            raise ParseError("missing 'pairs:' header")
        # the pair count follows from the grid
        return VariableSpace(grid[0] * grid[1], grid)
    return VariableSpace(int(fields["pairs"]), grid)


def _split_header(line: str) -> Optional[tuple[str, str]]:
    m = re.fullmatch(r"([A-Za-z][\w-]*)\s*:\s*(.*)", line)
    return (m.group(1).lower(), m.group(2).strip()) if m else None


# --- constraint systems --------------------------------------------------------


def format_system(system: ConstraintSystem) -> str:
    lines = ["# constraint system: each line 'name | q' means q = 0"]
    lines += format_space_header(system.space)
    lines += [f"{name} | {format_polynomial(q)}" for name, q in system.constraints]
    return "\n".join(lines) + "\n"


def parse_system(text: str) -> ConstraintSystem:
    fields: dict[str, str] = {}
    rows = []
    for line in _content_lines(text):
        if "|" in line:
            name, poly = (s.strip() for s in line.split("|", 1))
            rows.append((name, poly))
        elif (kv := _split_header(line)) is not None:
            fields[kv[0]] = kv[1]
        else:
            raise ParseError(f"bad system line: {line!r}")
    space = _parse_space_header(fields)
    return ConstraintSystem(space, tuple((n, parse_polynomial(p, space)) for n, p in rows))


def read_system(path) -> ConstraintSystem:
    return parse_system(Path(path).read_text(encoding="utf-8"))


def write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _resolve_system(fields: dict[str, str], base: Optional[Path]) -> ConstraintSystem:
    ref = fields.get("system", "none")
    if ref != "none":
        p = Path(ref)
        if base is not None and not p.is_absolute():
            p = base / p
        return read_system(p)
    return ConstraintSystem(_parse_space_header(fields), ())


def _system_header(system: ConstraintSystem, system_ref: Optional[str]) -> list[str]:
    if system_ref is not None:
        return [f"system: {system_ref}"]
    if system.constraints:
        raise ValueError("a proof over a nonempty system needs a system file reference")
    return ["system: none"] + format_space_header(system.space)


# --- PCR proofs ----------------------------------------------------------------


def format_pcr(proof, system_ref: Optional[str] = None) -> str:
    from .pcr import Axiom, BooleanAxiom, Lift, LinComb

    space = proof.space
    out = _system_header(proof.system, system_ref)
    out.append(f"target: {format_polynomial(proof.target)}")
    out.append("---")
    for line in proof.lines:
        j = line.justification
        if isinstance(j, Axiom):
            rule = f"AXIOM {j.name}"
        elif isinstance(j, BooleanAxiom):
            rule = f"BOOL {j.pair} {j.kind}"
        elif isinstance(j, Lift):
            rule = f"LIFT {j.premise} {format_var(space, j.var)}"
        elif isinstance(j, LinComb):
            rule = f"LIN {j.j} {j.k} {format_rational(j.a)} {format_rational(j.b)}"
        else:
            raise TypeError(f"unknown justification {j!r}")
        out.append(f"{line.index} | {rule} | {format_polynomial(line.polynomial)}")
    return "\n".join(out) + "\n"


def parse_pcr(text: str, base: Optional[Path] = None):
    from .pcr import Axiom, BooleanAxiom, Lift, LinComb, PcrLine, PcrProof

    fields: dict[str, str] = {}
    body: list[str] = []
    in_body = False
    for line in _content_lines(text):
        if line == "---":
            in_body = True
        elif in_body or "|" in line:
            body.append(line)
        elif (kv := _split_header(line)) is not None:
            fields[kv[0]] = kv[1]
        else:
            raise ParseError(f"bad header line: {line!r}")
    system = _resolve_system(fields, base)
    space = system.space
    if "target" not in fields:
        raise ParseError("missing 'target:' header")
    target = parse_polynomial(fields["target"], space)

    lines = []
    for row in body:
        parts = [s.strip() for s in row.split("|")]
        if len(parts) != 3:
            raise ParseError(f"proof line needs 'idx | rule | poly': {row!r}")
        idx, rule, poly = parts
        words = rule.split()
        kind = words[0].upper() if words else ""
        try:
            if kind == "AXIOM" and len(words) == 2:
                just = Axiom(words[1])
            elif kind == "BOOL" and len(words) == 3:
                just = BooleanAxiom(int(words[1]), words[2])
            elif kind == "LIFT" and len(words) == 3:
                var_poly = parse_polynomial(words[2], space)
                (mono,) = var_poly.terms
                (v,) = mono.variables
                just = Lift(int(words[1]), v)
            elif kind == "LIN" and len(words) == 5:
                just = LinComb(int(words[1]), int(words[2]),
                               parse_rational(words[3]), parse_rational(words[4]))
            else:
                raise ParseError(f"unknown rule {rule!r}")
        except (ValueError, TypeError) as exc:
            raise ParseError(f"line {idx}: {exc}") from None
        lines.append(PcrLine(int(idx), parse_polynomial(poly, space), just))
    return PcrProof(system, tuple(lines), target)


def read_pcr(path):
    path = Path(path)
    return parse_pcr(path.read_text(encoding="utf-8"), path.parent)


# --- SOS certificates ----------------------------------------------------------


def format_sos(cert, system_ref: Optional[str] = None) -> str:
    out = _system_header(cert.system, system_ref)
    out.append("[SQUARES]")
    out += [f"{format_rational(lam)} | {format_polynomial(r)}" for lam, r in cert.squares]
    out.append("[LIFTS]")
    out += [f"{name} | {format_polynomial(t)}" for name, t in cert.axiom_lifts.items()]
    out.append("[BOOL-LIFTS]")
    out += [f"{i} | {format_polynomial(u)} | {format_polynomial(v)}"
            for i, (u, v) in sorted(cert.boolean_lifts.items())]
    out.append("[TARGET]")
    out.append(format_polynomial(cert.target))
    return "\n".join(out) + "\n"


def parse_sos(text: str, base: Optional[Path] = None):
    from .sos import SosCertificate

    fields: dict[str, str] = {}
    sections: dict[str, list[str]] = {}
    current = None
    for line in _content_lines(text):
        if re.fullmatch(r"\[[A-Z-]+\]", line):
            current = line[1:-1]
            if current not in ("SQUARES", "LIFTS", "BOOL-LIFTS", "TARGET"):
                raise ParseError(f"unknown section {line}")
            sections.setdefault(current, [])
        elif current is None:
            kv = _split_header(line)
            if kv is None:
                raise ParseError(f"bad header line: {line!r}")
            fields[kv[0]] = kv[1]
        else:
            sections[current].append(line)
    system = _resolve_system(fields, base)
    space = system.space

    squares = []
    for row in sections.get("SQUARES", []):
        lam, poly = (s.strip() for s in row.split("|", 1))
        squares.append((parse_rational(lam), parse_polynomial(poly, space)))
    lifts = {}
    for row in sections.get("LIFTS", []):
        name, poly = (s.strip() for s in row.split("|", 1))
        lifts[name] = parse_polynomial(poly, space)
    blifts = {}
    for row in sections.get("BOOL-LIFTS", []):
        parts = [s.strip() for s in row.split("|")]
        if len(parts) != 3:
            raise ParseError(f"bool lift needs 'pair | u | v': {row!r}")
        blifts[int(parts[0])] = (parse_polynomial(parts[1], space),
                                 parse_polynomial(parts[2], space))
    target_rows = sections.get("TARGET", [])
    if len(target_rows) != 1:
        raise ParseError("[TARGET] needs exactly one polynomial line")
    target = parse_polynomial(target_rows[0], space)
    return SosCertificate(system, tuple(squares), lifts, blifts, target)


def read_sos(path):
    path = Path(path)
    return parse_sos(path.read_text(encoding="utf-8"), path.parent)


# --- monomial lists and matrices -----------------------------------------------


def format_monomial_list(space: VariableSpace, monos) -> str:
    out = format_space_header(space)
    out += [format_monomial(space, m) for m in monos]
    return "\n".join(out) + "\n"


def parse_monomial_list(text: str, space: Optional[VariableSpace] = None):
    """Header lines (``pairs:``/``grid:``) then one monomial per line."""
    fields: dict[str, str] = {}
    rows = []
    for line in _content_lines(text):
        kv = _split_header(line)
        if kv is not None and kv[0] in ("pairs", "grid"):
            fields[kv[0]] = kv[1]
        else:
            rows.append(line)
    if fields:
        space = _parse_space_header(fields)
    if space is None:
        raise ParseError("monomial list needs a 'pairs:' header")
    return space, [parse_monomial(r, space) for r in rows]


def parse_matrix(text: str) -> list[list[Fraction]]:
    """First token is the dimension, then row-major rationals."""
    toks = text.split()
    if not toks:
        raise ParseError("empty matrix file")
    n = int(toks[0])
    vals = [parse_rational(t) for t in toks[1:]]
    if len(vals) != n * n:
        raise ParseError(f"expected {n * n} entries, got {len(vals)}")
    return [vals[i * n:(i + 1) * n] for i in range(n)]


def format_matrix(rows) -> str:
    n = len(rows)
    body = "\n".join(" ".join(format_rational(x) for x in row) for row in rows)
    return f"{n}\n{body}\n"


__all__ = [
    "ParseError", "format_rational", "parse_rational", "format_var", "format_monomial",
    "format_polynomial", "parse_polynomial", "parse_monomial", "format_system",
    "parse_system", "read_system", "format_pcr", "parse_pcr", "read_pcr",
    "format_sos", "parse_sos", "read_sos", "format_monomial_list",
    "parse_monomial_list", "parse_matrix", "format_matrix", "write_text",
]
