"""Polynomial Calculus Resolution over the rationals: proofs, checking, metrics."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .core import (
    ConstraintSystem, Monomial, Polynomial, Var, VerificationReport, bit_size, bitlen,
    max_coeff_bits_of, rational_bit_size, square_axiom, twin_axiom,
)


@dataclass(frozen=True)
class Axiom:
    name: str


@dataclass(frozen=True)
class BooleanAxiom:
    pair: int
    kind: str  # "square" or "twin"

    def __post_init__(self):
        if self.kind not in ("square", "twin"):
            raise ValueError(f"boolean axiom kind must be square|twin, not {self.kind!r}")


@dataclass(frozen=True)
class Lift:
    premise: int
    var: Var


@dataclass(frozen=True)
class LinComb:
    j: int
    k: int
    a: Fraction
    b: Fraction


Justification = Union[Axiom, BooleanAxiom, Lift, LinComb]


@dataclass(frozen=True)
class PcrLine:
    index: int
    polynomial: Polynomial
    justification: Justification

    def premises(self) -> tuple[int, ...]:
        j = self.justification
        if isinstance(j, Lift):
            return (j.premise,)
        if isinstance(j, LinComb):
            return (j.j, j.k)
        return ()


@dataclass(frozen=True)
class PcrProof:
    system: ConstraintSystem
    lines: tuple[PcrLine, ...]
    target: Polynomial

    def __post_init__(self):
        if not self.lines:
            raise ValueError("a proof needs at least one line")

    @property
    def space(self):
        return self.system.space

    def is_refutation(self) -> bool:
        return self.target == 1


@dataclass(frozen=True)
class PcrMetrics:
    degree: int
    monomial_size: int
    height: int
    bit_complexity: int
    max_abs_coefficient: Fraction
    max_abs_scalar: Fraction
    max_coeff_bits: int
    lines: int


class UnverifiedProof(ValueError):
    pass


def _expected(line: PcrLine, system: ConstraintSystem, by_index: dict[int, Polynomial]):
    """Polynomial the rule produces, or an error string."""
    space = system.space
    j = line.justification
    if isinstance(j, Axiom):
        if j.name not in system:
            return f"no constraint named {j.name!r}"
        return system.get(j.name)
    if isinstance(j, BooleanAxiom):
        if not 1 <= j.pair <= space.n_pairs:
            return f"pair {j.pair} outside the variable space"
        return square_axiom(space, j.pair) if j.kind == "square" else twin_axiom(space, j.pair)
    for ref in line.premises():
        if not 1 <= ref < line.index:
            return f"premise {ref} must precede line {line.index}"
        if ref not in by_index:
            return f"premise {ref} does not exist"
    if isinstance(j, Lift):
        if not 1 <= j.var.pair <= space.n_pairs:
            return f"lift variable pair {j.var.pair} outside the variable space"
        return by_index[j.premise].mul_monomial(Monomial.of({j.var: 1}))
    if isinstance(j, LinComb):
        return by_index[j.j].scale(j.a) + by_index[j.k].scale(j.b)
    return f"unknown justification {j!r}"


def verify_pcr(proof: PcrProof) -> VerificationReport:
    """Check every line against its rule by exact polynomial identity.

    No reduction modulo the Boolean ideal is applied anywhere; a stored line
    must be literally the polynomial the rule yields.
    """
    by_index: dict[int, Polynomial] = {}
    for pos, line in enumerate(proof.lines, start=1):
        if line.index != pos:
            return VerificationReport(False, line.index, f"line numbered {line.index}, expected {pos}")
        if line.polynomial.space != proof.space:
            return VerificationReport(False, line.index, "polynomial over a different variable space")
        want = _expected(line, proof.system, by_index)
        if isinstance(want, str):
            return VerificationReport(False, line.index, want)
        if want != line.polynomial:
            rule = type(line.justification).__name__
            return VerificationReport(False, line.index, f"{rule} rule does not produce the stored polynomial",
                                      residual=line.polynomial - want)
        by_index[line.index] = line.polynomial
    last = proof.lines[-1].polynomial
    if last != proof.target:
        return VerificationReport(False, proof.lines[-1].index, "last line differs from the target",
                                  residual=last - proof.target)
    return VerificationReport(True)


def line_heights(proof: PcrProof) -> list[int]:
    heights: dict[int, int] = {}
    for line in proof.lines:
        prem = line.premises()
        heights[line.index] = 1 + max(heights[p] for p in prem) if prem else 0
    return [heights[line.index] for line in proof.lines]


def pcr_metrics(proof: PcrProof, verified: bool = False) -> PcrMetrics:
    """Degree, monomial-size, height and bit-complexity of a checked proof.

    Pass ``verified=True`` to skip re-running the verifier.
    """
    if not verified:
        report = verify_pcr(proof)
        if not report:
            raise UnverifiedProof(report.describe())
    degree = 0
    msize = 0
    bits = 0
    coeffs: list[Fraction] = []
    scalars: list[Fraction] = []
    for line in proof.lines:
        p = line.polynomial
        if not p.is_zero():
            degree = max(degree, p.degree)
        msize += len(p)
        bits += bit_size(p)
        coeffs.extend(p.terms.values())
        j = line.justification
        if isinstance(j, LinComb):
            scalars += [j.a, j.b]
            bits += rational_bit_size(j.a) + rational_bit_size(j.b)
        bits += sum(bitlen(ref) for ref in line.premises())
    return PcrMetrics(
        degree=degree,
        monomial_size=msize,
        height=line_heights(proof)[-1],
        bit_complexity=bits,
        max_abs_coefficient=max((abs(c) for c in coeffs), default=Fraction(0)),
        max_abs_scalar=max((abs(s) for s in scalars), default=Fraction(0)),
        max_coeff_bits=max_coeff_bits_of(coeffs + scalars),
        lines=len(proof.lines),
    )


def is_r_bounded(proof: PcrProof, R) -> bool:
    """True iff every line coefficient and every combination scalar is at most R in absolute value."""
    R = Fraction(R)
    if R <= 0:
        raise ValueError("R must be positive")
    for line in proof.lines:
        if any(abs(c) > R for c in line.polynomial.terms.values()):
            return False
        j = line.justification
        if isinstance(j, LinComb) and (abs(j.a) > R or abs(j.b) > R):
            return False
    return True


class ProofBuilder:
    """Append-only helper that computes each line's polynomial from its rule."""

    def __init__(self, system: ConstraintSystem):
        self.system = system
        self.lines: list[PcrLine] = []

    def _push(self, poly: Polynomial, just: Justification) -> int:
        idx = len(self.lines) + 1
        self.lines.append(PcrLine(idx, poly, just))
        return idx

    def poly(self, idx: int) -> Polynomial:
        return self.lines[idx - 1].polynomial

    def axiom(self, name: str) -> int:
        return self._push(self.system.get(name), Axiom(name))

    def boolean(self, pair: int, kind: str) -> int:
        space = self.system.space
        poly = square_axiom(space, pair) if kind == "square" else twin_axiom(space, pair)
        return self._push(poly, BooleanAxiom(pair, kind))

    def lift(self, idx: int, var: Var) -> int:
        return self._push(self.poly(idx).mul_monomial(Monomial.of({var: 1})), Lift(idx, var))

    def lin(self, j: int, k: int, a, b) -> int:
        a, b = Fraction(a), Fraction(b)
        return self._push(self.poly(j).scale(a) + self.poly(k).scale(b), LinComb(j, k, a, b))

    def build(self, target=None) -> PcrProof:
        if target is None:
            target = self.lines[-1].polynomial
        return PcrProof(self.system, tuple(self.lines), target)
