"""Sums-of-Squares certificates.

A certificate asserts the identity

    target = sum(lam_i * r_i^2) + sum(t_q * q) + sum(u_i*(x_i^2 - x_i) + v_i*(x_i + ~x_i - 1))

with rational weights ``lam_i >= 0``.  The weights keep everything rational
when the natural square roots are not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping, Optional, Sequence

from .core import (
    ONE, ConstraintSystem, Monomial, Polynomial, VariableSpace, VerificationReport,
    bit_size, boolean_ideal_witness, max_coeff_bits_of, norm_inf, rational_bit_size,
    square_axiom, twin_axiom,
)


@dataclass(frozen=True)
class SosCertificate:
    system: ConstraintSystem
    squares: tuple[tuple[Fraction, Polynomial], ...] = ()
    axiom_lifts: Mapping[str, Polynomial] = field(default_factory=dict)
    boolean_lifts: Mapping[int, tuple[Polynomial, Polynomial]] = field(default_factory=dict)
    target: Optional[Polynomial] = None

    def __post_init__(self):
        if self.target is None:
            object.__setattr__(self, "target", self.system.space.zero())
        object.__setattr__(self, "squares", tuple((Fraction(lam), r) for lam, r in self.squares))

    @property
    def space(self) -> VariableSpace:
        return self.system.space

    def is_refutation(self) -> bool:
        return self.target == -1

    def rhs(self) -> Polynomial:
        space = self.space
        total = space.zero()
        for lam, r in self.squares:
            total = total + (r * r).scale(lam)
        for name, t in self.axiom_lifts.items():
            total = total + t * self.system.get(name)
        for i, (u, v) in self.boolean_lifts.items():
            total = total + u * square_axiom(space, i) + v * twin_axiom(space, i)
        return total


@dataclass(frozen=True)
class SosMetrics:
    degree: int
    distinct_explicit_monomials: int
    distinct_significant_monomials: int
    monomial_size: int
    bit_complexity: int
    lift_norms: dict
    max_coeff_bits: int


class UnverifiedCertificate(ValueError):
    pass


def verify_sos(cert: SosCertificate) -> VerificationReport:
    space = cert.space
    for k, (lam, r) in enumerate(cert.squares, start=1):
        if lam < 0:
            return VerificationReport(False, k, f"square {k} has negative weight {lam}")
        if r.space != space:
            return VerificationReport(False, k, f"square {k} over a different variable space")
    for name, t in cert.axiom_lifts.items():
        if name not in cert.system:
            return VerificationReport(False, None, f"lift for unknown constraint {name!r}")
        if t.space != space:
            return VerificationReport(False, None, f"lift {name!r} over a different variable space")
    for i, (u, v) in cert.boolean_lifts.items():
        if not 1 <= i <= space.n_pairs:
            return VerificationReport(False, None, f"boolean lift for pair {i} outside the space")
        if u.space != space or v.space != space:
            return VerificationReport(False, None, f"boolean lift {i} over a different variable space")
    residual = cert.target - cert.rhs()
    if not residual.is_zero():
        return VerificationReport(False, None, "identity does not hold", residual=residual)
    return VerificationReport(True)


def _degree_of(p: Polynomial) -> int:
    return -1 if p.is_zero() else p.degree


def sos_metrics(cert: SosCertificate, verified: bool = False) -> SosMetrics:
    if not verified:
        report = verify_sos(cert)
        if not report:
            raise UnverifiedCertificate(report.describe())
    space = cert.space
    significant: list[Polynomial] = [r for _, r in cert.squares]
    significant += list(cert.axiom_lifts.values())
    others: list[Polynomial] = [cert.system.get(name) for name in cert.axiom_lifts]
    for i, (u, v) in cert.boolean_lifts.items():
        others += [u, v, square_axiom(space, i), twin_axiom(space, i)]

    degs = [2 * _degree_of(r) for _, r in cert.squares if not r.is_zero()]
    degs += [_degree_of(t * cert.system.get(name)) for name, t in cert.axiom_lifts.items()]
    for i, (u, v) in cert.boolean_lifts.items():
        degs += [_degree_of(u * square_axiom(space, i)), _degree_of(v * twin_axiom(space, i))]

    sig_set = {m for p in significant for m in p.terms}
    exp_set = sig_set | {m for p in others for m in p.terms}
    bits = sum(rational_bit_size(lam) for lam, _ in cert.squares)
    bits += sum(bit_size(p) for p in significant + others) + bit_size(cert.target)
    stored = [lam for lam, _ in cert.squares]
    for p in significant:
        stored += p.terms.values()
    for u, v in cert.boolean_lifts.values():
        stored += list(u.terms.values()) + list(v.terms.values())
    return SosMetrics(
        degree=max(degs, default=0),
        distinct_explicit_monomials=len(exp_set),
        distinct_significant_monomials=len(sig_set),
        monomial_size=sum(len(p) for p in significant + others),
        bit_complexity=bits,
        lift_norms={name: norm_inf(t * cert.system.get(name)) for name, t in cert.axiom_lifts.items()},
        max_coeff_bits=max_coeff_bits_of(stored),
    )


def significant_monomials(cert: SosCertificate) -> set[Monomial]:
    out = {m for _, r in cert.squares for m in r.terms}
    return out | {m for t in cert.axiom_lifts.values() for m in t.terms}


# --- degree criterion ----------------------------------------------------------


def exp_enclosure(x: Fraction, tol: Fraction = Fraction(1, 10**9)) -> tuple[Fraction, Fraction]:
    """Rational ``lo <= exp(x) <= hi`` with ``hi - lo <= tol``, for ``x >= 0``."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("exp_enclosure needs x >= 0")
    term = Fraction(1)
    lo = Fraction(0)
    j = 0
    while True:
        lo += term
        j += 1
        term = term * x / j
        # tail sum_{i>=j} x^i/i! <= term / (1 - x/(j+1)) once x < j+1
        if x < j + 1:
            tail = term / (1 - x / (j + 1))
            if tail <= tol:
                return lo, lo + tail


def degree_criterion_enclosure(n_pairs: int, k: int, d: int, tol=Fraction(1, 10**9)):
    """Enclosure of ``exp((d-k-4)^2 / (32(n_pairs+1)))``.

    Lower bound on the number of distinct significant monomials in any SOS
    refutation of a degree-``k`` system on ``n_pairs`` twin pairs whose
    minimum refutation degree is ``d``.
    """
    if d < k + 4:
        raise ValueError(f"criterion needs d >= k + 4 (got d={d}, k={k})")
    return exp_enclosure(Fraction((d - k - 4) ** 2, 32 * (n_pairs + 1)), Fraction(tol))


def degree_criterion_bound(n: int, k: int, d: int, tol=Fraction(1, 10**9)) -> Fraction:
    """Lower end of the monomial lower bound for a knapsack instance on ``2n`` variables.

    ``degree_criterion_bound(n, 1, 2n)`` is the bound ``s_n`` for
    ``KNAPSACK(2n, n + eps)``.  For a general system use
    :func:`degree_criterion_enclosure` with the actual pair count.
    """
    return degree_criterion_enclosure(2 * n, k, d, tol)[0]


# --- bounding certificates -----------------------------------------------------


def _factor_over(m: Monomial, S: Sequence[Monomial], members: set):
    if m in members:
        return (m,)
    for a in S:
        for b in S:
            if a * b == m:
                if a == b:
                    return (a, a)
                return (a, b)
    return None


def bound_certificate(p: Polynomial, S: Iterable[Monomial]):
    """Constant ``r >= 0`` and an SOS certificate of ``r - p >= 0`` over ``S``.

    Every monomial of ``p`` must equal ``m1*m2`` for some ``m1, m2`` in ``S``
    (and ``1`` must belong to ``S``).  Per term ``a*m``:

    * ``m`` in ``S``, ``a < 0``: ``-a*m = (-a)*m^2 + ideal``, contributes 0;
    * ``m`` in ``S``, ``a > 0``: ``a - a*m = a*(1-m)^2 + ideal``, contributes ``a``;
    * ``m = m1*m2``: ``|a| - a*m1*m2`` is ``|a|/2`` times
      ``(m1 -+ m2)^2 + (1-m1)^2 + (1-m2)^2`` modulo the ideal.

    The ideal part is made explicit as Boolean-axiom lifts.
    """
    S = list(dict.fromkeys(S))
    members = set(S)
    if ONE not in members:
        raise ValueError("S must contain the monomial 1")
    space = p.space
    r = Fraction(0)
    squares: list[tuple[Fraction, Polynomial]] = []

    def mono(m: Monomial) -> Polynomial:
        return Polynomial(space, {m: 1})

    for m, a in p.sorted_terms():
        fac = _factor_over(m, S, members)
        if fac is None:
            raise ValueError(f"monomial {m} is not a product of two members of S")
        if len(fac) == 1 or fac[0] == fac[1]:
            base = mono(fac[0])
            if a < 0:
                squares.append((-a, base))
            elif fac[0] != ONE:
                r += a
                squares.append((a, 1 - base))
            else:
                r += a
        else:
            m1, m2 = mono(fac[0]), mono(fac[1])
            half = abs(a) / 2
            cross = m1 + m2 if a < 0 else m1 - m2
            r += abs(a)
            squares += [(half, cross), (half, 1 - m1), (half, 1 - m2)]

    target = space.const(r) - p
    residual = target - sum((s * s).scale(lam) for lam, s in squares) if squares else target
    rem, u, v = boolean_ideal_witness(residual)
    if not rem.is_zero():  # pragma: no cover - guards the construction itself
        raise AssertionError(f"bound construction left a non-ideal residual {rem}")
    blifts = {i: (u.get(i, space.zero()), v.get(i, space.zero())) for i in sorted(set(u) | set(v))}
    cert = SosCertificate(ConstraintSystem(space, ()), tuple(squares), {}, blifts, target)
    return r, cert
