"""Exact polynomials over twin Boolean variables.

Every scalar is a :class:`fractions.Fraction`.  Variables come in twin pairs
``x[p]`` / ``~x[p]`` (``p`` is 1-based); the Boolean ideal is generated by
``x^2 - x`` and ``x + ~x - 1`` for every pair.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Optional, Union

Scalar = Union[int, Fraction]

DEFAULT_MAX_BITS = 1 << 24


class SpaceMismatch(ValueError):
    pass


class CoefficientTooLarge(ArithmeticError):
    pass


def bitlen(n: int) -> int:
    """Binary length of ``|n|``; zero takes one bit."""
    return max(abs(n).bit_length(), 1)


def rational_bit_size(r: Fraction) -> int:
    # sign bit + numerator + denominator, fraction kept reduced by Fraction
    r = Fraction(r)
    return bitlen(r.numerator) + bitlen(r.denominator) + 1


def coeff_bits(r: Fraction) -> int:
    r = Fraction(r)
    return max(bitlen(r.numerator), bitlen(r.denominator))


def max_bits() -> int:
    raw = os.environ.get("WORKBENCH_MAX_BITS")
    return int(raw) if raw else DEFAULT_MAX_BITS


def check_bits(nbits: int) -> None:
    """Abort before building a number longer than ``WORKBENCH_MAX_BITS``."""
    cap = max_bits()
    if nbits > cap:
        raise CoefficientTooLarge(
            f"coefficient of {nbits} bits exceeds WORKBENCH_MAX_BITS={cap}")


class Var(NamedTuple):
    pair: int
    neg: bool = False

    def twin(self) -> "Var":
        return Var(self.pair, not self.neg)


@dataclass(frozen=True)
class VariableSpace:
    """``n_pairs`` twin pairs, optionally laid out as a ``rows x cols`` grid."""

    n_pairs: int
    grid: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if self.n_pairs < 0:
            raise ValueError("n_pairs must be nonnegative")
        if self.grid is not None:
            rows, cols = self.grid
            if rows * cols != self.n_pairs:
                raise ValueError(f"grid {rows}x{cols} does not cover {self.n_pairs} pairs")

    def pair_index(self, i: int, j: int) -> int:
        if self.grid is None:
            raise ValueError("space has no grid shape")
        rows, cols = self.grid
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise ValueError(f"grid position ({i},{j}) out of range")
        return (i - 1) * cols + j

    def grid_position(self, pair: int) -> tuple[int, int]:
        if self.grid is None:
            raise ValueError("space has no grid shape")
        cols = self.grid[1]
        return (pair - 1) // cols + 1, (pair - 1) % cols + 1

    def check_pair(self, pair: int) -> None:
        if not 1 <= pair <= self.n_pairs:
            raise ValueError(f"pair index {pair} outside 1..{self.n_pairs}")

    # polynomial constructors

    def zero(self) -> "Polynomial":
        return Polynomial(self)

    def const(self, c: Scalar) -> "Polynomial":
        return Polynomial(self, {ONE: c})

    def var(self, pair: int, neg: bool = False) -> "Polynomial":
        self.check_pair(pair)
        return Polynomial(self, {Monomial.of({Var(pair, neg): 1}): 1})

    def grid_var(self, i: int, j: int, neg: bool = False) -> "Polynomial":
        return self.var(self.pair_index(i, j), neg)

    def variables(self) -> list[Var]:
        return [Var(p, neg) for p in range(1, self.n_pairs + 1) for neg in (False, True)]


@dataclass(frozen=True, order=False)
class Monomial:
    """A power product, stored as ``((var, exponent), ...)`` sorted by variable."""

    powers: tuple[tuple[Var, int], ...] = ()

    @staticmethod
    def of(exps: Mapping[Var, int]) -> "Monomial":
        items = []
        for v, e in exps.items():
            if e < 0:
                raise ValueError("negative exponent")
            if e:
                items.append((Var(*v), e))
        items.sort()
        return Monomial(tuple(items))

    @staticmethod
    def multilinear(pairs: Iterable[int]) -> "Monomial":
        return Monomial(tuple((Var(p, False), 1) for p in sorted(set(pairs))))

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.powers)

    @property
    def variables(self) -> tuple[Var, ...]:
        return tuple(v for v, _ in self.powers)

    def exponent(self, v: Var) -> int:
        for w, e in self.powers:
            if w == v:
                return e
        return 0

    def is_one(self) -> bool:
        return not self.powers

    def is_multilinear_positive(self) -> bool:
        return all(e == 1 and not v.neg for v, e in self.powers)

    def positive_pairs(self) -> frozenset[int]:
        return frozenset(v.pair for v, _ in self.powers if not v.neg)

    def __mul__(self, other: "Monomial") -> "Monomial":
        if not self.powers:
            return other
        if not other.powers:
            return self
        exps = dict(self.powers)
        for v, e in other.powers:
            exps[v] = exps.get(v, 0) + e
        return Monomial(tuple(sorted(exps.items())))

    def divide(self, v: Var, e: int = 1) -> "Monomial":
        exps = dict(self.powers)
        left = exps.get(v, 0) - e
        if left < 0:
            raise ValueError(f"{v} does not divide monomial {e} times")
        exps[v] = left
        return Monomial.of(exps)

    def grlex_key(self):
        # higher degree first, then lexicographic on the variable order
        return (-self.degree, tuple((v, -e) for v, e in self.powers))

    def __repr__(self) -> str:
        if not self.powers:
            return "Monomial(1)"
        body = "*".join(
            f"{'~' if v.neg else ''}x{v.pair}" + (f"^{e}" if e > 1 else "")
            for v, e in self.powers)
        return f"Monomial({body})"


ONE = Monomial()


class Polynomial:
    """Sparse polynomial with Fraction coefficients over a fixed VariableSpace.

    Instances are treated as immutable; all arithmetic returns new objects.
    """

    __slots__ = ("space", "_terms", "_hash")

    def __init__(self, space: VariableSpace, terms: Optional[Mapping[Monomial, Scalar]] = None):
        self.space = space
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                c = Fraction(c)
                if c:
                    clean[m] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, space: VariableSpace, terms: dict) -> "Polynomial":
        p = cls.__new__(cls)
        p.space = space
        p._terms = terms
        p._hash = None
        return p

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return MappingProxyType(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> Optional[int]:
        """Maximum monomial degree; ``None`` stands for the zero polynomial's -inf."""
        if not self._terms:
            return None
        return max(m.degree for m in self._terms)

    def coefficient(self, m: Monomial) -> Fraction:
        return self._terms.get(m, Fraction(0))

    def constant_value(self) -> Optional[Fraction]:
        """The value if this is a constant polynomial, otherwise ``None``."""
        if not self._terms:
            return Fraction(0)
        if len(self._terms) == 1 and ONE in self._terms:
            return self._terms[ONE]
        return None

    def monomials(self) -> list[Monomial]:
        return sorted(self._terms, key=Monomial.grlex_key)

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return [(m, self._terms[m]) for m in self.monomials()]

    # arithmetic

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.space != self.space:
                raise SpaceMismatch(f"{self.space} vs {other.space}")
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial(self.space, {ONE: other})
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial._raw(self.space, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.space, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = m1 * m2
                out[m] = out.get(m, 0) + c1 * c2
        return Polynomial._raw(self.space, {m: c for m, c in out.items() if c})

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        out = self.space.const(1)
        for _ in range(e):
            out = out * self
        return out

    def scale(self, a: Scalar) -> "Polynomial":
        a = Fraction(a)
        if not a:
            return Polynomial(self.space)
        return Polynomial._raw(self.space, {m: a * c for m, c in self._terms.items()})

    def mul_monomial(self, mono: Monomial) -> "Polynomial":
        return Polynomial._raw(self.space, {m * mono: c for m, c in self._terms.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self._terms == ({ONE: Fraction(other)} if other else {})
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.space == other.space and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.space, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        from .formats import format_polynomial
        return f"Polynomial({format_polynomial(self)!r})"


def add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def scale(a: Scalar, p: Polynomial) -> Polynomial:
    return p.scale(a)


# --- Boolean ideal -------------------------------------------------------------


def square_axiom(space: VariableSpace, pair: int) -> Polynomial:
    x = space.var(pair)
    return x * x - x


def twin_axiom(space: VariableSpace, pair: int) -> Polynomial:
    return space.var(pair) + space.var(pair, neg=True) - 1


@lru_cache(maxsize=1 << 16)
def _canonical_monomial(m: Monomial) -> tuple[tuple[frozenset, int], ...]:
    pos = {v.pair for v, _ in m.powers if not v.neg}
    neg = [v.pair for v, _ in m.powers if v.neg]
    if pos.intersection(neg):
        return ()  # x * (1 - x) vanishes
    out = []
    for r in range(len(neg) + 1):
        sign = -1 if r % 2 else 1
        for sub in combinations(neg, r):
            out.append((frozenset(pos.union(sub)), sign))
    return tuple(out)


def canonical_form(p: Polynomial) -> Polynomial:
    """Unique multilinear representative of ``p`` modulo the Boolean ideal.

    Negative twins are eliminated via ``~x -> 1 - x`` and every exponent is
    cut down to 1, so ``p`` lies in the ideal iff the result is zero.
    """
    acc: dict[frozenset, Fraction] = {}
    for m, c in p._terms.items():
        for pairs, sign in _canonical_monomial(m):
            acc[pairs] = acc.get(pairs, 0) + sign * c
    return Polynomial._raw(
        p.space, {Monomial.multilinear(s): c for s, c in acc.items() if c})


def in_boolean_ideal(p: Polynomial) -> bool:
    return canonical_form(p).is_zero()


def boolean_ideal_witness(p: Polynomial):
    """Explicit multipliers reducing ``p`` to its canonical form.

    Returns ``(remainder, u, v)`` with ``remainder == canonical_form(p)`` and
    ``p == remainder + sum(u[i]*(x_i^2 - x_i) + v[i]*(x_i + ~x_i - 1))``.
    """
    space = p.space
    work: dict[Monomial, Fraction] = dict(p._terms)
    u: dict[int, dict[Monomial, Fraction]] = {}
    v: dict[int, dict[Monomial, Fraction]] = {}

    def bump(d: dict, m: Monomial, c: Fraction) -> None:
        s = d.get(m, 0) + c
        if s:
            d[m] = s
        else:
            d.pop(m, None)

    # ~x * m'' = m'' * (x + ~x - 1) + m'' - x * m''
    while True:
        target = next((m for m in work if any(w.neg for w in m.variables)), None)
        if target is None:
            break
        c = work.pop(target)
        nv = next(w for w in target.variables if w.neg)
        rest = target.divide(nv)
        bump(v.setdefault(nv.pair, {}), rest, c)
        bump(work, rest, c)
        bump(work, rest * Monomial.of({Var(nv.pair): 1}), -c)

    # x^e * m' = x^(e-2) * m' * (x^2 - x) + x^(e-1) * m'
    while True:
        target = next((m for m in work if any(e > 1 for _, e in m.powers)), None)
        if target is None:
            break
        c = work.pop(target)
        pv, e = next((w, e) for w, e in target.powers if e > 1)
        bump(u.setdefault(pv.pair, {}), target.divide(pv, 2), c)
        bump(work, target.divide(pv, 1), c)

    rem = Polynomial(space, work)
    return (rem,
            {i: Polynomial(space, d) for i, d in sorted(u.items()) if d},
            {i: Polynomial(space, d) for i, d in sorted(v.items()) if d})


# --- measures ------------------------------------------------------------------


def norm_inf(p: Polynomial) -> Fraction:
    return max((abs(c) for c in p._terms.values()), default=Fraction(0))


def monomial_bit_size(m: Monomial) -> int:
    return sum(bitlen(v.pair) + 1 + bitlen(e) for v, e in m.powers)


def bit_size(p: Polynomial) -> int:
    """Encoded length: reduced-fraction coefficients plus indexed exponent lists."""
    return sum(rational_bit_size(c) + monomial_bit_size(m) for m, c in p._terms.items())


def max_coeff_bits_of(values: Iterable[Fraction]) -> int:
    return max((coeff_bits(c) for c in values), default=0)


def evaluate(p: Polynomial, assignment: Mapping[int, int]) -> Fraction:
    """Value of ``p`` at a Boolean point given on pair indices (``~x`` takes ``1 - x``)."""
    total = Fraction(0)
    for m, c in p._terms.items():
        val = c
        for v, e in m.powers:
            try:
                bit = assignment[v.pair]
            except KeyError:
                raise ValueError(f"assignment has no value for pair {v.pair}") from None
            if bit not in (0, 1):
                raise ValueError(f"non-Boolean value {bit!r} for pair {v.pair}")
            if (1 - bit if v.neg else bit) == 0:
                val = Fraction(0)
                break
        total += val
    return total


# --- shared result types -------------------------------------------------------


@dataclass(frozen=True)
class ConstraintSystem:
    """Named equality constraints ``q = 0`` over a variable space."""

    space: VariableSpace
    constraints: tuple[tuple[str, Polynomial], ...] = ()

    def __post_init__(self):
        names = [n for n, _ in self.constraints]
        if len(set(names)) != len(names):
            raise ValueError("constraint names must be unique")
        for name, q in self.constraints:
            if q.space != self.space:
                raise SpaceMismatch(f"constraint {name} over a different space")
            if q.is_zero():
                raise ValueError(f"constraint {name} is the zero polynomial")

    def names(self) -> list[str]:
        return [n for n, _ in self.constraints]

    def get(self, name: str) -> Polynomial:
        for n, q in self.constraints:
            if n == name:
                return q
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.constraints)


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    line: Optional[int] = None
    reason: str = ""
    residual: Optional[Polynomial] = field(default=None, compare=False)

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "ok"
        where = f"line {self.line}: " if self.line is not None else ""
        return f"FAILED {where}{self.reason}"
