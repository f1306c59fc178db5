"""Pseudoexpectations, moment matrices and exact PSD testing."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence

from .core import (
    ONE, ConstraintSystem, Monomial, Polynomial, VariableSpace, canonical_form, norm_inf,
    square_axiom, twin_axiom,
)
from .families import QnFamily, qn_space


class Pseudoexpectation:
    """Linear functional given by its values on multilinear positive monomials.

    ``evaluator`` receives the monomial as a frozenset of pair indices.
    Any polynomial is first brought to canonical form, so the functional
    vanishes on the Boolean ideal by construction.
    """

    def __init__(self, space: VariableSpace, evaluator: Callable[[frozenset], Fraction], name: str = ""):
        self.space = space
        self.name = name
        self._eval = lru_cache(maxsize=None)(evaluator)

    def monomial_value(self, pairs: Iterable[int]) -> Fraction:
        return Fraction(self._eval(frozenset(pairs)))

    def __call__(self, p: Polynomial) -> Fraction:
        return pe_value(self, p)

    def __repr__(self) -> str:
        return f"Pseudoexpectation({self.name or '?'}, pairs={self.space.n_pairs})"


def pe_value(pe: Pseudoexpectation, p: Polynomial) -> Fraction:
    if p.space != pe.space:
        raise ValueError("polynomial and pseudoexpectation live on different spaces")
    total = Fraction(0)
    for m, c in canonical_form(p).terms.items():
        total += c * pe.monomial_value(m.positive_pairs())
    return total


def falling_ratio(v: int, k: Fraction, size: int) -> Fraction:
    """prod_{l < size} (k - l)/(v - l)."""
    out = Fraction(1)
    for l in range(size):
        out *= (k - l) / (v - l)
    return out


def knapsack_pe(v: int, k, space: Optional[VariableSpace] = None,
                pairs: Optional[Sequence[int]] = None) -> Pseudoexpectation:
    """Symmetric pseudoexpectation for ``x_1 + ... + x_v = k``.

    ``E(prod_{j in T} x_j) = prod_{l < |T|} (k - l)/(v - l)``.  By default the
    variables are pairs ``1..v`` of a fresh space; ``pairs`` selects a block
    inside a larger ``space``.
    """
    k = Fraction(k)
    if not 0 < k < v:
        raise ValueError(f"knapsack pseudoexpectation needs 0 < k < v (k={k}, v={v})")
    if space is None:
        space = VariableSpace(v)
    block = frozenset(pairs) if pairs is not None else frozenset(range(1, v + 1))
    if len(block) != v:
        raise ValueError("block size must equal v")

    def evaluate(T: frozenset) -> Fraction:
        if not T <= block:
            raise ValueError(f"monomial uses pairs {sorted(T - block)} outside the knapsack block")
        return falling_ratio(v, k, len(T))

    return Pseudoexpectation(space, evaluate, name=f"knapsack(v={v}, k={k})")


@dataclass(frozen=True)
class ProjectionIndex:
    """Splits grid monomials into their row blocks."""

    space: VariableSpace

    def __post_init__(self):
        if self.space.grid is None:
            raise ValueError("projection needs a grid space")

    @property
    def n_blocks(self) -> int:
        return self.space.grid[0]

    def block_of(self, pair: int) -> int:
        self.space.check_pair(pair)
        return self.space.grid_position(pair)[0]

    def block_pairs(self, i: int) -> list[int]:
        cols = self.space.grid[1]
        return [self.space.pair_index(i, j) for j in range(1, cols + 1)]

    def split(self, pairs: Iterable[int]) -> dict[int, frozenset]:
        out: dict[int, set] = {}
        for p in pairs:
            out.setdefault(self.block_of(p), set()).add(p)
        return {i: frozenset(s) for i, s in out.items()}

    def project(self, m: Monomial, i: int) -> Monomial:
        return Monomial(tuple((v, e) for v, e in m.powers if self.block_of(v.pair) == i))

    def block_degree(self, m: Monomial, i: int) -> int:
        return len({v.pair for v, _ in m.powers if self.block_of(v.pair) == i})


def product_pe(blocks: Sequence[Pseudoexpectation], idx: ProjectionIndex) -> Pseudoexpectation:
    """``E(m) = E_1(m_1) * ... * E_n(m_n)`` over the row blocks of a grid."""
    if len(blocks) != idx.n_blocks:
        raise ValueError(f"need {idx.n_blocks} block pseudoexpectations, got {len(blocks)}")

    def evaluate(T: frozenset) -> Fraction:
        out = Fraction(1)
        parts = idx.split(T)
        for i, block in enumerate(blocks, start=1):
            out *= block.monomial_value(parts.get(i, frozenset()))
            if not out:
                break
        return out

    return Pseudoexpectation(idx.space, evaluate, name=f"product({len(blocks)} blocks)")


def qn_block_pes(n: int) -> list[Pseudoexpectation]:
    """Row-``i`` knapsack pseudoexpectations for ``ks_i = 1/2^(2^(i-1))``."""
    space = qn_space(n)
    idx = ProjectionIndex(space)
    fam = QnFamily(n)
    return [knapsack_pe(2 * n, n + fam.target_value(i), space, idx.block_pairs(i))
            for i in range(1, n + 1)]


def qn_product_pe(n: int) -> Pseudoexpectation:
    return product_pe(qn_block_pes(n), ProjectionIndex(qn_space(n)))


# --- moment matrices -----------------------------------------------------------


@dataclass(frozen=True)
class MomentMatrix:
    index: tuple[Monomial, ...]
    entries: tuple[tuple[Fraction, ...], ...]

    def __len__(self) -> int:
        return len(self.index)

    def rows(self) -> list[list[Fraction]]:
        return [list(r) for r in self.entries]


def moment_matrix(pe: Pseudoexpectation, S: Sequence[Monomial]) -> MomentMatrix:
    S = tuple(S)
    size = len(S)
    rows = [[Fraction(0)] * size for _ in range(size)]
    for a in range(size):
        for b in range(a, size):
            val = pe_value(pe, Polynomial(pe.space, {S[a] * S[b]: 1}))
            rows[a][b] = rows[b][a] = val
    return MomentMatrix(S, tuple(tuple(r) for r in rows))


def is_psd(M) -> bool:
    """Exact positive-semidefiniteness by pivoted Schur complements.

    Pivot on the largest diagonal entry; a negative pivot means not PSD.  Once
    the remaining diagonal is all zero the block must vanish entirely, since a
    nonzero off-diagonal entry gives a negative 2x2 principal minor.
    """
    rows = M.rows() if isinstance(M, MomentMatrix) else [list(map(Fraction, r)) for r in M]
    size = len(rows)
    for r in rows:
        if len(r) != size:
            raise ValueError("matrix is not square")
    for a in range(size):
        for b in range(a + 1, size):
            if rows[a][b] != rows[b][a]:
                raise ValueError(f"matrix is not symmetric at ({a},{b})")
    A = [r[:] for r in rows]
    while A:
        p = max(range(len(A)), key=lambda i: A[i][i])
        d = A[p][p]
        if d < 0:
            return False
        if d == 0:
            return all(x == 0 for r in A for x in r)
        col = [A[i][p] for i in range(len(A))]
        keep = [i for i in range(len(A)) if i != p]
        A = [[A[i][j] - col[i] * col[j] / d for j in keep] for i in keep]
    return True


# --- checkers ------------------------------------------------------------------


@dataclass
class PeReport:
    checks: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    untestable: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def record(self, clause: str, passed: bool, witness: str = "") -> None:
        self.checks[clause] = self.checks.get(clause, True) and passed
        if not passed:
            self.violations.append((clause, witness))

    def lines(self) -> list[str]:
        out = [f"{k}: {'pass' if v else 'FAIL'}" for k, v in self.checks.items()]
        out += [f"  violation {c}: {w}" for c, w in self.violations]
        if self.untestable:
            out.append(f"  untestable: {len(self.untestable)}")
        return out


def _mono_poly(space: VariableSpace, m: Monomial) -> Polynomial:
    return Polynomial(space, {m: 1})


def square_span(S: Sequence[Monomial], space: VariableSpace) -> set[Monomial]:
    """Canonical monomials reachable from products of two members of ``S``."""
    out: set[Monomial] = set()
    for a in S:
        for b in S:
            out.update(canonical_form(_mono_poly(space, a * b)).terms)
    return out


def check_s_pe_axioms(pe: Pseudoexpectation, system: ConstraintSystem, S: Sequence[Monomial]) -> PeReport:
    """Sufficient conditions for ``pe`` to be an S-pseudoexpectation for ``system``.

    (a) ``E(1) = 1``; (b) ``E(m*q) = 0`` for ``m`` in ``S`` whenever ``m*q``
    reduces into the span of ``S^2``; (c) ``E(m*g) = 0`` for the Boolean
    generators ``g``; (d) the moment matrix over ``S`` is PSD.
    """
    S = list(dict.fromkeys(S))
    if ONE not in S:
        raise ValueError("S must contain the monomial 1")
    space = pe.space
    from .formats import format_monomial, format_polynomial

    rep = PeReport()
    one = pe_value(pe, space.const(1))
    rep.record("a", one == 1, f"E(1) = {one}")

    span = square_span(S, space)
    rep.record("b", True)
    for m in S:
        mp = _mono_poly(space, m)
        for name, q in system.constraints:
            prod = canonical_form(mp * q)
            if not set(prod.terms) <= span:
                rep.untestable.append(("b", f"{format_monomial(space, m)} * {name}"))
                continue
            val = pe_value(pe, prod)
            if val != 0:
                rep.record("b", False, f"E({format_monomial(space, m)} * {name}) = {val}")

    rep.record("c", True)
    for m in S:
        mp = _mono_poly(space, m)
        for i in range(1, space.n_pairs + 1):
            for g in (square_axiom(space, i), twin_axiom(space, i)):
                val = pe_value(pe, mp * g)
                if val != 0:
                    rep.record("c", False, f"E({format_monomial(space, m)} * ({format_polynomial(g)})) = {val}")

    M = moment_matrix(pe, S)
    rep.record("d", is_psd(M), "moment matrix over S is not PSD")
    return rep


def check_product_properties(n: int, S: Sequence[Monomial], samples: int = 32, seed: int = 0) -> PeReport:
    """Exact check of properties (i)-(vii) of the row-product pseudoexpectation for Q_n.

    (iv) and (v) are tested for ``m`` whose row projections leave room for
    the block identity ``E_i((ks_i - c_i) * m_i) = 0``, which holds for
    ``|m_i| < 2n``; other pairs are listed as untestable.  (vi) uses every
    monomial of ``S`` plus ``samples`` random +-1 combinations.
    """
    from .formats import format_monomial

    space = qn_space(n)
    S = list(dict.fromkeys(S))
    for m in S:
        for v in m.variables:
            space.check_pair(v.pair)
    fam = QnFamily(n)
    idx = ProjectionIndex(space)
    pe = qn_product_pe(n)
    width = 2 * n
    ks = [None] + [fam.ks(i) for i in range(1, n + 1)]
    rep = PeReport()

    rep.record("i", pe_value(pe, space.const(1)) == 1, "E(1) != 1")

    rep.record("ii", True)
    rep.record("iii", True)
    for m in S:
        mp = _mono_poly(space, m)
        for pair in range(1, space.n_pairs + 1):
            if pe_value(pe, mp * square_axiom(space, pair)) != 0:
                rep.record("ii", False, f"m={format_monomial(space, m)}, pair {pair}")
            if pe_value(pe, mp * twin_axiom(space, pair)) != 0:
                rep.record("iii", False, f"m={format_monomial(space, m)}, pair {pair}")

    rep.record("iv", True)
    for m in S:
        if idx.block_degree(m, 1) > width - 1:
            rep.untestable.append(("iv", format_monomial(space, m)))
            continue
        val = pe_value(pe, _mono_poly(space, m) * (ks[1] - Fraction(1, 2)))
        if val != 0:
            rep.record("iv", False, f"E({format_monomial(space, m)} (ks_1 - 1/2)) = {val}")

    rep.record("v", True)
    for i in range(1, n):
        for m in S:
            if idx.block_degree(m, i) + 1 > width - 1 or idx.block_degree(m, i + 1) > width - 1:
                rep.untestable.append((f"v[{i}]", format_monomial(space, m)))
                continue
            val = pe_value(pe, _mono_poly(space, m) * (ks[i] * ks[i] - ks[i + 1]))
            if val != 0:
                rep.record("v", False, f"E({format_monomial(space, m)} (ks_{i}^2 - ks_{i + 1})) = {val}")

    rng = random.Random(seed)
    probes = [_mono_poly(space, m) for m in S]
    for _ in range(samples):
        probes.append(Polynomial(space, {m: rng.choice((-1, 1)) for m in S}))
    ksn2 = ks[n] * ks[n]
    scale = Fraction(len(S), 2 ** (2 ** n))
    rep.record("vi", True)
    for p in probes:
        lhs = abs(pe_value(pe, p * ksn2))
        rhs = scale * norm_inf(p)
        if lhs > rhs:
            rep.record("vi", False, f"|E(p ks_n^2)| = {lhs} > {rhs}")

    rep.record("vii", is_psd(moment_matrix(pe, S)), "moment matrix over S is not PSD")
    return rep
