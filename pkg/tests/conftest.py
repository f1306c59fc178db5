from fractions import Fraction
from itertools import product

import pytest
import sympy
from hypothesis import strategies as st

from algproof.core import Monomial, Polynomial, Var, VariableSpace

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    def record(name: str, ok: bool, detail: str = "") -> None:
        ACCEPTANCE_RESULTS[name] = (ok, detail)
        print(f"[{'PASS' if ok else 'FAIL'}] {name} {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


def assignments(n_pairs: int):
    for bits in product((0, 1), repeat=n_pairs):
        yield {p: b for p, b in enumerate(bits, start=1)}


def to_sympy(p: Polynomial):
    """Independent expansion route: the same polynomial as a sympy expression."""
    syms = {}

    def sym(v: Var):
        key = (v.pair, v.neg)
        if key not in syms:
            syms[key] = sympy.Symbol(f"{'n' if v.neg else 'x'}{v.pair}")
        return syms[key]

    expr = sympy.Integer(0)
    for m, c in p.terms.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for v, e in m.powers:
            term *= sym(v) ** e
        expr += term
    return expr


rationals = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))


@st.composite
def monomials(draw, n_pairs=3, max_vars=3, max_exp=2):
    k = draw(st.integers(0, max_vars))
    exps = {}
    for _ in range(k):
        v = Var(draw(st.integers(1, n_pairs)), draw(st.booleans()))
        exps[v] = exps.get(v, 0) + draw(st.integers(1, max_exp))
    return Monomial.of(exps)


@st.composite
def polynomials(draw, n_pairs=3, max_terms=4, **kw):
    space = VariableSpace(n_pairs)
    terms = draw(st.lists(st.tuples(monomials(n_pairs, **kw), rationals), max_size=max_terms))
    acc: dict = {}
    for m, c in terms:
        acc[m] = acc.get(m, 0) + c
    return Polynomial(space, acc)
