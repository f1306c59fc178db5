import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from algproof.core import ConstraintSystem, Polynomial, Var, VariableSpace, evaluate
from algproof.families import generate_qn_pcr_refutation, qn_system
from algproof.formats import format_pcr, parse_pcr
from algproof.pcr import (
    Axiom, Lift, LinComb, PcrLine, PcrProof, ProofBuilder, UnverifiedProof, is_r_bounded,
    line_heights, pcr_metrics, verify_pcr,
)

from conftest import assignments, to_sympy

HALF = Fraction(1, 2)


def _bump(p: Polynomial, rng: random.Random) -> Polynomial:
    terms = dict(p.terms)
    if terms:
        m = rng.choice(sorted(terms, key=lambda m: m.grlex_key()))
        terms[m] += 1
    else:
        terms[p.space.const(1).monomials()[0]] = Fraction(1)
    return Polynomial(p.space, terms)


def test_two_line_linear_combination():
    system = qn_system(1)
    ax = system.get("I")
    lines = (
        PcrLine(1, ax, Axiom("I")),
        PcrLine(2, ax.scale(HALF), LinComb(1, 1, HALF, Fraction(0))),
    )
    # hand check: 1/2 (ks1 - 1/2) = 1/2 ks1 - 1/4
    target = (ax + HALF).scale(HALF) - Fraction(1, 4)
    assert verify_pcr(PcrProof(system, lines, target))


def test_lift_must_be_exact():
    system = qn_system(1)
    ax = system.get("I")
    x11 = system.space.grid_var(1, 1)
    bad = PcrLine(2, x11 * ax + 1, Lift(1, Var(1)))
    report = verify_pcr(PcrProof(system, (PcrLine(1, ax, Axiom("I")), bad), x11 * ax + 1))
    assert not report
    assert report.line == 2
    assert report.residual == system.space.const(1)


def test_lift_is_not_reduced():
    # x * x stays x^2; replacing it by x (equal mod the ideal) must fail
    space = VariableSpace(1)
    system = ConstraintSystem(space, (("q", space.var(1) - 1),))
    x = space.var(1)
    good = PcrProof(system, (PcrLine(1, x - 1, Axiom("q")), PcrLine(2, x * x - x, Lift(1, Var(1)))), x * x - x)
    assert verify_pcr(good)
    bad = PcrProof(system, (PcrLine(1, x - 1, Axiom("q")), PcrLine(2, x - x, Lift(1, Var(1)))), x - x)
    assert not verify_pcr(bad)


def test_lift_by_negative_twin():
    space = VariableSpace(2)
    system = ConstraintSystem(space, (("q", space.var(1) - 1),))
    pb = ProofBuilder(system)
    pb.lift(pb.axiom("q"), Var(2, True))
    assert verify_pcr(pb.build())


def test_premise_must_precede():
    system = qn_system(1)
    ax = system.get("I")
    lines = (PcrLine(1, ax, Axiom("I")), PcrLine(2, ax, LinComb(2, 1, Fraction(1), Fraction(0))))
    assert not verify_pcr(PcrProof(system, lines, ax))


def test_generated_n1_matches_hand_derivation():
    proof = generate_qn_pcr_refutation(1)
    assert verify_pcr(proof)
    space = proof.space
    ks1 = space.grid_var(1, 1) + space.grid_var(1, 2) - 1
    polys = [line.polynomial for line in proof.lines]
    # ks1 (ks1 - 1/2) = ks1^2 - 1/4 - 1/2 (ks1 - 1/2) appears as a line
    assert ks1 * ks1 - ks1.scale(HALF) in polys
    assert proof.lines[-1].justification.a == 4
    assert polys[-1] == 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_generated_lines_agree_with_sympy(n):
    """Re-derive every rule application through sympy expansion."""
    proof = generate_qn_pcr_refutation(n)
    exprs = {}
    for line in proof.lines:
        j = line.justification
        if isinstance(j, Axiom):
            want = to_sympy(proof.system.get(j.name))
        elif isinstance(j, Lift):
            want = sympy.expand(sympy.Symbol(f"x{j.var.pair}") * exprs[j.premise])
        else:
            a = sympy.Rational(j.a.numerator, j.a.denominator)
            b = sympy.Rational(j.b.numerator, j.b.denominator)
            want = sympy.expand(a * exprs[j.j] + b * exprs[j.k])
        assert sympy.expand(want - to_sympy(line.polynomial)) == 0
        exprs[line.index] = want
    assert exprs[proof.lines[-1].index] == 1


def test_metrics_examples():
    m1 = pcr_metrics(generate_qn_pcr_refutation(1))
    assert m1.degree == 2
    assert m1.max_abs_scalar == 4
    m3 = pcr_metrics(generate_qn_pcr_refutation(3))
    assert m3.degree == 2
    assert m3.max_abs_scalar == 256
    m4 = pcr_metrics(generate_qn_pcr_refutation(4))
    assert m4.bit_complexity >= 16
    assert m4.max_coeff_bits == 17


def test_single_axiom_has_height_zero():
    system = qn_system(1)
    proof = PcrProof(system, (PcrLine(1, system.get("I"), Axiom("I")),), system.get("I"))
    m = pcr_metrics(proof)
    assert m.height == 0
    assert m.max_abs_scalar == 0
    assert is_r_bounded(proof, Fraction(3, 2))
    assert not is_r_bounded(proof, 1)


def test_metrics_reject_unverified():
    proof = generate_qn_pcr_refutation(1)
    bad = PcrProof(proof.system, proof.lines, proof.space.const(2))
    with pytest.raises(UnverifiedProof):
        pcr_metrics(bad)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_r_boundedness_threshold(n):
    proof = generate_qn_pcr_refutation(n)
    R = 2 ** (2 ** n)
    assert is_r_bounded(proof, R)
    assert not is_r_bounded(proof, R - 1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_height_and_size_invariants(n):
    proof = generate_qn_pcr_refutation(n)
    m = pcr_metrics(proof)
    assert m.height <= len(proof.lines) - 1
    assert m.monomial_size >= len(proof.lines)
    hs = line_heights(proof)
    for line, h in zip(proof.lines, hs):
        if isinstance(line.justification, Axiom):
            assert h == 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mutating_any_nonaxiom_line_breaks_proof(n):
    proof = generate_qn_pcr_refutation(n)
    rng = random.Random(n)
    for line in proof.lines:
        if isinstance(line.justification, Axiom):
            continue
        mutated = list(proof.lines)
        mutated[line.index - 1] = PcrLine(line.index, _bump(line.polynomial, rng), line.justification)
        report = verify_pcr(PcrProof(proof.system, tuple(mutated), proof.target))
        assert not report
        assert report.line == line.index


@st.composite
def toy_derivations(draw):
    """Random derivations from the satisfiable system {x1 - 1 = 0} on 2 pairs."""
    space = VariableSpace(2)
    system = ConstraintSystem(space, (("q", space.var(1) - 1),))
    pb = ProofBuilder(system)
    pb.axiom("q")
    for _ in range(draw(st.integers(1, 8))):
        kind = draw(st.sampled_from(["lift", "lin", "bool", "axiom"]))
        top = len(pb.lines)
        if kind == "lift" and (pb.poly(top).degree or 0) < 3:
            pb.lift(draw(st.integers(1, top)), Var(draw(st.integers(1, 2)), draw(st.booleans())))
        elif kind == "lin":
            pb.lin(draw(st.integers(1, top)), draw(st.integers(1, top)),
                   draw(st.integers(-3, 3)), draw(st.integers(-3, 3)))
        elif kind == "bool":
            pb.boolean(draw(st.integers(1, 2)), draw(st.sampled_from(["square", "twin"])))
        else:
            pb.axiom("q")
    return pb.build()


@settings(max_examples=50)
@given(toy_derivations())
def test_lines_vanish_on_satisfying_points(proof):
    assert verify_pcr(proof)
    for a in assignments(2):
        if a[1] != 1:
            continue
        for line in proof.lines:
            assert evaluate(line.polynomial, a) == 0
    assert proof.lines[-1].polynomial != 1


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_file_round_trip(n, tmp_path):
    from algproof.formats import format_system
    proof = generate_qn_pcr_refutation(n)
    (tmp_path / "q.system").write_text(format_system(proof.system))
    text = format_pcr(proof, system_ref="q.system")
    back = parse_pcr(text, tmp_path)
    assert verify_pcr(back)
    assert pcr_metrics(back) == pcr_metrics(proof)
    assert format_pcr(back, system_ref="q.system") == text
