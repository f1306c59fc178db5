"""Knapsack and Q_n constraint systems, with degree-2 refutations of Q_n.

Q_n lives on an ``n x 2n`` grid of twin pairs.  With
``ks_i = sum_j x[i,j] - n`` its constraints are

    I:     ks_1 - 1/2
    II-i:  ks_i^2 - ks_{i+1}      (1 <= i < n)
    III:   ks_n^2

Both refutations need a coefficient equal to ``2^(2^n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import ConstraintSystem, Polynomial, Var, VariableSpace, check_bits
from .pcr import PcrProof, ProofBuilder
from .sos import SosCertificate


def knapsack_system(v: int, k) -> ConstraintSystem:
    if v < 1:
        raise ValueError("knapsack needs at least one variable")
    space = VariableSpace(v)
    q = sum((space.var(p) for p in range(1, v + 1)), space.zero()) - Fraction(k)
    return ConstraintSystem(space, (("KS", q),))


def qn_space(n: int) -> VariableSpace:
    return VariableSpace(2 * n * n, (n, 2 * n))


def ks(space: VariableSpace, i: int) -> Polynomial:
    n, cols = space.grid
    return sum((space.grid_var(i, j) for j in range(1, cols + 1)), space.zero()) - n


@dataclass(frozen=True)
class QnFamily:
    """The ``ks_i`` polynomials of one Q_n instance."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")

    @property
    def space(self) -> VariableSpace:
        return qn_space(self.n)

    def ks(self, i: int) -> Polynomial:
        return ks(self.space, i)

    def target_value(self, i: int) -> Fraction:
        """The value ``1/2^(2^(i-1))`` that constraints force on ``ks_i``."""
        return Fraction(1, 2 ** (2 ** (i - 1)))


def qn_system(n: int) -> ConstraintSystem:
    fam = QnFamily(n)
    space = fam.space
    ks_ = [None] + [fam.ks(i) for i in range(1, n + 1)]
    cons = [("I", ks_[1] - Fraction(1, 2))]
    cons += [(f"II-{i}", ks_[i] * ks_[i] - ks_[i + 1]) for i in range(1, n)]
    cons.append(("III", ks_[n] * ks_[n]))
    return ConstraintSystem(space, tuple(cons))


def _check_size(n: int) -> None:
    # the refutations store 2^(2^n), a (2^n + 1)-bit integer
    check_bits(2 ** n + 1)


def generate_qn_pcr_refutation(n: int) -> PcrProof:
    """Degree-2 PCR refutation of Q_n.

    Stage ``i`` starts from a line ``L = ks_i - c`` with ``c = 1/2^(2^(i-1))``:

    * lift ``L`` by every ``x[i,j]`` and add the lifts left to right, giving
      ``(ks_i + n) * L``; subtract ``n*L`` to get ``B = ks_i^2 - c*ks_i``;
    * for ``i < n``: ``B - II-i + c*L = ks_{i+1} - c^2``, the next stage's ``L``;
    * for ``i = n``: ``III - B = c*ks_n``, then
      ``2^(2^n) * (c*ks_n) - 2^(2^n)*c * L = 2^(2^n) * c^2 = 1``.
    """
    _check_size(n)
    system = qn_system(n)
    space = system.space
    pb = ProofBuilder(system)
    cols = 2 * n
    L = pb.axiom("I")
    for i in range(1, n + 1):
        c = Fraction(1, 2 ** (2 ** (i - 1)))
        acc = None
        for j in range(1, cols + 1):
            lifted = pb.lift(L, Var(space.pair_index(i, j)))
            acc = lifted if acc is None else pb.lin(acc, lifted, 1, 1)
        B = pb.lin(acc, L, 1, -n)
        if i < n:
            step = pb.lin(B, pb.axiom(f"II-{i}"), 1, -1)
            L = pb.lin(step, L, 1, c)
        else:
            D = pb.lin(pb.axiom("III"), B, 1, -1)
            big = 2 ** (2 ** n)
            pb.lin(D, L, big, -big * c)
    return pb.build(target=space.const(1))


def generate_qn_sos_refutation(n: int) -> SosCertificate:
    """Degree-2 weighted SOS refutation of Q_n.

    ``-1 = sum_i lam_i (ks_i - c_i)^2 + 2^(n+1) * I - sum_{i<n} lam_i * II-i - 2^(2^n) * III``
    with ``c_i = 2^-(2^(i-1))`` and ``lam_i = 2^(n - i + 2^i)``.  Squares
    cancel against the II/III lifts, the linear parts telescope, and the
    constants sum to ``(2^n - 1) - 2^n``.
    """
    _check_size(n)
    system = qn_system(n)
    fam = QnFamily(n)
    space = system.space
    squares = []
    lifts = {"I": space.const(2 ** (n + 1))}
    for i in range(1, n + 1):
        lam = Fraction(2) ** (n - i + 2 ** i)
        squares.append((lam, fam.ks(i) - fam.target_value(i)))
        if i < n:
            lifts[f"II-{i}"] = space.const(-lam)
    lifts["III"] = space.const(-(2 ** (2 ** n)))
    return SosCertificate(system, tuple(squares), lifts, {}, space.const(-1))
