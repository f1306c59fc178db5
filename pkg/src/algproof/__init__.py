"""Exact workbench for SOS and PCR/Q refutations of Boolean polynomial systems."""

from .core import (
    ConstraintSystem, Monomial, Polynomial, Var, VariableSpace, VerificationReport,
    add, bit_size, canonical_form, evaluate, mul, norm_inf, scale,
)
from .families import (
    generate_qn_pcr_refutation, generate_qn_sos_refutation, knapsack_system, qn_system,
)
from .pcr import PcrProof, is_r_bounded, pcr_metrics, verify_pcr
from .pseudo import (
    check_product_properties, check_s_pe_axioms, is_psd, knapsack_pe, moment_matrix,
    pe_value, product_pe,
)
from .sos import (
    SosCertificate, bound_certificate, degree_criterion_bound, sos_metrics, verify_sos,
)

__version__ = "0.1.0"
