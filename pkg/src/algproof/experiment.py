"""Monomial-size vs bit-complexity growth on the Q_n refutations."""

from __future__ import annotations

import csv
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

from .core import VerificationReport
from .families import generate_qn_pcr_refutation, generate_qn_sos_refutation
from .pcr import pcr_metrics, verify_pcr
from .sos import sos_metrics, verify_sos

DEFAULT_N_MAX = 4


class VerificationFailed(RuntimeError):
    def __init__(self, what: str, report: VerificationReport):
        msg = f"{what}: {report.describe()}"
        if report.residual is not None:
            msg += f"\nresidual: {report.residual!r}"
        super().__init__(msg)
        self.report = report


@dataclass(frozen=True)
class ExperimentRow:
    n: int
    system: str
    degree: int
    monomial_size: int
    distinct_significant: Optional[int]
    height: Optional[int]
    max_coeff_bits: int
    bit_complexity: int
    verify_ok: bool
    wall_time_ms: int


CSV_HEADER = [f.name for f in fields(ExperimentRow)]


def measure(n: int, system: str) -> ExperimentRow:
    t0 = time.perf_counter()
    if system == "pcr":
        proof = generate_qn_pcr_refutation(n)
        report = verify_pcr(proof)
        if not report:
            raise VerificationFailed(f"PCR refutation of Q_{n}", report)
        m = pcr_metrics(proof, verified=True)
        extra = dict(distinct_significant=None, height=m.height)
    elif system == "sos":
        cert = generate_qn_sos_refutation(n)
        report = verify_sos(cert)
        if not report:
            raise VerificationFailed(f"SOS refutation of Q_{n}", report)
        m = sos_metrics(cert, verified=True)
        extra = dict(distinct_significant=m.distinct_significant_monomials, height=None)
    else:
        raise ValueError(f"unknown system {system!r}")
    elapsed = int(round((time.perf_counter() - t0) * 1000))
    return ExperimentRow(n=n, system=system, degree=m.degree, monomial_size=m.monomial_size,
                         max_coeff_bits=m.max_coeff_bits, bit_complexity=m.bit_complexity,
                         verify_ok=True, wall_time_ms=elapsed, **extra)


def write_csv(rows, out) -> None:
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in rows:
            w.writerow(["" if v is None else str(v).lower() if isinstance(v, bool) else v
                        for v in asdict(row).values()])


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def run_growth_experiment(n_max: int, out=None, allow_large: bool = False) -> list[ExperimentRow]:
    """Generate, verify and measure both refutations for ``n = 1..n_max``.

    ``n_max > 4`` needs ``allow_large``: from ``n = 5`` on the refutations
    carry a 2^32-bit coefficient (still bounded by ``WORKBENCH_MAX_BITS``).
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if n_max > DEFAULT_N_MAX and not allow_large:
        raise ValueError(f"n_max > {DEFAULT_N_MAX} requires allow_large")
    rows = []
    for n in range(1, n_max + 1):
        for system in ("pcr", "sos"):
            row = measure(n, system)
            if row.max_coeff_bits != 2 ** n + 1:
                raise AssertionError(
                    f"{system} n={n}: max_coeff_bits {row.max_coeff_bits} != {2 ** n + 1}")
            rows.append(row)
    if out is not None:
        write_csv(rows, Path(out))
    return rows
