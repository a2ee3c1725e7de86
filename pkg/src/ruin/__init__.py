"""
src/ruin
Scale function, survival and exit probabilities of the MIPP-driven
risk process.
"""

from src.ruin.bessel import bessel_i1, bessel_i1e
from src.ruin.exits import (
    laplace_identity_residual,
    ruin_probability,
    survival_barrier,
    survival_curve,
    survival_probability,
    two_sided_exit,
    write_scale_table,
)
from src.ruin.model import (
    ClaimComponent,
    RiskModel,
    expected_drift,
    net_profit,
    phi_q,
    printed_expected_drift,
    psi_prime_zero,
    psi_R,
)
from src.ruin.scale import (
    Grid,
    KernelTable,
    ScaleTable,
    component_kernel,
    kernel_tables,
    scale_function,
)

__all__ = [
    "ClaimComponent",
    "Grid",
    "KernelTable",
    "RiskModel",
    "ScaleTable",
    "bessel_i1",
    "bessel_i1e",
    "component_kernel",
    "expected_drift",
    "kernel_tables",
    "laplace_identity_residual",
    "net_profit",
    "phi_q",
    "printed_expected_drift",
    "psi_R",
    "psi_prime_zero",
    "ruin_probability",
    "scale_function",
    "survival_barrier",
    "survival_curve",
    "survival_probability",
    "two_sided_exit",
    "write_scale_table",
]
