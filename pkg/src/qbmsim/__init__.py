"""Gaussian dynamics and entanglement certification for a damped oscillator.

A single oscillator couples bilinearly to a finite bath of harmonic modes.
Everything is phase-space level: states are covariance matrices, dynamics is
symplectic conjugation, entanglement questions reduce to spectra of partially
transposed covariances.
"""

from ._version import __version__
from .model import (
    OscillatorNetwork,
    SpectralFamily,
    bath_potential_matrix,
    build_potential_matrix,
    build_quadratic_form,
    make_spectral_model,
)
from .symplectic import (
    embed_orthogonal,
    evolve,
    gibbs_covariance,
    is_pure,
    is_valid_covariance,
    make_pure_gaussian,
    mean_energy,
    normal_modes,
    propagator,
    purity_residual,
    symplectic_form,
    symplectic_spectrum,
    thermal_factor,
)
from .entanglement import (
    ENTANGLED,
    INCONCLUSIVE,
    SEPARABLE,
    EntanglementVerdict,
    TwoModeBlock,
    lambda_of_block,
    partial_transpose,
    ppt_verdict,
    reduce_two_mode,
)
from .certify import (
    CertificateConstants,
    FeasibilityError,
    OnsetReport,
    ScalingRow,
    SeparabilityCertificate,
    VerificationReport,
    bath_gibbs_covariance,
    build_certificate,
    certificate_constants,
    critical_beta,
    immediate_entanglement_check,
    lambda_dot_analytic,
    lambda_dot_finite_difference,
    n_scaling_study,
    product_initial_covariance,
    verify_all_times_separable,
)

__all__ = [
    "__version__",
    "OscillatorNetwork",
    "SpectralFamily",
    "bath_potential_matrix",
    "build_potential_matrix",
    "build_quadratic_form",
    "make_spectral_model",
    "embed_orthogonal",
    "evolve",
    "gibbs_covariance",
    "is_pure",
    "is_valid_covariance",
    "make_pure_gaussian",
    "mean_energy",
    "normal_modes",
    "propagator",
    "purity_residual",
    "symplectic_form",
    "symplectic_spectrum",
    "thermal_factor",
    "ENTANGLED",
    "INCONCLUSIVE",
    "SEPARABLE",
    "EntanglementVerdict",
    "TwoModeBlock",
    "lambda_of_block",
    "partial_transpose",
    "ppt_verdict",
    "reduce_two_mode",
    "CertificateConstants",
    "FeasibilityError",
    "OnsetReport",
    "ScalingRow",
    "SeparabilityCertificate",
    "VerificationReport",
    "bath_gibbs_covariance",
    "build_certificate",
    "certificate_constants",
    "critical_beta",
    "immediate_entanglement_check",
    "lambda_dot_analytic",
    "lambda_dot_finite_difference",
    "n_scaling_study",
    "product_initial_covariance",
    "verify_all_times_separable",
]
