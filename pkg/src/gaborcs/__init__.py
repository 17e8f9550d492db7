"""Sparse recovery of Gabor (time-frequency) representations.

Subpackages
-----------
tfcore
    Time-frequency shifts, Alltop/Steinhaus windows, fast Gabor synthesis
    and analysis.
gram
    Coherence, Gram submatrices, Jacobi eigenvalues, conditioning
    Monte Carlo.
bounds
    Associated Stirling numbers and closed-form probability bounds.
bp
    Basis Pursuit solver, dual certificates, exhaustive l0 search.
harness
    Seeded experiments, channel identification, CSV/JSON output.
"""

__version__ = "0.1.0"

from .exceptions import (BoundOverflowError, CertificateUnavailableError, DomainError,
                         GaborCSError, InvalidInputError, NotRepresentableError, ResourceError)
from .tfcore import (GaborOperator, SparseCoeffs, SupportSet, TFIndex, Window, alltop_window,
                     custom_window, modulate, sgn, steinhaus_window, tf_shift, translate)
from .gram import (coherence, conditioning_failure_rate, extremal_eigenvalues, gram_submatrix,
                   jacobi_eigenvalues)
from .bp import (BPConfig, BPResult, basis_pursuit, dual_certificate, l0_oracle,
                 pseudo_inverse_row_norm, verify_recovery)
from . import bounds

__all__ = [
    "__version__",
    "GaborCSError", "InvalidInputError", "DomainError", "ResourceError",
    "CertificateUnavailableError", "NotRepresentableError", "BoundOverflowError",
    "GaborOperator", "SparseCoeffs", "SupportSet", "TFIndex", "Window",
    "alltop_window", "steinhaus_window", "custom_window",
    "translate", "modulate", "tf_shift", "sgn",
    "coherence", "gram_submatrix", "extremal_eigenvalues", "jacobi_eigenvalues",
    "conditioning_failure_rate",
    "BPConfig", "BPResult", "basis_pursuit", "dual_certificate", "pseudo_inverse_row_norm",
    "l0_oracle", "verify_recovery",
    "bounds",
]
