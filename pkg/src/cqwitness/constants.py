"""Numeric tolerances shared by every module.

All predicates in the package read their defaults from here so that a single
edit moves the whole numerical policy.
"""

# Hermiticity, unitarity, commutation and similar matrix predicates.
PREDICATE_ATOL = 1e-10

# |Tr(rho) - 1| for a density matrix.
TRACE_ATOL = 1e-12

# Hermiticity of a density matrix.
STATE_HERMITIAN_ATOL = 1e-12

# Smallest eigenvalue accepted as "non-negative".
PSD_ATOL = 1e-10

# Imaginary part of Tr(rho O) tolerated before it is discarded.
EXPECTATION_IMAG_ATOL = 1e-10

# Kraus completeness sum_k K^dag K = I.
COMPLETENESS_ATOL = 1e-10

# Truth-table contract of a copy channel, measured in trace distance.
CONTRACT_ATOL = 1e-9

# Default tolerance of the witness conditions in exact mode.
WITNESS_TOL = 1e-9

# Default significance (in standard deviations) for shot-mode tests.
SIGNIFICANCE_SIGMA = 5.0

# Jacobi sweeps stop once the off-diagonal Frobenius norm drops below this
# fraction of the full norm.
JACOBI_REL_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100

# Largest matrix dimension handled (three qubit-sized factors).
MAX_DIM = 8

# Eigenvalues below this (relative) floor count as zero inside matrix square
# roots; used by the fidelity.
SPECTRAL_FLOOR = 1e-12
