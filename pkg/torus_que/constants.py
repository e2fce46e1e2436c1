"""
Constants - Tolerances, guards and defaults for torus_que

Single source of truth for every numeric threshold used by the library and
the experiment runner.
"""

# =============================================================================
# LOGGING
# =============================================================================

LOGGER_NAME: str = "torus_que"
LOG_DIR_NAME: str = ".torus-que"
LOG_FILE_NAME: str = "run.log"
LOG_MAX_BYTES: int = 1024 * 1024  # 1MB
LOG_BACKUP_COUNT: int = 5
LOG_FILE_FORMAT: str = (
    "%(asctime)s %(levelname)-7s %(name)s [%(filename)s:%(lineno)d] %(message)s"
)
LOG_CONSOLE_FORMAT: str = "%(levelname)s: %(message)s"
LOG_DATE_FORMAT: str = "%Y-%m-%d %H:%M:%S"

# =============================================================================
# TOLERANCES
# =============================================================================

# Remainders and matrix elements below this are reported as exact zero
EXACT_ZERO_CLAMP: float = 1e-12

# A state counts as normalized within this distance of norm^2 = 1
NORMALIZED_TOL: float = 1e-12

# States further than this from norm^2 = 1 are rejected by matrix_element
UNNORMALIZED_REJECT_TOL: float = 1e-8

# Fourier coefficients below this magnitude are dropped after re-expansion
COEFFICIENT_DROP_TOL: float = 1e-14

# Normality check for dense eigensolver input
NORMALITY_TOL: float = 1e-8

# Eigenvalues closer than this are grouped into one eigenspace
EIGENVALUE_CLUSTER_TOL: float = 1e-7

# Power iteration stopping rule (relative change of the Rayleigh quotient)
POWER_ITERATION_TOL: float = 1e-10
POWER_ITERATION_MAX_ITER: int = 5000

# Jacobi singular value sweeps
JACOBI_TOL: float = 1e-15
JACOBI_MAX_SWEEPS: int = 60

# =============================================================================
# GUARDS
# =============================================================================

# Largest dimension the dense oracle will materialize
MAX_DENSE_DIM: int = 512

# Simultaneous dense materializations allowed across worker threads
MAX_CONCURRENT_DENSE: int = 2

# Default bound on ||n||_inf for observables (larger needs explicit opt-in)
MAX_FREQUENCY: int = 64

# Largest N the structured slow-convergence runs simulate
MAX_SIMULATED_DIM: int = 4096

# Bit length past which continued-fraction construction refuses to continue
MAX_CONSTRUCTION_BITS: int = 4096

# =============================================================================
# PRECISION
# =============================================================================

# Minimum mpmath working precision in bits
MIN_WORKING_BITS: int = 64

# Working precision is this multiple of the largest denominator's bit length
WORKING_BITS_FACTOR: int = 4

# Doublings allowed when a rounding decision is too close to call
MAX_PRECISION_DOUBLINGS: int = 8

# =============================================================================
# RATE FITS
# =============================================================================

MIN_FIT_ROWS: int = 4
CALIBRATION_SLOPE: float = -1.5
CALIBRATION_MONOMIAL: tuple[int, int] = (0, 1)
DEFAULT_CALIBRATION_N: tuple[int, ...] = (32, 64, 128, 256)

# Geometric sweeps used by the perturbed and egorov runs
DEFAULT_GEOMETRIC_START: int = 32
DEFAULT_GEOMETRIC_STOP: int = 512
DEFAULT_GEOMETRIC_STEPS: int = 5

# =============================================================================
# OBSERVABLES
# =============================================================================

DEFAULT_DECAY: float = 1.0
DEFAULT_FAMILY_RADIUS: int = 12

# Extra slack added to the shear sampling size estimate
SHEAR_SAMPLING_MARGIN: int = 8

# Points per axis for classical conjugation checks
CONJUGATION_GRID_SIZE: int = 128

# Sign convention that makes the momentum-diagonal shear quantize q -> q + V(p)
CALIBRATED_SHEAR_SIGN: int = -1

# Single-target scan used to warn about non-diophantine alpha_1
DIOPHANTINE_CHECK_GAMMA: float = 1.5
DIOPHANTINE_CHECK_N_MAX: int = 200
DIOPHANTINE_WARN_CONSTANT: float = 1e-3

# =============================================================================
# EXPERIMENTS
# =============================================================================

DEFAULT_SEED: int = 20240611
DEFAULT_WORKERS: int = 1
DEFAULT_LEVELS: int = 3
DEFAULT_SCAN_RADIUS: int = 200
DEFAULT_GAMMA: float = 4.0

CSV_COMMENT_PREFIX: str = "#"
SWEEP_CSV_HEADER: tuple[str, ...] = (
    "N",
    "a1",
    "a2",
    "remainder_max",
    "remainder_mean",
    "exact_zero",
    "resonant_count",
    "seconds",
)
EGOROV_CSV_HEADER: tuple[str, ...] = (
    "row",
    "N",
    "operator_norm",
    "matrix_element",
    "tail_budget",
)

# Width of the configuration summary in the run start line
LOG_CONFIG_MAX_LENGTH: int = 100
