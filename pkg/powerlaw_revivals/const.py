import math

DOMAIN = "powerlaw_revivals"
VERSION = "0.1.0"

# Power-law exponent limits
MIN_EXPONENT = 1e-3
MAX_EXPONENT = 1e6

# Maslov index defaults per domain kind
DEFAULT_GAMMA_SYMMETRIC = 2
DEFAULT_GAMMA_TRUNCATED = 3
BOX_GAMMA = 4

PHYSICAL_KBAR_RTOL = 1e-12

# Mathieu characteristic values
MATHIEU_BASIS_MARGIN = 20
MATHIEU_CONVERGENCE_STEP = 10
MATHIEU_CONVERGENCE_TOL = 1e-10
MATHIEU_EDGE_TOL = 1e-9
MATHIEU_MAX_INDEX = 5000.0
INTEGER_INDEX_TOL = 1e-12

# Pendulum matrix
SPAN_BOUNDARY_WEIGHT = 1e-6
SPAN_MIN_PER_ORDER = 10
SPAN_Q_FACTOR = 8.0
SPAN_MARGIN = 20

# Closed-form guards
SINGULARITY_TOL = 1e-9
QUASIENERGY_STENCIL_STEP = 0.5

# Grids and eigensolver
MIN_GRID_POINTS = 256
MAX_AUTO_GRID_POINTS = 2048
GRID_EXTENT_FACTOR = 1.6
TURNING_POINT_FRACTION = 0.7
MOMENTUM_RESOLUTION_FACTOR = 6.0
POTENTIAL_CEILING = 1e6

# Wave states and propagation
NORM_TOL = 1e-8
NORM_DRIFT_TOL = 1e-6
BOUNDARY_FRACTION = 0.05
BOUNDARY_PROBABILITY_TOL = 1e-4
TRUNCATION_TOL = 1e-8
PACKET_SIGMA_WIDTH = 6.0
DRIVE_PERIOD = 2.0 * math.pi
MIN_STEPS_PER_DRIVE_PERIOD = 200
PERIOD_RESOLUTION = 0.01  # dt <= PERIOD_RESOLUTION * T0_cl

# Recurrence detection
PEAK_PROMINENCE = 0.1
REVIVAL_SEARCH_START = 3.0  # in classical periods
REVIVAL_WINDOW = 1.5  # in classical periods
WEAK_REVIVAL_THRESHOLD = 0.5
HALF_REVIVAL_RATIO = 0.5
FULL_RECONSTRUCTION = 0.99
COLLAPSE_LEVEL = 0.5
PEAK_TIE_TOL = 1e-3
DEGENERATE_FLATNESS = 0.9
MIN_PERIODS_IN_RUN = 5
MIN_SAMPLES_PER_PERIOD = 50
REVIVAL_RUN_FACTOR = 1.3
UNDRIVEN_RUN_PERIODS = 10

# Serialization
INFINITY_TOKEN = "inf"

# CLI exit codes
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3
EXIT_NO_RECURRENCE = 4
