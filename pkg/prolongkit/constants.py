# Rank and residual thresholds
RANK_TOL = 1e-9
RESIDUAL_TOL = 1e-9
ON_SURFACE_TOL = 1e-9
REGULARITY_TOL = 1e-9
PARABOLIC_BAND = 1e-9
INSTABILITY_FACTOR = 10.0
ADAPTED_COFRAME_TOL = 1e-8
NORMAL_FORM_TOL = 1e-8

# Probabilistic zero test
ZERO_TEST_TOL = 1e-9
ZERO_TEST_SAMPLES = 20
ZERO_TEST_BOX = 2.0
ZERO_TEST_SEED = 271828

# Projection onto equation submanifolds
PROJECTION_TOL = 1e-12
PROJECTION_MAX_ITERATIONS = 50

DEFAULT_SEED = 42
NORMAL_FORM_PROBES = 5

# Fiber topology oracle
ORACLE_SAMPLES = 100_000
ORACLE_MIN_SAMPLES = 10_000

# Solutions
CAUCHY_RIEMANN_TOL = 1e-10
PATH_INDEPENDENCE_TOL = 1e-8
QUADRATURE_EPSABS = 1e-12
QUADRATURE_EPSREL = 1e-12
GAUSS_LEGENDRE_NODES = 24
SPLINE_DEGREE = 5
VERIFICATION_GRID = 31
VERIFICATION_BOX = 1.0

REPORT_SCHEMA_VERSION = "1.0"
