"""
Duffing-Van der Pol Survey - Configuration File
Numeric defaults, tolerances and output paths for the survey toolkit
"""

import os

# ==================== BASE PATHS ====================

# Project root
BASE_DIR = os.path.dirname(os.path.abspath(__file__))

# Default output directory for CSV/SVG results
OUTPUT_DIR = os.path.join(BASE_DIR, "results")

# ==================== ELLIPTIC KERNEL ====================

# AGM stops when |a - b| falls below this multiple of machine epsilon
AGM_EPS_FACTOR = 4.0

# Hard iteration cap (quadratic convergence needs ~6 for double precision)
AGM_MAX_ITER = 40

# ==================== UNPERTURBED GEOMETRY ====================

# Absolute tolerance for action/period quadratures
QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 200

# Step used for centered finite differences in rho
FD_RHO_STEP = 1e-4

# ==================== AUTONOMOUS ANALYSIS ====================

# Uniform sign-scan resolution for each generating function
ROOT_SCAN_POINTS = 2000

# Clipping of the rho grids away from elliptic singularities
RHO_CLIP = 1e-6

# Below this rho the loop basis is summed from its power series about the focus
FOCUS_SERIES_CUTOFF = 0.1
FOCUS_SERIES_ORDER = 40

# Roots above this value trigger NearSeparatrixWarning
NEAR_SEPARATRIX_RHO = 1.0 - 1e-4

# |B10| threshold (relative to the term scale) for double roots
DOUBLE_ROOT_TOL = 1e-9

# Census plane defaults (upper half plane)
CENSUS_P1_RANGE = (-1.5, 1.5)
CENSUS_P2_RANGE = (0.0, 2.5)
CENSUS_RESOLUTION = (301, 251)

# Reference point where the exterior generating function degenerates
L3_REFERENCE_P1 = 0.7523

# ==================== RESONANCE ANALYSIS ====================

# Level inversion tolerance on omega
RESONANCE_OMEGA_TOL = 1e-10

# Samples per 2*pi*p of the averaged forcing
A0_SAMPLES_PER_P = 2048

# Pendulum reduction is only reported for mu = sqrt(eps) below this value
PENDULUM_MU_MAX = 0.5

# Absolute zero test for B when no epsilon is supplied
B_ZERO_TOL = 1e-12

# Default enumeration depth for q = 1 resonances
RESONANCE_P_MAX = 12

# ==================== MELNIKOV ====================

# |amplitude| - |mean| within this (relative) band declares TANGENT
TANGENCY_TOL = 1e-9

# Allowed deviation of the right-loop mean for the left-loop formula
LEFT_LOOP_PRECONDITION_TOL = 1e-4

# ==================== FLOW ENGINE ====================

# DOP853 tolerances for manifold work and for parameter sweeps
RTOL_MANIFOLD = 1e-11
ATOL_MANIFOLD = 1e-11
RTOL_SWEEP = 1e-9
ATOL_SWEEP = 1e-9

# Newton iteration for the saddle of the stroboscopic map
SADDLE_NEWTON_TOL = 1e-12
SADDLE_NEWTON_MAX_ITER = 30

# Manifold seeding distance along the eigenvector
MANIFOLD_SEED_DISTANCE = 1e-7

# Polyline spacing bound and refinement limits
MANIFOLD_SPACING = 0.02
MANIFOLD_SEED_POINTS = 40
MANIFOLD_MAX_POINTS = 40000
MANIFOLD_MAX_REFINE = 30

# Phases sampled around one forcing period for splitting profiles
SPLITTING_PHASES = 48

# Grazing distance for TANGENT and p3 bracket width for tangency bisection
SPLITTING_GRAZE_TOL = 1e-6
TANGENCY_P3_BRACKET = 1e-4

# Autonomous connection search
CONNECTION_T_MAX = 250.0
CONNECTION_FAR_RADIUS = 0.5
CONNECTION_NEAR_RADIUS = 0.35
ESCAPE_RADIUS = 50.0

# |H| at closest approach below which a connection is reported
CONNECTION_DEFECT_TOL = 1e-6

# Section splitting: integration time past the saddle escape, dense sampling
SECTION_EXTRA_TIME = 12.0
SECTION_CROSS_EXTRA_TIME = 24.0
SECTION_GRID_POINTS = 6000

# Trigonometric upsampling used to locate the extrema of splitting profiles
PROFILE_UPSAMPLE = 1024

# Default epsilon for the (p2, p3) diagrams
DIAGRAM_EPSILON = 0.12
DIAGRAM_P4 = 4.0

# ==================== SURVEY CLI ====================

# Worker count (None = os.cpu_count()); environment override name
DEFAULT_WORKERS = 1
WORKERS_ENV_VAR = "DVDP_WORKERS"

# CSV formatting
CSV_SIGNIFICANT_DIGITS = 17

# Fixed salt so SVG ids are reproducible
SVG_HASH_SALT = "dvdp-survey"

# Exit codes
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_FAILURE = 3

# ==================== DEBUG ====================

# Debug mode (prints [Component] messages)
DEBUG = False

# ==================== HELPER FUNCTIONS ====================


def create_directories(output_dir=None):
    """Create the output directory if it does not exist"""
    directory = output_dir or OUTPUT_DIR
    if not os.path.exists(directory):
        os.makedirs(directory)
        if DEBUG:
            print(f"Created directory: {directory}")
    return directory


def validate_config():
    """Check the numeric defaults for consistency"""
    errors = []

    if ROOT_SCAN_POINTS < 10:
        errors.append("ROOT_SCAN_POINTS must be at least 10")

    if not (0 < RHO_CLIP < 1e-2):
        errors.append("RHO_CLIP should be a small positive number")

    if not (0 < FOCUS_SERIES_CUTOFF <= 0.25) or FOCUS_SERIES_ORDER < 20:
        errors.append("FOCUS_SERIES_CUTOFF must be in (0, 0.25] with FOCUS_SERIES_ORDER >= 20")

    if not (0 < MANIFOLD_SEED_DISTANCE < 1e-3):
        errors.append("MANIFOLD_SEED_DISTANCE should be in (0, 1e-3)")

    if MANIFOLD_SPACING <= 0:
        errors.append("MANIFOLD_SPACING must be positive")

    if min(CENSUS_RESOLUTION) < 2:
        errors.append("CENSUS_RESOLUTION entries must be >= 2")

    for name, value in (
        ("RTOL_MANIFOLD", RTOL_MANIFOLD),
        ("ATOL_MANIFOLD", ATOL_MANIFOLD),
        ("RTOL_SWEEP", RTOL_SWEEP),
        ("ATOL_SWEEP", ATOL_SWEEP),
    ):
        if not (0 < value < 1e-3):
            errors.append(f"{name} should be in (0, 1e-3)")

    if SPLITTING_PHASES < 8:
        errors.append("SPLITTING_PHASES must be at least 8")

    if errors:
        print("Configuration errors:")
        for error in errors:
            print(f"  - {error}")
        return False

    return True


# ==================== INITIALIZATION ====================

if __name__ == "__main__":
    print("Duffing-Van der Pol Survey - Configuration")
    print("=" * 50)
    print(f"Base Directory: {BASE_DIR}")
    print(f"Output Directory: {OUTPUT_DIR}")
    print("=" * 50)
    print(f"Root scan points: {ROOT_SCAN_POINTS}")
    print(f"Manifold tolerances: rtol={RTOL_MANIFOLD}, atol={ATOL_MANIFOLD}")
    print(f"Sweep tolerances: rtol={RTOL_SWEEP}, atol={ATOL_SWEEP}")
    print(f"Diagram epsilon: {DIAGRAM_EPSILON}, p4: {DIAGRAM_P4}")
    print("=" * 50)

    create_directories()

    if validate_config():
        print("Configuration is valid")
    else:
        print("Configuration has errors")
