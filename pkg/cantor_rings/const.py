from enum import Enum, IntEnum

DOMAIN = "cantor_rings"

CONF_SAMPLES = "samples"
CONF_RING_CIRCLES = "ring_circles"
CONF_MAX_ITER = "max_iter"
CONF_LOCATE_MAX_ITER = "locate_max_iter"
CONF_NEWTON_TOL = "newton_tol"
CONF_EXCLUSION = "exclusion"
CONF_THREADS = "threads"
CONF_SEED = "seed"

ENV_THREADS = "CANTOR_RINGS_THREADS"

# Circle sampling
DEFAULT_SAMPLES = 4096
MIN_SAMPLES = 64
MAX_SAMPLES = 2**22
RING_CIRCLES = 16

# Extended-exponent arithmetic
MAX_INT_POWER = 2**16

# Newton refinement of critical points
NEWTON_MAX_STEPS = 100
NEWTON_TOL = 1e-9
# Newton iterates may stray this factor inside or outside the ring annulus
NEWTON_GUARD = 2.0
# Displacements below this (relative to |z|) are not resolved by doubles
RESOLUTION_FLOOR = 1e-12

# Evaluations closer than this (relative) to a zero or pole are low-confidence
POLE_PROXIMITY = 1e-3

# Angular radius of the exclusion arcs around parabolic contact points
EXCLUSION_ANGLE = 1e-3

# Empirical traps: relative padding of the critical-point ring annuli and the
# size of the log-spaced search grid for (s_trap, outer_trap)
EMPIRICAL_RING_PAD = 0.005
TRAP_FIT_GRID = 128
TRAP_FIT_SPAN = 12.0

# Audit entries written as "<=" accept this much negative slack
NON_STRICT_SLACK = 1e-12

MAX_ORACLE_DEGREE = 60

# Orbits
MAX_ITER = 1000
LOCATE_MAX_ITER = 10000
BISECTION_STEPS = 60
BISECTION_WIDTH = 1e-12
LOCATE_SCAN = 1024
PARABOLIC_WINDOW = 100

# Rendering
MAX_RESOLUTION = 8192
MAX_DEPTH = 6
MAX_HUES = 4096

DEFAULT_LAMBDA = 1e-10


class Operation(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    INT_POW = "int_pow"


class MapKind(str, Enum):
    FAMILY = "family"
    MCMULLEN = "mcmullen"
    PLAMBDA = "plambda"
    PN = "pn"


class Basin(str, Enum):
    BASIN_0 = "Basin0"
    BASIN_INFINITY = "BasinInfinity"
    UNDECIDED = "Undecided"


class Verdict(str, Enum):
    CERTIFIED = "Certified"
    FAILED = "Failed"
    INCONCLUSIVE = "Inconclusive"


class TrapMode(str, Enum):
    AUTO = "auto"
    BUDGET = "budget"
    EMPIRICAL = "empirical"
    LEMMA = "lemma"


class Target(str, Enum):
    SMALL = "small"
    LARGE = "large"


class RenderMode(str, Enum):
    ESCAPE = "escape"
    BASIN = "basin"
    ITINERARY = "itinerary"


class ExitCode(IntEnum):
    OK = 0
    USAGE = 1
    FAILED = 2
    INCONCLUSIVE = 3


# Outcome codes used by the vectorized classifier
OUTCOME_UNDECIDED = 0
OUTCOME_INNER = 1
OUTCOME_OUTER = 2

JULIA_COLOR = (0, 0, 0)
INNER_COLOR = (160, 160, 160)
OUTER_COLOR = (255, 255, 255)
# Escape-time shading cycles through these by step count
INNER_SHADES = [(96, 96, 96), (128, 128, 128), (160, 160, 160), (192, 192, 192)]
OUTER_SHADES = [(255, 255, 255), (236, 236, 236), (220, 220, 220), (246, 246, 246)]

PRESETS = [
    {
        "id": "fig1",
        "kind": MapKind.FAMILY,
        "p": 1,
        "degrees": [5, 5, 5, 5],
        "magnitudes": [0.00025, 0.005, 0.1],
        "viewport": {"center": 0j, "half_width": 0.15},
    },
    {
        "id": "fig1-mcmullen",
        "kind": MapKind.MCMULLEN,
        "k": 3,
        "l": 3,
        "eta": 0.001 + 0j,
        "viewport": {"center": 0j, "half_width": 1.2},
    },
    {
        "id": "fig4",
        "kind": MapKind.PLAMBDA,
        "m": 3,
        "n": 2,
        "lambda": DEFAULT_LAMBDA + 0j,
        "viewport": {"center": -0.75 + 0j, "half_width": 2.5},
    },
    {
        # s = 1/(25 n^2), the largest scale the parabolic construction allows
        "id": "fig5",
        "kind": MapKind.PN,
        "n": 3,
        "s": 1 / 225,
        "viewport": {"center": 0j, "half_width": 1.6},
    },
]
