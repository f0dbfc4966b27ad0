"""Numerical constants shared across the package.

Sampling counts and tolerances used by invariant checks live here so that
every check draws from one table.
"""

import math

E2 = math.exp(2.0)

# order-function bound checks
ORDER_SAMPLES = 10_000
ORDER_SAMPLE_MAX = 1e12
CHECK_RTOL = 1e-6

# tail classification
TAIL_BAND = 0.05
TAIL_MAX_DEPTH = 3
TAIL_FIT_WINDOW = 8
TAIL_R_MAX = 1e12
TAIL_LOG_HORIZON = 300.0

# u04 criterion
U04_R_MAX = 1e12
U04_WINDOW = 8
U04_SLACK = 0.05

# resolvent solves
SOLVE_RTOL = 1e-10
NEG_TOL = 1e-12

# mosco diagnostic
MOSCO_THRESHOLD = 1e-2
MOSCO_DECREASE = 0.5

# jump assembly
JUMP_DROP = 1e-14
