import numpy as np
import pytest

from linfbcap import _kernels
from linfbcap.blockmat import BlockTriangularSet
from linfbcap.regions import FeedbackDesign


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # JIT compile once so timed suites measure the algorithms, not numba.
    _kernels.warmup()


def random_lower_set(rng, eta, block_rows, block_cols, scale=1.0):
    blocks = {
        (l, tau): scale * rng.standard_normal((block_rows, block_cols))
        for l in range(2, eta + 1) for tau in range(1, l)
    }
    return BlockTriangularSet(eta, block_rows, block_cols, blocks)


def random_feasible_design(rng, eta, nu1, nu2, kappa, power, fill=None,
                           one_sided=False):
    """Random D-form design using a random (or given) budget fraction."""
    d1 = random_lower_set(rng, eta, nu1, kappa)
    d2 = (BlockTriangularSet.zeros(eta, nu2, kappa) if one_sided
          else random_lower_set(rng, eta, nu2, kappa))
    design = FeedbackDesign(eta, "D", d1, d2)
    t1, t2 = design.traces()
    used = t1 + t2
    if used > 0:
        frac = rng.uniform(0.1, 0.9) if fill is None else fill
        factor = np.sqrt(frac * eta * power / used)
        design = FeedbackDesign(eta, "D", d1.scaled(factor), d2.scaled(factor))
    return design
