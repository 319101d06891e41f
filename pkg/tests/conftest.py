import warnings

import numpy as np
import pytest

warnings.filterwarnings("ignore")
np.seterr(all="ignore")


@pytest.fixture(scope="session")
def fib_param():
    from parapuzzle import realnest
    return realnest.fibonacci_parameter()


@pytest.fixture(scope="session")
def fib_tiling(fib_param):
    from parapuzzle import puzzle
    return puzzle.build_initial_tiling(fib_param, 2, 1, dyadic_depth=2)
