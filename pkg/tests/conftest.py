import numpy as np
import pytest

from stgst.graph import ShiftKind, eigendecompose, make_shift, random_graph


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_symmetric_shift(n, seed, kind=ShiftKind.NORMALIZED_LAPLACIAN, weighted=True):
    rng = np.random.default_rng(seed)
    g = random_graph(n, min(1.0, 4.0 / n), rng, weighted=weighted)
    return eigendecompose(make_shift(g, kind))
