import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from convprims.tensor import ConvParams, Padding, random_tensor  # noqa: E402


@pytest.fixture
def make_case():
    """Build (params, input, filter) from the (K, S, H, W, Cin, Cout) tuple."""

    def make(k, s, h, w, cin, cout, batch=1, padding=Padding.SAME, seed=0):
        params = ConvParams.square(k, s, h, w, cin, cout, batch=batch, padding=padding)
        return params, random_tensor(params.input, seed), random_tensor(params.filter_shape, seed + 1)

    return make
