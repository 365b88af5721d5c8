"""
Winograd F(2x2, 3x3)
====================

A 4x4 input tile and a 3x3 filter produce a 2x2 output block. The direct
method spends 36 multiplies on it; after the transforms, Winograd spends 16.
"""

import numpy as np

from convprims import ConvParams, conv2d_ref, conv2d_winograd, max_relative_error, random_tensor
from convprims.algorithms import (
    WINOGRAD_G,
    Algorithm,
    multiply_count,
    winograd_input_transform,
    winograd_output_transform,
)

rng = np.random.default_rng(0)
d = rng.uniform(-1, 1, (4, 4))
g = rng.uniform(-1, 1, (3, 3))

# transform both, multiply element-wise, transform back
u = WINOGRAD_G @ g @ WINOGRAD_G.T
y = winograd_output_transform(u * winograd_input_transform(d))
direct = np.array([[np.sum(d[i:i + 3, j:j + 3] * g) for j in range(2)] for i in range(2)])
print(np.abs(y - direct).max())

# Over a whole layer the element-wise stage becomes 16 GEMMs.
params = ConvParams.square(3, 1, 56, 56, 64, 64)
print(multiply_count(Algorithm.DIRECT, params) / multiply_count(Algorithm.WINOGRAD, params))  # 2.25

x, w = random_tensor(params.input, 2), random_tensor(params.filter_shape, 3)
print(max_relative_error(conv2d_winograd(x, w, params), conv2d_ref(x, w, params)))
