"""
One function, several algorithms
================================

All algorithms compute the same convolution. Here we run each one that
supports a 3x3 stride-1 layer and compare it against the direct loop.
"""

from convprims import ConvParams, max_relative_error, random_tensor
from convprims.algorithms import compatible_algorithms, convolve
from convprims.reference import conv2d_ref

params = ConvParams.square(3, 1, 28, 28, 32, 32, batch=2)
x = random_tensor(params.input, seed=0)
w = random_tensor(params.filter_shape, seed=1)

reference = conv2d_ref(x, w, params)
for alg in compatible_algorithms(params):
    y = convolve(alg, x, w, params)
    print(f"{alg.value:<17} max relative error {max_relative_error(y, reference):.2e}")

# A 7x7 stride-2 layer narrows the field.
stem = ConvParams.square(7, 2, 32, 32, 3, 8)
print([a.value for a in compatible_algorithms(stem)])
