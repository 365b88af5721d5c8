"""
Pooling
=======

Max and average pooling share the window arithmetic of convolution.
Padding positions never contribute: the max ignores them and the average
divides by the number of in-bounds elements.
"""

import numpy as np

from convprims import Padding, avg_pool2d, max_pool2d

x = np.array([[1, 2], [3, 4]], dtype=np.float32).reshape(1, 2, 2, 1)
print(max_pool2d(x, 2, 2)[0, :, :, 0])       # [[4.]]
print(avg_pool2d(x, 2, 2)[0, :, :, 0])       # [[2.5]]

# the corner of a Same-padded average sees only 4 of its 9 taps
ones = np.ones((1, 4, 4, 1), dtype=np.float32)
print(avg_pool2d(ones, 3, 1, Padding.SAME)[0, :, :, 0])
