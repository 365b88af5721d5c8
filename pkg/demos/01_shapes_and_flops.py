"""
Output shapes and flop counts
=============================

Every convolution here is described by a ConvParams value. The output
shape and the flop count follow from it alone.
"""

from convprims import ConvParams, Padding, flop_count, output_shape
from convprims.tensor import pad_before

# The stem of ResNet-50: 7x7 window, stride 2, on a 224x224 RGB image.
conv1 = ConvParams.square(7, 2, 224, 224, 3, 64)
print(output_shape(conv1))          # Shape4D(batch=1, rows=112, cols=112, channels=64)

# Same padding needs 5 extra rows; the odd one goes after.
print(pad_before(conv1))            # (2, 2)

# Two flops per multiply-accumulate, counted as if computed directly.
print(f"{flop_count(conv1):,}")     # 236,027,904

# Batch scales the count linearly.
print(flop_count(conv1.with_batch(32)) // flop_count(conv1))

# Valid padding only keeps windows that fit entirely.
print(output_shape(ConvParams.square(3, 2, 9, 9, 1, 1, padding=Padding.VALID)))
