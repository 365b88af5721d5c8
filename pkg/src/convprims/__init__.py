"""Portable convolution primitives with interchangeable algorithms."""
import os

# numba's TBB layer warns on older TBB builds; prefer the others.
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

from .tensor import (  # noqa: E402
    ConvParams,
    IncompatibleAlgorithmError,
    InvalidParamsError,
    Padding,
    Shape4D,
    ShapeMismatchError,
    fill_random,
    flop_count,
    max_relative_error,
    output_shape,
    random_tensor,
)
from .gemm import GemmBlocking, gemm_blocked, gemm_naive  # noqa: E402
from .reference import conv2d_naive_vectorized, conv2d_ref  # noqa: E402
from .algorithms import (  # noqa: E402
    TileConfig,
    conv2d_im2col,
    conv2d_matmul,
    conv2d_tiled,
    conv2d_winograd,
    im2col,
    multiply_count,
)
from .selector import Algorithm, SelectorTable, conv2d, select, supports  # noqa: E402
from .pooling import avg_pool2d, max_pool2d  # noqa: E402

__version__ = "0.1.0"
