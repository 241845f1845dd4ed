"""Haar nuclear norm tensor restoration: inpainting and robust PCA via ADMM."""

from .errors import EmptyMaskError, HNNError, NonFiniteError, OddDimensionError, TensorFormatError
from .haar import WaveletBlocks, cumulative_energy, fhwt2, haar_matrix, hwt1, ifhwt2, ihwt1
from .prox import hnn, nuclear_norm, soft_threshold, svd, svt
from .solvers import RestorationResult, SolverConfig, hnn_mc, hnn_rpca
from .tensor import (
    TuckerSpec,
    fold,
    frobenius_norm,
    mode_n_product,
    numerical_n_rank,
    random_tucker,
    unfold,
)

__version__ = "0.1.0"
