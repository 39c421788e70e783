"""Quaternion tensor algebra with a generalized QDFT, and low-rank completion of colour video."""

from .algebra import (conj_transpose, gqt_product, gqt_product_mode, gqt_product_oracle, gqt_rank,
                      gqt_svd, identity_tensor, is_unitary, multi_gqt_rank, nuclear_norm,
                      singular_value_profile, singular_values, truncate)
from .completion import ObservationMask, SolverConfig, mqrtc, qrtc
from .metrics import psnr, rse, ssim
from .qdft import fft_mode, ifft_mode, make_plan, qdft_matrix
from .quat import MU_I, MU_SYM, PureUnitQuaternion, Quaternion, parse_mu

__all__ = [
    "conj_transpose", "gqt_product", "gqt_product_mode", "gqt_product_oracle", "gqt_rank",
    "gqt_svd", "identity_tensor", "is_unitary", "multi_gqt_rank", "nuclear_norm",
    "singular_value_profile", "singular_values", "truncate",
    "ObservationMask", "SolverConfig", "mqrtc", "qrtc",
    "psnr", "rse", "ssim",
    "fft_mode", "ifft_mode", "make_plan", "qdft_matrix",
    "MU_I", "MU_SYM", "PureUnitQuaternion", "Quaternion", "parse_mu",
]
