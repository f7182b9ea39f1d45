"""
Reference numerics for the adaptive atrous pyramid, the dual-branch decoder
fusion and the training losses. Forward passes only, at toy scale, checked
against brute-force oracles.
"""

from .aspp import (
    AsppConfig,
    AsppParams,
    AsppTrace,
    ImportanceVector,
    TransformParams,
    adaptive_aspp_forward,
    adaptive_aspp_trace,
    aspp_branches,
    clipped_tanh,
    enhance,
    importance_scores,
    importance_scores_vjp,
    pooled_descriptor,
    squeeze,
)
from .conv import ConvParams, SeparableConv, apply_conv, dilated_conv
from .decoder import (
    DecoderState,
    decoder_forward,
    decoder_fuse_bnd,
    decoder_fuse_seg,
    visualize_features,
)
from .gradcheck import central_difference, finite_diff_check
from .losses import cross_entropy_grad, cross_entropy_loss, dice_loss, dice_loss_grad
