"""DRLN super-resolution toolkit."""

from ._core import (
    Model,
    add,
    bicubic_resize,
    concat_channels,
    conv2d,
    gaussian_blur,
    global_avg_pool,
    gradcheck,
    l1_loss,
    mul_broadcast,
    noisy_downsample,
    pixel_shuffle,
    psnr,
    relu,
    rgb_to_y,
    sigmoid,
    ssim,
)

__all__ = [
    "Model",
    "add",
    "bicubic_resize",
    "concat_channels",
    "conv2d",
    "gaussian_blur",
    "global_avg_pool",
    "gradcheck",
    "l1_loss",
    "mul_broadcast",
    "noisy_downsample",
    "pixel_shuffle",
    "psnr",
    "relu",
    "rgb_to_y",
    "sigmoid",
    "ssim",
]
