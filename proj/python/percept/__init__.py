"""Post-hoc interpretation of image, text and tabular models."""

from ._core import (
    Network,
    PerceptError,
    cam,
    gradient_check,
    guided,
    integrated_gradients,
    kernel_shap,
    load_network,
    maximize_activation,
    quadrant_cnn,
    reference_cnn,
    run_cli,
    smooth_grad,
    vanilla,
)

__all__ = [
    "Network",
    "PerceptError",
    "cam",
    "gradient_check",
    "guided",
    "integrated_gradients",
    "kernel_shap",
    "load_network",
    "maximize_activation",
    "quadrant_cnn",
    "reference_cnn",
    "run_cli",
    "smooth_grad",
    "vanilla",
]
