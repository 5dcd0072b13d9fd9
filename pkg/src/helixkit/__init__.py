"""helixkit: labeled-component extraction from C static libraries,
ground-truth dataset generation, and similarity-metric benchmarking."""

from .errors import (
    GenerationExhausted,
    HelixError,
    MetricInputError,
    ToolchainError,
)
from .model import (
    Blueprint,
    ComponentSpec,
    DEFAULT_BLUEPRINT,
    Label,
    SampleRecord,
    TransformSpec,
    ground_truth_similarity,
    label_union,
    render_blueprint,
)

__version__ = "0.1.0"

__all__ = [
    "HelixError", "ToolchainError", "MetricInputError", "GenerationExhausted",
    "Label", "ComponentSpec", "TransformSpec", "Blueprint", "SampleRecord",
    "DEFAULT_BLUEPRINT", "label_union", "ground_truth_similarity",
    "render_blueprint", "__version__",
]
