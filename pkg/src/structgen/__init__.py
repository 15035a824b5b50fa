"""Structure-aware self-attention for AMR-to-text generation."""

from .amr import AmrGraph, SimplifyOptions, parse_penman, serialize, simplify
from .paths import PathMatrix, extract_paths, mask_indirect
from .model import ModelConfig
from .relation import RelationEncoder

__all__ = [
    "AmrGraph",
    "SimplifyOptions",
    "parse_penman",
    "serialize",
    "simplify",
    "PathMatrix",
    "extract_paths",
    "mask_indirect",
    "ModelConfig",
    "RelationEncoder",
    "__version__",
]

__version__ = "0.1.0"
