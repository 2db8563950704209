"""Separation of overlapped blobs in binary masks by bottleneck detection."""
from .evaluation import EmptyEvaluation, VacReport, match, vac
from .geometry import Clump, Contour, CutIneffective, EmptyClumpError, label_components
from .pipeline import PipelineConfig, SegmentationResult, run
from .splitter import SplitConfig, SplitResult, split_clump
from .synthetic import generate_scene
from .thresholding import UnimodalHistogram, apply_threshold, sdd_threshold

__version__ = "0.1.0"

__all__ = [
    "Clump",
    "Contour",
    "CutIneffective",
    "EmptyClumpError",
    "EmptyEvaluation",
    "PipelineConfig",
    "SegmentationResult",
    "SplitConfig",
    "SplitResult",
    "UnimodalHistogram",
    "VacReport",
    "apply_threshold",
    "generate_scene",
    "label_components",
    "match",
    "run",
    "sdd_threshold",
    "split_clump",
    "vac",
]
