"""Click-driven level-set pseudo-mask annotation for infrared small targets."""

from ._kernel import backend_name
from .annotate import (AnnotationResult, BatchReport, Click, RoiSpec, Variant,
                       annotate, batch_annotate, load_clicks, roi_for_click)
from .image import (BinaryMask, Component, ComponentSet, GrayImage,
                    ImageLoadError, connected_components, dilate, gradient,
                    load_image, load_mask, save_mask)
from .levelset import (AllSeedPixels, EvolutionParams, EvolutionResult,
                       EvolutionState, LevelSetField, NoSeedPixels, RegionStats,
                       contrast_weight, dirac, double_well_ratio, edge_indicator,
                       energy, evolution_step, evolve, extract_mask, heaviside,
                       init_level_set, region_stats)
from .metrics import MatchPolicy, MetricReport, evaluate_corpus, iou, pd_fa
from .synth import PhantomScene, PhantomSpec, TargetSpec, generate, generate_corpus

__version__ = "0.1.0"

__all__ = [
    "AllSeedPixels", "AnnotationResult", "BatchReport", "BinaryMask", "Click",
    "Component", "ComponentSet", "EvolutionParams", "EvolutionResult",
    "EvolutionState", "GrayImage", "ImageLoadError", "LevelSetField",
    "MatchPolicy", "MetricReport", "NoSeedPixels", "PhantomScene", "PhantomSpec",
    "RegionStats", "RoiSpec", "TargetSpec", "Variant", "annotate",
    "backend_name", "batch_annotate", "connected_components", "contrast_weight",
    "dilate", "dirac", "double_well_ratio", "edge_indicator", "energy",
    "evaluate_corpus", "evolution_step", "evolve", "extract_mask", "generate",
    "generate_corpus", "gradient", "heaviside", "init_level_set", "iou",
    "load_clicks", "load_image", "load_mask", "pd_fa", "region_stats",
    "roi_for_click", "save_mask",
]
