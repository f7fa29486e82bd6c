"""Granular-ball generation for classification, GBkNN and GBS sampling."""

from .dataset import (DataError, Dataset, FoldSplit, inject_label_noise, load_csv,
                      make_folds, make_gaussian_mixture, min_max_normalize)
from .gbknn import GbknnModel, knn_baseline, knn_cv_accuracy, predict, predict_batch
from .gbs import SampleMode, SampleResult, axis_intersections, sample_ball, sample_dataset
from .generation import (GenerationConfig, Method, de_overlap, divide_once, generate,
                         generate_accelerated, generate_adaptive, generate_original,
                         global_division, kmeans_split, pick_heterogeneous_centers,
                         weighted_purity_sum)
from .granule import (BallModel, CoverageReport, GranularBall, RadiusMode, compute_center,
                      compute_radius, coverage_objective, heterogeneous_overlap,
                      majority_label_and_purity, make_ball)

__all__ = [
    "DataError",
    "Dataset",
    "FoldSplit",
    "inject_label_noise",
    "load_csv",
    "make_folds",
    "make_gaussian_mixture",
    "min_max_normalize",
    "GbknnModel",
    "knn_baseline",
    "knn_cv_accuracy",
    "predict",
    "predict_batch",
    "SampleMode",
    "SampleResult",
    "axis_intersections",
    "sample_ball",
    "sample_dataset",
    "GenerationConfig",
    "Method",
    "de_overlap",
    "divide_once",
    "generate",
    "generate_accelerated",
    "generate_adaptive",
    "generate_original",
    "global_division",
    "kmeans_split",
    "pick_heterogeneous_centers",
    "weighted_purity_sum",
    "BallModel",
    "CoverageReport",
    "GranularBall",
    "RadiusMode",
    "compute_center",
    "compute_radius",
    "coverage_objective",
    "heterogeneous_overlap",
    "majority_label_and_purity",
    "make_ball",
]

__version__ = "0.1.0"
