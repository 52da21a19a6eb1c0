"""
Оценка детекций (AP/mAP) и независимая проверка датасета.
"""

from .loader import DatasetView, dataset_ground_truth, open_dataset
from .metrics import (
    ApResult,
    Detection,
    average_precision,
    evaluate,
    filter_ground_truth,
    format_ap_table,
    match_detections,
    read_detections,
)
from .stats import (
    DatasetStats,
    background_usage,
    dataset_stats,
    format_stats,
    placement_table,
    stats_from_view,
)
from .verifier import VerificationReport, Violation, check_blueprint, verify_dataset, verify_view

__all__ = [
    "ApResult",
    "DatasetStats",
    "DatasetView",
    "Detection",
    "VerificationReport",
    "Violation",
    "average_precision",
    "background_usage",
    "check_blueprint",
    "dataset_ground_truth",
    "dataset_stats",
    "evaluate",
    "filter_ground_truth",
    "format_ap_table",
    "format_stats",
    "match_detections",
    "open_dataset",
    "placement_table",
    "read_detections",
    "stats_from_view",
    "verify_dataset",
    "verify_view",
]
