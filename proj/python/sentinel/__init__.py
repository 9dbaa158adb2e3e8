"""Surveillance analytics core.

Thin wrapper over the compiled extension: CNN inference primitives, grid
prediction decoding with non-maximum suppression, activity heatmaps, and the
windowed alarm rule.
"""

from sentinel._core import (  # noqa: F401
    AlarmAggregator,
    BBox,
    Detection,
    Frame,
    FrameVerdict,
    GridPrediction,
    HeatmapGrid,
    Kernel,
    Matrix,
    ModelSpec,
    Tensor,
    accumulate,
    classify_frame,
    conv2d,
    decode_grid,
    dense,
    dense_weight_count,
    encode_ppm,
    flatten,
    forward,
    grid_from_json,
    grid_to_json,
    heat_color,
    intensity_model,
    iou,
    load_model,
    load_model_file,
    maxpool2d,
    merge,
    nms,
    normalize,
    parse_grid_prediction,
    parse_netpbm,
    relu,
    render_ppm,
    serialize_manifest,
    serialize_weights,
    softmax,
    to_tensor,
)

__all__ = [
    "AlarmAggregator",
    "BBox",
    "Detection",
    "Frame",
    "FrameVerdict",
    "GridPrediction",
    "HeatmapGrid",
    "Kernel",
    "Matrix",
    "ModelSpec",
    "Tensor",
    "accumulate",
    "classify_frame",
    "conv2d",
    "decode_grid",
    "dense",
    "dense_weight_count",
    "encode_ppm",
    "flatten",
    "forward",
    "grid_from_json",
    "grid_to_json",
    "heat_color",
    "intensity_model",
    "iou",
    "load_model",
    "load_model_file",
    "maxpool2d",
    "merge",
    "nms",
    "normalize",
    "parse_grid_prediction",
    "parse_netpbm",
    "relu",
    "render_ppm",
    "serialize_manifest",
    "serialize_weights",
    "softmax",
    "to_tensor",
]
