"""Screenshot-to-training-data toolchain bindings."""

from ._core import (
    ElementBox,
    Rect,
    clean_text,
    detect_element_boxes,
    draw_boxes,
    format_bbox_ratio,
    fused_token_count,
    iou,
    otsu_threshold,
    read_png,
    render_page_spec,
    run_annotate,
    run_cot,
    run_layout,
    write_png,
)

__all__ = [
    "ElementBox",
    "Rect",
    "clean_text",
    "detect_element_boxes",
    "draw_boxes",
    "format_bbox_ratio",
    "fused_token_count",
    "iou",
    "otsu_threshold",
    "read_png",
    "render_page_spec",
    "run_annotate",
    "run_cot",
    "run_layout",
    "write_png",
]
