"""Model servers implementing the bev2ego wire protocol."""

from .boxes import masks_to_boxes, tightest_box
from .server import AdapterConfig, build_adapter_app, registry_names, serve_adapter

__all__ = ["AdapterConfig", "build_adapter_app", "registry_names",
           "serve_adapter", "masks_to_boxes", "tightest_box"]
