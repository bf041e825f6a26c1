"""Wire protocol, HTTP client/server, and deterministic mock services."""

from .client import (ENDPOINTS_ENV_VAR, HttpService, ServiceEndpoint,
                     load_endpoints_config, remote_bundle)
from .imaging import decode_image, decode_mask, encode_image, encode_mask
from .mock import (BACKGROUND_RGB, CAR_COLOR_RGB, ROAD_COLOR, SENTINEL_COLORS,
                   MockDetectorProfile, MockDetectService, MockOutpaintService,
                   MockRenderService, MockSegmentService, MockVqaService,
                   PlantedRule, ServiceBundle, identity_profile, mock_bundle,
                   null_profile)

__all__ = [
    "ENDPOINTS_ENV_VAR", "HttpService", "ServiceEndpoint",
    "load_endpoints_config", "remote_bundle",
    "decode_image", "decode_mask", "encode_image", "encode_mask",
    "BACKGROUND_RGB", "CAR_COLOR_RGB", "ROAD_COLOR", "SENTINEL_COLORS",
    "MockDetectorProfile", "MockDetectService", "MockOutpaintService",
    "MockRenderService", "MockSegmentService", "MockVqaService",
    "PlantedRule", "ServiceBundle", "identity_profile", "mock_bundle",
    "null_profile",
]
