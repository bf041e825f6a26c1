"""PNG/base64 codecs for protocol images (RGB8) and masks (gray8)."""

from __future__ import annotations

import base64
import io

import numpy as np
from PIL import Image

from ..errors import ProtocolError


def encode_image(arr: np.ndarray) -> str:
    """HxWx3 uint8 array to base64 PNG."""
    a = np.ascontiguousarray(arr, dtype=np.uint8)
    if a.ndim != 3 or a.shape[2] != 3:
        raise ProtocolError(f"expected HxWx3 image, got shape {a.shape}")
    buf = io.BytesIO()
    Image.fromarray(a, mode="RGB").save(buf, format="PNG", optimize=False,
                                        compress_level=1)
    return base64.b64encode(buf.getvalue()).decode("ascii")


def encode_mask(mask: np.ndarray) -> str:
    """HxW boolean (or 0/255 uint8) array to base64 gray PNG."""
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ProtocolError(f"expected HxW mask, got shape {m.shape}")
    a = np.where(m.astype(bool), 255, 0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(a, mode="L").save(buf, format="PNG", optimize=False,
                                      compress_level=1)
    return base64.b64encode(buf.getvalue()).decode("ascii")


def decode_image(b64: str) -> np.ndarray:
    try:
        img = Image.open(io.BytesIO(base64.b64decode(b64)))
        return np.array(img.convert("RGB"))
    except Exception as exc:
        raise ProtocolError(f"undecodable image payload: {exc}") from exc


def decode_mask(b64: str) -> np.ndarray:
    try:
        img = Image.open(io.BytesIO(base64.b64decode(b64)))
        return np.array(img.convert("L")) >= 128
    except Exception as exc:
        raise ProtocolError(f"undecodable mask payload: {exc}") from exc
