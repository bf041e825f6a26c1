"""HTTP client for remote model services, with retry and backoff.

All operations are idempotent by contract (responses echo the request
id), so retrying on 5xx or timeouts never duplicates side effects.
4xx responses are not retried: they signal schema or range errors.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field

import httpx

from ..errors import (ConfigError, EmptyMask, ProtocolError, RangeError,
                      ServiceUnavailable, Timeout)
from . import protocol as wire

ENDPOINTS_ENV_VAR = "BEV2EGO_ENDPOINTS"

_CODE_TO_ERROR = {
    "range": RangeError,
    "empty_mask": EmptyMask,
    "schema": ProtocolError,
}


@dataclass(frozen=True)
class ServiceEndpoint:
    base_url: str
    timeout_s: float = 120.0
    max_attempts: int = 3
    backoff_s: float = 1.0
    auth_token: str | None = None
    max_in_flight: int = 4

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ConfigError("timeout must be positive")
        if self.max_attempts < 1:
            raise ConfigError("at least one attempt required")


@dataclass
class HttpService:
    """Speaks one endpoint's /v1/* routes; usable wherever a mock is.

    Thread-shareable: a bounded semaphore caps in-flight requests at the
    endpoint's limit, and responses are matched by echoed request id.
    """

    endpoint: ServiceEndpoint
    _client: httpx.Client = field(init=False, repr=False)
    _slots: threading.BoundedSemaphore = field(init=False, repr=False)

    def __post_init__(self):
        headers = {}
        if self.endpoint.auth_token:
            headers["Authorization"] = f"Bearer {self.endpoint.auth_token}"
        self._client = httpx.Client(base_url=self.endpoint.base_url,
                                    headers=headers,
                                    timeout=self.endpoint.timeout_s)
        self._slots = threading.BoundedSemaphore(self.endpoint.max_in_flight)

    def close(self):
        self._client.close()

    def _post(self, op: str, message) -> dict:
        payload = wire.encode(message)
        delay = self.endpoint.backoff_s
        last: Exception | None = None
        for attempt in range(self.endpoint.max_attempts):
            try:
                with self._slots:
                    resp = self._client.post(f"/v1/{op}", json=payload)
            except httpx.TimeoutException as exc:
                last = Timeout(f"{op} timed out: {exc}")
            except httpx.HTTPError as exc:
                last = ServiceUnavailable(f"{op} unreachable: {exc}")
            else:
                if resp.status_code < 400:
                    return resp.json()
                body = _parse_error(resp)
                if 400 <= resp.status_code < 500:
                    err = _CODE_TO_ERROR.get(body.get("code"), ProtocolError)
                    raise err(f"{op}: {body.get('message', resp.text)}")
                last = ServiceUnavailable(
                    f"{op}: HTTP {resp.status_code}: {body.get('message', '')}")
            if attempt + 1 < self.endpoint.max_attempts:
                time.sleep(delay)
                delay *= 2.0
        raise last if last is not None else ServiceUnavailable(f"{op} failed")

    def _call(self, op: str, message):
        raw = self._post(op, message)
        resp = wire.decode(op, raw, kind="response")
        if resp.request_id != message.request_id:
            raise ProtocolError(
                f"{op} response echoes id {resp.request_id!r}, "
                f"expected {message.request_id!r}")
        return resp

    def render(self, req: wire.RenderRequest) -> wire.RenderResponse:
        return self._call("render", req)

    def outpaint(self, req: wire.OutpaintRequest) -> wire.OutpaintResponse:
        return self._call("outpaint", req)

    def segment(self, req: wire.SegmentRequest) -> wire.SegmentResponse:
        return self._call("segment", req)

    def detect(self, req: wire.DetectRequest) -> wire.DetectResponse:
        return self._call("detect", req)

    def vqa(self, req: wire.VqaRequest) -> wire.VqaResponse:
        return self._call("vqa", req)

    def health(self) -> dict:
        try:
            resp = self._client.get("/v1/health")
            resp.raise_for_status()
            return resp.json()
        except httpx.HTTPError as exc:
            raise ServiceUnavailable(f"health check failed: {exc}") from exc


def _parse_error(resp: httpx.Response) -> dict:
    try:
        body = resp.json()
        return body if isinstance(body, dict) else {}
    except json.JSONDecodeError:
        return {}


def remote_bundle(config: dict):
    """Build a pipeline service bundle from an endpoints config.

    Config maps operation names (or "all") to endpoint settings:
    ``{"all": {"base_url": "http://host:8000"}}`` or per-op entries.
    """
    from .mock import ServiceBundle

    def endpoint_for(op: str) -> ServiceEndpoint:
        entry = config.get(op) or config.get("all")
        if entry is None:
            raise ConfigError(f"no endpoint configured for {op!r}")
        return ServiceEndpoint(**entry)

    services = {op: HttpService(endpoint_for(op)) for op in wire.OPS}
    return ServiceBundle(**services)


def load_endpoints_config(path: str | None) -> dict:
    """Read the endpoints file, honoring the environment override."""
    actual = os.environ.get(ENDPOINTS_ENV_VAR, path)
    if actual is None:
        raise ConfigError("no endpoints file given")
    try:
        with open(actual, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load endpoints file {actual!r}: {exc}") from exc
