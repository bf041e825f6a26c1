"""HTTP façade for a service bundle: one POST route per operation.

Schema and range violations answer 422 with ``{code, message}``;
unexpected failures answer 503.  The same app factory backs the mock
servers used in tests and the real-model adapter processes.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import EmptyMask, ProtocolError, RangeError, ServiceError
from . import protocol as wire

_ERROR_CODES = [
    (RangeError, 422, "range"),
    (EmptyMask, 422, "empty_mask"),
    (ProtocolError, 422, "schema"),
    (ServiceError, 503, "service"),
]


def _error_response(exc: Exception) -> JSONResponse:
    for etype, status, code in _ERROR_CODES:
        if isinstance(exc, etype):
            return JSONResponse(status_code=status,
                                content={"code": code, "message": str(exc)})
    return JSONResponse(status_code=503,
                        content={"code": "internal", "message": str(exc)})


def build_app(bundle, fingerprint: str = "mock", ops=wire.OPS) -> FastAPI:
    """Expose the bundle's operations under /v1/<op> plus /v1/health."""
    app = FastAPI(title="bev2ego model service")

    def make_handler(op: str):
        handler = getattr(bundle, op)

        async def route(request: Request):
            try:
                payload = await request.json()
                req = wire.decode(op, payload)
                method = getattr(handler, op)
                resp = method(req)
                return JSONResponse(content=wire.encode(resp))
            except Exception as exc:  # mapped to protocol error bodies
                return _error_response(exc)

        return route

    for op in ops:
        if getattr(bundle, op, None) is not None:
            app.post(f"/v1/{op}")(make_handler(op))

    @app.get("/v1/health")
    def health():
        return {"model_fingerprint": fingerprint, "ready": True}

    return app
