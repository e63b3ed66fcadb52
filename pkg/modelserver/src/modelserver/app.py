"""HTTP surface: four POST endpoints speaking the backend wire protocol.

Success bodies match the protocol exactly; every failure is a
{"code", "message"} object with a status >= 400, including the ones
FastAPI would otherwise render in its own error shape.  Each response
from a capability path carries an X-Model-Identity header naming the
model that produced it.
"""

from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from .adapters import Adapter, LANGUAGES

CAPABILITY_PATHS = {
    "/ner": "ner",
    "/pos": "pos",
    "/fill_mask": "fill_mask",
    "/translate": "translate",
}


class TokensBody(BaseModel):
    tokens: list[str]


class FillMaskBody(BaseModel):
    tokens: list[str]
    mask_index: int
    top_k: int


class TranslateBody(BaseModel):
    text: str
    target_language: str


def create_app(adapter: Adapter, workers: int = 4) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_: FastAPI):
        # Sync handlers run on the shared thread pool; this is the
        # request-parallelism knob. Models are loaded once and read-only.
        from anyio import to_thread

        to_thread.current_default_thread_limiter().total_tokens = workers
        yield

    app = FastAPI(
        title="genswap model server", docs_url=None, redoc_url=None, lifespan=lifespan
    )

    def identity_headers(path: str) -> dict[str, str]:
        capability = CAPABILITY_PATHS.get(path)
        if capability is None:
            return {}
        return {"X-Model-Identity": adapter.identity(capability)}

    def ok(request: Request, payload: dict) -> JSONResponse:
        return JSONResponse(payload, headers=identity_headers(request.url.path))

    def fail(request: Request, status: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(
            {"code": code, "message": message},
            status_code=status,
            headers=identity_headers(request.url.path),
        )

    @app.exception_handler(RequestValidationError)
    async def bad_body(request: Request, exc: RequestValidationError):
        return fail(request, 400, "bad_request", str(exc.errors()[:1]))

    @app.exception_handler(StarletteHTTPException)
    async def http_error(request: Request, exc: StarletteHTTPException):
        code = {404: "not_found", 405: "method_not_allowed"}.get(
            exc.status_code, "http_error"
        )
        return fail(request, exc.status_code, code, str(exc.detail))

    def check_tokens(request: Request, tokens: list[str]) -> JSONResponse | None:
        if not tokens:
            return fail(request, 400, "bad_request", "tokens must be non-empty")
        if any(not isinstance(t, str) or not t for t in tokens):
            return fail(request, 400, "bad_request", "tokens must be non-empty strings")
        return None

    @app.post("/ner")
    def ner(body: TokensBody, request: Request):
        bad = check_tokens(request, body.tokens)
        if bad:
            return bad
        return ok(request, {"spans": adapter.ner(body.tokens)})

    @app.post("/pos")
    def pos(body: TokensBody, request: Request):
        bad = check_tokens(request, body.tokens)
        if bad:
            return bad
        return ok(request, {"tags": adapter.pos(body.tokens)})

    @app.post("/fill_mask")
    def fill_mask(body: FillMaskBody, request: Request):
        bad = check_tokens(request, body.tokens)
        if bad:
            return bad
        if not (0 <= body.mask_index < len(body.tokens)):
            return fail(
                request, 400, "bad_request",
                f"mask_index {body.mask_index} out of range",
            )
        if body.top_k < 1:
            return fail(request, 400, "bad_request", "top_k must be >= 1")
        candidates = adapter.fill_mask(body.tokens, body.mask_index, body.top_k)
        return ok(request, {"candidates": candidates})

    @app.post("/translate")
    def translate(body: TranslateBody, request: Request):
        if not body.text:
            return fail(request, 400, "bad_request", "text must be non-empty")
        if body.target_language not in LANGUAGES:
            return fail(
                request, 400, "bad_request",
                f"unsupported target language: {body.target_language!r}",
            )
        text = adapter.translate(body.text, body.target_language)
        return ok(request, {"text": text})

    return app
