"""HTTP + event-stream API over the engine.

Transport workers never touch engine state: every request body is turned into
a closure and executed by the single command-loop thread, in arrival order.
The event stream is newline-delimited JSON frames ``{seq, kind, payload}``;
clients reconcile by fetching /api/network plus the last seen sequence number.
"""

from __future__ import annotations

import json
import queue
import threading
from concurrent.futures import Future
from contextlib import asynccontextmanager
from typing import Any, Callable

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, StreamingResponse

from .engine import CommandQueueFull, Engine, InvalidMode
from .errors import (
    CycleDetected,
    DimsMismatch,
    DuplicateIdentifier,
    DuplicateModule,
    DuplicatePlatform,
    InvalidSelection,
    MalformedDocument,
    ModuleNotLoaded,
    NetworkLocked,
    NotEvaluable,
    NotEvaluated,
    PipevisError,
    PortOccupied,
    ProcessorFailure,
    ReloadFailure,
    SessionClosed,
    TypeMismatch,
    UnknownClass,
    UnknownPort,
    UnknownProcessor,
    UnknownProcessorClass,
    UnknownProperty,
)

_STATUS_BY_ERROR: list[tuple[type, int]] = [
    (UnknownProperty, 404),
    (UnknownProcessor, 404),
    (UnknownPort, 404),
    (UnknownClass, 404),
    (UnknownProcessorClass, 404),
    (ModuleNotLoaded, 404),
    (InvalidMode, 400),
    (TypeMismatch, 400),
    (MalformedDocument, 400),
    (DimsMismatch, 400),
    (DuplicateIdentifier, 409),
    (DuplicateModule, 409),
    (DuplicatePlatform, 409),
    (PortOccupied, 409),
    (CycleDetected, 409),
    (InvalidSelection, 409),
    (NotEvaluable, 409),
    (NotEvaluated, 409),
    (SessionClosed, 409),
    (NetworkLocked, 409),
    (ReloadFailure, 409),
    (CommandQueueFull, 503),
    (ProcessorFailure, 500),
]


def _status_for(exc: BaseException) -> int:
    for cls, status in _STATUS_BY_ERROR:
        if isinstance(exc, cls):
            return status
    if isinstance(exc, (ValueError, KeyError)):
        return 400 if isinstance(exc, ValueError) else 404
    if isinstance(exc, PipevisError):
        return 400
    return 500


def _error_response(exc: BaseException) -> JSONResponse:
    return JSONResponse(status_code=_status_for(exc),
                        content={"error": type(exc).__name__, "message": str(exc)})


class CommandLoop:
    """One worker thread owning the engine; bounded queue gives backpressure."""

    def __init__(self, engine: Engine, queue_size: int = 256):
        self.engine = engine
        self._queue: "queue.Queue[Optional[tuple[Callable[[], Any], Future]]]" = queue.Queue(maxsize=queue_size)
        self._thread = threading.Thread(target=self._run, name="command-loop", daemon=True)
        self._thread.start()

    def _run(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                break
            fn, future = item
            if future.set_running_or_notify_cancel():
                try:
                    future.set_result(fn())
                except BaseException as exc:
                    future.set_exception(exc)

    def submit(self, fn: Callable[[], Any]) -> Any:
        future: Future = Future()
        try:
            self._queue.put_nowait((fn, future))
        except queue.Full:
            raise CommandQueueFull("command queue is full, retry later") from None
        return future.result()

    def shutdown(self) -> None:
        """Drain queued work, then stop the worker."""
        self._queue.put(None)
        self._thread.join(timeout=10)


def create_app(engine: Engine, queue_size: int = 256) -> FastAPI:
    loop = CommandLoop(engine, queue_size=queue_size)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        loop.shutdown()  # drains queued commands before exit

    app = FastAPI(title="pipevis", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.engine = engine
    app.state.loop = loop

    @app.exception_handler(PipevisError)
    async def _pipevis_error(_request: Request, exc: PipevisError):
        return _error_response(exc)

    def run(fn: Callable[[], Any]) -> Any:
        return loop.submit(fn)

    @app.get("/api/network")
    def get_network() -> Response:
        body = run(engine.network_bytes)
        return Response(content=body, media_type="application/json")

    @app.get("/api/catalog")
    def get_catalog():
        return run(engine.catalog_payload)

    @app.post("/api/commands")
    async def post_command(request: Request):
        try:
            cmd = await request.json()
        except json.JSONDecodeError as exc:
            return _error_response(ValueError(f"body is not valid JSON: {exc}"))
        try:
            return run(lambda: engine.apply_command(cmd))
        except (PipevisError, ValueError, KeyError) as exc:
            return _error_response(exc)

    @app.get("/api/lint")
    def get_lint():
        return {"warnings": run(engine.lint_payload)}

    @app.get("/api/app")
    def get_app():
        return run(engine.app_payload)

    @app.get("/api/ports/{proc_id}/{port_id}/inspect")
    def get_inspect(proc_id: str, port_id: str):
        try:
            return run(lambda: engine.inspect(proc_id, port_id))
        except (PipevisError, KeyError) as exc:
            return _error_response(exc)

    @app.post("/api/inspect-sessions")
    async def post_session(request: Request):
        body = await request.json()
        try:
            return run(lambda: engine.open_session(body["processor"], body["port"]))
        except (PipevisError, KeyError) as exc:
            return _error_response(exc)

    @app.post("/api/inspect-sessions/{session_id}/event")
    async def post_session_event(session_id: str, request: Request):
        event = await request.json()
        try:
            return run(lambda: engine.session_event(session_id, event))
        except (PipevisError, KeyError) as exc:
            return _error_response(exc)

    @app.delete("/api/inspect-sessions/{session_id}")
    def delete_session(session_id: str):
        run(lambda: engine.close_session(session_id))
        return {"closed": session_id}

    _DOC_TYPES = {".html": "text/html; charset=utf-8", ".svg": "image/svg+xml",
                  ".css": "text/css", ".png": "image/png"}

    @app.get("/api/docs/")
    @app.get("/api/docs/{path:path}")
    def get_docs(path: str = "index.html"):
        bundle = run(engine.docs_bundle)
        target = path or "index.html"
        content = bundle.get(target)
        if content is None:
            return JSONResponse(status_code=404, content={"error": "NotFound", "message": target})
        suffix = "." + target.rsplit(".", 1)[-1] if "." in target else ""
        return Response(content=content, media_type=_DOC_TYPES.get(suffix, "application/octet-stream"))

    @app.get("/api/events")
    def get_events(since: int = 0, follow: bool = True):
        backlog, sub = engine.subscribe(since)

        def frames():
            try:
                for event in backlog:
                    yield json.dumps(event.frame(), sort_keys=True) + "\n"
                while follow:
                    try:
                        event = sub.get(timeout=0.25)
                    except queue.Empty:
                        yield "\n"  # keepalive; clients skip blank lines
                        continue
                    yield json.dumps(event.frame(), sort_keys=True) + "\n"
            finally:
                engine.unsubscribe(sub)

        return StreamingResponse(frames(), media_type="application/x-ndjson")

    return app


def serve(engine: Engine, bind: str = "127.0.0.1:8700", queue_size: int = 256):
    """Run the service until interrupted (blocking)."""
    import socket

    import uvicorn

    from .errors import BindFailure

    host, _, port = bind.partition(":")
    host = host or "127.0.0.1"
    port_number = int(port or 8700)
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port_number))
    except OSError as exc:
        raise BindFailure(f"cannot bind {host}:{port_number}: {exc}") from exc
    finally:
        probe.close()
    app = create_app(engine, queue_size=queue_size)
    uvicorn.run(app, host=host, port=port_number, log_level="warning")
