"""HTTP recognition service: upload a plate image, get the vehicle dossier.

Each upload becomes a session keyed by a random 128-bit id.  Sessions are
persisted to an append-only JSON-lines log (with the uploaded image stored
under a content-hash filename), so results stay retrievable across restarts.
Responses are serialized once with a fixed field order and replayed verbatim
on GET, which is what makes read-your-write byte equality hold.
"""

from __future__ import annotations

import hashlib
import json
import logging
import secrets
import threading
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, File, Form, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware

from .datastore import Store
from .pipeline import PipelineConfig, RecognitionResult, recognize
from .raster import DecodeError, load_color_bytes
from .recognition import TemplateSet

logger = logging.getLogger(__name__)

MAX_UPLOAD_BYTES = 5 * 1024 * 1024
SESSION_LOG = "sessions.jsonl"
IMAGE_DIR = "images"
JSON_UTF8 = "application/json; charset=utf-8"

STATUS_BY_FAILURE = {
    "no-plate": "no_plate",
    "no-characters": "no_characters",
    "low-confidence": "low_confidence",
}


def _json_response(body: str, status_code: int = 200) -> Response:
    return Response(content=body, status_code=status_code, media_type=JSON_UTF8)


def _error(status_code: int, detail: str) -> Response:
    return _json_response(json.dumps({"detail": detail}), status_code)


def render_api_response(session_id: str, result: RecognitionResult,
                        vehicle) -> str:
    """Serialize an ApiResponse with fixed field order.

    Field order is part of the wire contract: session_id, status, plate_text,
    confidence, vehicle, match_kind.
    """
    if result.ok:
        status = "ok"
        plate_text = result.plate.text
        confidence = round(result.plate.confidence, 6)
    else:
        status = STATUS_BY_FAILURE[result.failure]
        plate_text = None
        confidence = None
    body = {
        "session_id": session_id,
        "status": status,
        "plate_text": plate_text,
        "confidence": confidence,
        "vehicle": vehicle.record.to_dict() if vehicle and vehicle.record else None,
        "match_kind": vehicle.match_kind if vehicle else "none",
    }
    return json.dumps(body, ensure_ascii=False)


class SessionStore:
    """Append-only session log plus uploaded-image archive."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        (self.directory / IMAGE_DIR).mkdir(exist_ok=True)
        self._log_path = self.directory / SESSION_LOG
        self._bodies: dict[str, str] = {}
        self._lock = threading.Lock()
        if self._log_path.exists():
            with open(self._log_path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    entry = json.loads(line)
                    self._bodies[entry["session_id"]] = entry["response"]

    def __len__(self) -> int:
        return len(self._bodies)

    def new_session_id(self) -> str:
        return secrets.token_hex(16)

    def save_image(self, data: bytes, suffix: str) -> str:
        name = hashlib.sha256(data).hexdigest() + suffix
        path = self.directory / IMAGE_DIR / name
        if not path.exists():
            path.write_bytes(data)
        return f"{IMAGE_DIR}/{name}"

    def append(self, session_id: str, device_id: str | None, image_ref: str,
               response_body: str) -> None:
        entry = {
            "session_id": session_id,
            "device_id": device_id,
            "received_at": datetime.now(timezone.utc).isoformat(),
            "image_ref": image_ref,
            "response": response_body,
        }
        with self._lock:
            with open(self._log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
            self._bodies[session_id] = response_body

    def get(self, session_id: str) -> str | None:
        return self._bodies.get(session_id)


def create_app(templates: TemplateSet | None, store: Store,
               sessions: SessionStore, config: PipelineConfig | None = None,
               cors_origin: str = "*") -> FastAPI:
    """Build the service app.  ``templates=None`` models a not-ready server."""
    config = config or PipelineConfig()
    app = FastAPI(title="platescan service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[cors_origin] if cors_origin != "*" else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.templates = templates
    app.state.store = store
    app.state.sessions = sessions
    app.state.config = config

    @app.post("/api/v1/plates")
    async def post_plate(image: UploadFile | None = File(None),
                         device_id: str | None = Form(None)) -> Response:
        if app.state.templates is None:
            return _error(503, "template set not loaded")
        if image is None:
            return _error(400, "missing image part")
        data = await image.read()
        if len(data) > MAX_UPLOAD_BYTES:
            return _error(400, "image too large")
        try:
            pixels = load_color_bytes(data)
        except DecodeError:
            return _error(400, "undecodable image")

        result = recognize(pixels, app.state.config, app.state.templates)
        vehicle = None
        if result.ok:
            vehicle = app.state.store.lookup(result.plate.text)
        session_id = sessions.new_session_id()
        suffix = Path(image.filename or "upload.bin").suffix or ".bin"
        image_ref = sessions.save_image(data, suffix)
        body = render_api_response(session_id, result, vehicle)
        sessions.append(session_id, device_id, image_ref, body)
        logger.info("session %s: %s", session_id,
                    result.plate.text if result.ok else result.failure)
        return _json_response(body)

    @app.get("/api/v1/plates/{session_id}")
    def get_plate(session_id: str) -> Response:
        body = sessions.get(session_id)
        if body is None:
            return _error(404, "unknown session")
        return _json_response(body)

    @app.get("/healthz")
    def healthz() -> Response:
        if app.state.templates is None:
            return _error(503, "starting up")
        body = json.dumps({
            "status": "ok",
            "templates": app.state.templates.version,
            "records": len(app.state.store),
        })
        return _json_response(body)

    return app


def serve(port: int, db_path: str, templates_path: str, sessions_dir: str,
          config_path: str | None = None, cors_origin: str = "*",
          host: str = "0.0.0.0") -> None:
    """Load everything and run uvicorn (blocking)."""
    import uvicorn

    from .datastore import open_store
    from .recognition import load_templates

    config = PipelineConfig.load(config_path) if config_path else PipelineConfig()
    templates = load_templates(templates_path)
    store = open_store(db_path)
    sessions = SessionStore(sessions_dir)
    app = create_app(templates, store, sessions, config, cors_origin)
    logger.info("serving on :%d (templates %s, %d records, %d sessions)",
                port, templates.version, len(store), len(sessions))
    uvicorn.run(app, host=host, port=port, log_level="info")
