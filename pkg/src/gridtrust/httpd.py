"""HTTP endpoints for the experiment service (stdlib http.server).

JSON request/response bodies. Routes:

    POST /api/session                          create session
    GET  /api/session/<sid>                    session record
    GET  /api/session/<sid>/score              score + cursor + status
    POST /api/session/<sid>/abandon            mark abandoned
    GET  /api/session/<sid>/trial/<k>          trial payload + questionnaire
    POST /api/session/<sid>/trial/<k>/frames   {"frames": {...}, "final": bool}
    POST /api/session/<sid>/trial/<k>/survey   survey fields
    POST /api/session/<sid>/trial/<k>/submit   {"frames": ..., "survey": ...}
    GET  /api/export[?status=Complete&group=G0&frames=0]   JSONL stream
    GET  /api/config                           world constants

Anything outside /api/ is served from an optional static directory so the
browser client can be hosted by the same process. CORS is wide open; the
only credential is the opaque session id.
"""

from __future__ import annotations

import json
import os
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlparse

from .design import Group, SurveyResponse
from .server import ExperimentService, ServiceError, SessionStatus

_ROUTES = [
    ("POST", re.compile(r"^/api/session$"), "create_session"),
    ("GET", re.compile(r"^/api/session/(?P<sid>[\w-]+)$"), "get_session"),
    ("GET", re.compile(r"^/api/session/(?P<sid>[\w-]+)/score$"), "get_score"),
    ("POST", re.compile(r"^/api/session/(?P<sid>[\w-]+)/abandon$"), "abandon"),
    ("GET", re.compile(r"^/api/session/(?P<sid>[\w-]+)/trial/(?P<idx>\d+)$"), "get_trial"),
    ("POST", re.compile(r"^/api/session/(?P<sid>[\w-]+)/trial/(?P<idx>\d+)/frames$"), "post_frames"),
    ("POST", re.compile(r"^/api/session/(?P<sid>[\w-]+)/trial/(?P<idx>\d+)/survey$"), "post_survey"),
    ("POST", re.compile(r"^/api/session/(?P<sid>[\w-]+)/trial/(?P<idx>\d+)/submit$"), "post_submit"),
    ("GET", re.compile(r"^/api/export$"), "export"),
    ("GET", re.compile(r"^/api/config$"), "get_config"),
]

_STATUS_CODES = {
    "unknown_session": 404,
    "out_of_order": 409,
    "session_closed": 409,
    "no_frames": 409,
    "bad_frames": 422,
    "replay_mismatch": 422,
    "bad_survey": 422,
}

_MIME = {".html": "text/html", ".js": "text/javascript", ".css": "text/css",
         ".json": "application/json", ".svg": "image/svg+xml", ".map": "application/json"}


def _survey_from_body(body: dict) -> SurveyResponse:
    try:
        return SurveyResponse(
            trial_index=int(body["trial_index"]),
            found_count=int(body["found_count"]),
            total_estimate=int(body["total_estimate"]),
            likert=tuple(int(v) for v in body.get("likert", [])),
            timestamp=float(body.get("timestamp", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ServiceError("bad_survey", f"malformed survey: {exc}") from None


class _Handler(BaseHTTPRequestHandler):
    service: ExperimentService
    static_dir: Optional[Path] = None
    protocol_version = "HTTP/1.1"

    # -- plumbing ----------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet by default
        if os.environ.get("GRIDTRUST_HTTP_LOG"):
            super().log_message(fmt, *args)

    def _send_json(self, obj, code: int = 200) -> None:
        payload = json.dumps(obj).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(payload)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        try:
            return json.loads(self.rfile.read(length))
        except json.JSONDecodeError:
            raise ServiceError("bad_request", "request body is not valid JSON") from None

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def _dispatch(self, method: str) -> None:
        parsed = urlparse(self.path)
        for verb, pattern, name in _ROUTES:
            if verb != method:
                continue
            match = pattern.match(parsed.path)
            if match:
                try:
                    getattr(self, name)(parse_qs(parsed.query), **match.groupdict())
                except ServiceError as exc:
                    self._send_json(
                        {"error": exc.code, "message": str(exc)},
                        _STATUS_CODES.get(exc.code, 400),
                    )
                return
        if method == "GET" and self.static_dir is not None and not parsed.path.startswith("/api/"):
            self._serve_static(parsed.path)
            return
        self._send_json({"error": "not_found", "message": f"no route {method} {parsed.path}"}, 404)

    def _serve_static(self, path: str) -> None:
        rel = path.lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            self._send_json({"error": "not_found", "message": path}, 404)
            return
        data = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", _MIME.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    # -- handlers ------------------------------------------------------------

    def create_session(self, query):
        body = self._read_body()
        rec = self.service.create_session(synthetic=bool(body.get("synthetic", False)))
        self._send_json(rec.to_dict(), 201)

    def get_session(self, query, sid):
        self._send_json(self.service.session(sid).to_dict())

    def get_score(self, query, sid):
        self._send_json(self.service.get_score(sid))

    def abandon(self, query, sid):
        self._send_json(self.service.abandon(sid).to_dict())

    def get_trial(self, query, sid, idx):
        self._send_json(self.service.get_trial(sid, int(idx)))

    def post_frames(self, query, sid, idx):
        body = self._read_body()
        out = self.service.upload_frames(
            sid, int(idx), body.get("frames", {}), final=bool(body.get("final", True))
        )
        self._send_json(out)

    def post_survey(self, query, sid, idx):
        survey = _survey_from_body(self._read_body())
        self._send_json(self.service.submit_survey(sid, int(idx), survey))

    def post_submit(self, query, sid, idx):
        body = self._read_body()
        self.service.upload_frames(sid, int(idx), body.get("frames", {}), final=True)
        survey = _survey_from_body(body.get("survey", {}))
        self._send_json(self.service.submit_survey(sid, int(idx), survey))

    def get_config(self, query):
        self._send_json(
            {
                "world": self.service.world.to_dict(),
                "total_trials": 72,
                "practice_trials": 9,
            }
        )

    def export(self, query):
        status = query.get("status", [None])[0]
        group = query.get("group", [None])[0]
        frames = query.get("frames", ["1"])[0] not in ("0", "false")
        records = self.service.export_sessions(
            status=SessionStatus(status) if status else None,
            group=Group[group] if group else None,
            include_frames=frames,
        )
        self.send_response(200)
        self.send_header("Content-Type", "application/x-ndjson")
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Transfer-Encoding", "chunked")
        self.end_headers()
        for record in records:
            chunk = (json.dumps(record, separators=(",", ":")) + "\n").encode()
            self.wfile.write(f"{len(chunk):x}\r\n".encode() + chunk + b"\r\n")
        self.wfile.write(b"0\r\n\r\n")


def make_server(
    service: ExperimentService,
    host: str = "127.0.0.1",
    port: int = 8420,
    static_dir: Optional[str] = None,
) -> ThreadingHTTPServer:
    handler = type(
        "BoundHandler",
        (_Handler,),
        {"service": service, "static_dir": Path(static_dir) if static_dir else None},
    )
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(service: ExperimentService, host: str, port: int, static_dir: Optional[str] = None):
    httpd = make_server(service, host, port, static_dir)
    print(f"gridtrust server on http://{host}:{port}/ (data: {service.data_dir})")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.shutdown()


def start_background(service: ExperimentService, host: str = "127.0.0.1", port: int = 0):
    """Start a server thread on an ephemeral port; returns (server, base_url)."""
    httpd = make_server(service, host, port)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    return httpd, f"http://{httpd.server_address[0]}:{httpd.server_address[1]}"
