"""Scorer wire protocol: length-delimited JSON records over a byte stream.

Framing: each record is the ASCII decimal byte length of the payload, a
single "\\n", then that many bytes of UTF-8 JSON.  Connections open with a
handshake record {"handshake": "v1"} in each direction.

Records after the handshake:

* score request:   {"id": str, "question": str, "context_tokens": [str, ...]}
* score response:  {"id": str, "p_ans": real, "p_start": [real], "p_end": [real]}
* error response:  {"id": str, "error": str}
* health request:  {"id": str, "health": true} -> {"id": str, "ok": true}

Responses may arrive in any order; the client matches them to requests by
id.  Endpoints are "host:port" (TCP) or "unix:/path" (local socket).
"""

from __future__ import annotations

import itertools
import json
import socket
import socketserver
import threading
import uuid
from typing import IO

from .errors import ProtocolError
from .ingest import Context
from .scoring import QaScore, Scorer

PROTOCOL_VERSION = "v1"

MAX_RECORD_BYTES = 64 * 1024 * 1024


def write_record(stream: IO[bytes], obj: dict) -> None:
    payload = json.dumps(obj, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
    stream.write(b"%d\n" % len(payload))
    stream.write(payload)
    stream.flush()


def read_record(stream: IO[bytes]) -> dict | None:
    """Next record from the stream, or None on clean EOF at a record boundary."""
    header = stream.readline(32)
    if not header:
        return None
    try:
        length = int(header.strip())
    except ValueError:
        raise ProtocolError(f"bad record length header {header!r}")
    if not 0 <= length <= MAX_RECORD_BYTES:
        raise ProtocolError(f"record length {length} out of bounds")
    payload = stream.read(length)
    if len(payload) != length:
        raise ProtocolError(f"truncated record: expected {length} bytes, got {len(payload)}")
    try:
        obj = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"undecodable record payload: {exc}")
    if not isinstance(obj, dict):
        raise ProtocolError(f"record must be a JSON object, got {type(obj).__name__}")
    return obj


def connect(endpoint: str, timeout: float | None = None) -> socket.socket:
    if endpoint.startswith("unix:"):
        sock = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
        sock.settimeout(timeout)
        sock.connect(endpoint[len("unix:"):])
        return sock
    host, sep, port = endpoint.rpartition(":")
    if not sep:
        raise ProtocolError(f"endpoint {endpoint!r} is not host:port or unix:/path")
    sock = socket.create_connection((host, int(port)), timeout=timeout)
    return sock


class RemoteScorer:
    """Protocol client that multiplexes concurrent score() calls by request id.

    Any thread may call score(); one caller at a time drains the socket and
    parks responses for the others, so responses are matched to requests
    regardless of arrival order.
    """

    def __init__(self, endpoint: str, timeout: float | None = 60.0):
        self.endpoint = endpoint
        try:
            self._sock = connect(endpoint, timeout)
        except OSError as exc:
            raise ProtocolError(f"cannot connect to scorer at {endpoint}: {exc}") from exc
        self._rfile = self._sock.makefile("rb")
        self._wfile = self._sock.makefile("wb")
        self._send_lock = threading.Lock()
        self._cond = threading.Condition()
        self._parked: dict[str, dict] = {}
        self._reader_active = False
        self._broken: Exception | None = None
        self._ids = itertools.count(1)
        self._id_prefix = uuid.uuid4().hex[:8]
        self._handshake()

    def _handshake(self) -> None:
        self._send({"handshake": PROTOCOL_VERSION})
        reply = read_record(self._rfile)
        if reply is None or reply.get("handshake") != PROTOCOL_VERSION:
            raise ProtocolError(
                f"handshake with {self.endpoint} failed, got {reply!r}"
            )

    def _send(self, obj: dict) -> None:
        with self._send_lock:
            write_record(self._wfile, obj)

    def _next_id(self) -> str:
        return f"{self._id_prefix}-{next(self._ids)}"

    def _await(self, request_id: str) -> dict:
        with self._cond:
            while True:
                if request_id in self._parked:
                    return self._parked.pop(request_id)
                if self._broken is not None:
                    raise ProtocolError(str(self._broken), request_id)
                if self._reader_active:
                    self._cond.wait()
                    continue
                self._reader_active = True
                try:
                    self._cond.release()
                    try:
                        record = read_record(self._rfile)
                    finally:
                        self._cond.acquire()
                    if record is None:
                        raise ProtocolError("connection closed by scorer service")
                    rid = record.get("id")
                    if isinstance(rid, str):
                        self._parked[rid] = record
                except Exception as exc:
                    self._broken = exc
                    raise ProtocolError(str(exc), request_id) from exc
                finally:
                    self._reader_active = False
                    self._cond.notify_all()

    def _roundtrip(self, request: dict) -> dict:
        request_id = request["id"]
        try:
            self._send(request)
        except OSError as exc:
            raise ProtocolError(f"send failed: {exc}", request_id) from exc
        response = self._await(request_id)
        if "error" in response:
            raise ProtocolError(f"scorer error: {response['error']}", request_id)
        return response

    def score(self, question: str, context: Context) -> QaScore:
        request_id = self._next_id()
        response = self._roundtrip(
            {"id": request_id, "question": question, "context_tokens": list(context.tokens)}
        )
        return parse_score_response(response, len(context.tokens), request_id)

    def health_check(self) -> dict:
        request_id = self._next_id()
        response = self._roundtrip({"id": request_id, "health": True})
        if not response.get("ok"):
            raise ProtocolError(f"unhealthy scorer service: {response!r}", request_id)
        return response

    def close(self) -> None:
        for closer in (self._rfile.close, self._wfile.close, self._sock.close):
            try:
                closer()
            except OSError:
                pass

    def __enter__(self) -> "RemoteScorer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def parse_score_response(response: dict, context_len: int, request_id: str) -> QaScore:
    """Validate a raw score response against the expected context length."""
    try:
        p_ans = float(response["p_ans"])
        p_start = tuple(float(v) for v in response["p_start"])
        p_end = tuple(float(v) for v in response["p_end"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"malformed score response: {exc!r}", request_id) from exc
    if len(p_start) != context_len or len(p_end) != context_len:
        raise ProtocolError(
            f"vector length {len(p_start)}/{len(p_end)} != context length {context_len}",
            request_id,
        )
    try:
        return QaScore(p_ans=p_ans, p_start=p_start, p_end=p_end)
    except ValueError as exc:
        raise ProtocolError(f"invalid score response: {exc}", request_id) from exc


class _ScorerHandler(socketserver.StreamRequestHandler):
    def handle(self):
        hello = read_record(self.rfile)
        if hello is None or hello.get("handshake") != PROTOCOL_VERSION:
            write_record(self.wfile, {"id": "", "error": "protocol handshake failed"})
            return
        write_record(self.wfile, {"handshake": PROTOCOL_VERSION})
        while True:
            try:
                record = read_record(self.rfile)
            except ProtocolError:
                return
            if record is None:
                return
            rid = record.get("id")
            rid = rid if isinstance(rid, str) else ""
            try:
                write_record(self.wfile, self.server.answer(rid, record))
            except OSError:
                return


class ScorerServer(socketserver.ThreadingTCPServer):
    """Serves any Scorer over the wire protocol (tests, demos, stubs)."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, scorer: Scorer, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _ScorerHandler)
        self.scorer = scorer

    @property
    def endpoint(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"

    def answer(self, rid: str, record: dict) -> dict:
        if record.get("health"):
            return {"id": rid, "ok": True}
        try:
            question = record["question"]
            tokens = tuple(str(t) for t in record["context_tokens"])
            context = Context(tokens=tokens)
        except (KeyError, TypeError, ValueError) as exc:
            return {"id": rid, "error": f"bad request: {exc}"}
        try:
            score = self.scorer.score(question, context)
        except Exception as exc:  # surface scorer failures to the caller
            return {"id": rid, "error": str(exc)}
        return {
            "id": rid,
            "p_ans": score.p_ans,
            "p_start": list(score.p_start),
            "p_end": list(score.p_end),
        }

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread
