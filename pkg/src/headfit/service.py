"""Streaming session service.

One registration session per connection.  Two transports share the same
handler and codec: a web-socket endpoint at /session (browser clients) and
a raw TCP newline-delimited fallback (headless harnesses).

Error policy: PARSE and BAD_POSE are per-message and recoverable; NO_HELLO,
UNSUPPORTED_VERSION, MODEL_LOAD and INTERNAL are fatal and the connection
closes right after the Err message.  Every accepted frame gets exactly one
State reply, in arrival order, echoing the frame's seq.
"""

from __future__ import annotations

import asyncio
import base64
import binascii
import socket
import uuid
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import protocol
from .errors import (
    BehindCamera,
    DegenerateModelBox,
    HeadfitError,
    MalformedLine,
    NonMonotonicSeq,
    NonRigidPose,
    RangeError,
    RleLengthMismatch,
)
from .evaluation import make_row
from .geometry import CameraIntrinsics, intrinsics_from_fov, pose_from_column_major
from .glb import parse_glb
from .mesh import Mesh, resolve_model_ref
from .protocol import encode_err, encode_ready, encode_state
from .registration import RegistrationState, set_manual, step
from .session import SessionFrame, SessionHeader, SessionRecorder, frame_from_obj

GLB_MAX_BYTES = 32 * 1024 * 1024
# One base64-encoded 32 MiB GLB plus JSON overhead must fit in a line.
LINE_LIMIT = 64 * 1024 * 1024

_SET_KEYS = ("manual_scale", "opacity", "visible", "auto_scale_enabled",
             "auto_scale_once", "smoothing_alpha", "scale")


class SessionHandler:
    """Transport-agnostic connection state machine.  Feed it one decoded
    text line at a time; it returns the encoded replies to send.  After a
    fatal error `should_close` stays true and further input is ignored."""

    def __init__(self, asset_dir=None, record_dir=None):
        self.asset_dir = Path(asset_dir) if asset_dir is not None else None
        self.record_dir = Path(record_dir) if record_dir is not None else Path("recordings")
        self.session_id = uuid.uuid4().hex[:12]
        self.should_close = False
        self._hello: protocol.Hello | None = None
        self._k: CameraIntrinsics | None = None
        self._st: RegistrationState | None = None
        self._model_ref_str = "builtin:head-ellipsoid"
        self._recorder: SessionRecorder | None = None

    # -- lifecycle ----------------------------------------------------------

    def handle_line(self, line: str) -> list[str]:
        if self.should_close:
            return []
        try:
            return self._dispatch(line)
        except Exception as e:  # anything unplanned must not kill the server
            return self._fatal(protocol.INTERNAL, f"{type(e).__name__}: {e}")

    def close(self) -> None:
        self._stop_recording()

    def _fatal(self, code: str, msg: str) -> list[str]:
        self.should_close = True
        return [encode_err(code, msg, True)]

    # -- dispatch -----------------------------------------------------------

    def _dispatch(self, line: str) -> list[str]:
        if self._hello is None:
            return self._expect_hello(line)
        try:
            obj = protocol.parse_message(line)
        except MalformedLine as e:
            return [encode_err(protocol.PARSE, e.reason, False)]
        mtype = obj["type"]
        if mtype == "hello":
            return self._handle_hello(obj)
        if mtype == "frame":
            return self._handle_frame(obj)
        if mtype == "set":
            return self._handle_set(obj)
        if mtype == "record_start":
            return self._handle_record_start(obj)
        if mtype == "record_stop":
            self._stop_recording()
            return []
        return [encode_err(protocol.PARSE, f"unknown message type {mtype!r}", False)]

    def _expect_hello(self, line: str) -> list[str]:
        try:
            obj = protocol.parse_message(line)
        except MalformedLine as e:
            return self._fatal(protocol.NO_HELLO, f"first message must be hello ({e.reason})")
        if obj["type"] != "hello":
            return self._fatal(protocol.NO_HELLO,
                               f"first message must be hello, got {obj['type']!r}")
        return self._handle_hello(obj)

    # -- message handlers ---------------------------------------------------

    def _handle_hello(self, obj: dict) -> list[str]:
        try:
            hello = protocol.hello_from_obj(obj)
        except MalformedLine as e:
            return [encode_err(protocol.PARSE, e.reason, False)]
        if hello.protocol_version != protocol.PROTOCOL_VERSION:
            return self._fatal(protocol.UNSUPPORTED_VERSION,
                               f"protocol_version {hello.protocol_version} unsupported")
        try:
            model, ref_str = self._load_model(hello)
        except (HeadfitError, OSError, ValueError) as e:
            return self._fatal(protocol.MODEL_LOAD, f"{type(e).__name__}: {e}")
        # A later hello re-initializes the session (camera switch sends new
        # dimensions); any active recording closes since its header would lie.
        self._stop_recording()
        self._hello = hello
        self._k = intrinsics_from_fov(hello.fov_v_deg, hello.image_w, hello.image_h)
        self._st = RegistrationState(model=model)
        self._model_ref_str = ref_str
        return [encode_ready(self.session_id)]

    def _load_model(self, hello: protocol.Hello) -> tuple[Mesh, str]:
        if hello.model_glb_b64 is not None:
            try:
                blob = base64.b64decode(hello.model_glb_b64, validate=True)
            except binascii.Error as e:
                raise HeadfitError(f"model_glb_b64 is not valid base64: {e}") from e
            if len(blob) > GLB_MAX_BYTES:
                raise HeadfitError(
                    f"GLB upload {len(blob)} bytes exceeds cap {GLB_MAX_BYTES}")
            return parse_glb(blob), "upload:glb"
        ref = hello.model_ref if hello.model_ref is not None else "builtin:head-ellipsoid"
        return resolve_model_ref(ref, base_dir=self.asset_dir), ref

    def _handle_frame(self, obj: dict) -> list[str]:
        try:
            frame = frame_from_obj(obj)
        except MalformedLine as e:
            return [encode_err(protocol.PARSE, e.reason, False)]
        try:
            result = step(self._st, frame, self._k)
        except RleLengthMismatch as e:
            return [encode_err(protocol.PARSE, str(e), False)]
        except (NonRigidPose, BehindCamera, DegenerateModelBox) as e:
            return [encode_err(protocol.BAD_POSE, f"{type(e).__name__}: {e}", False)]
        except HeadfitError as e:
            return [encode_err(protocol.BAD_POSE, f"{type(e).__name__}: {e}", False)]

        metrics = None
        if result.box_i is not None:
            try:
                metrics = make_row(frame.seq, frame.dof_label, frame.angle_deg,
                                   result.box_i, result.box_m, t_ms=frame.t_ms)
            except HeadfitError:
                metrics = None
        out = [encode_state(frame.seq, result, metrics)]
        out.extend(self._record_frame(frame))
        return out

    def _handle_set(self, obj: dict) -> list[str]:
        params = {}
        try:
            for key in _SET_KEYS:
                if key in obj:
                    params[key] = obj[key]
            if "offset" in obj:
                params["offset"] = pose_from_column_major(obj["offset"])
            set_manual(self._st, **params)
        except (RangeError, HeadfitError, TypeError, ValueError) as e:
            return [encode_err(protocol.PARSE, f"set rejected: {e}", False)]
        return []

    # -- recording ----------------------------------------------------------

    def _handle_record_start(self, obj: dict) -> list[str]:
        name = obj.get("name")
        if not isinstance(name, str) or not name or len(name) > 64:
            return [encode_err(protocol.PARSE, "record_start needs a short name", False)]
        if not all(c.isalnum() or c in "._-" for c in name) or name.startswith("."):
            return [encode_err(protocol.PARSE, f"name {name!r} is not path-safe", False)]
        self._stop_recording()
        if not name.endswith(".jsonl"):
            name += ".jsonl"
        self.record_dir.mkdir(parents=True, exist_ok=True)
        header = SessionHeader(image_w=self._hello.image_w, image_h=self._hello.image_h,
                               fov_v_deg=self._hello.fov_v_deg,
                               model_ref=self._model_ref_str,
                               notes=f"recorded by session {self.session_id}")
        self._recorder = SessionRecorder(open(self.record_dir / name, "wb"), header)
        return []

    def _record_frame(self, frame: SessionFrame) -> list[str]:
        if self._recorder is None:
            return []
        try:
            self._recorder.record(frame)
        except NonMonotonicSeq as e:
            self._stop_recording()
            return [encode_err(protocol.PARSE, f"recording stopped: {e}", False)]
        return []

    def _stop_recording(self) -> None:
        if self._recorder is not None:
            try:
                self._recorder.close()
            finally:
                self._recorder = None


# -- TCP fallback transport -------------------------------------------------

async def _serve_tcp_connection(reader: asyncio.StreamReader,
                                writer: asyncio.StreamWriter,
                                asset_dir, record_dir) -> None:
    handler = SessionHandler(asset_dir, record_dir)
    try:
        while not handler.should_close:
            try:
                raw = await reader.readline()
            except (asyncio.LimitOverrunError, ValueError):
                # Framing is unrecoverable once a line overruns the buffer.
                writer.write((encode_err(protocol.PARSE, "line too long", True) + "\n")
                             .encode("utf-8"))
                await writer.drain()
                break
            if not raw:
                break
            replies = handler.handle_line(raw.decode("utf-8", errors="replace"))
            if replies:
                writer.write(("\n".join(replies) + "\n").encode("utf-8"))
                await writer.drain()
    except (ConnectionError, asyncio.CancelledError):
        pass
    finally:
        handler.close()
        try:
            writer.close()
            await writer.wait_closed()
        except (ConnectionError, OSError):
            pass


async def start_tcp_server(host: str, port: int, asset_dir=None,
                           record_dir=None) -> asyncio.AbstractServer:
    async def conn(reader, writer):
        await _serve_tcp_connection(reader, writer, asset_dir, record_dir)

    return await asyncio.start_server(conn, host, port, limit=LINE_LIMIT)


# -- web-socket transport -----------------------------------------------------

def create_app(asset_dir=None, record_dir=None) -> FastAPI:
    app = FastAPI(title="headfit session service")

    @app.websocket("/session")
    async def session_endpoint(ws: WebSocket):
        await ws.accept()
        handler = SessionHandler(asset_dir, record_dir)
        try:
            while not handler.should_close:
                line = await ws.receive_text()
                for reply in handler.handle_line(line):
                    await ws.send_text(reply)
        except WebSocketDisconnect:
            pass
        finally:
            handler.close()
            if handler.should_close:
                try:
                    await ws.close()
                except RuntimeError:
                    pass

    return app


# -- combined entry point -----------------------------------------------------

def check_port_free(host: str, port: int) -> None:
    """Raises OSError when the port cannot be bound."""
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as s:
        s.bind((host, port))


async def serve_async(host: str = "127.0.0.1", ws_port: int = 8765,
                      tcp_port: int = 8766, asset_dir=None, record_dir=None) -> None:
    import uvicorn

    tcp_server = await start_tcp_server(host, tcp_port, asset_dir, record_dir)
    config = uvicorn.Config(create_app(asset_dir, record_dir), host=host, port=ws_port,
                            log_level="warning", ws_max_size=LINE_LIMIT)
    server = uvicorn.Server(config)
    try:
        await asyncio.gather(server.serve(), tcp_server.serve_forever())
    finally:
        tcp_server.close()
        await tcp_server.wait_closed()


def serve(host: str = "127.0.0.1", ws_port: int = 8765, tcp_port: int = 8766,
          asset_dir=None, record_dir=None) -> None:
    """Blocking entry point; raises OSError up front when a port is taken."""
    check_port_free(host, ws_port)
    check_port_free(host, tcp_port)
    asyncio.run(serve_async(host, ws_port, tcp_port, asset_dir, record_dir))
