"""Mock first-party toy server with switchable vulnerabilities."""

from __future__ import annotations

import errno
import logging
import random
import socket
import threading
import time
from dataclasses import dataclass, field

import uvicorn
from fastapi import FastAPI, Header, Request, Response
from fastapi.responses import JSONResponse

from toyaudit import ToyAuditError
from toyaudit.testbed import schemas
from toyaudit.testbed.config import InvalidConfig, TestbedConfig, UserRecord
from toyaudit.testbed.goal import compute_hydration_goal

log = logging.getLogger(__name__)

AUTH_HEADER = "X-Auth-Token"


class AddressInUse(ToyAuditError):
    pass


class UnknownUser(ToyAuditError):
    pass


@dataclass
class _Session:
    user_id: str
    issued_at: float


@dataclass
class _Photo:
    user_id: str
    data: bytes


@dataclass
class TestbedState:
    """Stores behind the HTTP endpoints; each store has its own writer lock."""

    __test__ = False

    config: TestbedConfig
    clock: object = time.monotonic
    users: dict[str, UserRecord] = field(default_factory=dict)
    photos: dict[str, _Photo] = field(default_factory=dict)
    issued_tokens: set[str] = field(default_factory=set)
    sessions: dict[str, _Session] = field(default_factory=dict)
    drinks: list[tuple[str, int]] = field(default_factory=list)
    request_log: list[tuple[str, str, int]] = field(default_factory=list)

    def __post_init__(self):
        self.user_lock = threading.Lock()
        self.photo_lock = threading.Lock()
        self.session_lock = threading.Lock()
        self.log_lock = threading.Lock()
        self.rng = random.Random(self.config.seed)
        now = self.clock()
        for user in self.config.planted_users:
            self.users[user.user_id] = user
            self.photos[user.photo_token] = _Photo(user.user_id, user.photo_bytes)
            self.issued_tokens.add(user.photo_token)
            self.sessions[user.auth_token] = _Session(user.user_id, now)

    @property
    def toggles(self) -> dict[str, bool]:
        return self.config.toggles

    # -- photos ---------------------------------------------------------------

    def prefix_is_valid(self, prefix: str) -> bool:
        with self.photo_lock:
            return any(token.startswith(prefix) for token in self.photos) and len(prefix) == self.config.prefix_len

    def photo_for(self, prefix: str, token: str) -> _Photo | None:
        if token[: self.config.prefix_len] != prefix:
            return None
        with self.photo_lock:
            return self.photos.get(token)

    def _new_token(self) -> str:
        space = self.config.space
        if len(self.issued_tokens) >= space.token_count:
            raise RuntimeError("token space exhausted")
        while True:
            token = "".join(self.rng.choice(space.alphabet) for _ in range(space.token_len))
            if token not in self.issued_tokens:
                return token

    def overwrite_photo(self, user_id: str, new_photo: bytes) -> str:
        """Store ``new_photo`` under a fresh token; the old token is kept or dropped per toggle."""
        if not new_photo:
            raise ValueError("photo must not be empty")
        with self.user_lock:
            user = self.users.get(user_id)
            if user is None:
                raise UnknownUser(user_id)
            with self.photo_lock:
                token = self._new_token()
                self.issued_tokens.add(token)
                self.photos[token] = _Photo(user_id, new_photo)
                old = user.photo_token
                if old and not self.toggles["retain_old_photos"]:
                    self.photos.pop(old, None)
            user.photo_token = token
            user.photo_bytes = new_photo
        return token

    # -- accounts and sessions ------------------------------------------------

    def create_account(self, fields: schemas.AccountCreate) -> tuple[UserRecord, int]:
        goal = compute_hydration_goal(fields.age_years, fields.weight_kg, fields.height_cm)
        with self.user_lock:
            user_id = f"u{len(self.users) + 1:04d}"
            while user_id in self.users:
                user_id = f"u{self.rng.getrandbits(32):08x}"
            user = UserRecord(
                user_id=user_id, name=fields.name, gender=fields.gender,
                birthday=fields.birthday.isoformat(), weight_kg=fields.weight_kg,
                height_cm=fields.height_cm, age_years=fields.age_years, photo_token="",
                photo_bytes=b"", auth_token=f"{self.rng.getrandbits(128):032x}",
            )
            self.users[user_id] = user
        with self.session_lock:
            self.sessions[user.auth_token] = _Session(user_id, self.clock())
        return user, goal

    def session_user(self, auth_token: str | None) -> str | None:
        """User id for a live session token; tokens expire only when reuse is disabled."""
        if not auth_token:
            return None
        with self.session_lock:
            session = self.sessions.get(auth_token)
        if session is None:
            return None
        if not self.toggles["token_reuse"] and self.clock() - session.issued_at > self.config.token_ttl:
            return None
        return session.user_id

    def refresh(self, auth_token: str) -> str | None:
        user_id = self.session_user(auth_token)
        if user_id is None:
            return None
        new = f"{self.rng.getrandbits(128):032x}"
        with self.session_lock:
            self.sessions.pop(auth_token, None)
            self.sessions[new] = _Session(user_id, self.clock())
        with self.user_lock:
            self.users[user_id].auth_token = new
        return new

    def record_drink(self, user_id: str, ml: int) -> int:
        with self.user_lock:
            self.drinks.append((user_id, ml))
            return sum(v for u, v in self.drinks if u == user_id)


def create_app(config: TestbedConfig, clock=time.monotonic) -> FastAPI:
    state = TestbedState(config, clock)
    app = FastAPI(title="toy testbed", redirect_slashes=False, docs_url=None, redoc_url=None,
                  openapi_url=None)
    app.state.testbed = state

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        response = await call_next(request)
        with state.log_lock:
            state.request_log.append((request.method, request.url.path, response.status_code))
        return response

    @app.get("/health", response_model=schemas.Health)
    def health():
        return schemas.Health()

    @app.post("/api/account", response_model=schemas.AccountCreated)
    def create_account(body: schemas.AccountCreate):
        user, goal = state.create_account(body)
        return schemas.AccountCreated(user_id=user.user_id, auth_token=user.auth_token, goal_ml=goal)

    @app.get("/api/photo/{prefix}")
    def photo_prefix(prefix: str):
        if state.toggles["prefix_oracle"] and state.prefix_is_valid(prefix):
            # points at the prefix "directory" only, never at a full token
            return Response(status_code=config.oracle_valid_status,
                            headers={"Location": f"/api/photo/{prefix}/"})
        return Response(status_code=config.oracle_invalid_status)

    @app.get("/api/photo/{prefix}/{token}")
    def photo_full(prefix: str, token: str, x_auth_token: str | None = Header(default=None)):
        if not state.toggles["no_auth_photos"]:
            caller = state.session_user(x_auth_token)
            if caller is None:
                return Response(status_code=401)
            photo = state.photo_for(prefix, token)
            if photo is None or photo.user_id != caller:
                return Response(status_code=404)
            return Response(photo.data, media_type="image/jpeg")
        photo = state.photo_for(prefix, token)
        if photo is None:
            return Response(status_code=404)
        return Response(photo.data, media_type="image/jpeg")

    @app.put("/api/photo/{user_id}", response_model=schemas.PhotoToken)
    async def upload_photo(user_id: str, request: Request, x_auth_token: str | None = Header(default=None)):
        data = await request.body()
        caller = state.session_user(x_auth_token)
        if caller is None:
            return Response(status_code=401)
        if user_id not in state.users:
            return Response(status_code=404)
        if caller != user_id:
            return Response(status_code=403)
        if not data:
            return JSONResponse({"detail": "empty photo"}, status_code=400)
        return schemas.PhotoToken(token=state.overwrite_photo(user_id, data))

    @app.post("/api/drink", response_model=schemas.DrinkRecorded)
    def drink(body: schemas.DrinkEvent, x_auth_token: str | None = Header(default=None)):
        user_id = state.session_user(x_auth_token)
        if user_id is None:
            return Response(status_code=401)
        return schemas.DrinkRecorded(recorded=True, total_ml=state.record_drink(user_id, body.ml))

    @app.post("/api/token/refresh", response_model=schemas.RefreshResponse)
    def refresh(body: schemas.RefreshRequest):
        if state.toggles["token_reuse"]:
            return Response(status_code=404)
        new = state.refresh(body.auth_token)
        if new is None:
            return Response(status_code=401)
        return schemas.RefreshResponse(auth_token=new, expires_in=config.token_ttl)

    return app


class ServerHandle:
    """A testbed running on a background thread."""

    def __init__(self, server: uvicorn.Server, thread: threading.Thread, app: FastAPI, host: str, port: int):
        self._server = server
        self._thread = thread
        self.app = app
        self.host = host
        self.port = port

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    @property
    def state(self) -> TestbedState:
        return self.app.state.testbed

    def wait(self):
        while self._thread.is_alive():
            self._thread.join(0.5)

    def shutdown(self, timeout: float = 10.0):
        self._server.should_exit = True
        self._thread.join(timeout)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.shutdown()


def serve(config: TestbedConfig, clock=time.monotonic, startup_timeout: float = 10.0) -> ServerHandle:
    """Start the testbed; port 0 in ``listen_address`` picks a free port."""
    if not isinstance(config, TestbedConfig):
        raise InvalidConfig("serve() needs a TestbedConfig")
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((config.host, config.port))
    except OSError as exc:
        sock.close()
        if exc.errno == errno.EADDRINUSE:
            raise AddressInUse(f"{config.listen_address} is already in use") from exc
        raise
    sock.listen(128)
    host, port = sock.getsockname()[:2]
    app = create_app(config, clock)
    server = uvicorn.Server(uvicorn.Config(app, log_level="warning", access_log=False, lifespan="off"))
    thread = threading.Thread(target=server.run, kwargs={"sockets": [sock]}, daemon=True,
                              name=f"testbed-{port}")
    thread.start()
    deadline = time.monotonic() + startup_timeout
    while not server.started:
        if not thread.is_alive() or time.monotonic() > deadline:
            server.should_exit = True
            raise RuntimeError("testbed failed to start")
        time.sleep(0.01)
    log.info("testbed listening on http://%s:%d", host, port)
    return ServerHandle(server, thread, app, host, port)
