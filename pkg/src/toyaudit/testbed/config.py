from __future__ import annotations

import datetime as dt
import random
from dataclasses import dataclass, field, replace

from toyaudit.flatconfig import InvalidConfig, parse_flat_config
from toyaudit.mine.tokenspace import DEFAULT_ALPHABET, TokenSpace

TOGGLES = (
    "cleartext_first_party",
    "token_reuse",
    "no_auth_photos",
    "prefix_oracle",
    "retain_old_photos",
    "pii_crash_reports",
)


@dataclass
class UserRecord:
    user_id: str
    name: str
    gender: str
    birthday: str  # ISO-8601 date
    weight_kg: float
    height_cm: float
    age_years: int
    photo_token: str
    photo_bytes: bytes
    auth_token: str


def fake_jpeg(label: str) -> bytes:
    """Tiny byte string with JPEG SOI/EOI markers; stands in for a photo."""
    return b"\xff\xd8\xff\xe0" + b"JFIF\x00" + label.encode("utf-8") + b"\xff\xd9"


@dataclass
class TestbedConfig:
    __test__ = False  # keep pytest from collecting this class

    listen_address: str = "127.0.0.1:8080"
    alphabet: str = DEFAULT_ALPHABET
    prefix_len: int = 3
    suffix_len: int = 9
    planted_users: list[UserRecord] = field(default_factory=list)
    toggles: dict[str, bool] = field(default_factory=lambda: dict.fromkeys(TOGGLES, True))
    oracle_valid_status: int = 301
    oracle_invalid_status: int = 404
    token_ttl: float = 300.0
    seed: int = 0  # drives token issuance after startup

    def __post_init__(self):
        try:
            self.space
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from None
        unknown = set(self.toggles) - set(TOGGLES)
        if unknown:
            raise InvalidConfig(f"unknown toggles {sorted(unknown)}")
        self.toggles = {name: bool(self.toggles.get(name, True)) for name in TOGGLES}
        tokens = [u.photo_token for u in self.planted_users]
        if len(set(tokens)) != len(tokens):
            raise InvalidConfig("planted photo tokens must be unique")
        ids = [u.user_id for u in self.planted_users]
        if len(set(ids)) != len(ids):
            raise InvalidConfig("planted user ids must be unique")
        for user in self.planted_users:
            if not self.space.is_token(user.photo_token):
                raise InvalidConfig(f"token {user.photo_token!r} is not in the token space")
            if not user.photo_bytes:
                raise InvalidConfig(f"user {user.user_id} has an empty photo")
        if self.token_ttl <= 0:
            raise InvalidConfig("token_ttl must be positive")
        host, _, port = self.listen_address.rpartition(":")
        if not host or not port.isdigit() or not 0 <= int(port) <= 65535:
            raise InvalidConfig(f"bad listen_address {self.listen_address!r}")

    @property
    def space(self) -> TokenSpace:
        return TokenSpace(self.alphabet, self.prefix_len, self.suffix_len)

    @property
    def host(self) -> str:
        return self.listen_address.rpartition(":")[0]

    @property
    def port(self) -> int:
        return int(self.listen_address.rpartition(":")[2])

    @property
    def hardened(self) -> bool:
        return not any(self.toggles.values())

    def with_toggles(self, **overrides: bool) -> "TestbedConfig":
        unknown = set(overrides) - set(TOGGLES)
        if unknown:
            raise InvalidConfig(f"unknown toggles {sorted(unknown)}")
        return replace(self, toggles={**self.toggles, **overrides})

    def hardened_copy(self) -> "TestbedConfig":
        return replace(self, toggles=dict.fromkeys(TOGGLES, False))


_FIRST = ["Ava", "Ben", "Cleo", "Dev", "Emil", "Fay", "Gus", "Hana", "Ivo", "Jun"]


def make_users(space: TokenSpace, count: int, seed: int = 0, tokens: list[str] | None = None) -> list[UserRecord]:
    """Synthetic child accounts with unique photo tokens drawn from ``space``."""
    rng = random.Random(seed)
    tokens = list(tokens or [])
    if len(set(tokens)) != len(tokens):
        raise InvalidConfig("planted photo tokens must be unique")
    if count > space.token_count:
        raise InvalidConfig("more users than tokens in the space")
    taken = set(tokens)
    while len(tokens) < count:
        token = "".join(rng.choice(space.alphabet) for _ in range(space.token_len))
        if token not in taken:
            taken.add(token)
            tokens.append(token)
    users = []
    for i, token in enumerate(tokens):
        age = rng.randint(4, 12)
        birthday = dt.date(2018 - age, rng.randint(1, 12), rng.randint(1, 28))
        users.append(UserRecord(
            user_id=f"u{i + 1:04d}",
            name=f"{_FIRST[i % len(_FIRST)]} {chr(ord('A') + i % 26)}.",
            gender=rng.choice(["female", "male"]),
            birthday=birthday.isoformat(),
            weight_kg=round(rng.uniform(15, 45), 1),
            height_cm=round(rng.uniform(100, 155), 1),
            age_years=age,
            photo_token=token,
            photo_bytes=fake_jpeg(f"photo-{i + 1}"),
            auth_token=f"{rng.getrandbits(128):032x}",
        ))
    return users


_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}


def config_from_text(text: str) -> TestbedConfig:
    values = parse_flat_config(text)
    known = {"listen_address", "alphabet", "prefix_len", "suffix_len", "planted_count",
             "planted_seed", "planted_tokens", "oracle_valid_status", "oracle_invalid_status",
             "token_ttl", "seed", "hardened", *TOGGLES}
    unknown = set(values) - known
    if unknown:
        raise InvalidConfig(f"unknown config keys {sorted(unknown)}")

    def as_int(key, default):
        try:
            return int(values.get(key, default))
        except ValueError:
            raise InvalidConfig(f"{key} must be an integer") from None

    def as_bool(key):
        try:
            return _BOOL[values[key].lower()]
        except KeyError:
            raise InvalidConfig(f"{key} must be true or false") from None

    toggles = dict.fromkeys(TOGGLES, not ("hardened" in values and as_bool("hardened")))
    for name in TOGGLES:
        if name in values:
            toggles[name] = as_bool(name)
    try:
        space = TokenSpace(values.get("alphabet", DEFAULT_ALPHABET), as_int("prefix_len", 3),
                           as_int("suffix_len", 9))
    except ValueError as exc:
        raise InvalidConfig(str(exc)) from None
    tokens = [t.strip() for t in values.get("planted_tokens", "").split(",") if t.strip()]
    count = max(as_int("planted_count", 5 if not tokens else 0), len(tokens))
    try:
        ttl = float(values.get("token_ttl", 300))
    except ValueError:
        raise InvalidConfig("token_ttl must be a number") from None
    return TestbedConfig(
        listen_address=values.get("listen_address", "127.0.0.1:8080"),
        alphabet=space.alphabet,
        prefix_len=space.prefix_len,
        suffix_len=space.suffix_len,
        planted_users=make_users(space, count, as_int("planted_seed", 0), tokens),
        toggles=toggles,
        oracle_valid_status=as_int("oracle_valid_status", 301),
        oracle_invalid_status=as_int("oracle_invalid_status", 404),
        token_ttl=ttl,
        seed=as_int("seed", 0),
    )


def load_config(path) -> TestbedConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_text(fh.read())
