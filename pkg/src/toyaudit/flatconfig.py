"""The ``key=value`` text format shared by testbed configs and scan rules."""

from toyaudit import ToyAuditError


class InvalidConfig(ToyAuditError):
    pass


def parse_flat_config(text: str) -> dict[str, str]:
    """``key=value`` lines; ``#`` starts a comment; blank lines ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise InvalidConfig(f"line {lineno}: expected key=value, got {raw!r}")
        out[key.strip()] = value.strip()
    return out
