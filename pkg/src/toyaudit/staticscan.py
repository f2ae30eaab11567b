"""Plaintext secret constants in (decompiled) source trees.

Recognition is lexical: an identifier, an assignment operator and a quoted
string literal on the same line.  No language is parsed, which is plenty for
the flat constant classes decompilers emit.
"""

from __future__ import annotations

import logging
import math
import os
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from toyaudit import ToyAuditError
from toyaudit.detect.model import DetectorId, FileRef, Finding, Severity
from toyaudit.flatconfig import InvalidConfig, parse_flat_config

log = logging.getLogger(__name__)

DEFAULT_NAME_PATTERN = "SECRET|TOKEN|API_KEY|PASSWORD|PRIVATE_KEY"

# identifier, then `=` or `:=` (not `==`, `!=`, `<=`, `>=`), then a quoted literal
_ASSIGNMENT = re.compile(
    r"""(?P<name>[A-Za-z_$][\w$]*)\s*(?::=|(?<![=!<>:])=(?!=))\s*"""
    r"""(?P<quote>["'])(?P<value>(?:\\.|(?!(?P=quote)).)*)(?P=quote)"""
)
_BINARY_SNIFF = 8192


class UnreadableRoot(ToyAuditError):
    pass


class EmptyString(ToyAuditError):
    pass


@dataclass(frozen=True)
class SecretRule:
    name_pattern: str = DEFAULT_NAME_PATTERN
    min_value_length: int = 8
    entropy_threshold: float = 3.0

    def __post_init__(self):
        if self.min_value_length < 1:
            raise ValueError("min_value_length must be >= 1")
        if self.entropy_threshold < 0:
            raise ValueError("entropy_threshold must be >= 0")
        try:
            re.compile(self.name_pattern)
        except re.error as exc:
            raise ValueError(f"bad name_pattern {self.name_pattern!r}: {exc}") from None

    def name_matches(self, identifier: str) -> bool:
        return re.search(self.name_pattern, identifier, re.IGNORECASE) is not None

    def value_matches(self, value: str) -> bool:
        return len(value) >= self.min_value_length and shannon_entropy(value) >= self.entropy_threshold


def shannon_entropy(s: str) -> float:
    """Bits per character of the empirical character distribution of ``s``."""
    if not s:
        raise EmptyString("entropy of an empty string is undefined")
    n = len(s)
    h = -sum(c / n * math.log2(c / n) for c in Counter(s).values())
    return h + 0.0  # turns -0.0 into 0.0


def rules_from_text(text: str) -> list[SecretRule]:
    """Rules from the flat config format.

    Bare keys (``name_pattern``, ``min_value_length``, ``entropy_threshold``)
    describe a single rule; ``<label>.<key>`` groups keys into several rules,
    ordered by label.  Missing keys take the defaults.
    """
    values = parse_flat_config(text)
    groups: dict[str, dict[str, str]] = {}
    for key, value in values.items():
        label, _, field_name = key.rpartition(".")
        groups.setdefault(label, {})[field_name] = value
    rules = []
    for label in sorted(groups):
        fields = groups[label]
        unknown = set(fields) - {"name_pattern", "min_value_length", "entropy_threshold"}
        if unknown:
            raise InvalidConfig(f"unknown rule keys {sorted(unknown)}")
        try:
            rules.append(SecretRule(
                name_pattern=fields.get("name_pattern", DEFAULT_NAME_PATTERN),
                min_value_length=int(fields.get("min_value_length", 8)),
                entropy_threshold=float(fields.get("entropy_threshold", 3.0)),
            ))
        except ValueError as exc:
            raise InvalidConfig(f"rule {label or '<default>'}: {exc}") from None
    return rules or [SecretRule()]


def load_rules(path) -> list[SecretRule]:
    return rules_from_text(Path(path).read_text(encoding="utf-8"))


def _read_text(path: Path) -> str | None:
    try:
        data = path.read_bytes()
    except OSError as exc:
        log.warning("skipping unreadable file %s: %s", path, exc)
        return None
    if b"\0" in data[:_BINARY_SNIFF]:
        log.debug("skipping binary file %s", path)
        return None
    return data.decode("utf-8", errors="replace")


def _scan_file(root: Path, path: Path, rules: list[SecretRule]) -> list[Finding]:
    text = _read_text(path)
    if text is None:
        return []
    rel = path.relative_to(root).as_posix()
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        for m in _ASSIGNMENT.finditer(line):
            name, value = m.group("name"), m.group("value")
            fired = []
            for rule in rules:
                if rule.name_matches(name):
                    fired.append(f"name pattern /{rule.name_pattern}/")
                if value and rule.value_matches(value):
                    fired.append(f"entropy {shannon_entropy(value):.2f} bits/char >= "
                                 f"{rule.entropy_threshold:g} with length {len(value)}")
            if not fired:
                continue
            fired = list(dict.fromkeys(fired))
            by_name = any(f.startswith("name") for f in fired)
            out.append(Finding(
                DetectorId.D_SECRET_CONSTANT,
                Severity.HIGH if by_name else Severity.MEDIUM,
                f"string constant {name} stored in plaintext ({'; '.join(fired)})",
                [FileRef(rel, lineno)],
                [name],
            ))
    return out


def scan_secrets(root, rules: list[SecretRule] | None = None, max_workers: int = 8) -> list[Finding]:
    """Flag string-literal assignments that look like secrets, ordered by (path, line)."""
    root = Path(root)
    if not root.is_dir() or not os.access(root, os.R_OK | os.X_OK):
        raise UnreadableRoot(f"cannot read source tree {root}")
    rules = list(rules) if rules else [SecretRule()]
    files = []
    for dirpath, dirnames, filenames in os.walk(root, onerror=lambda e: log.warning("skipping %s", e)):
        dirnames.sort()
        files.extend(Path(dirpath) / f for f in sorted(filenames))
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        per_file = list(pool.map(lambda p: _scan_file(root, p, rules), files))
    findings = [f for chunk in per_file for f in chunk]
    findings.sort(key=lambda f: (f.evidence[0].path, f.evidence[0].line, f.matched_fields[0]))
    log.info("scanned %d files under %s: %d secret constant(s)", len(files), root, len(findings))
    return findings
