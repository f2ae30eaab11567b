from __future__ import annotations

import itertools
import string
from dataclasses import dataclass

DEFAULT_ALPHABET = string.ascii_uppercase + string.digits


@dataclass(frozen=True)
class TokenSpace:
    """Tokens of ``prefix_len + suffix_len`` characters over an ordered alphabet."""

    alphabet: str = DEFAULT_ALPHABET
    prefix_len: int = 3
    suffix_len: int = 9

    def __post_init__(self):
        if len(self.alphabet) < 2:
            raise ValueError("alphabet needs at least 2 characters")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet characters must be distinct")
        if self.prefix_len < 1 or self.suffix_len < 1:
            raise ValueError("prefix_len and suffix_len must be >= 1")

    @property
    def size(self) -> int:
        return len(self.alphabet)

    @property
    def prefix_count(self) -> int:
        return self.size ** self.prefix_len

    @property
    def suffix_count(self) -> int:
        return self.size ** self.suffix_len

    @property
    def token_count(self) -> int:
        return self.size ** (self.prefix_len + self.suffix_len)

    @property
    def token_len(self) -> int:
        return self.prefix_len + self.suffix_len

    def prefixes(self):
        """All prefixes in lexicographic alphabet order."""
        for chars in itertools.product(self.alphabet, repeat=self.prefix_len):
            yield "".join(chars)

    def _encode(self, index: int, width: int) -> str:
        chars = []
        for _ in range(width):
            index, digit = divmod(index, self.size)
            chars.append(self.alphabet[digit])
        return "".join(reversed(chars))

    def suffix_at(self, index: int) -> str:
        if not 0 <= index < self.suffix_count:
            raise IndexError(index)
        return self._encode(index, self.suffix_len)

    def suffix_index(self, suffix: str) -> int:
        if len(suffix) != self.suffix_len:
            raise ValueError(f"suffix {suffix!r} has wrong length")
        index = 0
        for ch in suffix:
            index = index * self.size + self.alphabet.index(ch)
        return index

    def is_token(self, token: str) -> bool:
        return len(token) == self.token_len and all(c in self.alphabet for c in token)
