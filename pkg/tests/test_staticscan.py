import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from toyaudit.detect import DetectorId, FileRef, Severity
from toyaudit.flatconfig import InvalidConfig
from toyaudit.staticscan import (
    EmptyString,
    SecretRule,
    UnreadableRoot,
    load_rules,
    rules_from_text,
    scan_secrets,
    shannon_entropy,
)
from toyaudit.testbed.scenarios import SMARTPET_CONSTANTS_JAVA
from tests import oracles


def tree(tmp_path, files: dict[str, str]):
    for rel, text in files.items():
        p = tmp_path / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    return tmp_path


class TestEntropy:
    @pytest.mark.parametrize("s,expected", sorted(oracles.ENTROPY_CASES.items()))
    def test_values(self, s, expected):
        assert shannon_entropy(s) == pytest.approx(expected, abs=1e-12)

    def test_empty(self):
        with pytest.raises(EmptyString):
            shannon_entropy("")

    @given(st.text(min_size=1, max_size=64))
    def test_bounds(self, s):
        h = shannon_entropy(s)
        assert 0 <= h <= math.log2(len(set(s))) + 1e-9

    @given(st.text(min_size=1, max_size=20, alphabet=st.characters(codec="ascii")).map(lambda s: "".join(sorted(set(s)))),
           st.integers(1, 5))
    def test_uniform_strings_hit_the_bound(self, distinct, repeat):
        assert shannon_entropy(distinct * repeat) == pytest.approx(math.log2(len(distinct)))


class TestRules:
    def test_defaults(self):
        r = SecretRule()
        assert r.name_matches("my_api_key") and r.name_matches("NOOK_SECRET")
        assert not r.name_matches("APP_NAME")

    @pytest.mark.parametrize("kwargs", [{"min_value_length": 0}, {"entropy_threshold": -1}, {"name_pattern": "("}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SecretRule(**kwargs)

    def test_flat_file_single_rule(self, tmp_path):
        (tmp_path / "r.conf").write_text("name_pattern = KEY\nmin_value_length = 4\n")
        assert load_rules(tmp_path / "r.conf") == [SecretRule("KEY", 4, 3.0)]

    def test_flat_file_grouped_rules(self):
        rules = rules_from_text("b.name_pattern=PIN\na.entropy_threshold=4.5\n")
        assert rules == [SecretRule(entropy_threshold=4.5), SecretRule(name_pattern="PIN")]

    def test_empty_file_gives_default(self):
        assert rules_from_text("# nothing\n") == [SecretRule()]

    @pytest.mark.parametrize("text", ["colour=red", "min_value_length=x", "entropy_threshold=-2"])
    def test_bad_file(self, text):
        with pytest.raises(InvalidConfig):
            rules_from_text(text)


class TestScan:
    def test_nook_constants(self, tmp_path):
        root = tree(tmp_path, {oracles.NOOK_FILE: SMARTPET_CONSTANTS_JAVA})
        findings = scan_secrets(root)
        assert [f.matched_fields[0] for f in findings] == oracles.NOOK_CONSTANTS
        assert [f.evidence for f in findings] == [[FileRef(oracles.NOOK_FILE, n)] for n in oracles.NOOK_LINES]
        assert all(f.detector_id is DetectorId.D_SECRET_CONSTANT for f in findings)

    def test_no_string_assignments(self, tmp_path):
        root = tree(tmp_path, {"a.py": "x = 1\ny = True\nz = 3.5\n", "b.txt": "hello world\n"})
        assert scan_secrets(root) == []

    def test_low_entropy_name_rule(self, tmp_path):
        (f,) = scan_secrets(tree(tmp_path, {"c.py": 'APP_SECRET = "changeme"\n'}))
        assert "name pattern" in f.summary and "entropy" not in f.summary
        assert f.severity is Severity.HIGH

    def test_entropy_rule_only(self, tmp_path):
        (f,) = scan_secrets(tree(tmp_path, {"c.kt": 'val endpointSalt = "x8Kq2Lm9Zp4Wv7Rt"\n'}))
        assert "entropy" in f.summary and "name pattern" not in f.summary
        assert f.severity is Severity.MEDIUM

    def test_short_or_low_entropy_values_skipped(self, tmp_path):
        root = tree(tmp_path, {"c.py": 'LOCALE = "en_US"\nGREETING = "aaaaaaaaaaaa"\n'})
        assert scan_secrets(root) == []

    def test_comparisons_are_not_assignments(self, tmp_path):
        root = tree(tmp_path, {"c.py": 'if token == "x8Kq2Lm9Zp4Wv7Rt": pass\nok = a != "Q9w8e7r6t5y4u3i2"\n'})
        assert scan_secrets(root) == []

    def test_walrus_and_single_quotes(self, tmp_path):
        root = tree(tmp_path, {"c.py": "if (password := 'hunter22'):\n    pass\n"})
        assert [f.matched_fields for f in scan_secrets(root)] == [["password"]]

    def test_binary_files_skipped(self, tmp_path):
        (tmp_path / "blob.bin").write_bytes(b'\x00\x01SECRET = "abcdefghijk"')
        assert scan_secrets(tmp_path) == []

    def test_deterministic_order(self, tmp_path):
        root = tree(tmp_path, {"z/a.py": 'API_KEY = "k"\n', "a/b.py": 'X = 1\nTOKEN = "t"\n',
                               "a/a.py": 'PASSWORD = "p"\n'})
        locs = [(f.evidence[0].path, f.evidence[0].line) for f in scan_secrets(root)]
        assert locs == [("a/a.py", 1), ("a/b.py", 2), ("z/a.py", 1)]
        assert scan_secrets(root, max_workers=1) == scan_secrets(root, max_workers=8)

    def test_custom_rules(self, tmp_path):
        root = tree(tmp_path, {"c.py": 'PIN_CODE = "1234"\n'})
        assert scan_secrets(root, [SecretRule("PIN")])[0].matched_fields == ["PIN_CODE"]

    def test_unreadable_root(self, tmp_path):
        with pytest.raises(UnreadableRoot):
            scan_secrets(tmp_path / "missing")

    def test_unreadable_file_skipped(self, tmp_path, monkeypatch, caplog):
        root = tree(tmp_path, {"locked.py": 'TOKEN = "abc"\n', "open.py": 'API_KEY = "k"\n'})
        real = type(root).read_bytes

        def read_bytes(self):
            if self.name == "locked.py":
                raise PermissionError("denied")
            return real(self)

        monkeypatch.setattr(type(root), "read_bytes", read_bytes)
        findings = scan_secrets(root)
        assert [f.evidence[0].path for f in findings] == ["open.py"]
        assert "locked.py" in caplog.text

    def test_scenario_tree(self, scenario_runs):
        root = scenario_runs["smartpet"].jsonl.parent
        findings = scan_secrets(root / "smartpet_src")
        assert len(findings) == 2
