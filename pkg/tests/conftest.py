import json
from pathlib import Path

import pytest

from toyaudit.capture import parse_transaction_log
from toyaudit.testbed import TestbedConfig, emulate_toy_session, make_users, serve
from toyaudit.testbed.probes import run_testbed_probes
from tests import oracles


def _config(**kwargs) -> TestbedConfig:
    base = TestbedConfig(listen_address="127.0.0.1:0")
    users = make_users(base.space, 5, seed=7)
    return TestbedConfig(listen_address="127.0.0.1:0", planted_users=users, **kwargs)


@pytest.fixture(scope="session")
def vulnerable_config():
    return _config()


@pytest.fixture(scope="session")
def hardened_config():
    return _config().hardened_copy()


@pytest.fixture(scope="session")
def vulnerable_server(vulnerable_config):
    with serve(vulnerable_config) as handle:
        yield handle


@pytest.fixture(scope="session")
def hardened_server(hardened_config):
    with serve(hardened_config) as handle:
        yield handle


@pytest.fixture(scope="session")
def small_config():
    space_cfg = TestbedConfig(alphabet=oracles.SMALL_ALPHABET, prefix_len=oracles.SMALL_PREFIX_LEN,
                              suffix_len=oracles.SMALL_SUFFIX_LEN)
    users = make_users(space_cfg.space, oracles.SMALL_PLANTED, seed=3)
    return TestbedConfig(listen_address="127.0.0.1:0", alphabet=oracles.SMALL_ALPHABET,
                         prefix_len=oracles.SMALL_PREFIX_LEN, suffix_len=oracles.SMALL_SUFFIX_LEN,
                         planted_users=users)


@pytest.fixture(scope="session")
def small_server(small_config):
    with serve(small_config) as handle:
        yield handle


class ScenarioRun:
    """Files produced by emulating one scenario, plus parsed views."""

    def __init__(self, name: str, paths, active=None):
        self.name = name
        self.jsonl, self.pcap, self.labels_path = paths
        self.profile_path = self.jsonl.with_name(f"{name}.profile.json")
        self.active = active or []

    @property
    def txns(self):
        return parse_transaction_log(self.jsonl.read_text())

    @property
    def labels(self):
        return json.loads(self.labels_path.read_text())


@pytest.fixture(scope="session")
def scenario_runs(tmp_path_factory, vulnerable_server, vulnerable_config,
                  hardened_server, hardened_config) -> dict[str, ScenarioRun]:
    """Vulnerable hydration/smartpet/fitness plus a hardened hydration run."""
    out = tmp_path_factory.mktemp("scenarios")
    runs = {}
    paths = emulate_toy_session("hydration", vulnerable_config, out / "vulnerable", target=vulnerable_server.url)
    runs["hydration"] = ScenarioRun("hydration", paths,
                                    run_testbed_probes(vulnerable_server.url, vulnerable_config))
    for name in ("smartpet", "fitness"):
        runs[name] = ScenarioRun(name, emulate_toy_session(name, None, out / "vulnerable"))
    paths = emulate_toy_session("hydration", hardened_config, out / "hardened", target=hardened_server.url)
    runs["hardened"] = ScenarioRun("hydration", paths,
                                   run_testbed_probes(hardened_server.url, hardened_config))
    return runs


@pytest.fixture
def scenario_dir(scenario_runs) -> Path:
    return scenario_runs["hydration"].jsonl.parent


@pytest.fixture
def unused_port() -> int:
    import socket
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
