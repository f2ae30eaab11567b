"""Mock toy server with per-vulnerability toggles, plus scripted client emulators."""

from toyaudit.testbed.config import (
    TOGGLES,
    InvalidConfig,
    TestbedConfig,
    UserRecord,
    config_from_text,
    load_config,
    make_users,
)
from toyaudit.testbed.emulator import ScenarioServerUnavailable, emulate_toy_session
from toyaudit.testbed.goal import NonPositiveInput, compute_hydration_goal
from toyaudit.testbed.scenarios import PROFILES, SCENARIOS, profile_for
from toyaudit.testbed.server import AddressInUse, ServerHandle, TestbedState, UnknownUser, create_app, serve

__all__ = [
    "PROFILES", "SCENARIOS", "TOGGLES", "AddressInUse", "InvalidConfig", "NonPositiveInput",
    "ScenarioServerUnavailable", "ServerHandle", "TestbedConfig", "TestbedState", "UnknownUser",
    "UserRecord", "compute_hydration_goal", "config_from_text", "create_app",
    "emulate_toy_session", "load_config", "make_users", "profile_for", "serve",
]
