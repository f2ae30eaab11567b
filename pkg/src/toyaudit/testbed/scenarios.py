"""Device profiles and host mixes for the three emulated toys.

Every third-party domain is a synthetic ``.test`` label; nothing here
resolves to a real analytics service.
"""

from __future__ import annotations

import zlib

from toyaudit.capture.model import DeviceProfile, Party
from toyaudit.capture.stats import classify_party

SCENARIOS = ("hydration", "smartpet", "fitness")

# shared third-party services, pattern -> label
GOOGLE_ANALYTICS = {"analytics.example.test": "google-analytics",
                    "*.analytics.example.test": "google-analytics"}
CRASHLYTICS = {"crash.example.test": "crashlytics", "*.crash.example.test": "crashlytics"}
FLURRY = {"*.flurry.example.test": "flurry-analytics"}
JPUSH = {"*.jpush.example.test": "jpush-analytics"}
PERF = {"*.monitor.example.test": "performance-monitoring"}
NEWS = {"*.news.example.test": "news-feed"}
CDN = {"*.cdn.example.test": "cdn"}

PROFILES = {
    "hydration": DeviceProfile(
        device_name="hydration",
        first_party_hosts={"toymaker.test", "*.toymaker.test"},
        third_party_hosts={**GOOGLE_ANALYTICS, **CRASHLYTICS, **FLURRY, **JPUSH, **PERF},
    ),
    "smartpet": DeviceProfile(
        device_name="smartpet",
        first_party_hosts={"petmaker.test", "*.petmaker.test"},
        third_party_hosts={**GOOGLE_ANALYTICS, **CRASHLYTICS, **NEWS, **CDN},
    ),
    "fitness": DeviceProfile(
        device_name="fitness",
        first_party_hosts={"bandmaker.test", "*.bandmaker.test"},
        third_party_hosts={**GOOGLE_ANALYTICS, **CRASHLYTICS, **FLURRY},
    ),
}

API_HOST = "api.toymaker.test"
HYDRATION_FIRST_PARTY = (API_HOST, "static.toymaker.test", "www.toymaker.test")
HYDRATION_THIRD_PARTY = (
    "analytics.example.test",
    "collect.analytics.example.test",
    "crash.example.test",
    "settings.crash.example.test",
    "data.flurry.example.test",
    "cfg.flurry.example.test",
    "stats.jpush.example.test",
    "api.jpush.example.test",
    "perf.monitor.example.test",
)
CRASH_HOST = "crash.example.test"

SMARTPET_FIRST_PARTY = ("api.petmaker.test", "update.petmaker.test")
SMARTPET_THIRD_PARTY = ("analytics.example.test", "crash.example.test",
                        "feeds.news.example.test", "assets.cdn.example.test")
NEWS_HOST = "feeds.news.example.test"

FITNESS_HOSTS = ("analytics.example.test", "crash.example.test", "data.flurry.example.test")

DEVICE_IP = "192.168.4.20"


def host_ip(host: str, profile: DeviceProfile) -> str:
    """Stable documentation-range address per host (first party vs others)."""
    net = "203.0.113" if classify_party(host, profile) is Party.FIRST_PARTY else "198.51.100"
    octet = zlib.crc32(host.encode()) % 250 + 2
    return f"{net}.{octet}"


def profile_for(name: str) -> DeviceProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; expected one of {', '.join(SCENARIOS)}") from None


SMARTPET_CONSTANTS_JAVA = """\
package com.petmaker.smartpet;

public final class Constants {
    public static final String APP_NAME = "pet";
    public static final int VERSION_CODE = 42;
    public static final boolean DEBUG = false;
    public static final String LOCALE = "en_US";
    public static final int MAX_PETS = 3;
    public static final String NOOK_ALLPACK_SERVICE_INAPP_SECRET = "7Fq2Lz9XkR4vB1nWc8Ty";
    public static final String NOOK_PACK_SERVICE_INAPP_SECRET = "Qm3Hs8Jd5Gp0Ve6Yb2Ku";
    public static final String FEED_PATH = "/rss";
}
"""
