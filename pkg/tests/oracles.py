"""Expected values, fixed before the implementation was exercised.

Each constant notes where its value comes from (arithmetic, scenario design,
or a rule applied by hand).
"""

# token geometry: 36-symbol alphabet, 3 + 9 characters
DEFAULT_PREFIX_PROBES = 36 ** 3            # 46,656
DEFAULT_SUFFIX_COUNT = 36 ** 9
DEFAULT_TOKEN_COUNT = 36 ** 12

# estimator arithmetic
SWEEP_SECONDS_AT_200MS = 46_656 * 0.2      # 9,331.2 s
SWEEP_CLI_LINE_PREFIX = "9331.2 s"
FULL_SUFFIX_YEARS_LOWER_BOUND = 1e5
SECONDS_PER_YEAR = 365.25 * 86_400

# reduced geometry used for mining completeness
SMALL_ALPHABET = "0123456789ABCDEF"
SMALL_PREFIX_LEN = 2
SMALL_SUFFIX_LEN = 2
SMALL_PLANTED = 5
SMALL_PROBE_CEILING = 16 ** 2 + 5 * 16 ** 2   # 1,536

# distinct hosts per emulated scenario
SCENARIO_HOSTS = {"hydration": 12, "smartpet": 6, "fitness": 3}

# passive detectors expected to fire on the vulnerable hydration capture
HYDRATION_PASSIVE = {"D_CLEARTEXT", "D_PII_EXPOSURE", "D_TOKEN_REUSE", "D_NO_AUTH", "D_PII_THIRD_PARTY"}
HYDRATION_ACTIVE = {"D_ORACLE", "D_STALE_RESOURCE"}
HYDRATION_CLEARTEXT_HOSTS = {"api.toymaker.test", "static.toymaker.test", "www.toymaker.test"}
HYDRATION_ACCOUNT_PII = ["age", "birthday", "gender", "height", "name", "weight"]
HYDRATION_CRASH_PII = ["birthday", "gender", "name", "weight"]
HYDRATION_DRINK_POSTS = 3
HYDRATION_DRINK_SPAN_S = 600

# compliance
HYDRATION_VIOLATIONS = ["COPPA-312.8", "COPPA-312.10", "PP-SSL", "PP-SECURED-NET"]
DEFAULT_CATALOG_SIZE = 4
SSL_QUOTE = "encrypted via Secure Socket Layer (SSL)"

# static scan
NOOK_CONSTANTS = ["NOOK_ALLPACK_SERVICE_INAPP_SECRET", "NOOK_PACK_SERVICE_INAPP_SECRET"]
NOOK_FILE = "smartpet_src/com/petmaker/smartpet/Constants.java"
NOOK_LINES = [9, 10]

# entropy by hand
ENTROPY_CASES = {"AAAA": 0.0, "AB": 1.0, "0123456789ABCDEF": 4.0, "AABB": 1.0, "AAAB": 0.8112781244591328}

# hydration goal: weight * 35 clamped to [400, 4000], half-up to 10 ml
GOAL_CASES = [
    ((9, 30.0, 130.0), 1050),
    ((9, 5.0, 80.0), 400),
    ((15, 200.0, 180.0), 4000),
    ((9, 30.1, 130.0), 1050),   # 1053.5 -> 1050
    ((9, 30.3, 130.0), 1060),   # 1060.5 -> 1060
    ((9, 30.43, 130.0), 1070),  # 1065.05 -> 1070
]

# services every device contacts
SHARED_SERVICES = {"google-analytics", "crashlytics"}
