"""``toyaudit`` command line.

Exit codes: 0 success, 1 findings/violations present (audit subcommands),
2 usage error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from toyaudit import ToyAuditError, __version__
from toyaudit.capture import DeviceProfile, cross_device_overlap, load_capture
from toyaudit.compliance import FORMATS, build_report, load_clause_catalog, render_report
from toyaudit.detect import findings_from_json, findings_to_json, run_passive
from toyaudit.fileio import write_atomic
from toyaudit.mine import (
    DEFAULT_ALPHABET,
    MinerConfig,
    TokenSpace,
    estimate_runtime,
    plan,
    run_attack,
)
from toyaudit.staticscan import load_rules, scan_secrets
from toyaudit.testbed import SCENARIOS, TestbedConfig, emulate_toy_session, load_config, serve
from toyaudit.testbed.probes import run_testbed_probes
from toyaudit.testbed.scenarios import PROFILES

log = logging.getLogger("toyaudit")

EXIT_OK, EXIT_FINDINGS, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3
LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


def _configure_logging():
    level_name = os.environ.get("TOYAUDIT_LOG", "").strip().lower()
    level = LOG_LEVELS.get(level_name, logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)


def _emit(text: str, out: str | None):
    if out:
        write_atomic(out, text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load_profile(spec: str) -> DeviceProfile:
    """A built-in scenario name or a profile JSON file."""
    if spec in PROFILES:
        return PROFILES[spec]
    path = Path(spec)
    if not path.is_file():
        raise UsageError(f"--profile {spec!r} is neither a scenario ({', '.join(SCENARIOS)}) nor a file")
    return DeviceProfile.from_dict(json.loads(path.read_text(encoding="utf-8")))


def _split_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


# -- subcommands --------------------------------------------------------------


def cmd_testbed_serve(args) -> int:
    config = load_config(args.config) if args.config else TestbedConfig()
    if args.listen:
        config = replace(config, listen_address=args.listen)
    handle = serve(config)
    print(f"testbed listening on {handle.url} (hardened={config.hardened})", flush=True)
    try:
        handle.wait()
    except KeyboardInterrupt:
        pass
    finally:
        handle.shutdown()
    return EXIT_OK


def _emulate_one(scenario: str, config: TestbedConfig, args, out_dir: Path):
    if scenario != "hydration":
        paths = emulate_toy_session(scenario, config, out_dir, seed=args.seed)
        print("\n".join(str(p) for p in paths))
        return

    def session(target):
        paths = emulate_toy_session(scenario, config, out_dir, target=target, seed=args.seed)
        print("\n".join(str(p) for p in paths))
        if not args.no_probes:
            active = run_testbed_probes(target, config, seed=args.seed,
                                        acknowledge_target=args.i_own_this_target)
            path = write_atomic(out_dir / f"{scenario}.active.json", findings_to_json(active) + "\n")
            print(path)

    if args.target:
        session(args.target)
    else:
        # private in-process testbed on a free loopback port
        local = replace(config, listen_address="127.0.0.1:0")
        with serve(local) as handle:
            session(handle.url)


def cmd_emulate(args) -> int:
    config = load_config(args.config) if args.config else TestbedConfig()
    if args.hardened:
        config = config.hardened_copy()
    out_dir = Path(args.out)
    for scenario in (SCENARIOS if args.scenario == "all" else (args.scenario,)):
        _emulate_one(scenario, config, args, out_dir)
    return EXIT_OK


def cmd_analyze(args) -> int:
    profile = _load_profile(args.profile)
    txns = load_capture(args.capture)
    catalog = load_clause_catalog(args.catalog)
    findings = run_passive(txns, profile)
    for extra in args.active_findings or []:
        findings += findings_from_json(Path(extra).read_text(encoding="utf-8"))
    report = build_report(args.device or profile.device_name, txns, profile, findings, catalog,
                          generated_at=args.generated_at)
    _emit(render_report(report, args.format).decode("utf-8"), args.out)
    log.info("%d findings, %d violations", len(report.findings), len(report.violations))
    return EXIT_FINDINGS if findings else EXIT_OK


def _miner_config(args) -> MinerConfig:
    try:
        space = TokenSpace(args.alphabet, args.prefix_len, args.suffix_len)
        return MinerConfig(
            target=args.target, space=space, workers=args.workers, seed=args.seed,
            suffix_budget=args.budget, target_fraction=args.fraction,
            request_delay=args.delay / 1000.0, known_planted_count=args.planted_count,
            acknowledge_target=args.i_own_this_target,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_mine(args) -> int:
    config = _miner_config(args)
    if args.dry_run:
        _emit(json.dumps(plan(config), indent=2, sort_keys=True), args.out)
        return EXIT_OK
    result = run_attack(config)
    _emit(result.to_json(), args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    est = estimate_runtime(args.probes, args.rtt / 1000.0, args.workers, args.fraction)
    seconds = f"{est.seconds:.1f}" if est.seconds < 1e9 else f"{est.seconds:.4g}"
    print(f"{seconds} s ({est.human})")
    return EXIT_OK


def cmd_scan(args) -> int:
    rules = load_rules(args.rules) if args.rules else None
    findings = scan_secrets(args.source, rules)
    _emit(findings_to_json(findings), args.out)
    return EXIT_FINDINGS if findings else EXIT_OK


def cmd_overlap(args) -> int:
    paths, profile_specs = _split_list(args.captures), _split_list(args.profiles)
    if len(paths) != len(profile_specs):
        raise UsageError("--captures and --profiles need the same number of entries")
    profiles = [_load_profile(p) for p in profile_specs]
    captures = [(prof.device_name, load_capture(path)) for prof, path in zip(profiles, paths)]
    overlap = cross_device_overlap(captures, profiles)
    _emit(json.dumps([o.to_dict() for o in overlap], indent=2, sort_keys=True), args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="toyaudit", description="Smart-toy security audit toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    tb = sub.add_parser("testbed", help="mock toy server")
    tb_sub = tb.add_subparsers(dest="testbed_command", required=True, parser_class=_Parser)
    s = tb_sub.add_parser("serve", help="run the testbed until interrupted")
    s.add_argument("--config", help="flat key=value config file")
    s.add_argument("--listen", help="override listen_address (host:port)")
    s.set_defaults(func=cmd_testbed_serve)

    e = sub.add_parser("emulate", help="record a scripted toy session")
    e.add_argument("--scenario", required=True, choices=(*SCENARIOS, "all"))
    e.add_argument("--out", required=True, help="output directory")
    e.add_argument("--target", help="running testbed URL (default: start a private one)")
    e.add_argument("--config", help="testbed config file")
    e.add_argument("--hardened", action="store_true", help="turn every vulnerability toggle off")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--no-probes", action="store_true", help="skip the active probe suite")
    e.add_argument("--i-own-this-target", action="store_true")
    e.set_defaults(func=cmd_emulate)

    a = sub.add_parser("analyze", help="detect vulnerabilities and map them to clauses")
    a.add_argument("--capture", required=True, help="PCAP or JSONL transaction log")
    a.add_argument("--profile", required=True, help="scenario name or profile JSON")
    a.add_argument("--catalog", help="clause catalog JSON (default: bundled)")
    a.add_argument("--out", help="report path (default: stdout)")
    a.add_argument("--format", choices=FORMATS, default="json")
    a.add_argument("--active-findings", action="append", metavar="F",
                   help="findings JSON from active probes to include (repeatable)")
    a.add_argument("--device", help="device name for the report")
    a.add_argument("--generated-at", help="pin the report timestamp")
    a.set_defaults(func=cmd_analyze)

    m = sub.add_parser("mine", help="profile-picture token mining")
    m.add_argument("--target", default="http://127.0.0.1:8080")
    m.add_argument("--alphabet", default=DEFAULT_ALPHABET)
    m.add_argument("--prefix-len", type=_positive_int, default=3)
    m.add_argument("--suffix-len", type=_positive_int, default=9)
    m.add_argument("--workers", type=_positive_int, default=1)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--budget", type=_positive_int, help="suffix probes per valid prefix")
    m.add_argument("--fraction", type=float, default=1.0)
    m.add_argument("--planted-count", type=_positive_int, help="known planted tokens (fraction mode)")
    m.add_argument("--delay", type=float, default=50.0, help="ms between requests, all workers")
    m.add_argument("--dry-run", action="store_true", help="print the probe plan only")
    m.add_argument("--out")
    m.add_argument("--i-own-this-target", action="store_true")
    m.set_defaults(func=cmd_mine)

    es = sub.add_parser("estimate", help="attack runtime estimate")
    es.add_argument("--probes", type=int, required=True)
    es.add_argument("--rtt", type=float, required=True, help="round-trip time in ms")
    es.add_argument("--workers", type=_positive_int, default=1)
    es.add_argument("--fraction", type=float, default=1.0)
    es.set_defaults(func=cmd_estimate)

    sc = sub.add_parser("scan", help="find plaintext secret constants")
    sc.add_argument("--source", required=True)
    sc.add_argument("--rules", help="flat config rules file")
    sc.add_argument("--out")
    sc.set_defaults(func=cmd_scan)

    o = sub.add_parser("overlap", help="third-party services shared across devices")
    o.add_argument("--captures", required=True, help="comma-separated capture files")
    o.add_argument("--profiles", required=True, help="comma-separated profiles, same order")
    o.add_argument("--out")
    o.set_defaults(func=cmd_overlap)
    return p


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except (ToyAuditError, OSError, ValueError) as exc:
        log.debug("command failed", exc_info=True)
        print(f"toyaudit: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
