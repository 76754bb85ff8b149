"""Command-line entry point: ``bclab <command> [options]``.

Exit codes: 0 completed (``report``: every audit passed), 1 library error
or (``report``) a failed audit, 2 invalid config, missing manifest or
nothing to report. Errors are written to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import experiments as ex
from .errors import ConfigError, LabError, RangeError


def _error(exc, status):
    payload = {"error": getattr(exc, "code", "error"), "message": str(exc)}
    if isinstance(exc, RangeError) and exc.largest_feasible is not None:
        payload["largest_feasible"] = exc.largest_feasible
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return status


def _parse_set(items):
    out = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _run_args(p):
    p.add_argument("--config", type=Path, help="JSON config file")
    p.add_argument("--preset", help="named preset (c1 .. c13)")
    p.add_argument("--out", type=Path, help="output directory (default $BCLAB_OUT/<label> or ./bclab-out/<label>)")
    p.add_argument("--seed", type=int, help="override the seed parameter")
    p.add_argument("--workers", type=int, default=1, help="process-pool size (does not change outputs)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a parameter (dotted keys)")
    p.add_argument("--dry-run", action="store_true", help="validate and print the full config, then exit")


def build_parser():
    parser = argparse.ArgumentParser(prog="bclab", description="Bernoulli convolution linear-response laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    _run_args(sub.add_parser("run", help="run a config file or preset"))
    for name in ex.SCHEMAS:
        _run_args(sub.add_parser(name, help=f"run {name}"))
    rep = sub.add_parser("report", help="merge audit verdicts from manifests")
    rep.add_argument("manifests", nargs="*", type=Path, help="manifest.json files or run directories")
    rep.add_argument("--out", type=Path, help="write report.json and report.csv here")
    sub.add_parser("presets", help="list presets")
    return parser


def _resolve_config(args):
    if args.config and args.preset:
        raise ConfigError("give --config or --preset, not both")
    if args.config:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = ex.ExperimentConfig.parse(text)
        label = args.config.stem
    elif args.preset:
        cfg = ex.ExperimentConfig.preset(args.preset)
        label = args.preset
    elif args.command != "run":
        cfg = ex.ExperimentConfig.default(args.command)
        label = args.command
    else:
        raise ConfigError("run needs --config or --preset")
    if args.command != "run" and cfg.command != args.command:
        raise ConfigError(f"config is for {cfg.command!r}, not {args.command!r}")
    overrides = _parse_set(args.set)
    if args.seed is not None:
        if "seed" not in ex.SCHEMAS[cfg.command]:
            raise ConfigError(f"{cfg.command} takes no seed")
        if args.seed < 0 or args.seed >= 1 << 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        overrides["seed"] = args.seed
    if overrides:
        cfg = cfg.with_overrides(overrides)
    return cfg, label


def _cmd_run(args):
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg, label = _resolve_config(args)
    except ConfigError as exc:
        return _error(exc, 2)
    if args.dry_run:
        sys.stdout.write(cfg.to_json())
        return 0
    out = args.out or ex.default_out_dir(label)
    try:
        manifest = ex.run(cfg, out, args.workers, label)
    except ConfigError as exc:
        return _error(exc, 2)
    except LabError as exc:
        return _error(exc, 1)
    for a in manifest["audits"]:
        print(f"{'PASS' if a['passed'] else 'FAIL'}  {a['name']}  value={a['value']!r}  bound={a['bound']!r}")
    print(f"wrote {len(manifest['outputs'])} table(s) and manifest.json to {out}")
    return 0


def _cmd_report(args):
    try:
        rows, ok = ex.report(args.manifests)
    except (ex.NothingToReport, ex.MissingManifest) as exc:
        return _error(exc, 2)
    width = max(len(r["audit"]) for r in rows)
    for r in rows:
        mark = "PASS" if r["passed"] else "FAIL"
        flag = "  <-- FAILED" if not r["passed"] else ""
        print(f"{mark}  {r['label']:<16} {r['audit']:<{width}}  value={r['value']!r}  bound={r['bound']!r}{flag}")
    n_fail = sum(not r["passed"] for r in rows)
    print(f"{len(rows) - n_fail}/{len(rows)} audits passed")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "report.json").write_text(json.dumps({"passed": ok, "rows": rows}, indent=2, sort_keys=True)
                                              + "\n")
        cols = ["manifest", "label", "command", "audit", "passed", "flag", "value", "bound"]
        with open(args.out / "report.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in rows:
                w.writerow([json.dumps(r[c]) if c in ("value", "bound") else ex._cell(r[c]) for c in cols])
    return 0 if ok else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        for name, (command, _, text) in ex.PRESETS.items():
            print(f"{name:<4} {command:<15} {text}")
        return 0
    if args.command == "report":
        return _cmd_report(args)
    return _cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
