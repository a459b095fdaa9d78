"""Command line: gen, run, sweep, verify, report.

Exit codes: 0 success, 2 usage error, 3 abnormal booster termination,
4 invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import glob
import os
import sys
from collections import defaultdict

from ..dataset import draw_sample, write_sample
from ..errors import ConfigurationError, DomainError
from .config import config_keys, load_config
from .runner import EXIT_INVARIANT, EXIT_OK, EXIT_USAGE, RESULT_COLUMNS, run_experiment
from .sweep import sweep, write_sweep
from .verify import SUITES, verify


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value configuration file")
    for key in config_keys():
        p.add_argument(f"--{key}", dest=f"key_{key}", metavar="VALUE", help=argparse.SUPPRESS)


def _config_from(args):
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("key_") and v is not None}
    return load_config(args.config, overrides)


def cmd_gen(args) -> int:
    cfg = _config_from(args)
    m, planned = cfg.resolved_m()
    task = cfg.make_task()
    os.makedirs(cfg.output, exist_ok=True)
    for seed in cfg.seeds:
        path = os.path.join(cfg.output, f"{cfg.task}_m{m}_seed{seed}.csv")
        write_sample(draw_sample(task, m, seed), path)
        print(path)
    return EXIT_OK


def cmd_run(args) -> int:
    return run_experiment(_config_from(args))


def cmd_sweep(args) -> int:
    cfg = _config_from(args)
    result = sweep(cfg)
    for path in write_sweep(result, cfg.output):
        print(path)
    for ax, fit in result.fits.items():
        print(f"{ax} exponent {fit.exponent:.4f} (95% CI {fit.ci_low:.4f} .. {fit.ci_high:.4f}, "
              f"{fit.points} points)")
    return EXIT_OK


def cmd_verify(args) -> int:
    verdicts = verify(args.suite)
    failed = sum(not v.ok for v in verdicts)
    print(f"{args.suite}: {len(verdicts) - failed}/{len(verdicts)} properties hold")
    return EXIT_INVARIANT if failed else EXIT_OK


def summarize(rows: list[dict]) -> list[dict]:
    groups = defaultdict(list)
    for r in rows:
        groups[(r["booster"], r["backend"], int(r["m"]), r["gamma"], r["epsilon"])].append(r)
    out = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], float(k[3]), float(k[4]))):
        g = groups[key]
        held = [float(r["heldout_error"]) for r in g if r["heldout_error"] != ""]
        out.append({
            "booster": key[0], "backend": key[1], "m": key[2], "gamma": key[3], "epsilon": key[4],
            "runs": len(g),
            "terminated": sum(r["status"] == "terminated" for r in g),
            "mean_T": sum(int(r["T"]) for r in g) / len(g),
            "mean_empirical_error": sum(float(r["empirical_error"]) for r in g) / len(g),
            "mean_heldout_error": sum(held) / len(held) if held else float("nan"),
            "mean_oracle_queries": sum(int(r["oracle_queries"]) for r in g) / len(g),
        })
    return out


def read_result_rows(directory: str) -> list[dict]:
    rows = []
    for path in sorted(glob.glob(os.path.join(directory, "*.csv"))):
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
                continue
            rows.extend(reader)
    return rows


def cmd_report(args) -> int:
    if not os.path.isdir(args.directory):
        raise ConfigurationError(f"directory: no such directory {args.directory!r}")
    summary = summarize(read_result_rows(args.directory))
    if not summary:
        raise ConfigurationError(f"directory: no result CSVs in {args.directory!r}")
    cols = list(summary[0])
    text = [",".join(cols)] + [",".join(f"{r[c]:.6g}" if isinstance(r[c], float) else str(r[c])
                                        for c in cols) for r in summary]
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("\n".join(text) + "\n")
    widths = [max(len(line.split(",")[i]) for line in text) for i in range(len(cols))]
    for line in text:
        print("  ".join(v.rjust(w) for v, w in zip(line.split(","), widths)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qsmoothboost", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (("gen", cmd_gen, "write synthetic datasets"),
                            ("run", cmd_run, "run one booster for each seed"),
                            ("sweep", cmd_sweep, "grid sweep with scaling fits")):
        sp = sub.add_parser(name, help=help_,
                            epilog="every configuration key is also a flag: --gamma 0.25 --m 128 ...")
        _add_config_flags(sp)
        sp.set_defaults(fn=fn)
    sp = sub.add_parser("verify", help="run an invariant suite")
    sp.add_argument("suite", help=f"one of {', '.join(SUITES)}")
    sp.set_defaults(fn=cmd_verify)
    sp = sub.add_parser("report", help="aggregate result CSVs into a summary table")
    sp.add_argument("directory")
    sp.add_argument("--out", help="also write the summary as CSV")
    sp.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except (ConfigurationError, DomainError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
