"""Command line front end: ``lab run`` and ``lab selftest``."""
import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from .acceptance import SuiteConfig, flip_dissipator_sign, run_suite
from .scenarios import ConfigError, parse_config, run_scenario, tolerance_scale

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAIL = 2

MUTATIONS = {"sign-flip-G": flip_dissipator_sign}


def _dump(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def run(config_path, out_dir, seed=None, jobs=1):
    """Run every scenario in a config file and write the reports.

    :return: process exit code (0 ok, 1 config error, 2 a check failed)
    """
    try:
        with open(config_path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        scenarios = parse_config(text, seed_override=seed, tol_scale=tolerance_scale())
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    single = len(scenarios) == 1

    def work(cfg):
        t0 = time.perf_counter()
        name = "series.csv" if single else f"series-{cfg.name}.csv"
        try:
            report, failed = run_scenario(cfg, out_dir, name)
        except ConfigError as exc:
            return None, str(exc), time.perf_counter() - t0
        except Exception as exc:  # numerical failure inside a pipeline is a FAIL, not a crash
            report = {"scenario": cfg.raw, "name": cfg.name, "kind": cfg.kind, "status": "FAIL",
                      "checks": [{"name": "pipeline", "status": "FAIL",
                                  "note": f"{type(exc).__name__}: {exc}"}]}
            failed = True
        return (report, failed), None, time.perf_counter() - t0

    if jobs > 1 and not single:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            outcomes = list(ex.map(work, scenarios))
    else:
        outcomes = [work(cfg) for cfg in scenarios]

    for outcome, err, _ in outcomes:
        if err is not None:
            print(f"config error: {err}", file=sys.stderr)
            return EXIT_CONFIG
    reports = [o[0][0] for o in outcomes]
    any_fail = any(o[0][1] for o in outcomes)
    if single:
        _dump(os.path.join(out_dir, "report.json"), reports[0])
    else:
        _dump(os.path.join(out_dir, "report.json"),
              {"scenarios": reports, "status": "FAIL" if any_fail else "PASS"})
    # wall-clock timing lives apart from the report so the report is byte-reproducible
    _dump(os.path.join(out_dir, "timing.json"),
          {cfg.name: round(o[2], 6) for cfg, o in zip(scenarios, outcomes)})
    for rep in reports:
        for chk in rep.get("checks", []):
            if chk["status"] != "PASS":
                print(f"{rep['name']}: {chk['status']} {chk['name']} {chk.get('note', '')}".rstrip())
        print(f"{rep['name']}: {rep['status']}")
    return EXIT_FAIL if any_fail else EXIT_OK


def selftest(dims=(2, 3, 4), seed=12345, mutate=None, paths=20000):
    """Run the acceptance suite and print one line per criterion."""
    try:
        scale = tolerance_scale()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cfg = SuiteConfig(dims=tuple(dims), seed=seed, tol_scale=scale,
                      corrupt=MUTATIONS[mutate] if mutate else None, mc_paths=paths)
    t0 = time.perf_counter()

    def timing(number, seconds):
        print(f"criterion {number:2d} took {seconds:.1f}s", file=sys.stderr)

    results = run_suite(cfg, timing=timing)
    n_ok = sum(r.passed for r in results)
    # stdout stays byte-identical across reruns; wall-clock time goes to stderr
    print(f"{n_ok}/{len(results)} criteria passed")
    print(f"total {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return EXIT_OK if n_ok == len(results) else EXIT_FAIL


def build_parser():
    p = argparse.ArgumentParser(prog="lab", description="Lindblad generator laboratory")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the scenarios of a JSON config")
    r.add_argument("--config", required=True, help="path to the JSON scenario config")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--seed", type=int, default=None, help="override the seed of every scenario")
    r.add_argument("--jobs", type=int, default=1, help="run independent scenarios in parallel")
    s = sub.add_parser("selftest", help="run the acceptance suite")
    s.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4], help="dimensions to exercise")
    s.add_argument("--seed", type=int, default=12345)
    s.add_argument("--paths", type=int, default=20000, help="Monte Carlo paths for the stochastic check")
    s.add_argument("--mutate", choices=sorted(MUTATIONS), default=None,
                   help="corrupt the generators to confirm the suite detects it")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "run":
        if args.jobs < 1:
            print("error: --jobs must be at least 1", file=sys.stderr)
            return EXIT_CONFIG
        if args.seed is not None and args.seed < 0:
            print("error: --seed must be nonnegative", file=sys.stderr)
            return EXIT_CONFIG
        return run(args.config, args.out, seed=args.seed, jobs=args.jobs)
    return selftest(dims=args.dims, seed=args.seed, mutate=args.mutate, paths=args.paths)


if __name__ == "__main__":
    sys.exit(main())
