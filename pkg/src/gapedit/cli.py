"""
``gap-edit`` command line.

Exit codes: 0 CLOSE (or success), 1 FAR, 2 error. Every output file is
written to a temporary name and renamed into place. Only the seed
(``GAPEDIT_SEED``) and the thread count (``GAPEDIT_THREADS``) may come from
the environment; everything else is a flag.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

EXIT_CLOSE = 0
EXIT_FAR = 1
EXIT_ERROR = 2


class CliError(Exception):
    pass


def _apply_thread_env():
    threads = os.environ.get("GAPEDIT_THREADS")
    if threads:
        os.environ.setdefault("NUMBA_NUM_THREADS", threads)


def _write_atomic(path: str, data: bytes):
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)


def _emit(obj, fmt: str, out: str | None = None, csv_rows=None):
    if fmt == "csv":
        from .bench import to_csv
        text = to_csv(csv_rows) if csv_rows is not None else _flat_csv(obj)
    else:
        text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"
    if out:
        _write_atomic(out, text.encode())
    else:
        sys.stdout.write(text)


def _json_default(o):
    import numpy as np
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, bytes):
        return o.hex()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _flat_csv(obj: dict) -> str:
    flat = {}

    def walk(prefix, v):
        if isinstance(v, dict):
            for k2, v2 in v.items():
                walk(f"{prefix}{k2}.", v2)
        elif not isinstance(v, list):
            flat[prefix[:-1]] = v
    walk("", obj)
    keys = sorted(flat)
    return ",".join(keys) + "\n" + ",".join("" if flat[k] is None else str(flat[k]) for k in keys) + "\n"


def _read_text(path: str, alphabet: str):
    from .strings import Text
    with open(path, "rb") as f:
        raw = f.read()
    if alphabet == "unicode":
        return Text.from_str(raw.decode("utf-8"))
    return Text.from_bytes(raw)


def _is_index(path: str) -> bool:
    from .index_io import MAGIC
    with open(path, "rb") as f:
        return f.read(len(MAGIC)) == MAGIC


def _seed(args):
    if args.seed is not None:
        return args.seed
    return os.environ.get("GAPEDIT_SEED", "0")


def _seed_value(s):
    return int(s) if isinstance(s, str) and s.isdigit() else s


def _config(args):
    from . import config as C
    consts = {}
    if getattr(args, "constants", None):
        with open(args.constants) as f:
            data = json.load(f)
        consts = {k: data[k] for k in ("kappa", "c1", "c2", "c_h", "c_lambda") if k in data}
    kw = dict(k=args.k, seed=_seed_value(_seed(args)), branching=args.branching,
              c_lambda=args.lambda_const if args.lambda_const is not None
              else consts.get("c_lambda", C.C_LAMBDA),
              kappa=args.kappa if args.kappa is not None else consts.get("kappa", C.KAPPA),
              c1=consts.get("c1", C.C1), c2=consts.get("c2", C.C2), c_h=consts.get("c_h", C.C_H),
              reps=args.reps, budget=args.budget, alphabet=args.alphabet, pad_to=args.pad_to)
    return C.GapConfig(**kw)


# -- commands --------------------------------------------------------------------

def cmd_preprocess(args) -> int:
    from . import index_io
    from .index import SIDE_X, preprocess_x, preprocess_y
    cfg = _config(args)
    text = _read_text(args.input, args.alphabet)
    if args.k > max(len(text), 1):
        raise CliError(f"k={args.k} exceeds the input length {len(text)}")
    t0 = time.perf_counter()
    if args.side == SIDE_X:
        idx = preprocess_x(text, cfg)
        summary = dict(side="X", n=idx.n, n_padded=idx.config.n_padded, reps=len(idx.fingerprints),
                       fingerprints=int(sum(f.size for f in idx.fingerprints)))
    else:
        idx = preprocess_y(text, cfg, materialize=args.materialize, side=args.side)
        summary = idx.summary()
        summary["side"] = args.side
    seconds = time.perf_counter() - t0
    nbytes = index_io.save(idx, args.out)
    summary.update(seconds=seconds, bytes=nbytes, out=args.out, config=idx.config.to_dict())
    _emit(summary, args.format)
    return 0


def cmd_query(args) -> int:
    from . import index_io
    from .index import SIDE_X, XIndex, YIndex, gap_query
    y_index = index_io.load(args.y_index)
    if not isinstance(y_index, YIndex):
        raise CliError(f"{args.y_index} is an X-side index; the second argument must index Y")
    if _is_index(args.x):
        x = index_io.load(args.x)
        if isinstance(x, YIndex):
            x = x.as_x_index()
        mode = "two-sided"
    else:
        x = _read_text(args.x, y_index.config.alphabet)
        mode = "one-sided"
    budget = -1 if args.budget is None else args.budget
    verdict, stats, per = gap_query(x, y_index, early_stop=not args.no_early_stop,
                                    reps=args.reps, budget=budget)
    report = dict(mode=mode, verdict=verdict.to_dict(), stats=stats.to_dict(),
                  per_repetition=[s.to_dict() for s in per] if args.per_rep else None)
    _emit(report, args.format, args.out)
    return EXIT_CLOSE if verdict.close else EXIT_FAR


def cmd_generate(args) -> int:
    from .instances import InstanceSpec, generate, save_instance
    spec = InstanceSpec(args.kind, args.n, args.sigma, int(_seed_value(_seed(args))), args.d,
                        args.period, args.block)
    inst = generate(spec)
    man = save_instance(inst, args.out)
    _emit(man, args.format)
    return 0


def _int_list(s: str):
    return tuple(int(v) for v in s.split(",") if v)


def cmd_calibrate(args) -> int:
    from .calibrate import calibrate
    if args.trials < 100:
        raise CliError(f"calibrate needs at least 100 trials per cell, got {args.trials}")
    seed = int(_seed_value(_seed(args)))
    res = calibrate(ns=_int_list(args.n), ks=_int_list(args.ks), trials=args.trials, seed=seed,
                    recover_trials=args.recover_trials, precision_trees=args.precision_trees,
                    reps=args.reps)
    _emit(res, "json", args.out)
    if not args.out:
        return 0 if res["recover_passed"] else EXIT_ERROR
    sys.stdout.write(json.dumps(dict(kappa=res["kappa"], c1=res["c1"], c2=res["c2"],
                                     C_eff=res["C_eff"], out=args.out)) + "\n")
    return 0 if res["recover_passed"] else EXIT_ERROR


def cmd_bench(args) -> int:
    from .bench import run_suite, summarize, to_csv
    seed = int(_seed_value(_seed(args)))
    kw = {}
    if args.trials is not None:
        kw["trials"] = args.trials
    rows = run_suite(args.suite, seed=seed, **kw)
    summary = summarize(rows)
    if args.out:
        _write_atomic(args.out + ".csv", to_csv(rows).encode())
        _write_atomic(args.out + ".json", json.dumps(summary, indent=2, default=_json_default).encode())
    if args.format == "csv":
        sys.stdout.write(to_csv(rows))
    else:
        sys.stdout.write(json.dumps(summary, indent=2, default=_json_default) + "\n")
    return 0


def cmd_selftest(args) -> int:
    import numpy as np
    from . import index_io
    from .config import GapConfig
    from .index import SIDE_BOTH, gap_query, preprocess_x, preprocess_y
    from .strings import edit_distance, edit_distance_banded, edit_distance_fast
    rng = np.random.default_rng(0)
    checks = {}
    ok = True
    for _ in range(50):
        a = rng.integers(0, 4, rng.integers(0, 40))
        b = rng.integers(0, 4, rng.integers(0, 40))
        e = edit_distance(a, b)
        ok &= e == edit_distance_fast(a, b)
        bd = edit_distance_banded(a, b, 5)
        ok &= (bd == e) if e <= 5 else bd is None
    checks["oracles"] = bool(ok)
    y = rng.integers(0, 4, 256)
    # a small kappa keeps 4 theta below n so a random pair can be far
    cfg = GapConfig(k=4, seed=1, kappa=8.0)
    yi = preprocess_y(y, cfg, side=SIDE_BOTH)
    v, st, _ = gap_query(y, yi)
    checks["identical_close"] = v.close
    xi = preprocess_x(y, cfg)
    v2, st2, _ = gap_query(xi, yi)
    checks["two_sided_zero_reads"] = v2.close and st2.x_reads == 0 and st2.y_reads == 0
    blob = index_io.dumps(yi)
    checks["round_trip"] = index_io.dumps(index_io.loads(blob)) == blob
    far = rng.integers(0, 256, 256)
    checks["random_far"] = not gap_query(far, yi)[0].close
    passed = all(checks.values())
    _emit(dict(passed=passed, checks=checks), args.format)
    return 0 if passed else EXIT_ERROR


# -- parser ------------------------------------------------------------------------

def _add_config_flags(p):
    p.add_argument("--k", type=int, required=True, help="closeness bound")
    p.add_argument("--seed", default=None, help="master seed (int or hex); env GAPEDIT_SEED")
    p.add_argument("--branching", type=int, default=None, help="tree arity override")
    p.add_argument("--lambda-const", type=float, default=None, help="c_lambda in lambda = c ln n")
    p.add_argument("--kappa", type=float, default=None, help="threshold factor")
    p.add_argument("--budget", type=int, default=None,
                   help="per-repetition operation budget (0 disables)")
    p.add_argument("--reps", type=int, default=None, help="number of repetitions")
    p.add_argument("--pad-to", type=int, default=None, help="length the tree is sized for")
    p.add_argument("--alphabet", choices=("bytes", "unicode"), default="bytes")
    p.add_argument("--constants", default=None, help="calibration JSON to take constants from")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gap-edit", description="Gap edit distance decisions.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="build an index for X, Y or both")
    p.add_argument("input")
    p.add_argument("--side", choices=("X", "Y", "BOTH"), default="Y")
    p.add_argument("--materialize", action="store_true",
                   help="fill the shifted-distance table now (implied by BOTH)")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_config_flags(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("query", help="decide a pair; exit 0 CLOSE, 1 FAR, 2 error")
    p.add_argument("x", help="raw X file or X index (side X or BOTH)")
    p.add_argument("y_index", help="index of Y (side Y or BOTH)")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--no-early-stop", action="store_true")
    p.add_argument("--per-rep", action="store_true", help="include per-repetition counters")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("generate", help="write an instance pair and its manifest")
    p.add_argument("--kind", choices=("random", "planted", "periodic", "adversarial-boundary"),
                   default="planted")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma", type=int, default=4)
    p.add_argument("--d", type=int, default=0)
    p.add_argument("--period", type=int, default=7)
    p.add_argument("--block", type=int, default=None)
    p.add_argument("--seed", default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("calibrate", help="measure kappa, Recover constants and C_eff")
    p.add_argument("--n", default="1024,4096", help="comma-separated lengths")
    p.add_argument("--ks", "--k", dest="ks", default="4,16,64", help="comma-separated k values")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--recover-trials", type=int, default=10_000)
    p.add_argument("--precision-trees", type=int, default=2_000)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--seed", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("--suite", choices=("smoke", "gap", "sweep", "two-sided"), default="smoke")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", default=None)
    p.add_argument("--out", default=None, help="prefix for .csv and .json reports")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selftest", help="quick end-to-end checks")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    _apply_thread_env()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else 0
    try:
        return args.func(args)
    except (CliError, ValueError, OSError, KeyError) as e:
        sys.stderr.write(f"gap-edit: error: {e}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
