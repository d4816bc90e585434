"""Command-line front end.

    hypfed synth        write a synthetic dataset (CSV + JSON sidecar)
    hypfed run          run the federated and centralized baselines, JSONL out
    hypfed sweep        one experiment per value of epsilon, mu or gamma, CSV out
    hypfed hull-stats   hull complexity against sample size
    hypfed inspect-share  decode a recorded message transcript

Exit codes: 0 ok, 1 internal error, 2 bad input. The seed comes from
--seed, then the config file, then $HYPFED_SEED, then 0.
"""
import argparse
import csv
import json
import math
import os
from pathlib import Path
import sys

import numpy as np
from scipy import stats

from . import federation as fed
from .codes import aggregate, bh_decompose, scma_decode, share_from_bytes
from .data import SynthSpec, save_dataset, synth_generate
from .errors import HypfedError
from .hull import graham_scan
from .quantize import build_grid, epsilon_minimal_hull, uniform_sample

SEED_ENV = "HYPFED_SEED"
SWEEP_COLUMNS = ["param", "baseline", "trial", "accuracy", "avg_hull", "max_hull", "bits"]


class UsageError(Exception):
    """Bad flags, missing files, unreadable input: exit code 2."""


# ---------------------------------------------------------------------------
# helpers


def _env_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _seed(flag, fallback=0):
    if flag is not None:
        return flag
    env = _env_seed()
    return fallback if env is None else env


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(float(v)) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _need_file(path, what):
    if path is not None and not Path(path).is_file():
        raise UsageError(f"{what} not found: {path}")


def _h_value(text):
    return text if text == "auto" else int(text)


# flags shared by run and sweep, mapped onto RunConfig fields
CONFIG_FLAGS = {
    "L": ("--L", int), "J": ("--J", int), "epsilon": ("--epsilon", float),
    "lam": ("--lambda", float), "h": ("--h", _h_value), "N": ("--n", int),
    "R": ("--R", float), "k": ("--k", float), "mu": ("--mu", float),
    "gamma": ("--gamma", float), "train_frac": ("--train-frac", float),
    "trials": ("--trials", int), "data": ("--data", str),
}


def _add_config_flags(p):
    p.add_argument("--config", help="RunConfig JSON; flags override its values")
    for name, (flag, typ) in CONFIG_FLAGS.items():
        p.add_argument(flag, dest=name, type=typ, default=None)
    p.add_argument("--baselines", help="comma-separated subset of " + ",".join(fed.BASELINES))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for trials")


def effective_config(args):
    """defaults < config file < flags; the seed also looks at $HYPFED_SEED."""
    _need_file(args.config, "config file")
    base = fed.RunConfig.load(args.config).to_dict() if args.config else fed.RunConfig().to_dict()
    from_file = set(json.loads(Path(args.config).read_text())) if args.config else set()
    if "lambda" in base:
        base["lam"] = base.pop("lambda")
    for name in CONFIG_FLAGS:
        v = getattr(args, name, None)
        if v is not None:
            base[name] = v
    if args.baselines:
        base["baselines"] = [b.strip() for b in args.baselines.split(",") if b.strip()]
    if args.seed is not None:
        base["seed"] = args.seed
    elif "seed" not in from_file and _env_seed() is not None:
        base["seed"] = _env_seed()
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    cfg = fed.RunConfig.from_dict(base)
    _need_file(cfg.data, "dataset")
    return cfg


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline=""), True


def _fmt(v, spec=".4f"):
    return "-" if v is None else format(v, spec)


def summary_table(summary):
    rows = [("baseline", "n", "failed", "accuracy", "ci95", "avg_hull", "bits")]
    for b, e in summary["baselines"].items():
        rows.append((b, str(e["n"]), str(e["failed"]), _fmt(e["mean"]), _fmt(e["ci95"]),
                     _fmt(e["avg_hull"], ".1f"), _fmt(e["bits"], ".0f")))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
             for r in rows]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# commands


def cmd_synth(args):
    spec = SynthSpec(args.n, args.R, args.k, args.mu, args.gamma, _seed(args.seed))
    ds = synth_generate(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(out, ds)
    counts = ds.class_counts()
    print(f"wrote {len(ds)} points to {out}")
    for lab, c in counts.items():
        print(f"  label {lab:+d}: {c}")
    return 0


def cmd_run(args):
    cfg = effective_config(args)
    records = fed.run_experiment(cfg, jobs=args.jobs)
    fh, close = _open_out(args.out)
    try:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    finally:
        if close:
            fh.close()
    table = summary_table(records[-1])
    print(table, file=sys.stderr if fh is sys.stdout else sys.stdout)
    if args.transcript:
        fed.record_transcript(cfg, args.transcript)
    return 0


def sweep_rows(param, value, records):
    rows = []
    for r in records:
        if r["record"] != "trial":
            continue
        for b, m in r["baselines"].items():
            if m["status"] != "ok":
                rows.append([value, b, r["trial"], "failed", "", "", ""])
                continue
            rows.append([value, b, r["trial"], m["accuracy"],
                         "" if m["avg_hull"] is None else m["avg_hull"],
                         "" if m["max_hull"] is None else m["max_hull"],
                         "" if m["bits"] is None else m["bits"]])
    return rows


def cmd_sweep(args):
    cfg = effective_config(args)
    if args.param in ("mu", "gamma") and cfg.data is not None:
        raise UsageError(f"--param {args.param} changes the synthetic data; drop --data")
    values = _floats(args.values)
    if not values:
        raise UsageError("--values is empty")
    fh, close = _open_out(args.out)
    try:
        wr = csv.writer(fh)
        wr.writerow(SWEEP_COLUMNS)
        for v in values:
            try:
                cell = fed.RunConfig.from_dict({**cfg.to_dict(), args.param: v})
                records = fed.run_experiment(cell, jobs=args.jobs)
            except HypfedError as exc:
                print(f"{args.param}={v}: failed ({exc})", file=sys.stderr)
                for b in cfg.baselines:
                    wr.writerow([v, b, "", "failed", "", "", ""])
                continue
            wr.writerows(sweep_rows(args.param, v, records))
            fh.flush()
            s = records[-1]["baselines"]
            print(f"{args.param}={v}: " + "  ".join(f"{b} {_fmt(e['mean'])}" for b, e in s.items()),
                  file=sys.stderr)
    finally:
        if close:
            fh.close()
    return 0


def hull_complexity(ns, trials, R=0.95, k=1.0, seed=0, quantized=False):
    """Hull sizes per (N, trial) and the log-log slope with a 95% CI."""
    rng = np.random.default_rng(seed)
    table = []
    for n in ns:
        sizes = []
        for _ in range(trials):
            X = uniform_sample(n, R, k, rng)
            if quantized:
                hull = epsilon_minimal_hull(X, build_grid(n ** -0.3, R, k), k)
            else:
                hull = graham_scan(X, k)
            sizes.append(len(hull))
        table.append((n, sizes))
    x = np.concatenate([np.full(len(s), math.log(n)) for n, s in table])
    y = np.concatenate([np.log(s) for _, s in table])
    slope = ci = None
    if len(set(ns)) > 1:
        fit = stats.linregress(x, y)
        slope = float(fit.slope)
        ci = float(stats.t.ppf(0.975, len(x) - 2) * fit.stderr)
    return table, slope, ci


def cmd_hull_stats(args):
    ns = _ints(args.n)
    if not ns or min(ns) < 1:
        raise UsageError("--n needs positive sample sizes")
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    table, slope, ci = hull_complexity(ns, args.trials, args.R, args.k, _seed(args.seed),
                                       args.quantized)
    print(f"{'N':>10}  {'mean':>9}  {'sd':>8}  {'min':>5}  {'max':>5}")
    for n, s in table:
        sd = float(np.std(s, ddof=1)) if len(s) > 1 else 0.0
        print(f"{n:>10}  {np.mean(s):>9.2f}  {sd:>8.2f}  {min(s):>5}  {max(s):>5}")
    if slope is not None:
        print(f"log-log slope {slope:.4f} +/- {ci:.4f} (95% CI)")
    if args.out:
        Path(args.out).write_text(json.dumps({
            "N": [n for n, _ in table], "sizes": [s for _, s in table], "slope": slope,
            "ci95": ci, "quantized": bool(args.quantized)}) + "\n")
    return 0


def inspect_transcript(doc):
    """Decode a transcript dict; returns (report lines, mismatch count)."""
    shares = doc.get("shares") or []
    if not shares:
        return ["no shares in transcript"], 0
    try:
        q, n, B, h = int(doc["q"]), int(doc["n_sums"]), int(doc["B"]), int(doc["h"])
        seq = [int(a) for a in doc["sequence"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"transcript header incomplete: {exc}") from None
    vecs = []
    for i, hx in enumerate(shares):
        try:
            sq, vals = share_from_bytes(bytes.fromhex(hx))
        except (ValueError, HypfedError) as exc:
            raise UsageError(f"share {i}: {exc}") from None
        if sq != q or len(vals) != n:
            raise UsageError(f"share {i}: header (q={sq}, n={len(vals)}) disagrees with transcript "
                             f"(q={q}, n={n})")
        vecs.append(vals)
    lines = [f"q = {q}, {len(vecs)} shares of {n} elements, B = {B}, h = {h}",
             f"labels: {seq}"]
    for i, v in enumerate(vecs):
        head = " ".join(str(x) for x in v[:4])
        lines.append(f"share {i}: {head}{' ...' if n > 4 else ''}")
    H = scma_decode(aggregate(vecs, q), q, B, n // 2)
    lines.append(f"{len(H)} nonempty bins")
    mismatches = 0
    truth = {int(b): int(v) for b, v in (doc.get("truth") or {}).get("bins", {}).items()}
    for b in sorted(H):
        parts = bh_decompose(H[b], seq, h)
        mark = ""
        if truth:
            ok = truth.get(b) == H[b]
            mismatches += not ok
            mark = "  ok" if ok else f"  MISMATCH (recorded {truth.get(b)})"
        lines.append(f"bin {b}: H = {H[b]} -> {{{', '.join(map(str, parts))}}}{mark}")
    missing = sorted(set(truth) - set(H))
    for b in missing:
        lines.append(f"bin {b}: recorded H = {truth[b]} but not decoded  MISMATCH")
    mismatches += len(missing)
    if truth:
        lines.append("verified against recorded truth" if not mismatches
                     else f"{mismatches} bins disagree with recorded truth")
    return lines, mismatches


def cmd_inspect_share(args):
    path = Path(args.transcript)
    if not path.is_file():
        raise UsageError(f"transcript not found: {path}")
    text = path.read_text().strip()
    if not text:
        print("no shares in transcript")
        return 0
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"transcript {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"transcript {path} must hold a JSON object")
    try:
        lines, bad = inspect_transcript(doc)
    except HypfedError as exc:
        raise UsageError(f"transcript {path} does not decode: {exc}") from None
    print("\n".join(lines))
    return 2 if bad else 0


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    ap = argparse.ArgumentParser(prog="hypfed", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    d = SynthSpec()
    p.add_argument("--n", type=int, default=d.N)
    p.add_argument("--R", type=float, default=d.R)
    p.add_argument("--k", type=float, default=d.k)
    p.add_argument("--mu", type=float, default=d.mu)
    p.add_argument("--gamma", type=float, default=d.gamma)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="CSV path; the sidecar goes next to it")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="run one experiment")
    _add_config_flags(p)
    p.add_argument("--out", default="-", help="JSONL path (default stdout)")
    p.add_argument("--transcript", help="also record trial 0's shares to this JSON file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="one experiment per parameter value")
    _add_config_flags(p)
    p.add_argument("--param", required=True, choices=["epsilon", "mu", "gamma"])
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", default="-", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("hull-stats", help="hull complexity against N")
    p.add_argument("--n", default="1000,10000,100000", help="comma-separated sample sizes")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--R", type=float, default=0.95)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--quantized", action="store_true", help="quantize with epsilon = N^-0.3")
    p.add_argument("--out", help="optional JSON with the raw sizes")
    p.set_defaults(func=cmd_hull_stats)

    p = sub.add_parser("inspect-share", help="decode a recorded transcript")
    p.add_argument("transcript")
    p.set_defaults(func=cmd_inspect_share)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (HypfedError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # anything else is a bug
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
