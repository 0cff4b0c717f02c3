"""Command-line front end.

Exit codes: 0 computed with no obstruction or violation, 1 obstruction or
violation found (details on stdout), 2 usage or hypothesis error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path

from . import __version__
from .dold import METHODS, dold_image
from .obstruct import (
    CharNumbers,
    MapClass,
    classify_codim1,
    cp_verdict,
    mersenne_exponent,
    numbers_check,
    quotient_dim,
    rank2_reduction,
    rp_verdict,
    sweep_grid,
    sweep_one,
)
from .parity2 import binom_parity_int, binom_val2

OK, FOUND, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({f: r.get(f) for f in fields})
    return buf.getvalue()


def _pairs(items) -> str:
    return ";".join(f"{a}:{b}" for a, b in items)


def _emit(out, fmt: str, doc, rows: list[dict], fields: list[str], text: str) -> None:
    if fmt == "json":
        out.write(dumps(doc) + "\n")
    elif fmt == "csv":
        out.write(_csv(rows, fields))
    else:
        out.write(text.rstrip("\n") + "\n")


def _n_range(args) -> range:
    hi = args.n_max if args.n_max is not None else args.n
    if hi < args.n:
        raise UsageError("--n-max must be at least --n")
    return range(args.n, hi + 1)


# Checkpointing ---------------------------------------------------------------------

def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _replace_atomic(path: Path, data: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def checkpoint_resume(path: str | Path) -> dict[tuple[int, int], dict]:
    """Completed records keyed by (n, k).

    A corrupt final line (a write cut short) is dropped and the file rewritten
    without it; corrupt earlier lines and duplicate records are skipped with a
    warning, first record winning.  Records from another engine version are
    ignored so they get recomputed.
    """
    path = Path(path)
    if not path.exists():
        return {}
    raw = path.read_text(encoding="utf-8")
    lines = raw.split("\n")
    tail_cut = not raw.endswith("\n") and raw != ""
    done: dict[tuple[int, int], dict] = {}
    keep: list[str] = []
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        last = i == len(lines) - 1
        try:
            rec = json.loads(line)
            key = (int(rec["n"]), int(rec["k"]))
            int(rec["quotient_dim"])
        except (ValueError, KeyError, TypeError):
            if last:
                _warn(f"{path}: dropping truncated final line")
                tail_cut = True
                continue
            _warn(f"{path}: skipping unreadable line {i + 1}")
            keep.append(line)
            continue
        keep.append(line)
        if rec.get("engine_version") != __version__:
            _warn(f"{path}: record {key} from engine {rec.get('engine_version')} will be recomputed")
            continue
        if key in done:
            _warn(f"{path}: duplicate record for {key} ignored")
            continue
        done[key] = rec
    if tail_cut:
        _replace_atomic(path, "".join(line + "\n" for line in keep))
    return done


def _append_record(path: Path, rec: dict) -> None:
    line = (dumps(rec) + "\n").encode("utf-8")
    fd = os.open(path, os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)
    try:
        os.write(fd, line)
        os.fsync(fd)
    finally:
        os.close(fd)


def _sweep_task(n: int, k: int, compare_r0: bool) -> dict:
    t0 = time.perf_counter()
    rec = sweep_one(n, k, compare_r0)
    d = rec.to_dict()
    d["elapsed_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    d["engine_version"] = __version__
    return d


# Subcommands -----------------------------------------------------------------------

def cmd_binom(args, out) -> int:
    if args.a < 0:
        raise UsageError("--a must be non-negative")
    parity = binom_parity_int(args.b, args.a)
    val2 = binom_val2(args.b, args.a) if 0 <= args.a <= args.b else None
    doc = {"b": args.b, "a": args.a, "parity": parity, "val2": val2}
    text = f"C({args.b}, {args.a}) mod 2 = {parity}" + (f", 2-adic valuation {val2}" if val2 is not None else "")
    _emit(out, args.format, doc, [doc], ["b", "a", "parity", "val2"], text)
    return OK


def cmd_dims(args, out) -> int:
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    ns = [n for n in _n_range(args) if n > args.k and n >= 2]
    if not ns:
        raise UsageError("no n > k in range")
    reps = [quotient_dim(n, args.k, method=args.method, compare_r0=args.compare_r0) for n in ns]
    docs = [r.to_dict() for r in reps]
    rows = [dict(d, complement=_pairs(d["complement"])) for d in docs]
    fields = ["n", "k", "dim_im_rho", "dim_relations", "quotient_dim", "complement"]
    if args.compare_r0:
        fields.append("quotient_dim_without_r0")
    text = "\n".join(
        f"n={r.n} k={r.k}: dim {r.quotient_dim} (im {r.dim_im_rho}, relations {r.dim_relations})"
        + (f", complement {' '.join(f'x^{i}t^{j}' for i, j in r.complement)}" if r.complement else "")
        for r in reps
    )
    _emit(out, args.format, docs if len(docs) > 1 else docs[0], rows, fields, text)
    return OK


def cmd_classify(args, out) -> int:
    ns = list(_n_range(args))
    if ns[0] < 2:
        raise UsageError("--n must be at least 2")
    reps = [classify_codim1(n) for n in ns]
    docs = [r.to_dict() for r in reps]
    rows = [
        {"n": r.n, "class": r.cls.value, "quotient_dim": r.quotient.quotient_dim,
         "complement": _pairs(r.quotient.complement)}
        for r in reps
    ]
    text = "\n".join(f"n={r.n}: {r.cls.value} (dim {r.quotient.quotient_dim})" for r in reps)
    _emit(out, args.format, docs if len(docs) > 1 else docs[0], rows,
          ["n", "class", "quotient_dim", "complement"], text)
    return OK


def _verdict_rows(verdicts) -> list[dict]:
    return [
        {"map_class": v.map_class.value, "source": v.source, "target": v.target, "rule": v.rule,
         "status": v.status, "witness": dumps(v.witness) if v.witness else ""}
        for v in verdicts
    ]


_VERDICT_FIELDS = ["map_class", "source", "target", "rule", "status", "witness"]


def _verdict_line(v) -> str:
    s = f"{v.map_class.value:13s} {v.rule:18s} {v.status}"
    if v.witness:
        s += f"  {dumps(v.witness)}"
    failed = [h.name for h in v.hypotheses if not h.ok]
    if failed:
        s += f"  (unmet: {', '.join(failed)})"
    return s


def cmd_rp(args, out) -> int:
    if not 1 <= args.target <= args.n:
        raise UsageError("need 1 <= --target <= --n")
    rep = rp_verdict(args.n, args.target)
    lines = [f"RP^{rep.n} -> R^{rep.target_dim} (k = {rep.k}), minimal relation threshold {rep.min_threshold}"]
    lines += [_verdict_line(v) for v in rep.verdicts]
    lines += [f"note: {n}" for n in rep.notes]
    _emit(out, args.format, rep.to_dict(), _verdict_rows(rep.verdicts), _VERDICT_FIELDS, "\n".join(lines))
    return FOUND if rep.any_obstructed else OK


def cmd_cp(args, out) -> int:
    if args.n < 1 or not 0 <= 2 * args.n - args.target:
        raise UsageError("need --n >= 1 and --target <= 2n")
    v = cp_verdict(args.n, args.target, stably_parallelizable=not args.not_parallelizable)
    lines = [_verdict_line(v)] + [f"note: {n}" for n in v.notes]
    _emit(out, args.format, v.to_dict(), _verdict_rows([v]), _VERDICT_FIELDS, "\n".join(lines))
    return FOUND if v.obstructed else OK


def cmd_numbers(args, out) -> int:
    try:
        cn = CharNumbers.load(args.file)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read characteristic numbers: {exc}") from exc
    res = numbers_check(cn, args.k, MapClass(args.map_class), args.vanishing,
                        stably_parallelizable=not args.not_parallelizable)
    v = res.verdict
    if v.status == "inconclusive":
        failed = ", ".join(h.name for h in v.hypotheses if not h.ok)
        raise UsageError(f"hypotheses not met: {failed}")
    lines = [_verdict_line(v)]
    lines += [f"residual {k} = {val}" for k, val in sorted(res.residual.items())]
    rows = [dict(r, residual=dumps(res.residual)) for r in _verdict_rows([v])]
    _emit(out, args.format, res.to_dict(), rows, _VERDICT_FIELDS + ["residual"], "\n".join(lines))
    return FOUND if v.obstructed else OK


def cmd_dold_basis(args, out) -> int:
    if not args.n > args.k >= 1:
        raise UsageError("need --n > --k >= 1")
    mat = dold_image(args.n, args.k, include_r0=not args.no_r0, method=args.method)
    labels = mat.labels
    rows = []
    for r in mat.rows():
        rows.append([list(labels[c]) for c in range(mat.ncols) if r >> c & 1])
    doc = {
        "n": args.n,
        "k": args.k,
        "basis": [list(b) for b in labels],
        "rows": rows,
        "complement": [list(labels[c]) for c in mat.complement()],
    }
    csv_rows = [{"row": i, "terms": _pairs(r)} for i, r in enumerate(rows)]
    text = [f"degree {args.n}, x-weight {args.k + 1}: rank {mat.rank} of {mat.ncols}"]
    text += [" + ".join(f"x^{i}t^{j}" for i, j in r) for r in rows]
    if doc["complement"]:
        text.append("complement: " + " ".join(f"x^{i}t^{j}" for i, j in doc["complement"]))
    _emit(out, args.format, doc, csv_rows, ["row", "terms"], "\n".join(text))
    return OK


def cmd_rank2(args, out) -> int:
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    reps = [rank2_reduction(n) for n in _n_range(args)]
    docs = [r.to_dict() for r in reps]
    rows = [{"n": r.n, "rank": r.rank, "quotient_dim": r.quotient_dim,
             "representative": _pairs([r.representative]) if r.representative else ""} for r in reps]
    text = "\n".join(f"n={r.n}: quotient dim {r.quotient_dim}, representative "
                     f"{'w1^%d' % r.n if r.representative else 'none'}" for r in reps)
    _emit(out, args.format, docs if len(docs) > 1 else docs[0], rows,
          ["n", "rank", "quotient_dim", "representative"], text)
    return OK


def _parse_ks(text: str) -> list[int] | None:
    if text == "auto":
        return None
    try:
        ks = sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError as exc:
        raise UsageError(f"bad --k list {text!r}") from exc
    for k in ks:
        if mersenne_exponent(k) is None:
            raise UsageError(f"k = {k} is not of the form 2^a - 1 with a >= 2")
    return ks


def cmd_sweep(args, out) -> int:
    ks = _parse_ks(args.k)
    if args.n_max < 4 or args.jobs < 1:
        raise UsageError("need --n-max >= 4 and --jobs >= 1")
    grid = sweep_grid(args.n_max, ks, args.n_min)
    ckpt = Path(args.checkpoint) if args.checkpoint else None
    done = checkpoint_resume(ckpt) if ckpt else {}
    done = {key: rec for key, rec in done.items() if key in set(grid)}
    pending = [key for key in grid if key not in done]
    # Large n first keeps the pool busy at the end.
    pending.sort(key=lambda nk: (-nk[0], nk[1]))
    results = dict(done)

    def record(rec: dict) -> None:
        results[(rec["n"], rec["k"])] = rec
        if ckpt:
            _append_record(ckpt, rec)

    if args.jobs == 1:
        for n, k in pending:
            record(_sweep_task(n, k, args.compare_r0))
    elif pending:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futs = [pool.submit(_sweep_task, n, k, args.compare_r0) for n, k in pending]
            for fut in as_completed(futs):
                record(fut.result())

    ordered = [results[key] for key in sorted(results)]
    stable = [{f: r[f] for f in r if f not in ("elapsed_ms", "engine_version")} for r in ordered]
    violations = [r for r in stable if not r["conforming"]]
    exceptional = [r for r in stable if r["quotient_dim"]]
    doc = {
        "engine_version": __version__,
        "n_max": args.n_max,
        "k": sorted({r["k"] for r in stable}),
        "count": len(stable),
        "violations": violations,
        "nonzero": [{"n": r["n"], "k": r["k"], "quotient_dim": r["quotient_dim"]} for r in exceptional],
    }
    if args.records:
        doc["records"] = stable
    rows = [dict(r, complement=_pairs(r["complement"])) for r in stable]
    fields = ["n", "k", "dim_im_rho", "dim_relations", "quotient_dim", "complement", "conforming"]
    text = [f"{len(stable)} pairs, {len(pending)} computed now, {len(violations)} violations"]
    text += [f"dim {r['quotient_dim']} at n={r['n']} k={r['k']}" for r in exceptional]
    text += [f"VIOLATION n={r['n']} k={r['k']} dim {r['quotient_dim']}" for r in violations]
    _emit(out, args.format, doc, rows, fields, "\n".join(text))
    return FOUND if violations else OK


# Parser ----------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--checkpoint", default=None)

    p = _Parser(prog="foldrel", description="Stiefel-Whitney relation spaces and singular-map obstructions.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("binom", parents=[common], help="parity and 2-adic valuation of C(b, a)")
    s.add_argument("--b", type=int, required=True)
    s.add_argument("--a", type=int, required=True)
    s.set_defaults(func=cmd_binom)

    s = sub.add_parser("dims", parents=[common], help="quotient dimensions")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--n-max", type=int)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--method", choices=METHODS, default="auto")
    s.add_argument("--compare-r0", action="store_true")
    s.set_defaults(func=cmd_dims)

    s = sub.add_parser("classify", parents=[common], help="codimension -1 fold classification")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--n-max", type=int)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("rp", parents=[common], help="verdicts for RP^n -> R^target")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--target", type=int, required=True)
    s.set_defaults(func=cmd_rp)

    s = sub.add_parser("cp", parents=[common], help="corank-1 verdict for CP^n -> Q^target")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--target", type=int, required=True)
    s.add_argument("--not-parallelizable", action="store_true")
    s.set_defaults(func=cmd_cp)

    s = sub.add_parser("numbers", parents=[common], help="check a characteristic-number file")
    s.add_argument("--file", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--class", dest="map_class", choices=[m.value for m in MapClass], default="fold")
    s.add_argument("--vanishing", type=int, default=1, help="w_1..w_V assumed zero")
    s.add_argument("--not-parallelizable", action="store_true")
    s.set_defaults(func=cmd_numbers)

    s = sub.add_parser("dold-basis", parents=[common], help="reduced basis of the collapsed Dold relations")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--method", choices=METHODS, default="auto")
    s.add_argument("--no-r0", action="store_true")
    s.set_defaults(func=cmd_dold_basis)

    s = sub.add_parser("rank2", parents=[common], help="reduction for two-class total Stiefel-Whitney class")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--n-max", type=int)
    s.set_defaults(func=cmd_rank2)

    s = sub.add_parser("sweep", parents=[common], help="quotient dimensions over a grid of (n, k)")
    s.add_argument("--n-max", type=int, required=True)
    s.add_argument("--n-min", type=int, default=2)
    s.add_argument("--k", default="auto", help="'auto' or a comma list of 2^a - 1 values")
    s.add_argument("--compare-r0", action="store_true")
    s.add_argument("--records", action="store_true", help="include every record in the report")
    s.set_defaults(func=cmd_sweep)
    return p


def run(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
