"""Command-line front end.

Ideal files are JSON objects ``{"n": 5, "primes": [[1, 5], [2, 5]], "name": "..."}``
with 1-based variable indices.  Wherever a file is expected, the name of a
built-in fixture (``example-section1``, ``example-hin``) is accepted too.

Exit codes: 0 success, 1 bad input, 2 cap or budget hit (indeterminate),
3 mismatch (repro, failed direct-sum check, or depth rules vs oracle),
4 conjecture counterexample.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .core import PrimeFamily, StanleyLabError, format_varset, members, reduce_family, varset
from .depth import (DEFAULT_ORACLE_CAP, DepthMismatch, OracleCapExceeded, depth_by_formula,
                    depth_oracle)
from .invariants import (big_size, bipartition_condition, min_pair_defect, non_absorbed,
                         pair_sum_table, size)
from .lab import (ADVISORY_CHECKS, Status, check_instance, compare_fixture, enumerate_families,
                  golden_fixtures, observe_fixture, sweep)
from .sdepth import (DEFAULT_BUDGET_MS, EXACT_BEST_EFFORT_MAX_N, decomposition_from_partition,
                     exact_sdepth, sdepth_lower_bound, split, verify_direct_sum)

SCHEMA = 1

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INDETERMINATE = 2
EXIT_MISMATCH = 3
EXIT_COUNTEREXAMPLE = 4

log = logging.getLogger("stanley_lab")


class InputError(StanleyLabError):
    pass


# -- input ------------------------------------------------------------------------

def parse_ideal(data: dict) -> tuple[PrimeFamily, str]:
    if not isinstance(data, dict) or "n" not in data or "primes" not in data:
        raise InputError("ideal file needs an object with 'n' and 'primes'")
    n, primes = data["n"], data["primes"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise InputError("'n' must be an integer")
    if not isinstance(primes, list) or not all(isinstance(p, list) for p in primes):
        raise InputError("'primes' must be a list of lists of variable indices")
    for p in primes:
        if not all(isinstance(i, int) and not isinstance(i, bool) for i in p):
            raise InputError("variable indices must be integers")
    try:
        F = reduce_family(n, primes)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return F, str(data.get("name", ""))


def load_ideal(source: str) -> tuple[PrimeFamily, str]:
    path = Path(source)
    if not path.exists():
        fixtures = golden_fixtures()
        if source in fixtures:
            return fixtures[source].family, source
        raise InputError(f"no such file or fixture: {source}")
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {source}: {exc}") from exc
    F, name = parse_ideal(data)
    return F, name or path.stem


def parse_varlist(text: str, n: int) -> int:
    """``"5,6,7"``, ``"5-10"`` or ``"R=5,6"`` to a variable set."""
    text = text.strip()
    if text.upper().startswith("R="):
        text = text[2:]
    out = []
    try:
        for part in filter(None, (p.strip() for p in text.split(","))):
            if "-" in part:
                lo, hi = (int(x) for x in part.split("-", 1))
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
    except ValueError as exc:
        raise InputError(f"bad variable list {text!r}") from exc
    if not out or any(not 1 <= i <= n for i in out):
        raise InputError(f"variable list {text!r} must name indices in 1..{n}")
    return varset(out)


def default_budget() -> int:
    raw = os.environ.get("STANLEY_LAB_BUDGET_MS")
    if raw is None:
        return DEFAULT_BUDGET_MS
    try:
        return int(raw)
    except ValueError:
        log.warning("ignoring non-integer STANLEY_LAB_BUDGET_MS=%r", raw)
        return DEFAULT_BUDGET_MS


# -- report pieces ------------------------------------------------------------------

def family_json(F: PrimeFamily, name: str = "") -> dict:
    out = {"n": F.n, "primes": F.to_lists(), "encoding": F.encode()}
    if name:
        out["name"] = name
    return out


def invariants_json(F: PrimeFamily) -> dict:
    blocks = bipartition_condition(F)
    return {
        "size": size(F),
        "big_size": big_size(F),
        "q": min_pair_defect(F),
        "bipartition": None if blocks is None else [[i + 1 for i in b] for b in blocks],
        "non_absorbed": [i + 1 for i in non_absorbed(F)],
        "pair_defects": [
            {"pair": [i + 1, j + 1], "defect": ps.defect,
             "missing": list(members(F.full & ~ps.union))}
            for (i, j), ps in sorted(pair_sum_table(F).items()) if ps.defect],
    }


def depth_json(report) -> dict:
    return {
        "depth_quotient": report.depth_quotient,
        "depth_ideal": report.depth_ideal,
        "method": report.method,
        "oracle": report.oracle_value,
        "agreement": report.agreement,
        "trace": [{"rule": t.rule, "family": t.family, "value": t.value,
                   "note": t.note, "level": t.level} for t in report.trace],
    }


def exact_json(ex) -> dict:
    out = {"value": ex.value, "method": "exact", "indeterminate": ex.indeterminate}
    if ex.reason:
        out["reason"] = ex.reason
    return out


def split_json(S, check) -> dict:
    F = S.family
    zero = S.piece_zero
    return {
        "main": list(members(S.main)),
        "piece_zero": None if not zero else {"n": zero.n, "primes": zero.to_lists(),
                                             "labels": list(zero.labels)},
        "pieces": [{
            "tau": [i + 1 for i in p.tau],
            "s_tau": list(members(p.s_tau)),
            "J": {"primes": [[p.J.labels[i - 1] for i in members(m)] for m in p.J.primes],
                  "describe": p.J.describe()},
            "L": {"primes": [[p.L.labels[i - 1] for i in members(m)] for m in p.L.primes],
                  "describe": p.L.describe()},
        } for p in S.pieces],
        "excluded_tau": [[i + 1] for i in range(F.s)
                         if F.primes[i] & ~S.main and (i,) not in S.taus()],
        "verify_direct_sum": {"ok": check.ok, "reason": check.reason,
                              "witness": None if check.witness is None
                              else list(members(check.witness))},
    }


def emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        payload = {"schema": SCHEMA, "command": args.command, **payload}
        print(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False))
    else:
        print("\n".join(lines))


def table(rows: list[tuple[str, object]]) -> list[str]:
    width = max(len(k) for k, _ in rows)
    return [f"{k.ljust(width)}  {v}" for k, v in rows]


# -- subcommands --------------------------------------------------------------------

def cmd_analyze(args) -> int:
    F, name = load_ideal(args.file)
    verdict = check_instance(F, exact=not args.no_exact, budget_ms=args.budget)
    inv = invariants_json(F)
    payload = {
        "family": family_json(F, name),
        "invariants": inv,
        "depth": depth_json(verdict.depth),
        "bound": verdict.bound.to_dict(),
        "exact_sdepth": {"value": verdict.exact, "method": "exact"},
        "status": verdict.status.value,
    }
    lines = table([
        ("ideal", F.describe()),
        ("size", inv["size"]),
        ("big size", inv["big_size"]),
        ("q", inv["q"]),
        ("depth S/I", f"{verdict.depth.depth_quotient} ({verdict.depth.method})"),
        ("depth I", verdict.depth_ideal),
        ("oracle", verdict.depth.oracle_value),
        ("sdepth bound", f"{verdict.bound.value} ({verdict.bound.rule})"),
        ("exact sdepth", verdict.exact if verdict.exact is not None else "not computed"),
        ("status", verdict.status.value),
    ])
    emit(args, payload, lines)
    if verdict.status is Status.COUNTEREXAMPLE:
        return EXIT_COUNTEREXAMPLE
    if verdict.status is Status.UNRESOLVED:
        return EXIT_INDETERMINATE
    return EXIT_OK


def cmd_depth(args) -> int:
    F, name = load_ideal(args.file)
    payload: dict = {"family": family_json(F, name), "field": args.field}
    if args.oracle_only:
        try:
            value = depth_oracle(F, field=args.field, cap=args.oracle_cap)
        except OracleCapExceeded as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INDETERMINATE
        payload["depth"] = {"depth_quotient": value, "depth_ideal": value + 1,
                            "method": "oracle"}
        emit(args, payload, table([("depth S/I", value), ("depth I", value + 1),
                                   ("method", "oracle")]))
        return EXIT_OK
    report = depth_by_formula(F, check=not args.formula_only, oracle_cap=args.oracle_cap,
                              field=args.field)
    payload["depth"] = depth_json(report)
    lines = [f"{'  ' * t.level}{t.rule}: {t.value}  {t.family}" for t in report.trace]
    lines += table([("depth S/I", report.depth_quotient), ("depth I", report.depth_ideal),
                    ("method", report.method), ("oracle", report.oracle_value)])
    emit(args, payload, lines)
    return EXIT_MISMATCH if report.agreement is False else EXIT_OK


def _cert_lines(cert, level: int = 0) -> list[str]:
    tag = ""
    if cert.main is not None:
        tag += f" R={{{','.join(map(str, cert.main))}}}"
    if cert.tau is not None:
        tag += f" tau={{{','.join(map(str, cert.tau))}}}"
    out = [f"{'  ' * level}{cert.rule}{tag}: {cert.value}  {cert.note}"]
    for child in cert.children:
        out.extend(_cert_lines(child, level + 1))
    return out


def cmd_sdepth(args) -> int:
    F, name = load_ideal(args.file)
    payload: dict = {"family": family_json(F, name)}
    lines: list[str] = []
    code = EXIT_OK
    if args.exact:
        ex = exact_sdepth(F, budget_ms=args.budget, max_n=EXACT_BEST_EFFORT_MAX_N)
        payload["exact_sdepth"] = exact_json(ex)
        lines.append(f"exact sdepth: {ex.value if not ex.indeterminate else 'INDETERMINATE'}"
                     + (f" ({ex.reason})" if ex.reason else ""))
        if ex.indeterminate:
            code = EXIT_INDETERMINATE
    main = parse_varlist(args.main, F.n) if args.main else None
    cert = sdepth_lower_bound(F, main=main, budget_ms=args.budget,
                              unions=args.unions, private_extension=args.private_extension)
    payload["bound"] = cert.to_dict()
    lines.extend(_cert_lines(cert))
    emit(args, payload, lines)
    return code


def cmd_split(args) -> int:
    F, name = load_ideal(args.file)
    S = split(F, parse_varlist(args.main, F.n))
    check = verify_direct_sum(F, S)
    payload = {"family": family_json(F, name), "split": split_json(S, check)}
    lines = [f"R = {format_varset(S.main)}",
             f"A0: I ∩ K[R] = {S.piece_zero.describe() if S.piece_zero else '0'}"]
    for p in S.pieces:
        tau = ",".join(str(i + 1) for i in p.tau)
        lines.append(f"tau={{{tau}}}: J = {p.J.describe()}   L = {p.L.describe()}")
    lines.append(f"verify_direct_sum: {'true' if check else 'false'}"
                 + (f" ({check.reason})" if check.reason else ""))
    emit(args, payload, lines)
    return EXIT_OK if check else EXIT_MISMATCH


def cmd_decompose(args) -> int:
    F, name = load_ideal(args.file)
    ex = exact_sdepth(F, budget_ms=args.budget, max_n=EXACT_BEST_EFFORT_MAX_N)
    payload: dict = {"family": family_json(F, name), "exact_sdepth": exact_json(ex)}
    if ex.indeterminate:
        emit(args, payload, [f"INDETERMINATE: {ex.reason}"])
        return EXIT_INDETERMINATE
    text = decomposition_from_partition(F, ex.partition)
    payload["decomposition"] = text
    payload["intervals"] = [[list(members(b)), list(members(t))]
                            for b, t in ex.partition.intervals]
    emit(args, payload, [f"sdepth {ex.value}", text])
    return EXIT_OK


def cmd_enumerate(args) -> int:
    if args.list:
        families = []
        for n in range(1, args.n + 1):
            families.extend(enumerate_families(n, args.s, force=args.force))
        payload = {"count": len(families), "families": [F.encode() for F in families]}
        emit(args, payload, [F.encode() for F in families] + [f"{len(families)} families"])
        return EXIT_OK
    checkpoint = Path(args.resume or args.checkpoint) if (args.resume or args.checkpoint) else None
    summary = sweep(args.n, args.s, jobs=args.jobs, checkpoint=checkpoint,
                    resume=args.resume is not None, budget_ms=args.budget, force=args.force)
    payload = {"summary": summary.to_dict()}
    lines = table([("families", summary.families), ("skipped (resumed)", summary.skipped)]
                  + [(f"status {k.value}", v) for k, v in sorted(summary.statuses.items())]
                  + [(f"check {k}", v) for k, v in sorted(summary.checked.items())]
                  + [("splits verified", summary.splits_verified)]
                  + [(f"advisory {name} violations", len(summary.failed(name)))
                     for name in sorted(ADVISORY_CHECKS)])
    binding = [f for f in summary.failures if f[0] not in ADVISORY_CHECKS]
    lines += [f"FAIL {c} {enc}: {detail}" for c, enc, detail in binding[:20]]
    lines.append("ok" if summary.ok else "FAILED")
    emit(args, payload, lines)
    if summary.statuses.get(Status.COUNTEREXAMPLE):
        return EXIT_COUNTEREXAMPLE
    return EXIT_OK if summary.ok else EXIT_MISMATCH


def cmd_repro(args) -> int:
    fx = golden_fixtures()[args.name]
    got = observe_fixture(fx, budget_ms=args.budget)
    diffs = compare_fixture(fx, got)
    show = {k: v for k, v in got.items() if k != "pair_defects"}
    payload = {
        "fixture": args.name,
        "family": family_json(fx.family, args.name),
        "expected": _jsonable(fx.expected),
        "observed": _jsonable(got),
        "mismatches": diffs,
    }
    lines = [f"{args.name}: {fx.family.describe()}"]
    if "pair_defects" in got:
        lines.append("pair sums that miss variables:")
        for (a, b), miss in sorted(got["pair_defects"].items()):
            lines.append(f"  {a}+{b} misses {{{','.join(map(str, miss))}}}")
        lines.append("  all other pairs span every variable")
    lines += table([(k, v) for k, v in show.items()])
    lines += [f"MISMATCH {d}" for d in diffs] or ["all expected values reproduced"]
    emit(args, payload, lines)
    return EXIT_MISMATCH if diffs else EXIT_OK


def _jsonable(value):
    if isinstance(value, dict):
        return {("+".join(k) if isinstance(k, tuple) else k): _jsonable(v)
                for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


# -- argument parsing -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stanley-lab",
        description="Depth and Stanley depth of intersections of monomial prime ideals.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON report")
    common.add_argument("--budget", type=int, default=default_budget(), metavar="MS",
                        help="time budget for exact searches in milliseconds "
                             "(default: $STANLEY_LAB_BUDGET_MS or %(default)s)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="invariants, depth, bounds, verdict")
    p.add_argument("file")
    p.add_argument("--no-exact", action="store_true", help="skip the exact sdepth search")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("depth", parents=[common], help="depth by rules and/or the oracle")
    p.add_argument("file")
    only = p.add_mutually_exclusive_group()
    only.add_argument("--oracle-only", action="store_true")
    only.add_argument("--formula-only", action="store_true")
    p.add_argument("--field", choices=("Q", "GF2"), default="Q")
    p.add_argument("--oracle-cap", type=int, default=DEFAULT_ORACLE_CAP)
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("sdepth", parents=[common], help="Stanley depth bounds")
    p.add_argument("file")
    p.add_argument("--exact", action="store_true", help="also run the exact search")
    p.add_argument("--main", help="force the main variable set, e.g. 5,6,7 or 5-10")
    p.add_argument("--unions", type=int, default=2,
                   help="candidate main sets are unions of up to this many primes")
    p.add_argument("--private-extension", action="store_true",
                   help="also bound J pieces through a wider restriction")
    p.set_defaults(func=cmd_sdepth)

    p = sub.add_parser("split", parents=[common], help="split along a main variable set")
    p.add_argument("file")
    p.add_argument("--main", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("decompose", parents=[common], help="print an optimal decomposition")
    p.add_argument("file")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("enumerate", parents=[common], help="sweep all small families")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--checkpoint", help="append finished families to this file")
    p.add_argument("--resume", metavar="CKPT", help="skip families listed in CKPT and append")
    p.add_argument("--force", action="store_true", help="allow n beyond the exhaustive cap")
    p.add_argument("--list", action="store_true", help="only list the canonical families")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("repro", parents=[common], help="rerun a worked example")
    p.add_argument("name", choices=sorted(golden_fixtures()))
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DepthMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except StanleyLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
