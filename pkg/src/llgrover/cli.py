"""Command-line front end: ``llgrover prove | bench | selftest``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from .classical import NotProvable, Unsupported, formula_of, left_atoms, prove_bruteforce
from .pairdb import DbParams, RecoveryError, prove_pairdb, query_plan, recover_permutation
from .qsim import SeededRng
from .seqcalc import (
    Atom, ParseError, Sequent, check_proof, parse_sequent, proof_to_rules, render_proof,
    render_sequent,
)
from .splitsearch import InconsistentAssignment, SearchFailed, prove_splitsearch

SCHEMA = 1
EXIT_OK, EXIT_PARSE, EXIT_UNPROVABLE, EXIT_RECOVERY = 0, 1, 2, 3
MAX_BENCH_K = 64
CSV_COLUMNS = ["k", "trial", "method", "success", "iterations", "oracle_calls",
               "p_theory", "p_empirical", "wall_ms"]


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def run_prove(sequent_text: str, method: str = "pairdb", seed: int = 0, shots: int = 1000,
              budget: int = 200, timing: bool = False) -> tuple[int, dict]:
    """Run one prover and return ``(exit_code, report)``."""
    report: dict = {"schema": SCHEMA, "sequent": sequent_text, "method": method, "seed": seed,
                    "shots": shots, "k": None, "iterations": None, "oracle_calls": None,
                    "histogram": {}, "proof": None, "valid": False, "wall_ms": None}
    t0 = time.perf_counter()
    try:
        s = parse_sequent(sequent_text)
    except ParseError as exc:
        report["error"] = str(exc)
        return EXIT_PARSE, report
    report["sequent"] = render_sequent(s)
    report["k"] = len(left_atoms(s)) if not s.has_lolli else len(s.atoms())
    rng = SeededRng(seed)
    code = EXIT_OK
    try:
        if method == "classical":
            proof = prove_bruteforce(s)
            if proof is None:
                raise NotProvable("not provable")
        elif method == "pairdb":
            proof, perm, stats = prove_pairdb(s, rng, shots=shots)
            report.update({
                "qubits_per_copy": DbParams.for_k(len(perm)).qubits,
                "iterations": stats.iterations[0] if stats.iterations else 0,
                "oracle_calls": stats.oracle_calls,
                "permutation": perm,
                "p_success": stats.p_success,
                "p_empirical": stats.p_empirical,
                "attempts": stats.attempts,
                "histogram": {str(b): h for b, h in enumerate(stats.histograms)},
            })
        elif method == "splitsearch":
            res = prove_splitsearch(s, rng, budget=budget)
            proof = res.proof
            st = res.stats
            report.update({
                "code_width": st.width,
                "iterations": st.iterations,
                "oracle_calls": st.oracle_calls,
                "runs": st.runs,
                "rejected": st.rejected,
                "p_marked": st.p_marked,
                "split_codes": {str(c.atom) + ("" if not res.schedule_from_classical
                                               else ("@L" if c.side == 0 else "@R")): str(c)
                                for c in res.codes},
                "histogram": st.outcomes,
                "schedule_from_classical": res.schedule_from_classical,
            })
        else:
            raise ValueError(f"unknown method {method!r}")
    except NotProvable as exc:
        report["error"] = str(exc)
        code = EXIT_UNPROVABLE
    except Unsupported as exc:
        report["error"] = str(exc)
        code = EXIT_PARSE
    except (RecoveryError, SearchFailed, InconsistentAssignment) as exc:
        report["error"] = str(exc)
        code = EXIT_RECOVERY
    if code == EXIT_OK:
        report["valid"] = check_proof(proof)
        report["proof"] = {"text": render_proof(proof, "text"),
                           "latex": render_proof(proof, "latex"),
                           "rules": proof_to_rules(proof)}
        if not report["valid"]:
            code = EXIT_RECOVERY
    if timing:
        report["wall_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    return code, report


def format_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return _dump(report)
    if fmt == "latex":
        return (report["proof"]["latex"] + "\n") if report.get("proof") else ""
    lines = [f"sequent: {report['sequent']}", f"method:  {report['method']}",
             f"valid:   {str(report['valid']).lower()}"]
    for key in ("k", "permutation", "split_codes", "iterations", "oracle_calls", "error"):
        if report.get(key) is not None:
            lines.append(f"{key}: {report[key]}")
    if report.get("proof"):
        lines += ["", report["proof"]["text"]]
    return "\n".join(lines) + "\n"


def cmd_prove(args: argparse.Namespace) -> int:
    text = args.sequent if args.sequent is not None else Path(args.file).read_text().strip()
    code, report = run_prove(text, args.method, args.seed, args.shots, args.budget, args.timing)
    _emit(format_report(report, args.format), args.out)
    if report.get("error"):
        print(f"error: {report['error']}", file=sys.stderr)
    if args.figures and report.get("histogram"):
        from .report import plot_histogram
        outdir = Path(args.figures)
        outdir.mkdir(parents=True, exist_ok=True)
        if args.method == "pairdb":
            for b, hist in report["histogram"].items():
                plot_histogram(hist, outdir / f"query_{b}.png", f"left register, right position {b}")
        else:
            marked = {c.replace("|", "") for c in report.get("split_codes", {}).values()}
            plot_histogram(report["histogram"], outdir / "split_outcomes.png", "measured codes", marked)
    return code


# ---------------------------------------------------------------------------
# bench

def atom_names(k: int) -> list[str]:
    letters = [chr(ord("A") + i) for i in range(26)]
    names = list(letters)
    for a in letters:
        names.extend(a + b for b in letters)
    return names[:k]


def random_permutation(k: int, rng: SeededRng) -> list[int]:
    keys = rng.u64s(k)
    return sorted(range(k), key=lambda i: (int(keys[i]), i))


def permutation_sequent(perm: list[int]) -> Sequent:
    """Left: atoms in order; right: atom ``perm[b]`` at right position ``b``."""
    atoms = [Atom(n) for n in atom_names(len(perm))]
    return Sequent([formula_of(atoms)], [formula_of([atoms[a] for a in perm])])


def run_bench(k_list: list[int], trials: int, seed: int, shots: int,
              timing: bool = False) -> tuple[list[dict], list[dict]]:
    rows, summary = [], []
    base = SeededRng(seed)
    for k in k_list:
        if k > MAX_BENCH_K or k < 2:
            raise ValueError(f"k must be in 2..{MAX_BENCH_K}, got {k}")
        per_k = []
        for trial in range(trials):
            rng = base.derive(k, trial)
            perm = random_permutation(k, rng.derive(0))
            s = permutation_sequent(perm)
            t0 = time.perf_counter()
            try:
                got, stats = recover_permutation(s, rng.derive(1), shots=shots)
                success = got == perm
            except RecoveryError:
                success, stats = False, None
            wall = (time.perf_counter() - t0) * 1000
            _, iters, p_theory = query_plan(k)
            row = {
                "k": k, "trial": trial, "method": "pairdb", "success": success,
                "iterations": iters,
                "oracle_calls": stats.oracle_calls if stats else k * iters,
                "p_theory": p_theory,
                "p_empirical": (sum(stats.p_empirical) / k) if stats else 0.0,
                "wall_ms": round(wall, 3) if timing else None,
            }
            if stats:
                row["p_pre_measurement"] = min(stats.p_success)
            rows.append(row)
            per_k.append(row)
        _, iters, p_theory = query_plan(k)
        summary.append({
            "k": k, "qubits_per_copy": DbParams.for_k(k).qubits, "trials": trials,
            "iterations": iters, "oracle_calls": k * iters, "p_theory": p_theory,
            "p_empirical": sum(r["p_empirical"] for r in per_k) / max(1, len(per_k)),
            "success_rate": sum(r["success"] for r in per_k) / max(1, len(per_k)),
        })
    return rows, summary


def format_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({**r, "success": int(r["success"]),
                    "wall_ms": "" if r["wall_ms"] is None else r["wall_ms"]})
    return buf.getvalue()


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        k_list = [int(x) for x in args.k_list.split(",") if x.strip()]
        rows, summary = run_bench(k_list, args.trials, args.seed, args.shots, args.timing)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.format == "csv":
        text = format_csv(rows)
    else:
        text = _dump({"schema": SCHEMA, "seed": args.seed, "shots": args.shots,
                      "summary": summary, "rows": rows})
    _emit(text, args.out)
    if args.figures:
        from .report import plot_bench
        plot_bench(summary, Path(args.figures))
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace) -> int:
    from .selftest import run_all
    results = run_all()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f": {detail}" if detail and not ok else ""))
    failed = [r for r in results if not r[1]]
    print(f"{len(results) - len(failed)}/{len(results)} suites passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="llgrover", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="prove one sequent")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--sequent")
    src.add_argument("--file")
    p.add_argument("--method", choices=["classical", "pairdb", "splitsearch"], default="pairdb")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--budget", type=int, default=200, help="split-search run budget")
    p.add_argument("--format", choices=["json", "text", "latex"], default="json")
    p.add_argument("--out")
    p.add_argument("--figures", help="directory for histogram figures")
    p.add_argument("--timing", action="store_true", help="record wall_ms (breaks byte-identity)")
    p.set_defaults(func=cmd_prove)

    b = sub.add_parser("bench", help="pair-database scaling benchmark")
    b.add_argument("--k-list", default="2,4,8,16,32,64")
    b.add_argument("--trials", type=int, default=5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--shots", type=int, default=1000)
    b.add_argument("--format", choices=["csv", "json"], default="csv")
    b.add_argument("--out")
    b.add_argument("--figures", help="directory for scaling figures")
    b.add_argument("--timing", action="store_true")
    b.set_defaults(func=cmd_bench)

    t = sub.add_parser("selftest", help="run the built-in invariant suites")
    t.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
