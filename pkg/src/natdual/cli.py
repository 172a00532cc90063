"""Command-line driver.

Exit codes: 0 valid / all cells pass, 1 invalid / some cell fails, 2 error.
Algebra references are ``.alg`` files, corpus names (``D4``) or
``free:NAME:S`` for the S-generated free algebra of ISP(NAME).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
import time
from pathlib import Path

from . import corpus
from .admissibility import CheckReport, check_validity, counterexample_substitution, is_admissible
from .algebra import AlgebraError, FiniteAlgebra
from .duality import AlterEgo, FiniteStructure, dual_space, eval_functor, test_spaces_method
from .duality.tsm import SearchExhausted, TSHint
from .formats import FormatError, parse_algebra, parse_hint, parse_quasi_identities, parse_structure, print_algebra, print_quasi_identity, print_structure, print_term
from .free import DEFAULT_MEMORY_BUDGET, BudgetExceeded, free_algebra
from .quasivariety import min_gen_set_bfs, min_gen_set_dfs, sub_pre_hom

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class CLIError(Exception):
    pass


def parse_size(text: str) -> int:
    """Byte count from ``1048576``, ``512M``, ``2G`` or ``2GiB``."""
    m = re.fullmatch(r"\s*(\d+(?:\.\d+)?)\s*([KMGT]?)(?:i?B)?\s*", text, re.IGNORECASE)
    if not m:
        raise argparse.ArgumentTypeError(f"not a size: {text!r}")
    scale = {"": 1, "K": 1 << 10, "M": 1 << 20, "G": 1 << 30, "T": 1 << 40}[m.group(2).upper()]
    return int(float(m.group(1)) * scale)


class Workspace:
    """Resolves algebra, alter ego and structure references for one run."""

    def __init__(self, memory_budget: int = DEFAULT_MEMORY_BUDGET):
        self.memory_budget = memory_budget
        self.named: dict[str, FiniteAlgebra] = {}
        self.free: dict[tuple[str, int], object] = {}

    def algebra(self, ref: str) -> FiniteAlgebra:
        path = Path(ref)
        if path.suffix == ".alg":
            if not path.is_file():
                raise CLIError(f"no such file: {ref}")
            A = parse_algebra(path.read_text(encoding="utf-8"), source=ref)
            if A.name:
                self.named[A.name] = A
            return A
        if ref.startswith("free:"):
            return self.free_algebra(ref).algebra
        if ref in self.named:
            return self.named[ref]
        if ref in corpus.ALGEBRAS:
            return corpus.load_algebra(ref)
        raise CLIError(f"unknown algebra {ref!r}: not a .alg file, free:NAME:S or one of {', '.join(corpus.ALGEBRAS)}")

    def free_algebra(self, ref: str):
        parts = ref.split(":")
        if len(parts) != 3 or not parts[2].isdigit():
            raise CLIError(f"expected free:NAME:S, got {ref!r}")
        key = (parts[1], int(parts[2]))
        if key not in self.free:
            self.free[key] = free_algebra(self.algebra(parts[1]), key[1], memory_budget=self.memory_budget)
        return self.free[key]

    def _structure_doc(self, ref: str):
        path = Path(ref)
        if not path.is_file():
            raise CLIError(f"no such file: {ref}")
        return parse_structure(path.read_text(encoding="utf-8"), self.algebra, source=ref)

    def ego(self, ref: str) -> AlterEgo:
        if Path(ref).suffix == ".str":
            doc = self._structure_doc(ref)
            if not isinstance(doc, AlterEgo):
                raise CLIError(f"{ref} is a plain structure; an 'alterego NAME over ALGEBRA' header is needed")
            return doc
        name = ref if ref.endswith("~") else ref + "~"
        if name in corpus.EGOS:
            return corpus.load_ego(name)
        raise CLIError(f"unknown alter ego {ref!r}: not a .str file or one of {', '.join(corpus.EGOS)}")

    def structure(self, ref: str) -> FiniteStructure:
        doc = self._structure_doc(ref)
        return doc.structure if isinstance(doc, AlterEgo) else doc


def _target(ws: Workspace, args) -> tuple[FiniteAlgebra, AlterEgo | None, int, TSHint | None, str]:
    """Algebra, alter ego, s, hint and a display name from --corpus or files."""
    if args.corpus and args.algebra:
        raise CLIError("give either --corpus or an algebra file, not both")
    if args.corpus:
        try:
            case = corpus.case(args.corpus)
        except KeyError as exc:
            raise CLIError(exc.args[0]) from None
        M = corpus.load_algebra(case.algebra)
        ego = ws.ego(args.ego) if args.ego else corpus.load_ego(case.ego)
        s = args.s if args.s is not None else case.s
        hint = None if args.search or s != case.s else case.load_hint()
        name = case.key
    elif args.algebra:
        M = ws.algebra(args.algebra)
        ego = ws.ego(args.ego) if args.ego else None
        s = args.s if args.s is not None else 2
        hint = None
        name = M.name or args.algebra
    else:
        raise CLIError("no input: give --corpus NAME or an algebra")
    if args.hint:
        if ego is None:
            raise CLIError("--hint needs an alter ego")
        doc = parse_hint(Path(args.hint).read_text(encoding="utf-8"), M, source=args.hint)
        if doc.s != s:
            raise CLIError(f"hint is for s={doc.s} but s={s}")
        hint = doc.hint
    return M, ego, s, hint, name


def _cache_dir() -> Path:
    root = os.environ.get("NATDUAL_CACHE") or os.path.join(os.path.expanduser("~"), ".cache", "natdual")
    return Path(root)


def _tsm_key(M: FiniteAlgebra, ego: AlterEgo, s: int, hint: TSHint | None) -> str:
    h = hashlib.sha256()
    h.update(print_algebra(M).encode())
    h.update(print_structure(ego).encode())
    h.update(f"s={s}".encode())
    h.update(repr(None if hint is None else sorted(hint.points)).encode())
    return h.hexdigest()[:32]


def tsm_test_algebras(M: FiniteAlgebra, ego: AlterEgo, s: int, hint: TSHint | None, size_cap: int | None, use_cache: bool = True) -> tuple[list[FiniteAlgebra], bool]:
    """Test algebras from the pipeline, read from or written to the disk cache.
    Returns them with a flag saying whether the cache answered."""
    path = _cache_dir() / f"tsm-{_tsm_key(M, ego, s, hint)}.json"
    if use_cache and path.is_file():
        try:
            docs = json.loads(path.read_text(encoding="utf-8"))["algebras"]
            return [parse_algebra(d, source=str(path)) for d in docs], True
        except (ValueError, KeyError, FormatError):
            pass  # stale or corrupt entry, recompute
    r = test_spaces_method(M, ego, s, hint=hint, size_cap=size_cap)
    if use_cache:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps({"algebras": [print_algebra(A) for A in r.algebras], "X": r.config.labels()}), encoding="utf-8")
        except OSError:
            pass  # a read-only home only costs the recomputation
    return r.algebras, False


def _emit(args, text: str, data: dict) -> None:
    if args.format == "json":
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(text.rstrip("\n"))


def _report_data(q, report: CheckReport) -> dict:
    out = {"quasi_identity": print_quasi_identity(q), "verdict": report.verdict, "evaluations": report.stats.evaluations, "seconds": round(report.stats.seconds, 6)}
    if report.witness is not None:
        out["algebra"] = report.witness.algebra.name
        out["assignment"] = report.witness.labelled()
    return out


def _report_text(q, report: CheckReport, words=("valid", "invalid")) -> str:
    line = f"{words[0] if report.valid else words[1]}: {print_quasi_identity(q)}"
    if report.witness is not None:
        asg = " ".join(f"{v}={a}" for v, a in report.witness.labelled().items())
        line += f"\n  fails in {report.witness.algebra.name or f'algebra {report.witness.index}'} at {asg}"
    return line


def _read_qids(path: str, signature):
    p = Path(path)
    if not p.is_file():
        raise CLIError(f"no such file: {path}")
    qs = parse_quasi_identities(p.read_text(encoding="utf-8"), signature, source=path)
    if not qs:
        raise CLIError(f"{path} contains no quasi-identities")
    return qs


def cmd_check(args, ws: Workspace) -> int:
    refs = args.refs[:-1]
    if args.corpus and refs:
        raise CLIError("give either --corpus or algebra files, not both")
    K = [ws.algebra(r) for r in (args.corpus or refs)]
    if not K:
        raise CLIError("no algebras given")
    qs = _read_qids(args.refs[-1], K[0].signature)
    reports = [(q, check_validity(K, q)) for q in qs]
    _emit(args, "\n".join(_report_text(q, r) for q, r in reports), {"results": [_report_data(q, r) for q, r in reports]})
    return EXIT_OK if all(r.valid for _, r in reports) else EXIT_FAIL


def cmd_admissible(args, ws: Workspace) -> int:
    M, ego, s, hint, name = _target(ws, args)
    qs = _read_qids(args.qid, M.signature)
    extra: dict = {"route": args.via, "s": s}
    if args.via == "free":
        t = time.perf_counter()
        F = free_algebra(M, s, memory_budget=ws.memory_budget)
        extra.update(free_size=F.size, free_seconds=round(time.perf_counter() - t, 6))
        header = f"route: free, |F({name},{s})| = {F.size}"
        reports = [(q, is_admissible(M, s, q, via="free", free=F)) for q in qs]
    else:
        if ego is None:
            raise CLIError("--via test needs an alter ego (--ego)")
        tests, cached = tsm_test_algebras(M, ego, s, hint, args.size_cap, use_cache=not args.no_cache)
        extra.update(test_sizes=[A.size for A in tests], cached=cached)
        header = f"route: test, test algebras of sizes {[A.size for A in tests]}" + (" (cached)" if cached else "")
        reports = [(q, is_admissible(M, s, q, via="test", test_set=tests)) for q in qs]
        F = None
    lines = [header]
    data = []
    for q, r in reports:
        lines.append(_report_text(q, r, ("admissible", "not admissible")))
        lines.append(f"  evaluations {r.stats.evaluations}, {r.stats.seconds:.3f}s")
        d = _report_data(q, r)
        if F is not None and not r.valid:
            sigma = counterexample_substitution(r, F)
            lines.append("  substitution " + ", ".join(f"x{v} -> {print_term(t)}" for v, t in sigma.items()))
            d["substitution"] = {f"x{v}": print_term(t) for v, t in sigma.items()}
        data.append(d)
    _emit(args, "\n".join(lines), {**extra, "results": data})
    return EXIT_OK if all(r.valid for _, r in reports) else EXIT_FAIL


def cmd_tsm(args, ws: Workspace) -> int:
    M, ego, s, hint, name = _target(ws, args)
    if ego is None:
        raise CLIError("the test spaces method needs an alter ego (--ego)")
    r = test_spaces_method(M, ego, s, hint=hint, size_cap=args.size_cap)
    X = r.config.X
    lab = r.lattice.labelled()
    lines = [
        f"D({M.name or 'M'}): {r.dual.size} points: {' '.join(r.dual.label(i) for i in range(r.dual.size))}",
        f"X ({'hint' if hint is not None else 'search'}): {X.size} points: {' '.join(r.config.labels())}",
        "S_X:",
    ]
    for m, ji in zip(lab, r.lattice.join_irreducible):
        lines.append(f"  {{{', '.join(m)}}}" + ("  join-irreducible" if ji else ""))
    lines.append("maximal join-irreducibles: " + "; ".join("{" + ", ".join(X.label(i) for i in m) + "}" for m in r.maximal))
    lines.append(f"survivors: {[Z.size for Z in r.survivors]}" + (" (step 4 skipped)" if r.step4_skipped else ""))
    lines.append(f"E(X) sizes: {[A.size for A in r.algebras]}")
    docs = [print_algebra(A) for A in r.algebras]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for i, d in enumerate(docs):
            (out / f"{name}-E{i}.alg").write_text(d, encoding="utf-8")
        lines.append(f"wrote {len(docs)} algebra file(s) to {out}")
    else:
        lines.extend(docs)
    data = {
        "case": name,
        "s": s,
        "dual": [r.dual.label(i) for i in range(r.dual.size)],
        "X": r.config.labels(),
        "from_hint": hint is not None,
        "lattice": [{"members": m, "join_irreducible": ji} for m, ji in zip(lab, r.lattice.join_irreducible)],
        "survivors": [Z.size for Z in r.survivors],
        "algebras": docs,
        "timings": {k: round(v, 6) for k, v in r.timings.items()},
    }
    _emit(args, "\n".join(lines), data)
    return EXIT_OK


def cmd_mingenset(args, ws: Workspace) -> int:
    K = [ws.algebra(r) for r in args.refs]
    runs = {"dfs": min_gen_set_dfs, "bfs": min_gen_set_bfs}
    methods = ["dfs", "bfs"] if args.method == "both" else [args.method]
    results = {m: runs[m](K) for m in methods}
    lines, data = [], {}
    for m, G in results.items():
        lines.append(f"{m}: {len(G)} algebra(s) of sizes {[A.size for A in G]}")
        lines.extend(f"  {A.name or '?'} ({A.size})" for A in G)
        data[m] = [{"name": A.name, "size": A.size, "document": print_algebra(A)} for A in G]
    _emit(args, "\n".join(lines), data)
    return EXIT_OK


def cmd_subprehom(args, ws: Workspace) -> int:
    A, B = ws.algebra(args.A), ws.algebra(args.B)
    C, subset, h = sub_pre_hom(A, B)
    text = [f"smallest subalgebra of {A.name or args.A} onto {B.name or args.B}: {C.size} elements"]
    text.append("universe: " + " ".join(A.label(i) for i in subset))
    text.append("surjection: " + ", ".join(f"{C.label(i)} -> {B.label(h.map[i])}" for i in range(C.size)))
    text.append(print_algebra(C))
    _emit(args, "\n".join(text), {"size": C.size, "universe": [A.label(i) for i in subset], "surjection": [B.label(v) for v in h.map], "document": print_algebra(C)})
    return EXIT_OK


def cmd_dual(args, ws: Workspace) -> int:
    A = ws.algebra(args.A)
    ego = ws.ego(args.ego or _ego_for(A, args.A))
    D = dual_space(A, ego)
    doc = print_structure(D)
    _emit(args, f"# D({A.name or args.A}): {D.size} points\n" + doc, {"size": D.size, "document": doc})
    return EXIT_OK


def cmd_eval(args, ws: Workspace) -> int:
    ego = ws.ego(args.ego)
    X = ws.structure(args.X)
    EX = eval_functor(X, ego, name=f"E({X.name or 'X'})")
    doc = print_algebra(EX)
    _emit(args, f"# E({X.name or args.X}): {EX.size} elements\n" + doc, {"size": EX.size, "document": doc})
    return EXIT_OK


def _ego_for(A: FiniteAlgebra, ref: str) -> str:
    name = (A.name or ref) + "~"
    if name not in corpus.EGOS:
        raise CLIError(f"no corpus alter ego for {A.name or ref}; pass --ego")
    return name


def cmd_reproduce_table(args, ws: Workspace) -> int:
    rows = corpus.cases()
    if args.row:
        try:
            rows = [corpus.case(args.row)]
        except KeyError as exc:
            raise CLIError(exc.args[0]) from None
    cells = []

    def cell(row, what, got, want, note=""):
        ok = got == want
        cells.append({"row": row.key, "cell": what, "got": got, "expected": want, "pass": ok, "note": note})

    for row in rows:
        M = corpus.load_algebra(row.algebra)
        cell(row, "|M|", M.size, row.size)
        if not row.big or args.big:
            t = time.perf_counter()
            try:
                F = free_algebra(M, row.s, memory_budget=ws.memory_budget)
                cell(row, "|F(2)|", F.size, row.free, f"{time.perf_counter() - t:.1f}s")
            except BudgetExceeded as exc:
                cell(row, "|F(2)|", None, row.free, str(exc))
        ego = corpus.load_ego(row.ego)
        hint = None if args.search else row.load_hint()
        t = time.perf_counter()
        try:
            r = test_spaces_method(M, ego, row.s, hint=hint, size_cap=args.size_cap)
        except SearchExhausted as exc:
            cell(row, "|X|", None, row.X, str(exc))
            cell(row, "|E(X)|", None, row.EX, str(exc))
            continue
        note = f"{'hint' if hint is not None else 'search'}, {time.perf_counter() - t:.1f}s"
        cell(row, "|X|", r.config.X.size, row.X, note)
        sizes = [A.size for A in r.algebras]
        cell(row, "|E(X)|", sizes[0] if len(sizes) == 1 else sizes, row.EX, note)
    lines = [f"{'PASS' if c['pass'] else 'FAIL'}  {c['row']:<17} {c['cell']:<7} got {c['got']!s:<9} expected {c['expected']:<9} {c['note']}".rstrip() for c in cells]
    failed = sum(not c["pass"] for c in cells)
    lines.append(f"{len(cells) - failed}/{len(cells)} cells pass")
    _emit(args, "\n".join(lines), {"cells": cells})
    return EXIT_OK if not failed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text", help="output format (json is machine-readable)")
    common.add_argument("--mem", type=parse_size, default=DEFAULT_MEMORY_BUDGET, help="memory budget for free algebras, e.g. 8G")
    common.add_argument("--workers", type=int, default=None, help="accepted for compatibility; computations run single-threaded")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised choices")
    common.add_argument("-v", "--verbose", action="store_true")

    target = argparse.ArgumentParser(add_help=False)
    target.add_argument("--corpus", help="case key or corpus algebra name, e.g. de-morgan or D4")
    target.add_argument("--algebra", help="algebra reference instead of --corpus")
    target.add_argument("--ego", help="alter ego (.str file or corpus name)")
    target.add_argument("--s", type=int, default=None, help="number of free generators")
    target.add_argument("--hint", help="test-space hint (.ts file)")
    target.add_argument("--search", action="store_true", help="ignore bundled hints and search")
    target.add_argument("--size-cap", type=int, default=None, help="largest test space the search may consider")

    p = argparse.ArgumentParser(prog="natdual", description="Admissibility of quasi-identities via free algebras and natural dualities.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="validity of quasi-identities in algebras")
    c.add_argument("--corpus", action="append", help="corpus algebra (repeatable)")
    c.add_argument("refs", nargs="+", metavar="ALG... QID", help="algebra references followed by a .qid file")
    c.set_defaults(run=cmd_check)

    a = sub.add_parser("admissible", parents=[common, target], help="admissibility in ISP(M)")
    a.add_argument("qid", help=".qid file")
    a.add_argument("--via", choices=("free", "test"), default="test")
    a.add_argument("--no-cache", action="store_true", help="do not read or write the test-space cache")
    a.set_defaults(run=cmd_admissible)

    t = sub.add_parser("tsm", parents=[common, target], help="run the test spaces method")
    t.add_argument("--out", help="directory for the E(X) algebra files")
    t.set_defaults(run=cmd_tsm)

    m = sub.add_parser("mingenset", parents=[common], help="minimal generating set of ISP(K)")
    m.add_argument("refs", nargs="+", metavar="ALG")
    m.add_argument("--method", choices=("dfs", "bfs", "both"), default="dfs")
    m.set_defaults(run=cmd_mingenset)

    s = sub.add_parser("subprehom", parents=[common], help="smallest subalgebra of A mapping onto B")
    s.add_argument("A")
    s.add_argument("B")
    s.set_defaults(run=cmd_subprehom)

    d = sub.add_parser("dual", parents=[common], help="print the dual space D(A)")
    d.add_argument("A")
    d.add_argument("--ego")
    d.set_defaults(run=cmd_dual)

    e = sub.add_parser("eval", parents=[common], help="print E(X) for a structure X")
    e.add_argument("X", help=".str file")
    e.add_argument("--ego", required=True)
    e.set_defaults(run=cmd_eval)

    r = sub.add_parser("reproduce-table", parents=[common], help="recompute the case-study table")
    r.add_argument("--row", help="restrict to one case")
    r.add_argument("--big", action="store_true", help="include the free algebras with over a million elements")
    r.add_argument("--search", action="store_true", help="ignore bundled hints and search")
    r.add_argument("--size-cap", type=int, default=None)
    r.set_defaults(run=cmd_reproduce_table)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        import logging

        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s", stream=sys.stderr)
    ws = Workspace(args.mem)
    try:
        return args.run(args, ws)
    except (CLIError, AlgebraError, OSError) as exc:
        print(f"natdual: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
