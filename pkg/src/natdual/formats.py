"""Plain-text formats for algebras (.alg), structures and alter egos (.str),
quasi-identities (.qid) and test-space hints (.ts).

All formats are line based, UTF-8, with ``#`` starting a comment.  The
grammars are documented in ``docs/formats.md``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from .algebra import AlgebraError, FiniteAlgebra, Signature
from .duality.structures import AlterEgo, FiniteStructure
from .duality.tsm import TSHint
from .terms import App, Identity, QuasiIdentity, Term, TermError, Var


class FormatError(AlgebraError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.message = message
        self.line = line
        self.source = source


def _tagged(parse):
    """Attach the source name to errors raised while parsing."""

    def wrapper(text, *args, source=None, **kwargs):
        try:
            return parse(text, *args, **kwargs)
        except FormatError as e:
            if source is None or e.source is not None:
                raise
            raise FormatError(e.message, e.line, source) from None

    wrapper.__name__ = parse.__name__
    wrapper.__doc__ = parse.__doc__
    return wrapper


_HEADER_RE = re.compile(r"^(\S+)/(\d+)$")


@dataclass
class _Line:
    no: int
    words: list[str]


def _lines(text: str) -> Iterator[_Line]:
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield _Line(no, body.split())


def _name_arity(tok: str, ln: _Line) -> tuple[str, int]:
    m = _HEADER_RE.match(tok)
    if not m:
        raise FormatError(f"expected NAME/ARITY, got {tok!r}", ln.no)
    return m.group(1), int(m.group(2))


class _Labels:
    def __init__(self, labels: Sequence[str], ln: _Line):
        if not labels:
            raise FormatError("empty element list", ln.no)
        if len(set(labels)) != len(labels):
            dup = next(x for x in labels if labels.count(x) > 1)
            raise FormatError(f"duplicate element label {dup!r}", ln.no)
        self.labels = tuple(labels)
        self.index = {x: i for i, x in enumerate(labels)}

    def __call__(self, tok: str, ln: _Line) -> int:
        try:
            return self.index[tok]
        except KeyError:
            raise FormatError(f"unknown element label {tok!r}", ln.no) from None


def _sections(text: str, keywords: set[str]) -> list[tuple[_Line, list[_Line]]]:
    out: list[tuple[_Line, list[_Line]]] = []
    for ln in _lines(text):
        if ln.words[0] in keywords:
            out.append((ln, []))
        elif not out:
            raise FormatError(f"unexpected {ln.words[0]!r} before any section", ln.no)
        else:
            out[-1][1].append(ln)
    return out


def _table_rows(rows: list[_Line], arity: int, lab: _Labels, name: str) -> dict[tuple[int, ...], int]:
    table: dict[tuple[int, ...], int] = {}
    for ln in rows:
        w = ln.words
        if arity == 0 and len(w) == 1:
            w = ["->", w[0]]
        if len(w) != arity + 2 or w[-2] != "->":
            raise FormatError(f"{name}: expected {arity} argument(s), '->' and a value", ln.no)
        args = tuple(lab(t, ln) for t in w[:arity])
        if args in table:
            raise FormatError(f"{name}: duplicate row for ({' '.join(w[:arity])})", ln.no)
        table[args] = lab(w[-1], ln)
    return table


def _covers_to_order(rows: list[_Line], lab: _Labels, n: int, name: str, head: _Line) -> np.ndarray:
    leq = np.eye(n, dtype=bool)
    for ln in rows:
        w = ln.words
        if len(w) < 3 or len(w) % 2 == 0 or any(t != "<" for t in w[1::2]):
            raise FormatError(f"{name}: expected 'x < y' (chains allowed)", ln.no)
        chain = [lab(t, ln) for t in w[0::2]]
        for a, b in zip(chain, chain[1:]):
            leq[a, b] = True
    # transitive closure
    for k in range(n):
        leq |= leq[:, k : k + 1] & leq[k : k + 1, :]
    if (leq & leq.T & ~np.eye(n, dtype=bool)).any():
        raise FormatError(f"{name}: covering pairs contain a cycle, not a partial order", head.no)
    return leq


def _lattice_tables(leq: np.ndarray, ln: _Line) -> tuple[np.ndarray, np.ndarray]:
    n = len(leq)
    meet = np.empty((n, n), dtype=np.int64)
    join = np.empty((n, n), dtype=np.int64)
    for a, b in itertools.product(range(n), repeat=2):
        lower = [c for c in range(n) if leq[c, a] and leq[c, b]]
        upper = [c for c in range(n) if leq[a, c] and leq[b, c]]
        glb = [c for c in lower if all(leq[d, c] for d in lower)]
        lub = [c for c in upper if all(leq[c, d] for d in upper)]
        if len(glb) != 1 or len(lub) != 1:
            raise FormatError("order given to 'lattice' is not a lattice", ln.no)
        meet[a, b], join[a, b] = glb[0], lub[0]
    return meet, join


@_tagged
def parse_algebra(text: str) -> FiniteAlgebra:
    """Parse an ``.alg`` document."""
    secs = _sections(text, {"algebra", "elements", "op", "lattice"})
    name = None
    lab: _Labels | None = None
    sig: list[tuple[str, int]] = []
    tables: dict[str, np.ndarray] = {}
    for head, rows in secs:
        kw = head.words[0]
        if kw == "algebra":
            if len(head.words) != 2 or rows:
                raise FormatError("expected 'algebra NAME'", head.no)
            name = head.words[1]
        elif kw == "elements":
            if lab is not None:
                raise FormatError("elements declared twice", head.no)
            lab = _Labels(head.words[1:] + [w for r in rows for w in r.words], head)
        else:
            if lab is None:
                raise FormatError("elements must come before operations", head.no)
            n = len(lab.labels)
            if kw == "lattice":
                if len(head.words) != 3:
                    raise FormatError("expected 'lattice MEET JOIN'", head.no)
                leq = _covers_to_order(rows, lab, n, "lattice", head)
                meet, join = _lattice_tables(leq, head)
                for op, t in ((head.words[1], meet), (head.words[2], join)):
                    _declare(sig, op, 2, head)
                    tables[op] = t
                continue
            if len(head.words) != 2:
                raise FormatError("expected 'op NAME/ARITY'", head.no)
            op, ar = _name_arity(head.words[1], head)
            _declare(sig, op, ar, head)
            table = _table_rows(rows, ar, lab, op)
            arr = np.empty((n,) * ar, dtype=np.int64)
            for args in itertools.product(range(n), repeat=ar):
                if args not in table:
                    shown = " ".join(lab.labels[a] for a in args) or "(no arguments)"
                    raise FormatError(f"{op}: missing row for {shown}", head.no)
                arr[args] = table[args]
            tables[op] = arr
    if lab is None:
        raise FormatError("no elements declared")
    return FiniteAlgebra(Signature.of(*sig), len(lab.labels), tables, lab.labels, name)


def _declare(sig: list[tuple[str, int]], op: str, ar: int, ln: _Line) -> None:
    for other, oar in sig:
        if other == op:
            if oar != ar:
                raise FormatError(f"arity clash for {op!r}: {oar} and {ar}", ln.no)
            raise FormatError(f"operation {op!r} declared twice", ln.no)
    sig.append((op, ar))


def print_algebra(A: FiniteAlgebra) -> str:
    labels = [A.label(i) for i in range(A.size)]
    out = [f"algebra {A.name}" if A.name else "algebra unnamed", "elements " + " ".join(labels)]
    for op, ar in A.signature:
        out.append(f"op {op}/{ar}")
        t = A.tables[op]
        for args in itertools.product(range(A.size), repeat=ar):
            lhs = " ".join(labels[a] for a in args)
            out.append(f"  {lhs} -> {labels[int(t[args])]}" if ar else f"  -> {labels[int(t[args])]}")
    return "\n".join(out) + "\n"


@_tagged
def parse_structure(text: str, algebras: Mapping[str, FiniteAlgebra] | Callable[[str], FiniteAlgebra] | None = None) -> FiniteStructure | AlterEgo:
    """Parse a ``.str`` document: a plain structure, or with the header
    ``alterego NAME over ALGEBRA`` an alter ego whose base is looked up in
    ``algebras``."""
    secs = _sections(text, {"structure", "alterego", "elements", "op", "partial", "relation", "order"})
    name = None
    base_name = None
    lab: _Labels | None = None
    ops: dict[str, np.ndarray] = {}
    partials: dict[str, tuple[int, dict]] = {}
    relations: dict[str, tuple[int, frozenset]] = {}
    used: dict[str, int] = {}
    for head, rows in secs:
        kw = head.words[0]
        if kw == "structure":
            if len(head.words) != 2 or rows:
                raise FormatError("expected 'structure NAME'", head.no)
            name = head.words[1]
            continue
        if kw == "alterego":
            if len(head.words) != 4 or head.words[2] != "over" or rows:
                raise FormatError("expected 'alterego NAME over ALGEBRA'", head.no)
            name, base_name = head.words[1], head.words[3]
            continue
        if kw == "elements":
            if lab is not None:
                raise FormatError("elements declared twice", head.no)
            lab = _Labels(head.words[1:] + [w for r in rows for w in r.words], head)
            continue
        if lab is None:
            raise FormatError("elements must come before symbols", head.no)
        n = len(lab.labels)
        if kw == "order":
            if len(head.words) != 2:
                raise FormatError("expected 'order NAME'", head.no)
            sym, ar = head.words[1], 2
        else:
            if len(head.words) != 2:
                raise FormatError(f"expected '{kw} NAME/ARITY'", head.no)
            sym, ar = _name_arity(head.words[1], head)
        if sym in used:
            raise FormatError(f"symbol {sym!r} declared twice", head.no)
        used[sym] = ar
        if kw == "op":
            table = _table_rows(rows, ar, lab, sym)
            if ar == 0:
                raise FormatError("nullary operations are not supported on structures", head.no)
            arr = np.empty((n,) * ar, dtype=np.int64)
            for args in itertools.product(range(n), repeat=ar):
                if args not in table:
                    raise FormatError(f"{sym}: missing row for {' '.join(lab.labels[a] for a in args)}", head.no)
                arr[args] = table[args]
            ops[sym] = arr
        elif kw == "partial":
            partials[sym] = (ar, _table_rows(rows, ar, lab, sym))
        elif kw == "relation":
            if ar < 1:
                raise FormatError("relations need arity >= 1", head.no)
            tuples = set()
            for ln in rows:
                if len(ln.words) != ar:
                    raise FormatError(f"{sym}: expected {ar} labels per tuple", ln.no)
                t = tuple(lab(w, ln) for w in ln.words)
                if t in tuples:
                    raise FormatError(f"{sym}: duplicate tuple", ln.no)
                tuples.add(t)
            relations[sym] = (ar, frozenset(tuples))
        else:
            leq = _covers_to_order(rows, lab, n, sym, head)
            relations[sym] = (2, frozenset(zip(*map(lambda a: a.tolist(), np.nonzero(leq)))))
    if lab is None:
        raise FormatError("no elements declared")
    X = FiniteStructure(len(lab.labels), ops, partials, relations, lab.labels, None, name)
    if base_name is None:
        return X
    if algebras is None:
        raise FormatError(f"alter ego over {base_name!r} but no algebras supplied")
    try:
        base = algebras(base_name) if callable(algebras) else algebras[base_name]
    except KeyError:
        raise FormatError(f"unknown algebra {base_name!r}") from None
    if base.labels is not None and tuple(base.labels) != lab.labels:
        raise FormatError(f"alter ego elements {' '.join(lab.labels)} differ from {base_name}'s")
    return AlterEgo(base, X, name)


def _is_partial_order(n: int, ts: frozenset) -> bool:
    if any((a, a) not in ts for a in range(n)):
        return False
    for a, b in ts:
        if a != b and (b, a) in ts:
            return False
    for a, b in ts:
        for c in range(n):
            if (b, c) in ts and (a, c) not in ts:
                return False
    return True


def print_structure(X: FiniteStructure | AlterEgo) -> str:
    if isinstance(X, AlterEgo):
        S = X.structure
        out = [f"alterego {X.name or 'unnamed'} over {X.base.name or 'unnamed'}"]
    else:
        S = X
        out = [f"structure {S.name or 'unnamed'}"]
    labels = [S.label(i) for i in range(S.size)]
    out.append("elements " + " ".join(labels))
    for op, t in S.ops.items():
        out.append(f"op {op}/{t.ndim}")
        for args in itertools.product(range(S.size), repeat=t.ndim):
            out.append("  " + " ".join(labels[a] for a in args) + f" -> {labels[int(t[args])]}")
    for op, (k, g) in S.partials.items():
        out.append(f"partial {op}/{k}")
        for args in sorted(g):
            out.append("  " + " ".join(labels[a] for a in args) + f" -> {labels[g[args]]}")
    for r, (k, ts) in S.relations.items():
        if k == 2 and _is_partial_order(S.size, ts):
            out.append(f"order {r}")
            for a, b in sorted(ts):
                if a != b and not any((a, c) in ts and (c, b) in ts for c in range(S.size) if c not in (a, b)):
                    out.append(f"  {labels[a]} < {labels[b]}")
        else:
            out.append(f"relation {r}/{k}")
            for t in sorted(ts):
                out.append("  " + " ".join(labels[a] for a in t))
    return "\n".join(out) + "\n"


# quasi-identities

_TOKEN_RE = re.compile(r"\s*(=>|[(),=]|[^\s(),=]+)")
_VAR_RE = re.compile(r"^x(\d+)$")


def _tokenize(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise FormatError(f"cannot tokenize at column {pos + 1}")
        out.append((m.group(1), m.start(1) + 1))
        pos = m.end()
    return out


class _TermParser:
    def __init__(self, text: str, signature: Signature | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = signature
        self.seen: dict[str, int] = {}

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def col(self) -> int:
        return self.toks[self.i][1] if self.i < len(self.toks) else (self.toks[-1][1] + 1 if self.toks else 1)

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise FormatError(f"unexpected end of input{'; expected ' + repr(expected) if expected else ''}")
        if expected is not None and tok != expected:
            raise FormatError(f"expected {expected!r} at column {self.col()}, found {tok!r}")
        self.i += 1
        return tok

    def arity(self, op: str, n: int, col: int) -> None:
        if self.sig is not None:
            if op not in self.sig:
                raise FormatError(f"unknown operation {op!r} at column {col}")
            if self.sig.arity(op) != n:
                raise FormatError(f"{op!r} has arity {self.sig.arity(op)}, used with {n} argument(s) at column {col}")
        else:
            prev = self.seen.setdefault(op, n)
            if prev != n:
                raise FormatError(f"{op!r} used with {prev} and {n} arguments")

    def term(self) -> Term:
        col = self.col()
        tok = self.take()
        if tok == "(":
            left = self.term()
            op_col = self.col()
            op = self.take()
            if op in ("(", ")", ",", "=", "=>"):
                raise FormatError(f"expected an operation name at column {op_col}")
            right = self.term()
            self.take(")")
            self.arity(op, 2, op_col)
            return App(op, (left, right))
        if tok in (")", ",", "=", "=>"):
            raise FormatError(f"unexpected {tok!r} at column {col}")
        m = _VAR_RE.match(tok)
        if m and (self.sig is None or tok not in self.sig):
            return Var(int(m.group(1)))
        if self.peek() == "(":
            self.take("(")
            args = [self.term()]
            while self.peek() == ",":
                self.take(",")
                args.append(self.term())
            self.take(")")
            self.arity(tok, len(args), col)
            return App(tok, tuple(args))
        self.arity(tok, 0, col)
        return App(tok, ())

    def identity(self) -> Identity:
        lhs = self.term()
        self.take("=")
        return Identity(lhs, self.term())


def parse_term(text: str, signature: Signature | None = None) -> Term:
    p = _TermParser(text, signature)
    t = p.term()
    if p.peek() is not None:
        raise FormatError(f"trailing input at column {p.col()}")
    return t


def parse_quasi_identity(text: str, signature: Signature | None = None) -> QuasiIdentity:
    """``p1 = q1, ..., pk = qk => l = r``; the premise list may be empty."""
    p = _TermParser(text, signature)
    if not any(tok == "=>" for tok, _ in p.toks):
        raise FormatError("missing '=>'")
    premises = []
    if p.peek() != "=>":
        premises.append(p.identity())
        while p.peek() == ",":
            p.take(",")
            premises.append(p.identity())
    if p.peek() != "=>":
        raise FormatError(f"malformed arrow: expected '=>' at column {p.col()}")
    p.take("=>")
    concl = p.identity()
    if p.peek() is not None:
        raise FormatError(f"trailing input at column {p.col()}")
    q = QuasiIdentity(tuple(premises), concl)
    if signature is not None:
        try:
            q.check(signature)
        except TermError as e:
            raise FormatError(str(e)) from None
    return q


@_tagged
def parse_quasi_identities(text: str, signature: Signature | None = None) -> list[QuasiIdentity]:
    """One quasi-identity per non-empty line."""
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            out.append(parse_quasi_identity(body, signature))
        except FormatError as e:
            raise FormatError(e.message, no) from None
    return out


def print_term(t: Term) -> str:
    return str(t)


def print_quasi_identity(q: QuasiIdentity) -> str:
    prem = ", ".join(f"{p.lhs} = {p.rhs}" for p in q.premises)
    concl = f"{q.conclusion.lhs} = {q.conclusion.rhs}"
    return f"{prem} => {concl}" if prem else f"=> {concl}"


# test-space hints


def _split_point(tok: str, M: FiniteAlgebra, width: int, ln: _Line) -> tuple[int, ...]:
    if tok.startswith("(") and tok.endswith(")"):
        parts = tok[1:-1].split(",")
    elif len(tok) == width:
        parts = list(tok)
    else:
        raise FormatError(f"cannot split {tok!r} into {width} element labels", ln.no)
    if len(parts) != width:
        raise FormatError(f"{tok!r} should have {width} components", ln.no)
    try:
        return tuple(M.element(p) for p in parts)
    except AlgebraError:
        raise FormatError(f"unknown element label in {tok!r}", ln.no) from None


def _join_point(M: FiniteAlgebra, t: Sequence[int]) -> str:
    labs = [M.label(v) for v in t]
    return "".join(labs) if all(len(x) == 1 for x in labs) else "(" + ",".join(labs) + ")"


@dataclass(frozen=True)
class HintDocument:
    name: str
    ego: str
    s: int
    hint: TSHint


@_tagged
def parse_hint(text: str, M: FiniteAlgebra) -> HintDocument:
    """Parse a ``.ts`` document naming the points of a test space in
    ``M~^s`` and optionally the images under gamma and eta."""
    secs = _sections(text, {"testspace", "s", "points", "gamma", "eta"})
    name = ego = None
    s = None
    points: list[tuple[int, ...]] = []
    gamma: dict | None = None
    eta: dict | None = None
    for head, rows in secs:
        kw = head.words[0]
        if kw == "testspace":
            if len(head.words) != 4 or head.words[2] != "over" or rows:
                raise FormatError("expected 'testspace NAME over EGO'", head.no)
            name, ego = head.words[1], head.words[3]
        elif kw == "s":
            if len(head.words) != 2 or not head.words[1].isdigit() or rows:
                raise FormatError("expected 's N'", head.no)
            s = int(head.words[1])
        elif s is None:
            raise FormatError("'s' must come first", head.no)
        elif kw == "points":
            toks = head.words[1:] + [w for r in rows for w in r.words]
            points = [_split_point(t, M, s, head) for t in toks]
        else:
            table: dict[tuple[int, ...], tuple[int, ...]] = {}
            width = s if kw == "gamma" else M.size
            for ln in rows:
                w = ln.words
                if len(w) < 3 or w[-2] != "->":
                    raise FormatError(f"{kw}: expected 'p q ... -> x'", ln.no)
                img = _split_point(w[-1], M, s, ln)
                for tok in w[:-2]:
                    key = _split_point(tok, M, width, ln)
                    if key in table:
                        raise FormatError(f"{kw}: {tok} listed twice", ln.no)
                    table[key] = img
            if kw == "gamma":
                gamma = table
            else:
                eta = table
    if name is None or s is None or not points:
        raise FormatError("hint needs 'testspace', 's' and 'points'")
    return HintDocument(name, ego, s, TSHint(tuple(points), gamma, eta))


def print_hint(doc: HintDocument, M: FiniteAlgebra) -> str:
    h = doc.hint
    out = [f"testspace {doc.name} over {doc.ego}", f"s {doc.s}", "points " + " ".join(_join_point(M, p) for p in h.points)]
    for kw, table in (("gamma", h.gamma), ("eta", h.eta)):
        if table is None:
            continue
        out.append(kw)
        by_img: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
        for k, v in table.items():
            by_img.setdefault(v, []).append(k)
        for img in sorted(by_img):
            out.append("  " + " ".join(_join_point(M, k) for k in sorted(by_img[img])) + f" -> {_join_point(M, img)}")
    return "\n".join(out) + "\n"
