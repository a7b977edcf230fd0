"""CPLEX-style LP text files and ``name value`` solution files."""

from __future__ import annotations

import math
import re

import numpy as np
import scipy.sparse as sp

from ..model import ProblemInstance


class LPFormatError(ValueError):
    pass


TERMS_PER_LINE = 8


def _num(v: float) -> str:
    if v == math.inf:
        return "+inf"
    if v == -math.inf:
        return "-inf"
    return "%.17g" % v


def _terms(pairs) -> list[str]:
    out = []
    for name, coef in pairs:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        out.append(f"{sign} {name}" if mag == 1 else f"{sign} {_num(mag)} {name}")
    return out


def _wrap(head: str, terms: list[str], tail: str = "") -> list[str]:
    lines = []
    for i in range(0, max(len(terms), 1), TERMS_PER_LINE):
        chunk = " ".join(terms[i:i + TERMS_PER_LINE])
        lines.append((" " + head + " " if i == 0 else "   ") + chunk)
    if tail:
        lines[-1] += " " + tail
    return lines


def write_lp_file(instance: ProblemInstance) -> str:
    names = instance.names
    lines = ["\\ rebalancing dispatch model", "Maximize"]
    nz = np.flatnonzero(instance.c)
    obj = _terms((names[j], instance.c[j]) for j in nz) or [f"0 {names[0]}"]
    lines += _wrap("obj:", obj)

    lines.append("Subject To")
    A = sp.csr_matrix(instance.A)
    for i in range(instance.n_rows):
        s, e = A.indptr[i], A.indptr[i + 1]
        pairs = [(names[j], v) for j, v in zip(A.indices[s:e], A.data[s:e]) if v != 0]
        terms = _terms(pairs) or [f"0 {names[0]}"]
        lines += _wrap(f"{instance.row_names[i]}:", terms,
                       f"{instance.senses[i]} {_num(instance.rhs[i])}")

    lines.append("Bounds")
    for j, name in enumerate(names):
        lo, hi = instance.lb[j], instance.ub[j]
        if instance.integer[j] and lo == 0 and hi == 1:
            continue
        if lo == hi:
            lines.append(f" {name} = {_num(lo)}")
        elif lo == -math.inf and hi == math.inf:
            lines.append(f" {name} free")
        elif lo == 0 and hi == math.inf:
            continue
        else:
            lines.append(f" {_num(lo)} <= {name} <= {_num(hi)}")

    ints = [names[j] for j in np.flatnonzero(instance.integer)]
    if ints:
        lines.append("Binary")
        lines += [" " + n for n in ints]
    lines.append("End")
    return "\n".join(lines) + "\n"


_SECTIONS = {
    "maximize": "obj", "maximise": "obj", "max": "obj",
    "minimize": "objmin", "minimise": "objmin", "min": "objmin",
    "subject to": "rows", "such that": "rows", "st": "rows", "s.t.": "rows",
    "bounds": "bounds", "binary": "binary", "binaries": "binary", "bin": "binary",
    "end": "end",
}
_TOKEN = re.compile(r"<=|>=|=<|=>|=|[+-]|(?:\d+\.?\d*|\.\d+)[eE][+-]?\d+|[^\s+\-<>=]+")


def _parse_float(tok: str) -> float:
    low = tok.lower()
    if low in ("inf", "+inf", "infinity"):
        return math.inf
    if low in ("-inf", "-infinity"):
        return -math.inf
    return float(tok)


def _is_number(tok: str) -> bool:
    try:
        _parse_float(tok)
        return True
    except ValueError:
        return False


def _linear(tokens, lineno):
    """Parse ``[+-] [coef] name ...`` into (name, coef) pairs."""
    pairs = []
    sign, coef = 1.0, None
    for tok in tokens:
        if tok in "+-":
            sign = -sign if tok == "-" else sign
        elif _is_number(tok) and coef is None:
            coef = _parse_float(tok)
        else:
            pairs.append((tok, sign * (1.0 if coef is None else coef)))
            sign, coef = 1.0, None
    if coef is not None and pairs == []:
        return []  # a bare "0" term
    return pairs


def read_lp_file(text: str) -> ProblemInstance:
    """Parse the subset of the LP format produced by ``write_lp_file``."""
    section = None
    statements = {"obj": [], "rows": [], "bounds": [], "binary": []}
    sense = 1.0
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTIONS:
            section = _SECTIONS[key]
            if section == "objmin":
                section, sense = "obj", -1.0
            current = None
            continue
        if section is None or section == "end":
            raise LPFormatError(f"line {lineno}: text outside of a section")
        if section in ("obj", "rows"):
            starts_new = ":" in line or current is None
            if starts_new:
                current = [lineno, line]
                statements[section].append(current)
            else:
                current[1] += " " + line
        else:
            statements[section].append([lineno, line])

    order: dict[str, int] = {}

    def var(name):
        if name not in order:
            order[name] = len(order)
        return order[name]

    c_pairs = []
    for lineno, stmt in statements["obj"]:
        body = stmt.split(":", 1)[1] if ":" in stmt else stmt
        c_pairs += [(var(n), v) for n, v in _linear(_TOKEN.findall(body), lineno)]

    rows, senses, rhs, row_names = [], [], [], []
    for k, (lineno, stmt) in enumerate(statements["rows"]):
        name, body = (stmt.split(":", 1) if ":" in stmt else (f"r{k + 1}", stmt))
        toks = _TOKEN.findall(body)
        ops = [i for i, t in enumerate(toks) if t in ("<=", ">=", "=", "=<", "=>")]
        if len(ops) != 1:
            raise LPFormatError(f"line {lineno}: expected one comparison operator")
        i = ops[0]
        op = {"=<": "<=", "=>": ">="}.get(toks[i], toks[i])
        try:
            value = _parse_float("".join(toks[i + 1:]))
        except ValueError:
            raise LPFormatError(f"line {lineno}: bad right-hand side") from None
        rows.append([(var(n), v) for n, v in _linear(toks[:i], lineno)])
        senses.append(op)
        rhs.append(value)
        row_names.append(name.strip())

    bounds = {}
    for lineno, stmt in statements["bounds"]:
        toks = stmt.split()
        try:
            if len(toks) == 2 and toks[1].lower() == "free":
                bounds[var(toks[0])] = (-math.inf, math.inf)
            elif len(toks) == 5 and toks[1] in ("<=", "=<") and toks[3] in ("<=", "=<"):
                bounds[var(toks[2])] = (_parse_float(toks[0]), _parse_float(toks[4]))
            elif len(toks) == 3 and toks[1] == "=":
                v = _parse_float(toks[2])
                bounds[var(toks[0])] = (v, v)
            elif len(toks) == 3 and toks[1] in (">=", "=>"):
                lo, hi = bounds.get(var(toks[0]), (0.0, math.inf))
                bounds[var(toks[0])] = (_parse_float(toks[2]), hi)
            elif len(toks) == 3 and toks[1] in ("<=", "=<"):
                lo, hi = bounds.get(var(toks[0]), (0.0, math.inf))
                bounds[var(toks[0])] = (lo, _parse_float(toks[2]))
            else:
                raise ValueError
        except ValueError:
            raise LPFormatError(f"line {lineno}: cannot parse bound {stmt!r}") from None

    binaries = []
    for lineno, stmt in statements["binary"]:
        binaries += [var(t) for t in stmt.split()]

    n = len(order)
    c = np.zeros(n)
    for j, v in c_pairs:
        c[j] += sense * v
    lb, ub = np.zeros(n), np.full(n, math.inf)
    integer = np.zeros(n, dtype=bool)
    for j in binaries:
        integer[j] = True
        lb[j], ub[j] = 0.0, 1.0
    for j, (lo, hi) in bounds.items():
        lb[j], ub[j] = lo, hi
    A = sp.lil_matrix((len(rows), n))
    for i, pairs in enumerate(rows):
        for j, v in pairs:
            A[i, j] += v
    return ProblemInstance(
        names=tuple(order), lb=lb, ub=ub, integer=integer, c=c, A=A.tocsr(),
        senses=tuple(senses), rhs=np.array(rhs, dtype=float), row_names=tuple(row_names))


def parse_solution_file(text: str, names=None) -> dict:
    """Read ``name value`` lines; ``#`` starts a comment.

    A comment of the form ``# status: infeasible`` is reported under the
    key ``"#status"``.
    """
    known = None if names is None else set(names)
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped.startswith("#"):
            m = re.match(r"#\s*status\s*:?\s*(\S+)", stripped, re.IGNORECASE)
            if m:
                out["#status"] = m.group(1).lower()
            continue
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise LPFormatError(f"line {lineno}: expected 'name value', got {line!r}")
        name, val = parts
        try:
            value = float(val)
        except ValueError:
            raise LPFormatError(f"line {lineno}: value {val!r} is not a number") from None
        if known is not None and name not in known:
            raise LPFormatError(f"line {lineno}: unknown variable {name!r}")
        out[name] = value
    return out


def format_solution(names, values, status: str = "optimal") -> str:
    lines = [f"# status: {status}"]
    lines += [f"{n} {_num(float(v))}" for n, v in zip(names, values)]
    return "\n".join(lines) + "\n"
