#!/usr/bin/env python3
"""Solve an emitted assignment-relaxation model with SciPy's HiGHS backend.

Reads the LP subset produced by `mpisp ub --emit-lp PATH`: one Maximize
objective, `<=` rows, `name = 0` fixed bounds, and a Binaries list. Prints a
JSON object with the optimal objective value.

Usage: solve_lp.py MODEL.lp
"""

import json
import re
import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

_TOKEN = re.compile(
    r"[A-Za-z_][A-Za-z0-9_]*"  # variable / label name
    r"|[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?"  # non-negative number
    r"|<=|>=|=|:|\+|-"
)


def split_sections(text):
    sections = {"objective": [], "subject": [], "bounds": [], "binaries": []}
    current = None
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("\\"):
            continue
        low = stripped.lower()
        if low == "maximize":
            current = "objective"
        elif low == "subject to":
            current = "subject"
        elif low == "bounds":
            current = "bounds"
        elif low in ("binaries", "binary"):
            current = "binaries"
        elif low == "end":
            current = None
        elif current is not None and stripped:
            sections[current].append(line)
    return sections


def rows_of(lines):
    """Joins continuation lines: a new row starts at a `name:` line."""
    rows, buf = [], []
    for line in lines:
        if re.match(r"\s*[A-Za-z_][A-Za-z0-9_]*\s*:", line) and buf:
            rows.append(" ".join(buf))
            buf = []
        buf.append(line)
    if buf:
        rows.append(" ".join(buf))
    return rows


class Model:
    def __init__(self):
        self.index = {}
        self.obj = []

    def var(self, name):
        if name not in self.index:
            self.index[name] = len(self.index)
            self.obj.append(0.0)
        return self.index[name]


def parse_terms(tokens, model):
    """Parses `[coef] name + [coef] name ...`; returns [(var, coef)]."""
    terms = []
    coef = None
    for tok in tokens:
        if tok == "+":
            continue
        if re.match(r"^[0-9.]", tok):
            if coef is not None:
                raise ValueError(f"two consecutive numbers near {tok!r}")
            coef = float(tok)
        else:
            terms.append((model.var(tok), 1.0 if coef is None else coef))
            coef = None
    if coef is not None:
        raise ValueError("dangling coefficient")
    return terms


def main():
    if len(sys.argv) != 2:
        print(__doc__.strip(), file=sys.stderr)
        return 1
    path = sys.argv[1]
    with open(path) as fh:
        sections = split_sections(fh.read())

    model = Model()

    obj_rows = rows_of(sections["objective"])
    if len(obj_rows) != 1:
        raise ValueError("expected exactly one objective")
    obj_tokens = _TOKEN.findall(obj_rows[0].split(":", 1)[1])
    for var, coef in parse_terms(obj_tokens, model):
        model.obj[var] = coef

    row_entries = []  # (row, var, coef)
    row_rhs = []
    for row_text in rows_of(sections["subject"]):
        _, expr = row_text.split(":", 1)
        tokens = _TOKEN.findall(expr)
        if "<=" not in tokens:
            raise ValueError(f"row without <=: {row_text[:60]!r}")
        cut = tokens.index("<=")
        rhs_tokens = tokens[cut + 1 :]
        if len(rhs_tokens) != 1:
            raise ValueError(f"bad rhs in {row_text[:60]!r}")
        r = len(row_rhs)
        row_rhs.append(float(rhs_tokens[0]))
        for var, coef in parse_terms(tokens[:cut], model):
            row_entries.append((r, var, coef))

    fixed = set()
    for line in sections["bounds"]:
        tokens = _TOKEN.findall(line)
        if len(tokens) == 3 and tokens[1] == "=" and float(tokens[2]) == 0.0:
            fixed.add(model.var(tokens[0]))
        else:
            raise ValueError(f"unsupported bound: {line.strip()!r}")

    for line in sections["binaries"]:
        for name in _TOKEN.findall(line):
            model.var(name)

    nv = len(model.index)
    c = -np.array(model.obj)  # milp minimises
    lb = np.zeros(nv)
    ub = np.ones(nv)
    for v in fixed:
        ub[v] = 0.0

    constraints = []
    if row_rhs:
        rows = np.array([e[0] for e in row_entries])
        cols = np.array([e[1] for e in row_entries])
        vals = np.array([e[2] for e in row_entries])
        a = sparse.coo_matrix((vals, (rows, cols)), shape=(len(row_rhs), nv))
        constraints.append(LinearConstraint(a, -np.inf, np.array(row_rhs)))

    res = milp(
        c=c,
        constraints=constraints,
        integrality=np.ones(nv),
        bounds=Bounds(lb, ub),
    )
    report = {
        "file": path,
        "status": "optimal" if res.status == 0 else f"status_{res.status}",
        "objective": None if res.fun is None else -res.fun,
        "vars": nv,
        "rows": len(row_rhs),
    }
    print(json.dumps(report, indent=2))
    return 0 if res.status == 0 else 2


if __name__ == "__main__":
    sys.exit(main())
