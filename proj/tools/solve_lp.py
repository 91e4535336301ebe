#!/usr/bin/env python3
"""Solve a CPLEX-LP text file with scipy's MILP (HiGHS) and print JSON.

Usage: solve_lp.py model.lp
Handles the subset of the LP dialect used here: a Minimize objective,
linear <=, >=, = constraints, and a Binary section.
"""
import json
import re
import sys

import numpy as np
from scipy.optimize import LinearConstraint, milp
from scipy.sparse import lil_matrix

TERM = re.compile(r"([+-])?\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)?\s*([A-Za-z]\w*)")


def parse_terms(expr):
    """-> list of (coefficient, variable name)"""
    out = []
    for sign, coef, var in TERM.findall(expr):
        c = float(coef) if coef else 1.0
        if sign == "-":
            c = -c
        out.append((c, var))
    return out


def main(path):
    with open(path) as fh:
        text = fh.read()
    # Strip comments and fold continuation lines.
    text = re.sub(r"\\[^\n]*", "", text)
    sections = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        key = line.lower()
        if key in ("minimize", "maximize", "subject to", "st", "s.t.", "binary",
                   "binaries", "bounds", "general", "end"):
            current = key
            sections.setdefault(current, [])
            continue
        if current is None:
            raise ValueError(f"statement before any section: {line}")
        sections[current].append(line)

    obj_text = " ".join(sections.get("minimize", []))
    obj_text = obj_text.split(":", 1)[-1]
    obj_terms = parse_terms(obj_text)

    binaries = set()
    for line in sections.get("binary", []) + sections.get("binaries", []):
        binaries.update(line.split())

    cons_lines = []
    # Constraints may span lines; a new constraint starts at "name:".
    for line in sections.get("subject to", []):
        if ":" in line.split(" ", 1)[0] or re.match(r"^\w+\s*:", line):
            cons_lines.append(line.split(":", 1)[1])
        elif cons_lines:
            cons_lines[-1] += " " + line
        else:
            cons_lines.append(line)

    variables = {}

    def vid(name):
        return variables.setdefault(name, len(variables))

    for _, var in obj_terms:
        vid(var)

    parsed_cons = []
    for line in cons_lines:
        m = re.search(r"(<=|>=|=)", line)
        if not m:
            raise ValueError(f"constraint without relation: {line}")
        lhs, op, rhs = line[: m.start()], m.group(1), float(line[m.end():])
        terms = parse_terms(lhs)
        for _, var in terms:
            vid(var)
        parsed_cons.append((terms, op, rhs))
    for name in binaries:
        vid(name)

    nvar = len(variables)
    c = np.zeros(nvar)
    for coef, var in obj_terms:
        c[variables[var]] += coef

    a = lil_matrix((len(parsed_cons), nvar))
    lb = np.empty(len(parsed_cons))
    ub = np.empty(len(parsed_cons))
    for row, (terms, op, rhs) in enumerate(parsed_cons):
        for coef, var in terms:
            a[row, variables[var]] += coef
        lb[row] = rhs if op in ("=", ">=") else -np.inf
        ub[row] = rhs if op in ("=", "<=") else np.inf

    integrality = np.zeros(nvar)
    from scipy.optimize import Bounds

    blo = np.full(nvar, -np.inf)
    bhi = np.full(nvar, np.inf)
    for name in binaries:
        i = variables[name]
        integrality[i] = 1
        blo[i], bhi[i] = 0.0, 1.0

    res = milp(c=c, constraints=LinearConstraint(a.tocsr(), lb, ub),
               integrality=integrality, bounds=Bounds(blo, bhi))
    if not res.success:
        print(json.dumps({"status": res.status, "message": res.message}))
        return 1
    print(json.dumps({"status": "optimal", "objective": res.fun}))
    return 0


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print("usage: solve_lp.py model.lp", file=sys.stderr)
        sys.exit(2)
    sys.exit(main(sys.argv[1]))
