"""Line-oriented text format for method coefficients.

Example::

    # comments start with '#'
    name eSSP-EIS(2,3)_2
    s 2
    p 2
    P 3
    kind EIS
    family ssp
    ssp_coeff 1.5
    D:
    0.4375 0.5625
    0.4375 0.5625
    A:
    ...

Blocks ``D:``, ``A:``, ``Ahat:``, ``R:``, ``Rhat:`` hold ``s`` rows of ``s``
numbers; an optional ``tau:`` block holds one row of ``s`` numbers. Numbers
are written with ``repr`` so that saving and loading is bitwise exact.
"""
from __future__ import annotations

import numpy as np

from .errors import (
    InconsistentAbscissas,
    InvariantViolation,
    NonUniqueAbscissas,
    ParseError,
)
from .tableau import STRUCTURE_TOL, Kind, MethodTableau, rank_one_defect

MATRIX_BLOCKS = ("D", "A", "Ahat", "R", "Rhat")
SCALARS = {"name": str, "s": int, "p": int, "P": int, "kind": str, "family": str,
           "ssp_coeff": float}
REQUIRED = ("name", "s", "p", "P", "kind", "family")


def _number(tok, lineno):
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"not a number: {tok!r}", lineno) from None


def _lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def load_tableau(text: str) -> MethodTableau:
    """Parse and validate a tableau; raises ParseError or InvariantViolation."""
    lines = list(_lines(text))
    if not lines:
        raise ParseError("empty tableau file", 1)
    meta: dict = {}
    blocks: dict = {}
    i = 0
    while i < len(lines):
        lineno, line = lines[i]
        if line.endswith(":"):
            key = line[:-1].strip()
            if key not in MATRIX_BLOCKS and key != "tau":
                raise ParseError(f"unknown block {key!r}", lineno)
            if key in blocks:
                raise ParseError(f"duplicate block {key!r}", lineno)
            if "s" not in meta:
                raise ParseError("'s' must appear before coefficient blocks", lineno)
            s = meta["s"]
            nrows = 1 if key == "tau" else s
            rows = []
            for _ in range(nrows):
                i += 1
                if i >= len(lines):
                    raise ParseError(f"block {key!r} ends early", lineno)
                rl, row_text = lines[i]
                row = [_number(t, rl) for t in row_text.split()]
                if len(row) != s:
                    raise ParseError(f"expected {s} numbers, got {len(row)}", rl)
                rows.append(row)
            blocks[key] = rows[0] if key == "tau" else rows
        else:
            key, _, value = line.partition(" ")
            value = value.strip()
            if key not in SCALARS:
                raise ParseError(f"unknown key {key!r}", lineno)
            if key in meta:
                raise ParseError(f"duplicate key {key!r}", lineno)
            if not value:
                raise ParseError(f"missing value for {key!r}", lineno)
            try:
                meta[key] = SCALARS[key](value)
            except ValueError:
                raise ParseError(f"bad value for {key!r}: {value!r}", lineno) from None
            if key == "s" and meta["s"] < 1:
                raise ParseError("s must be positive", lineno)
        i += 1
    last = lines[-1][0]
    for key in REQUIRED:
        if key not in meta:
            raise ParseError(f"missing key {key!r}", last)
    for key in MATRIX_BLOCKS:
        if key not in blocks:
            raise ParseError(f"missing block {key!r}", last)
    try:
        kind = Kind(meta["kind"])
    except ValueError:
        raise ParseError(f"kind must be EIS or EIS+, got {meta['kind']!r}", None) from None
    if meta["family"] not in ("explicit", "ssp", "implicit"):
        raise ParseError(f"unknown family {meta['family']!r}", None)
    expected_P = meta["p"] + (1 if kind is Kind.EIS else 2)
    if meta["P"] != expected_P:
        raise InvariantViolation("orders", f"P must be {expected_P} for {kind.value} with p={meta['p']}")
    D = np.array(blocks["D"])
    if np.max(np.abs(D.sum(axis=1) - 1.0)) > STRUCTURE_TOL:
        raise InvariantViolation("consistency", "row sums of D differ from 1")
    if rank_one_defect(D) > STRUCTURE_TOL:
        raise InvariantViolation("rank_one", "rows of D are not identical")
    try:
        tab = MethodTableau(
            name=meta["name"], p=meta["p"], P=meta["P"], kind=kind, family=meta["family"],
            ssp_coefficient=meta.get("ssp_coeff"), stored_tau=blocks.get("tau"),
            **{k: blocks[k] for k in MATRIX_BLOCKS},
        )
    except (InconsistentAbscissas, NonUniqueAbscissas) as exc:
        raise InvariantViolation("abscissas", str(exc)) from exc
    return tab.validate()


def save_tableau(tab: MethodTableau) -> str:
    out = [
        f"name {tab.name}",
        f"s {tab.s}",
        f"p {tab.p}",
        f"P {tab.P}",
        f"kind {tab.kind.value}",
        f"family {tab.family.value}",
    ]
    if tab.ssp_coefficient is not None:
        out.append(f"ssp_coeff {float(tab.ssp_coefficient)!r}")
    for key in MATRIX_BLOCKS:
        out.append(f"{key}:")
        for row in getattr(tab, key):
            out.append(" ".join(repr(float(x)) for x in row))
    if tab.stored_tau is not None:
        out.append("tau:")
        out.append(" ".join(repr(float(x)) for x in tab.stored_tau))
    return "\n".join(out) + "\n"


def read_tableau(path) -> MethodTableau:
    with open(path, encoding="utf-8") as fh:
        return load_tableau(fh.read())

