"""Reader for the line-oriented system description files.

Example::

    [system]
    n = 2
    m = 1
    x = t, th
    y = r

    [F]
    F[1][1][1] = -r
    F[1][1][2] = r_t*r_th/r
    F[1][2][2] = -2*r - r_th^2/r

    [slice t]
    phi = 1, 0
    v = 1, 0

Derivative coordinates are named ``<y>_<x>`` (``r_t``, ``r_th``).
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .connection import Connection, Slice, make_slice
from .jetcalc import JetContext
from .symcore import ZERO, Expr, ParseError, SymbolTable, parse
from .symcore.zero import DEFAULT_PROBES, DEFAULT_SEED, NUM_TOL

SECTION = re.compile(r"^\[\s*([A-Za-z]+)(?:\s+([A-Za-z0-9_]+))?\s*\]$")
INDEXED = re.compile(r"^([A-Za-z]+)((?:\[\s*\d+\s*\])+)$")
OPTION_KEYS = ("probe_points", "seed", "tol_sym", "tol_num")


class SpecError(ValueError):
    """Malformed system description; carries the offending key and line."""

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        where = f"line {line}: " if line else ""
        what = f"{key}: " if key else ""
        super().__init__(f"{where}{what}{message}")
        self.line = line
        self.key = key


@dataclass
class Entry:
    text: str
    line: int


@dataclass
class SystemSpec:
    n: int
    m: int
    x: List[str]
    y: List[str]
    F: Dict[Tuple[int, int, int], Entry] = field(default_factory=dict)
    slices: Dict[str, Dict[str, Entry]] = field(default_factory=dict)
    metrics: Dict[str, Dict[Tuple[int, int], Entry]] = field(default_factory=dict)
    options: Dict[str, object] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    digest: str = ""

    @property
    def context(self) -> JetContext:
        return JetContext.create(self.x, self.y)

    @property
    def probe_points(self) -> int:
        return int(self.options.get("probe_points", DEFAULT_PROBES))

    @property
    def seed(self) -> int:
        return int(self.options.get("seed", DEFAULT_SEED))

    @property
    def tol_num(self) -> float:
        return float(self.options.get("tol_num", NUM_TOL))

    @property
    def tol_sym(self) -> float:
        return float(self.options.get("tol_sym", 0.0))

    def _parse(self, entry: Entry, table: SymbolTable, key: str) -> Expr:
        try:
            return parse(entry.text, table)
        except ParseError as exc:
            raise SpecError(str(exc), entry.line, key) from None

    def connection(self) -> Connection:
        ctx = self.context
        table = ctx.symbols
        F = {}
        for (s, i, j), entry in self.F.items():
            F[(s, i, j)] = self._parse(entry, table, f"F[{s + 1}][{i + 1}][{j + 1}]")
        return Connection(ctx, F)

    def slice(self, name: str, probe_points: Optional[int] = None, seed: Optional[int] = None) -> Slice:
        if name not in self.slices:
            raise SpecError(f"no slice named {name!r}")
        ctx = self.context
        table = SymbolTable(list(self.x), ["base"] * self.n)
        block = self.slices[name]
        comps = {}
        for key in ("phi", "v"):
            if key not in block:
                raise SpecError(f"slice {name!r} has no {key}", key=key)
            entry = block[key]
            parts = [p.strip() for p in entry.text.split(",")]
            if len(parts) != self.n:
                raise SpecError(f"expected {self.n} components, got {len(parts)}", entry.line, key)
            comps[key] = [self._parse(Entry(p, entry.line), table, key) for p in parts]
        return make_slice(ctx, comps["phi"], comps["v"],
                          probe_points=probe_points or self.probe_points,
                          seed=self.seed if seed is None else seed)

    def metric_entries(self, which: str) -> List[List[Expr]]:
        """Symmetric matrix of the ``[metric g]`` or ``[metric h]`` block."""
        if which not in self.metrics:
            raise SpecError(f"missing [metric {which}] section")
        names = self.x if which == "g" else self.y
        table = SymbolTable(list(names), ["base"] * len(names))
        size = len(names)
        M = [[None] * size for _ in range(size)]
        for (i, j), entry in self.metrics[which].items():
            if i >= size or j >= size:
                raise SpecError(f"index out of range for a {size}x{size} metric", entry.line,
                                f"{which}[{i + 1}][{j + 1}]")
            M[i][j] = M[j][i] = self._parse(entry, table, f"{which}[{i + 1}][{j + 1}]")
        for i in range(size):
            if M[i][i] is None:
                raise SpecError(f"missing diagonal entry {which}[{i + 1}][{i + 1}]")
            for j in range(size):
                if M[i][j] is None:
                    M[i][j] = ZERO
        return M


def _split_list(text: str) -> List[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def _indices(key: str, line: int, name: str, count: int) -> Tuple[int, ...]:
    m = INDEXED.match(key.replace(" ", ""))
    if not m or m.group(1) != name:
        raise SpecError(f"expected a key of the form {name}" + "[k]" * count, line, key)
    idx = tuple(int(t) for t in re.findall(r"\d+", m.group(2)))
    if len(idx) != count:
        raise SpecError(f"expected {count} indices", line, key)
    if any(i < 1 for i in idx):
        raise SpecError("indices are 1-based", line, key)
    return tuple(i - 1 for i in idx)


def loads(text: str) -> SystemSpec:
    """Parse a system description from a string."""
    section = None
    sub = None
    system: Dict[str, Entry] = {}
    F_raw: Dict[Tuple[int, int, int], Entry] = {}
    F_keys: Dict[Tuple[int, int, int], str] = {}
    slices: Dict[str, Dict[str, Entry]] = {}
    metrics: Dict[str, Dict[Tuple[int, int], Entry]] = {}
    options: Dict[str, Entry] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = SECTION.match(line)
        if m:
            section, sub = m.group(1), m.group(2)
            if section in ("system", "F", "options"):
                if sub:
                    raise SpecError(f"section [{section}] takes no name", lineno)
            elif section == "slice":
                if not sub:
                    raise SpecError("slice sections need a name: [slice NAME]", lineno)
                if sub in slices:
                    raise SpecError(f"duplicate slice {sub!r}", lineno)
                slices[sub] = {}
            elif section == "metric":
                if sub not in ("g", "h"):
                    raise SpecError("metric sections are [metric g] or [metric h]", lineno)
                metrics.setdefault(sub, {})
            else:
                raise SpecError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in line:
            raise SpecError("expected 'key = value'", lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if not value:
            raise SpecError("empty value", lineno, key)
        entry = Entry(value, lineno)
        if section is None:
            raise SpecError("key outside any section", lineno, key)
        if section == "system":
            if key not in ("n", "m", "x", "y"):
                raise SpecError("unknown key in [system]", lineno, key)
            system[key] = entry
        elif section == "F":
            s, i, j = _indices(key, lineno, "F", 3)
            k = (s, min(i, j), max(i, j))
            if k in F_raw:
                raise SpecError(f"duplicate entry (already given on line {F_raw[k].line})", lineno, key)
            F_raw[k] = entry
            F_keys[k] = key
        elif section == "slice":
            if key not in ("phi", "v"):
                raise SpecError("unknown key in a slice section", lineno, key)
            slices[sub][key] = entry
        elif section == "metric":
            i, j = _indices(key, lineno, sub, 2)
            k = (min(i, j), max(i, j))
            if k in metrics[sub]:
                raise SpecError(f"duplicate entry (already given on line {metrics[sub][k].line})",
                                lineno, key)
            metrics[sub][k] = entry
        elif section == "options":
            if key not in OPTION_KEYS:
                raise SpecError("unknown option", lineno, key)
            options[key] = entry

    for key in ("n", "m", "x", "y"):
        if key not in system:
            raise SpecError(f"[system] is missing {key!r}")
    try:
        n = int(system["n"].text)
        m_ = int(system["m"].text)
    except ValueError:
        bad = "n" if not system["n"].text.strip().isdigit() else "m"
        raise SpecError("expected an integer", system[bad].line, bad) from None
    x = _split_list(system["x"].text)
    y = _split_list(system["y"].text)
    if len(x) != n:
        raise SpecError(f"n = {n} but {len(x)} base coordinates given", system["x"].line, "x")
    if len(y) != m_:
        raise SpecError(f"m = {m_} but {len(y)} fibre coordinates given", system["y"].line, "y")
    try:
        JetContext.create(x, y).symbols
    except ValueError as exc:
        raise SpecError(str(exc), system["x"].line, "x") from None

    spec = SystemSpec(n, m_, x, y, slices=slices, metrics=metrics)
    for (s, i, j), entry in F_raw.items():
        if s >= m_ or j >= n:
            raise SpecError("index out of range", entry.line, F_keys[(s, i, j)])
    metric_only = not F_raw and set(metrics) == {"g", "h"}
    for s in range(m_):
        for i in range(n):
            for j in range(i, n):
                if (s, i, j) in F_raw:
                    spec.F[(s, i, j)] = F_raw[(s, i, j)]
                elif not metric_only:
                    spec.warnings.append(f"F[{s + 1}][{i + 1}][{j + 1}] missing, taken as 0")
    for key, entry in options.items():
        try:
            if key == "probe_points":
                val = int(entry.text)
                if val < 1:
                    raise ValueError
            elif key == "seed":
                val = int(entry.text, 0)
            else:
                val = float(entry.text)
                if val < 0:
                    raise ValueError
        except ValueError:
            raise SpecError("bad option value", entry.line, key) from None
        spec.options[key] = val
    spec.digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    # parse every expression now so that errors surface with their line
    spec.connection()
    for name in slices:
        for key in ("phi", "v"):
            if key not in slices[name]:
                raise SpecError(f"slice {name!r} has no {key}", key=key)
        spec.slice(name)
    for which in metrics:
        spec.metric_entries(which)
    return spec


def load(path) -> SystemSpec:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
