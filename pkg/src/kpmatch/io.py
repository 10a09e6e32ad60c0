"""Instance files and run reports.

Instance grammar (LF line endings, ASCII only)::

    kpg 1
    <k>
    <n_1> ... <n_k>
    <one edge per line: k space-separated 0-based indices>
    bip                      optional block
    <k lines, line i lists A_i ascending (possibly empty)>

Rendering sorts and deduplicates edges, so ``parse(render(H)) == H``.
Reports are line-delimited ``key=value`` records or one JSON document.  The
determinism hash covers the payload with timings removed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Optional

from .core import Bipartition, Hypergraph, Matching
from .errors import DuplicateEdge, OutOfRange, ParseError

FORMAT_TAG = "kpg"
FORMAT_VERSION = 1
REPORT_SCHEMA = "kpmatch-report/1"


def render_instance(H: Hypergraph, bip: Optional[Bipartition] = None) -> str:
    lines = [f"{FORMAT_TAG} {FORMAT_VERSION}", str(H.k), " ".join(map(str, H.sizes))]
    lines += [" ".join(map(str, e)) for e in H.sorted_edges]
    if bip is not None:
        if bip.sizes != H.sizes:
            raise ValueError("bipartition sizes do not match the hypergraph")
        lines.append("bip")
        lines += [" ".join(map(str, sorted(a))) for a in bip.A]
    return "\n".join(lines) + "\n"


def _ints(text: str, lineno: int) -> list[int]:
    out = []
    for tok in text.split(" "):
        if tok == "":
            raise ParseError("tokens must be separated by single spaces", lineno)
        if not tok.isdigit():
            raise ParseError(f"expected a non-negative integer, got {tok!r}", lineno)
        out.append(int(tok))
    return out


def parse_instance(text: str) -> tuple[Hypergraph, Optional[Bipartition]]:
    """Parse an instance file; returns the hypergraph and the optional bipartition."""
    if not text.isascii():
        raise ParseError("file must be ASCII", 1)
    if "\r" in text:
        raise ParseError("line endings must be LF", text[: text.index("\r")].count("\n") + 1)
    if not text.endswith("\n"):
        raise ParseError("file must end with a newline", text.count("\n") + 1)
    lines = text[:-1].split("\n")
    if lines[0] != f"{FORMAT_TAG} {FORMAT_VERSION}":
        raise ParseError(f"header must be '{FORMAT_TAG} {FORMAT_VERSION}'", 1)
    if len(lines) < 3:
        raise ParseError("missing k or part sizes", len(lines) + 1)
    k_vals = _ints(lines[1], 2)
    if len(k_vals) != 1 or k_vals[0] < 2:
        raise ParseError("line 2 must hold a single k >= 2", 2)
    k = k_vals[0]
    sizes = _ints(lines[2], 3)
    if len(sizes) != k:
        raise ParseError(f"expected {k} part sizes", 3)
    edges: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    bip = None
    i = 3
    while i < len(lines):
        lineno = i + 1
        line = lines[i]
        if line == "bip":
            block = lines[i + 1:]
            if len(block) != k:
                raise ParseError(f"bip block needs exactly {k} lines", lineno)
            A = []
            for j, row in enumerate(block):
                ln = lineno + 1 + j
                vals = _ints(row, ln) if row else []
                if vals != sorted(set(vals)):
                    raise ParseError("A-indices must be strictly ascending", ln)
                if any(x >= sizes[j] for x in vals):
                    raise OutOfRange(f"A-index out of range for part {j}", ln)
                A.append(vals)
            bip = Bipartition(sizes, A)
            break
        if line == "":
            raise ParseError("empty edge line", lineno)
        e = tuple(_ints(line, lineno))
        if len(e) != k:
            raise ParseError(f"edge needs {k} indices", lineno)
        for j, x in enumerate(e):
            if x >= sizes[j]:
                raise OutOfRange(f"index {x} out of range for part {j} of size {sizes[j]}", lineno)
        if e in seen:
            raise DuplicateEdge(f"edge {' '.join(map(str, e))} repeated", lineno)
        seen.add(e)
        edges.append(e)
        i += 1
    return Hypergraph(sizes, edges, check=False), bip


def parse_matching(text: str, k: int) -> Matching:
    """A matching file: one edge per line, k space-separated indices."""
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        e = _ints(line.strip(), lineno)
        if len(e) != k:
            raise ParseError(f"edge needs {k} indices", lineno)
        edges.append(tuple(e))
    return Matching(tuple(edges))


# ---------------------------------------------------------------------------
# Reports


@dataclass
class Check:
    name: str
    passed: bool
    count: int = 0
    total: int = 0
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "count": self.count, "total": self.total,
                "detail": self.detail}


@dataclass
class RunReport:
    command: str
    params: dict
    seed: int
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def payload(self, timings: bool = True) -> dict:
        out: dict[str, Any] = {
            "schema": REPORT_SCHEMA,
            "command": self.command,
            "seed": self.seed,
            "params": self.params,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "data": self.data,
        }
        if timings:
            out["timings"] = self.timings
        return out

    def digest(self) -> str:
        """SHA-256 of the canonical payload without timings."""
        return hashlib.sha256(canonical_json(self.payload(timings=False)).encode()).hexdigest()

    def to_json(self) -> str:
        return json.dumps(self.payload(), indent=2, sort_keys=True, default=str) + "\n"

    def to_text(self) -> str:
        lines = [f"schema={REPORT_SCHEMA}", f"command={self.command}", f"seed={self.seed}"]
        lines += [f"param.{k}={v}" for k, v in sorted(self.params.items())]
        for c in self.checks:
            lines.append(f"check.{c.name}={'pass' if c.passed else 'fail'} count={c.count} total={c.total}")
        for k, v in sorted(_flatten(self.data).items()):
            lines.append(f"data.{k}={v}")
        for k, v in sorted(self.timings.items()):
            lines.append(f"timing.{k}={v:.3f}" if isinstance(v, float) else f"timing.{k}={v}")
        lines.append(f"digest={self.digest()}")
        lines.append(f"result={'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = canonical_json(v) if isinstance(v, (list, tuple)) else v
    return out
