"""SDPA sparse format (.dat-s).

Our form  max tr(C X), tr(A_i X) = b_i, X PSD  is SDPA's dual problem with
F_0 = C, F_i = A_i and the cost vector c = b, so the file lists b on line 4
and C as matrix 0.
"""

from __future__ import annotations

import io
import os
import re
from pathlib import Path

from .problem import Block, SdpProblem


class SdpaFormatError(ValueError):
    pass


def _fmt(v) -> str:
    return format(float(v), ".17g")


def write_sdpa(problem: SdpProblem, fh, comments: list[str] | None = None) -> None:
    for line in comments or []:
        fh.write(f'" {line}\n')
    fh.write(f"{problem.m}\n")
    fh.write(f"{len(problem.blocks)}\n")
    fh.write(" ".join(str(-b.dim if b.diagonal else b.dim) for b in problem.blocks) + "\n")
    fh.write((" ".join(_fmt(r) for r in problem.rhs) if problem.m else "") + "\n")
    mats = [problem.objective] + problem.constraints
    for matno, entries in enumerate(mats):
        for (b, i, j) in sorted(entries):
            fh.write(f"{matno} {b + 1} {i + 1} {j + 1} {_fmt(entries[(b, i, j)])}\n")


def export_sdpa(problem: SdpProblem, destination, comments: list[str] | None = None) -> Path | None:
    """Write to a path or an open text handle."""
    if hasattr(destination, "write"):
        write_sdpa(problem, destination, comments)
        return None
    path = Path(destination)
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.exists() or not os.access(parent, os.W_OK):
        raise OSError(f"cannot write SDPA file to {path}: directory is missing or not writable")
    with open(path, "w", encoding="ascii") as fh:
        write_sdpa(problem, fh, comments)
    return path


_SPLIT = re.compile(r"[\s,{}()]+")


def _tokens(line: str) -> list[str]:
    return [t for t in _SPLIT.split(line.strip()) if t]


def import_sdpa(source) -> SdpProblem:
    """Parse a sparse SDPA file (path, handle or string contents)."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, os.PathLike) or (isinstance(source, str) and "\n" not in source):
        text = Path(source).read_text()
    else:
        text = source
    lines = [ln for ln in io.StringIO(text).read().splitlines() if ln.strip() and ln.lstrip()[0] not in '"*']
    if len(lines) < 3:
        raise SdpaFormatError("SDPA file needs at least the m, block-count and block-size lines")
    try:
        m = int(_tokens(lines[0])[0])
        nblocks = int(_tokens(lines[1])[0])
        sizes = [int(t) for t in _tokens(lines[2])[:nblocks]]
    except (IndexError, ValueError) as exc:
        raise SdpaFormatError(f"bad SDPA header: {exc}") from exc
    if len(sizes) != nblocks:
        raise SdpaFormatError(f"expected {nblocks} block sizes, got {len(sizes)}")
    pos = 3
    rhs: list[float] = []
    while len(rhs) < m:
        if pos >= len(lines):
            raise SdpaFormatError(f"expected {m} cost entries")
        rhs += [float(t) for t in _tokens(lines[pos])]
        pos += 1
    if m == 0 and pos < len(lines) and len(_tokens(lines[pos])) != 5:
        pos += 1  # empty cost line written as blank-ish placeholder
    if len(rhs) != m:
        raise SdpaFormatError(f"expected {m} cost entries, got {len(rhs)}")
    blocks = [Block(f"B{i + 1}", abs(s), s < 0) for i, s in enumerate(sizes)]
    mats: list[dict] = [{} for _ in range(m + 1)]
    for ln in lines[pos:]:
        tok = _tokens(ln)
        if len(tok) != 5:
            raise SdpaFormatError(f"bad entry line: {ln!r}")
        matno, blk, i, j = (int(t) for t in tok[:4])
        if not 0 <= matno <= m:
            raise SdpaFormatError(f"matrix number {matno} out of range")
        key = (blk - 1, min(i, j) - 1, max(i, j) - 1)
        mats[matno][key] = mats[matno].get(key, 0.0) + float(tok[4])
    return SdpProblem(blocks, mats[0], mats[1:], rhs, {"source": "sdpa"})
