"""Readers for ASCII OFF and ASCII STL triangle meshes."""

from __future__ import annotations

import numpy as np

from .surfaces import TriangulatedSurface

__all__ = ["read_off", "read_stl", "load_mesh"]


def _off_tokens(path: str):
    """Whitespace tokens with their line numbers, comments stripped."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0]
            for token in body.split():
                yield token, lineno


def read_off(path: str) -> TriangulatedSurface:
    """ASCII OFF mesh; polygon faces are fan-triangulated."""
    tokens = _off_tokens(path)

    def next_token(what):
        try:
            return next(tokens)
        except StopIteration:
            raise ValueError(f"{path}: unexpected end of file while reading {what}") from None

    token, lineno = next_token("header")
    if token != "OFF":
        raise ValueError(f"{path}:{lineno}: expected OFF header, found {token!r}")

    def read_int(what):
        token, lineno = next_token(what)
        try:
            return int(token)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: expected integer {what}, found {token!r}") from None

    def read_float(what):
        token, lineno = next_token(what)
        try:
            return float(token)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: expected number for {what}, found {token!r}") from None

    n_vertices = read_int("vertex count")
    n_faces = read_int("face count")
    read_int("edge count")
    vertices = np.array(
        [[read_float(f"vertex {i}") for _ in range(3)] for i in range(n_vertices)]
    )
    triangles = []
    for f in range(n_faces):
        arity = read_int(f"face {f} arity")
        if arity < 3:
            raise ValueError(f"{path}: face {f} has fewer than 3 vertices")
        idx = [read_int(f"face {f} index") for _ in range(arity)]
        if max(idx) >= n_vertices or min(idx) < 0:
            raise ValueError(f"{path}: face {f} references vertex {max(idx)} of {n_vertices}")
        for i in range(1, arity - 1):
            triangles.append(vertices[[idx[0], idx[i], idx[i + 1]]])
    return TriangulatedSurface(np.array(triangles), name=path)


def read_stl(path: str) -> TriangulatedSurface:
    """Minimal ASCII STL: collects 'vertex x y z' triples per facet."""
    vertices = []
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.lstrip().startswith("solid"):
            raise ValueError(f"{path}:1: not an ASCII STL (missing 'solid' header)")
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts or parts[0] != "vertex":
                continue
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: malformed vertex line {line.strip()!r}")
            try:
                vertices.append([float(v) for v in parts[1:]])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed vertex line {line.strip()!r}") from None
    if len(vertices) % 3:
        raise ValueError(f"{path}: vertex count {len(vertices)} is not a multiple of 3")
    if not vertices:
        raise ValueError(f"{path}: no facets found")
    return TriangulatedSurface(np.array(vertices).reshape(-1, 3, 3), name=path)


def load_mesh(path: str) -> TriangulatedSurface:
    """Dispatch on extension: .off or .stl."""
    lower = path.lower()
    if lower.endswith(".off"):
        return read_off(path)
    if lower.endswith(".stl"):
        return read_stl(path)
    raise ValueError(f"unsupported mesh format: {path} (expected .off or .stl)")
