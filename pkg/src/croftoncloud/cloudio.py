"""Point cloud file formats: XYZ text and PLY (ascii / binary little endian).

Positions and normals are written as float64.  ASCII values are printed
with 17 significant digits, which round-trips doubles exactly, so a
write/read/write cycle is byte-identical in every format.  Run metadata
(seed, surface, sampler, ...) travels in '#' comment lines (XYZ) or
'comment' header lines (PLY).
"""

from __future__ import annotations

from typing import Optional

import numpy as np

__all__ = ["write_xyz", "read_xyz", "write_ply", "read_ply", "write_cloud", "read_cloud"]


def _format_row(values) -> str:
    return " ".join(f"{v:.17g}" for v in values)


def _meta_items(meta: Optional[dict]):
    return (meta or {}).items()


def write_xyz(path: str, positions: np.ndarray, normals: Optional[np.ndarray] = None, meta: Optional[dict] = None) -> None:
    """One 'x y z [nx ny nz]' line per point, after '# key=value' headers."""
    positions = np.asarray(positions, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in _meta_items(meta):
            fh.write(f"# {key}={value}\n")
        if normals is None:
            for row in positions:
                fh.write(_format_row(row) + "\n")
        else:
            normals = np.asarray(normals, dtype=np.float64)
            for row, nrm in zip(positions, normals):
                fh.write(_format_row(row) + " " + _format_row(nrm) + "\n")


def read_xyz(path: str):
    """Returns (positions, normals or None, meta dict)."""
    meta: dict[str, str] = {}
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                body = text.lstrip("#").strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    meta[key.strip()] = value.strip()
                continue
            parts = text.split()
            if len(parts) not in (3, 6):
                raise ValueError(f"{path}:{lineno}: expected 3 or 6 numbers, found {len(parts)}")
            try:
                rows.append([float(v) for v in parts])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed number in {text!r}") from None
    if not rows:
        return np.empty((0, 3)), None, meta
    data = np.array(rows)
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: inconsistent column counts {sorted(widths)}")
    if data.shape[1] == 3:
        return data, None, meta
    return data[:, :3], data[:, 3:], meta


_PLY_PROPS_PLAIN = ["x", "y", "z"]
_PLY_PROPS_NORMAL = ["x", "y", "z", "nx", "ny", "nz"]


def write_ply(
    path: str,
    positions: np.ndarray,
    normals: Optional[np.ndarray] = None,
    meta: Optional[dict] = None,
    binary: bool = False,
) -> None:
    """Standard PLY with float64 vertex properties (and normals when given)."""
    positions = np.asarray(positions, dtype=np.float64)
    props = _PLY_PROPS_PLAIN if normals is None else _PLY_PROPS_NORMAL
    header = ["ply", f"format {'binary_little_endian' if binary else 'ascii'} 1.0"]
    header += [f"comment {key}={value}" for key, value in _meta_items(meta)]
    header.append(f"element vertex {len(positions)}")
    header += [f"property double {name}" for name in props]
    header.append("end_header")
    data = positions if normals is None else np.hstack([positions, np.asarray(normals, dtype=np.float64)])
    if binary:
        with open(path, "wb") as fh:
            fh.write(("\n".join(header) + "\n").encode("ascii"))
            fh.write(data.astype("<f8").tobytes())
    else:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(header) + "\n")
            for row in data:
                fh.write(_format_row(row) + "\n")


def read_ply(path: str):
    """Returns (positions, normals or None, meta dict); raises on truncation."""
    with open(path, "rb") as fh:
        raw = fh.read()
    end = raw.find(b"end_header\n")
    if end < 0:
        raise ValueError(f"{path}: missing end_header")
    body_offset = end + len(b"end_header\n")
    header_lines = raw[:end].decode("ascii", errors="replace").splitlines()
    if not header_lines or header_lines[0].strip() != "ply":
        raise ValueError(f"{path}: not a PLY file")
    fmt = None
    count = None
    props: list[str] = []
    meta: dict[str, str] = {}
    for line in header_lines[1:]:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "comment":
            body = line.split(None, 1)[1] if len(parts) > 1 else ""
            if "=" in body:
                key, value = body.split("=", 1)
                meta[key.strip()] = value.strip()
        elif parts[0] == "element":
            if parts[1] != "vertex":
                raise ValueError(f"{path}: unsupported element {parts[1]!r}")
            count = int(parts[2])
        elif parts[0] == "property":
            if parts[1] != "double":
                raise ValueError(f"{path}: unsupported property type {parts[1]!r}")
            props.append(parts[2])
    if fmt not in ("ascii", "binary_little_endian"):
        raise ValueError(f"{path}: unsupported format {fmt!r}")
    if count is None:
        raise ValueError(f"{path}: missing vertex element")
    if props not in (_PLY_PROPS_PLAIN, _PLY_PROPS_NORMAL):
        raise ValueError(f"{path}: unsupported property list {props}")
    width = len(props)
    if fmt == "binary_little_endian":
        expected = count * width * 8
        available = len(raw) - body_offset
        if available < expected:
            raise ValueError(
                f"{path}: truncated at byte offset {len(raw)}; "
                f"expected {expected} payload bytes after offset {body_offset}, found {available}"
            )
        data = np.frombuffer(raw, dtype="<f8", count=count * width, offset=body_offset)
        data = data.reshape(count, width).astype(np.float64)
    else:
        rows = []
        offset = body_offset
        text = raw[body_offset:].decode("ascii", errors="replace")
        for line in text.splitlines():
            stripped = line.strip()
            if stripped:
                parts = stripped.split()
                if len(parts) != width:
                    raise ValueError(
                        f"{path}: truncated or malformed row at byte offset {offset}: {stripped!r}"
                    )
                try:
                    rows.append([float(v) for v in parts])
                except ValueError:
                    raise ValueError(f"{path}: malformed number at byte offset {offset}") from None
            offset += len(line) + 1
        if len(rows) != count:
            raise ValueError(
                f"{path}: truncated at byte offset {len(raw)}; "
                f"header promised {count} vertices, found {len(rows)}"
            )
        data = np.array(rows) if rows else np.empty((0, width))
    positions = data[:, :3]
    normals = data[:, 3:] if width == 6 else None
    return positions, normals, meta


def write_cloud(path: str, positions, normals=None, meta=None, fmt: str = "auto", binary: bool = False) -> None:
    """Dispatch on *fmt* or the path extension ('.xyz' / '.ply')."""
    if fmt == "auto":
        fmt = "ply" if path.lower().endswith(".ply") else "xyz"
    if fmt == "xyz":
        write_xyz(path, positions, normals, meta)
    elif fmt == "ply":
        write_ply(path, positions, normals, meta, binary=binary)
    else:
        raise ValueError(f"unknown cloud format {fmt!r}")


def read_cloud(path: str):
    """Read either format by extension; returns (positions, normals, meta)."""
    if path.lower().endswith(".ply"):
        return read_ply(path)
    return read_xyz(path)
