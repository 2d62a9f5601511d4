"""File formats: PGM and run-length JSON masks, CSV/VTK fields, JSON reports.

PGM masks are binary ``P5`` images with maxval 1 (1 = inside).  Image row 0
is the *top* of the box.  The box is stored in a header comment
``# vexlap box x0 y0 x1 y1``; without it the unit square is assumed.
"""
import csv
import json

import numpy as np

from .geometry import RasterDomain

_BOX_TAG = "vexlap box"


def write_pgm(domain, path):
    ny, nx = domain.mask.shape
    header = f"P5\n# {_BOX_TAG} {' '.join(repr(float(b)) for b in domain.box)}\n{nx} {ny}\n1\n"
    body = np.flipud(domain.mask).astype(np.uint8).tobytes()
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii") + body)


def _pgm_tokens(data):
    """Yield header tokens and the byte offset of the raster, collecting comments."""
    pos, tokens, comments = 2, [], []
    while len(tokens) < 3:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            end = data.index(b"\n", pos)
            comments.append(data[pos + 1:end].decode("ascii", "replace").strip())
            pos = end + 1
            continue
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(int(data[start:pos]))
    return tokens, comments, pos + 1


def read_pgm(path, box=None):
    """Read a binary PGM mask; nonzero pixels are inside."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    (nx, ny, maxval), comments, offset = _pgm_tokens(data)
    if maxval > 255:
        raise ValueError("16-bit PGM is not supported")
    raw = np.frombuffer(data, dtype=np.uint8, count=nx * ny, offset=offset).reshape(ny, nx)
    if box is None:
        box = (0.0, 0.0, 1.0, 1.0)
        for c in comments:
            if c.startswith(_BOX_TAG):
                box = tuple(float(v) for v in c[len(_BOX_TAG):].split())
    res = nx / (box[2] - box[0])
    if abs(ny / (box[3] - box[1]) - res) > 1e-9 * res:
        raise ValueError("PGM pixels are not square for the given box")
    return RasterDomain(box, res, np.flipud(raw > 0))


def write_rle_json(domain, path):
    """Row-major (bottom row first) run lengths, starting with a False run."""
    flat = domain.mask.ravel().astype(np.int8)
    change = np.flatnonzero(np.diff(flat)) + 1
    bounds = np.concatenate([[0], change, [flat.size]])
    runs = np.diff(bounds).tolist()
    if flat.size and flat[0]:
        runs = [0] + runs
    doc = {"box": list(domain.box), "resolution": domain.resolution,
           "shape": list(domain.mask.shape), "runs": runs}
    with open(path, "w") as fh:
        json.dump(doc, fh)


def read_rle_json(path):
    with open(path) as fh:
        doc = json.load(fh)
    runs = np.asarray(doc["runs"], dtype=np.int64)
    values = np.arange(len(runs)) % 2 == 1
    mask = np.repeat(values, runs).reshape(doc["shape"])
    return RasterDomain(tuple(doc["box"]), doc["resolution"], mask)


def read_mask(path):
    """Read a mask from ``.pgm`` or ``.json`` by extension."""
    p = str(path)
    if p.endswith(".json"):
        return read_rle_json(p)
    return read_pgm(p)


def write_gridfunction_csv(u, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "value"])
        for (x, y), v in zip(u.mesh.nodes, u.values):
            w.writerow(["%.17g" % x, "%.17g" % y, "%.17g" % v])


def write_gridfunction_vtk(u, path, name="u"):
    """Legacy ASCII VTK unstructured grid with point data."""
    m = u.mesh
    lines = ["# vtk DataFile Version 3.0", "vexlap grid function", "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {m.n_nodes} double"]
    lines += [f"{x:.17g} {y:.17g} 0" for x, y in m.nodes]
    lines.append(f"CELLS {m.n_triangles} {4 * m.n_triangles}")
    lines += [f"3 {a} {b} {c}" for a, b, c in m.triangles]
    lines.append(f"CELL_TYPES {m.n_triangles}")
    lines += ["5"] * m.n_triangles
    lines += [f"POINT_DATA {m.n_nodes}", f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
    lines += [f"{v:.17g}" for v in u.values]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_fieldsample_csv(f, path):
    """One row per quadrature point: index and value (magnitude for vectors)."""
    vals = f.values if f.values.ndim == 1 else f.magnitude
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "value"])
        for i, v in enumerate(vals):
            w.writerow([i, "%.17g" % v])


def read_fieldsample_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["value"]) for r in rows])


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_default)
        fh.write("\n")


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "as_dict"):
        return o.as_dict()
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(f"cannot serialize {type(o).__name__}")
