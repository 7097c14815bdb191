"""Triangle meshes of a chart over a parameter grid, written as Wavefront OBJ."""

from __future__ import annotations

import numpy as np

from .geometry import SAMPLE_ERRORS, eval_chart

__all__ = ["MeshError", "parse_projection", "grid_positions", "project", "grid_faces", "write_obj"]


class MeshError(ValueError):
    pass


def parse_projection(text):
    """Parse ``drop:i`` or ``stereographic:+1`` / ``stereographic:-1``.

    Returns ``(kind, arg)`` or ``None`` when ``text`` is ``None``.
    """
    if text is None:
        return None
    kind, sep, arg = text.partition(":")
    if not sep:
        raise MeshError(f"projection must look like drop:i or stereographic:+1, got {text!r}")
    if kind == "drop":
        try:
            return ("drop", int(arg))
        except ValueError:
            raise MeshError(f"drop index must be an integer, got {arg!r}") from None
    if kind == "stereographic":
        if arg in ("+1", "1", "+"):
            return ("stereographic", 1)
        if arg in ("-1", "-"):
            return ("stereographic", -1)
        raise MeshError(f"pole sign must be +1 or -1, got {arg!r}")
    raise MeshError(f"unknown projection {kind!r}")


def grid_positions(chart, grid):
    """Positions at every grid point, row-major, shape ``(nu*nv, dim)``."""
    out = np.empty((grid.size, chart.ambient_dim))
    for k, (u, v) in enumerate(grid.points()):
        try:
            out[k] = [j.val for j in eval_chart(chart, u, v)]
        except SAMPLE_ERRORS as exc:
            raise MeshError(f"chart cannot be evaluated at (u, v) = ({u!r}, {v!r}): {exc}") from None
    return out


def project(points, projection):
    """Map ambient points to R^3."""
    dim = points.shape[1]
    if projection is None:
        if dim != 3:
            raise MeshError(f"E^{dim} chart needs a projection to R^3 (drop:i or stereographic:+1)")
        return points
    kind, arg = projection
    if dim != 4:
        raise MeshError(f"projections apply to E^4 charts only; this chart lives in E^{dim}")
    if kind == "drop":
        if not 0 <= arg < dim:
            raise MeshError(f"coordinate index out of range: {arg} (chart has {dim} coordinates)")
        return np.delete(points, arg, axis=1)
    radius = float(np.max(np.linalg.norm(points, axis=1)))
    denom = radius - arg * points[:, 3]
    if radius == 0.0 or np.min(np.abs(denom)) < 1e-12 * radius:
        raise MeshError("a vertex sits on the projection pole")
    return radius * points[:, :3] / denom[:, None]


def grid_faces(nu, nv, wrap_u=False, wrap_v=False):
    """Triangles as 0-based index triples, counterclockwise in (u, v)."""
    faces = []
    iu = nu if wrap_u else nu - 1
    jv = nv if wrap_v else nv - 1
    for i in range(iu):
        i1 = (i + 1) % nu
        for j in range(jv):
            j1 = (j + 1) % nv
            a, b, c, d = i * nv + j, i1 * nv + j, i1 * nv + j1, i * nv + j1
            faces.append((a, b, c))
            faces.append((a, c, d))
    return faces


def write_obj(path, vertices, faces):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for x, y, z in vertices:
            fh.write(f"v {format(float(x), '.17g')} {format(float(y), '.17g')} {format(float(z), '.17g')}\n")
        for a, b, c in faces:
            fh.write(f"f {a + 1} {b + 1} {c + 1}\n")
