"""
Weighted point clouds, coordinate frames and neighbourhood selection.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class EmptyPointSetError(ValueError):
    pass


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PointSet:
    """``N`` points in ``R^d`` with strictly positive weights.

    Use :func:`make_pointset` rather than the constructor; it validates the
    input and fills in unit weights.
    """

    points: np.ndarray
    weights: np.ndarray
    _fingerprint: str = field(default="", repr=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    @property
    def fingerprint(self) -> str:
        """Content hash used to tie a basis to the points it was built on."""
        return self._fingerprint

    def subset(self, idx) -> "PointSet":
        idx = np.asarray(idx, dtype=int)
        return make_pointset(self.points[idx], self.weights[idx])


def _hash(points: np.ndarray, weights: np.ndarray) -> str:
    h = hashlib.sha1()
    h.update(np.ascontiguousarray(points).tobytes())
    h.update(np.ascontiguousarray(weights).tobytes())
    h.update(str(points.shape).encode())
    return h.hexdigest()[:16]


def make_pointset(points, weights=None) -> PointSet:
    """Validate coordinates and weights and build a :class:`PointSet`.

    Parameters
    ----------
    points : array_like, shape (N, d)
        Coordinates.  A 1-D array is read as ``N`` points on a line.
    weights : array_like, shape (N,), optional
        Strictly positive weights; unit weights when omitted.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2:
        raise ValueError(f"points must be a 2-D array, got shape {pts.shape}")
    if pts.shape[0] == 0:
        raise EmptyPointSetError("empty point set")
    if pts.shape[1] == 0:
        raise ValueError("points must have at least one coordinate")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    if weights is None:
        w = np.ones(pts.shape[0])
    else:
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.shape[0] != pts.shape[0]:
            raise ValueError(
                f"got {w.shape[0]} weights for {pts.shape[0]} points"
            )
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise ValueError("weights must be finite and strictly positive")
    pts = _readonly(pts)
    w = _readonly(w)
    return PointSet(pts, w, _hash(pts, w))


@dataclass(frozen=True, eq=False)
class ScaleFrame:
    """Affine frame ``x -> center + scale * (x - center)``.

    The same object doubles as the normalisation frame used while fitting,
    where ``to_local`` maps points into ``(x - center) / scale``.
    """

    center: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        c = _readonly(np.asarray(self.center, dtype=float).reshape(-1))
        object.__setattr__(self, "center", c)
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")
        object.__setattr__(self, "scale", float(self.scale))

    @classmethod
    def identity(cls, d: int) -> "ScaleFrame":
        return cls(np.zeros(d), 1.0)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def to_local(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.center) / self.scale

    def from_local(self, u) -> np.ndarray:
        return self.center + self.scale * np.asarray(u, dtype=float)


def apply_scale(pointset: PointSet, frame: ScaleFrame) -> PointSet:
    """Contract (or dilate) a point set about ``frame.center`` by ``frame.scale``."""
    if frame.dim != pointset.dim:
        raise ValueError("frame and point set dimensions differ")
    pts = frame.center + frame.scale * (pointset.points - frame.center)
    return make_pointset(pts, pointset.weights)


def normalizing_frame(pointset: PointSet, center=None) -> ScaleFrame:
    """Frame centred on ``center`` (origin by default) whose scale is the
    largest distance from the centre to a point; 1 if all points coincide
    with the centre."""
    c = np.zeros(pointset.dim) if center is None else np.asarray(center, dtype=float)
    if c.shape != (pointset.dim,):
        raise ValueError("center has the wrong dimension")
    diff = pointset.points - c
    m = float(np.max(np.abs(diff)))
    if not m > 0:
        return ScaleFrame(c, 1.0)
    # scale first so tiny or huge coordinates neither underflow nor overflow
    r = m * float(np.sqrt(np.max(np.sum((diff / m) ** 2, axis=1))))
    return ScaleFrame(c, r)


def nearest_indices(pointset: PointSet, x0, n: int) -> np.ndarray:
    """Indices of the ``n`` points nearest ``x0``, nearest first.

    Ties keep the original point order, so the result is reproducible.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape[0] != pointset.dim:
        raise ValueError("x0 has the wrong dimension")
    if n < 1 or n > pointset.n:
        raise ValueError(f"asked for {n} points, point set has {pointset.n}")
    dist2 = np.sum((pointset.points - x0) ** 2, axis=1)
    return np.argsort(dist2, kind="stable")[:n]


def select_neighborhood(pointset: PointSet, x0, n: int) -> PointSet:
    """The ``n`` points nearest ``x0``, sorted by distance (see
    :func:`nearest_indices` for the tie rule)."""
    return pointset.subset(nearest_indices(pointset, x0, n))


def read_points(path, dim: int | None = None) -> PointSet:
    """Read a whitespace-separated point file.

    One point per line, every line with the same number of columns.  Lines
    starting with ``#`` and blank lines are skipped.  See
    :func:`parse_points` for the weight-column rule.
    """
    text = Path(path).read_text()
    return parse_points(text, dim)


def parse_points(text: str, dim: int | None = None) -> PointSet:
    """Parse the point-file format from a string.

    With ``dim`` given, a row of ``dim + 1`` columns carries a trailing
    weight.  Without it, every row is coordinates only (unit weights).
    """
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            rows.append([float(t) for t in s.split()])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if not rows:
        raise EmptyPointSetError("empty point set")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"inconsistent column counts: {sorted(widths)}")
    arr = np.array(rows)
    if dim is None or arr.shape[1] == dim:
        return make_pointset(arr)
    if arr.shape[1] == dim + 1:
        return make_pointset(arr[:, :dim], arr[:, dim])
    raise ValueError(f"expected {dim} or {dim + 1} columns, got {arr.shape[1]}")


def write_points(path, pointset: PointSet, with_weights: bool = False) -> None:
    lines = [f"# {pointset.n} points in {pointset.dim} dimensions"]
    for p, w in zip(pointset.points, pointset.weights):
        cols = [f"{v:.17g}" for v in p]
        if with_weights:
            cols.append(f"{w:.17g}")
        lines.append(" ".join(cols))
    Path(path).write_text("\n".join(lines) + "\n")
