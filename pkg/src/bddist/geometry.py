"""Assignment boundary geometry: polylines, region membership, signed distances.

The boundary between the control region and the treatment region is stored
as a polyline (smooth boundaries are approximated by dense polylines), with
corner vertices marked explicitly as kinks.  Region membership is decided by
an assignment rule, with the convention that points on the boundary belong
to the treatment region.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, MetricProbeError

# Points within this distance of the boundary are assigned to treatment.
BOUNDARY_TOL = 1e-12

# Default turning angle (radians) above which an interior vertex is a kink.
DEFAULT_KINK_ANGLE_TOL = 0.05


def as_point(p) -> np.ndarray:
    """Coerce to a finite (2,) float array, raising on anything else."""
    arr = np.asarray(p, dtype=float)
    if arr.shape != (2,):
        raise InvalidInputError(f"expected a 2-d point, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"point has non-finite coordinates: {arr}")
    return arr


def _as_points(P) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(P, dtype=float))
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidInputError(f"expected an (n, 2) point array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("point array has non-finite coordinates")
    return arr


# ---------------------------------------------------------------------------
# Distance metrics
# ---------------------------------------------------------------------------

def _euclidean(P, q):
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float)
    return np.hypot(P[..., 0] - q[0], P[..., 1] - q[1])


_METRICS = {"euclidean": _euclidean}


def metric_function(metric):
    """Resolve a metric name to its vectorized callable ``f(P, q) -> d``."""
    if callable(metric):
        return metric
    try:
        return _METRICS[metric]
    except KeyError:
        raise InvalidInputError(
            f"unknown metric {metric!r}; registered: {sorted(_METRICS)}"
        ) from None


def register_metric(name, fn, probe_points=None, seed=0):
    """Register a custom distance metric after a random correctness probe.

    The probe samples point triples and checks identity (d(x, x) = 0),
    symmetry, nonnegativity, and the triangle inequality.  Metrics that fail
    any sampled check are rejected with :class:`MetricProbeError`.

    Parameters
    ----------
    name : str
        Registry key used in ``metric=`` arguments.
    fn : callable
        Vectorized metric ``fn(P, q)`` mapping an (n, 2) array and a (2,)
        point to an (n,) array of distances.
    probe_points : array, optional
        Points to probe with; defaults to 32 random points in [-10, 10]^2.
    seed : int
        Seed for the default probe cloud.
    """
    if probe_points is None:
        rng = np.random.default_rng(seed)
        probe_points = rng.uniform(-10.0, 10.0, size=(32, 2))
    pts = _as_points(probe_points)
    m = len(pts)
    dmat = np.empty((m, m))
    for j in range(m):
        dmat[:, j] = np.asarray(fn(pts, pts[j]), dtype=float)
    if not np.all(np.isfinite(dmat)) or np.any(dmat < 0):
        raise MetricProbeError(f"metric {name!r} produced negative or non-finite distances")
    if np.any(np.abs(np.diag(dmat)) > 1e-12):
        raise MetricProbeError(f"metric {name!r} fails identity: d(x, x) != 0")
    if np.max(np.abs(dmat - dmat.T)) > 1e-10 * (1.0 + dmat.max()):
        raise MetricProbeError(f"metric {name!r} fails symmetry")
    # Triangle inequality on all sampled triples, with a small float allowance.
    slack = 1e-10 * (1.0 + dmat.max())
    if np.any(dmat[:, None, :] + dmat[None, :, :] < dmat[:, :, None] - slack):
        raise MetricProbeError(f"metric {name!r} fails the triangle inequality")
    _METRICS[name] = fn


def distance(a, b, metric="euclidean") -> float:
    """Distance between two points under the given metric (default Euclidean)."""
    a = as_point(a)
    b = as_point(b)
    fn = metric_function(metric)
    return float(fn(a[None, :], b)[0])


# ---------------------------------------------------------------------------
# Boundary polyline
# ---------------------------------------------------------------------------

def detect_kinks(vertices, angle_tol=DEFAULT_KINK_ANGLE_TOL) -> frozenset:
    """Interior vertex indices where the polyline turns by more than angle_tol.

    The turning angle at an interior vertex is the angle between the incoming
    and outgoing segment directions (zero for collinear segments).
    """
    if not 0.0 < angle_tol < np.pi / 2:
        raise InvalidInputError(f"angle_tol must be in (0, pi/2), got {angle_tol}")
    V = _as_points(vertices)
    kinks = set()
    for i in range(1, len(V) - 1):
        u = V[i] - V[i - 1]
        v = V[i + 1] - V[i]
        cross = u[0] * v[1] - u[1] * v[0]
        dot = u @ v
        turn = abs(np.arctan2(cross, dot))
        if turn > angle_tol:
            kinks.add(i)
    return frozenset(kinks)


@dataclass(frozen=True)
class BoundaryPolyline:
    """Assignment boundary stored as an ordered polyline with kink markers.

    Attributes
    ----------
    vertices : (m, 2) array
        Ordered vertices, consecutive vertices distinct.
    kink_indices : frozenset of int
        Interior vertex indices marked as kinks (corners).
    cumulative_arclength : (m,) array
        Arc length from the first vertex to each vertex; starts at 0 and is
        strictly increasing.
    """

    vertices: np.ndarray
    kink_indices: frozenset = field(default_factory=frozenset)
    cumulative_arclength: np.ndarray = None

    def __post_init__(self):
        V = _as_points(self.vertices)
        if len(V) < 2:
            raise InvalidInputError("polyline needs at least 2 vertices")
        seg = np.diff(V, axis=0)
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(lengths == 0.0):
            raise InvalidInputError("consecutive polyline vertices must be distinct")
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        if not np.isfinite(cum[-1]) or cum[-1] <= 0.0:
            raise InvalidInputError("polyline must have positive finite length")
        for k in self.kink_indices:
            if not 0 < int(k) < len(V) - 1:
                raise InvalidInputError(f"kink index {k} is not an interior vertex")
        V.setflags(write=False)
        cum.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "kink_indices", frozenset(int(k) for k in self.kink_indices))
        object.__setattr__(self, "cumulative_arclength", cum)

    @classmethod
    def from_vertices(cls, vertices, kinks=None, angle_tol=DEFAULT_KINK_ANGLE_TOL):
        """Build a polyline, auto-detecting kinks when none are given."""
        if kinks is None:
            kinks = detect_kinks(vertices, angle_tol)
        return cls(np.asarray(vertices, dtype=float), frozenset(kinks))

    @property
    def total_length(self) -> float:
        return float(self.cumulative_arclength[-1])

    @property
    def kink_points(self) -> np.ndarray:
        """Coordinates of the marked kink vertices, shape (k, 2)."""
        idx = sorted(self.kink_indices)
        return self.vertices[idx] if idx else np.empty((0, 2))

    def point_at(self, s):
        """Point(s) on the polyline at arc length(s) ``s`` from the start."""
        scalar = np.ndim(s) == 0
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if np.any(s < -1e-9) or np.any(s > self.total_length + 1e-9):
            raise InvalidInputError("arc length outside [0, total_length]")
        s = np.clip(s, 0.0, self.total_length)
        cum = self.cumulative_arclength
        seg_idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(cum) - 2)
        a = self.vertices[seg_idx]
        b = self.vertices[seg_idx + 1]
        seg_len = cum[seg_idx + 1] - cum[seg_idx]
        t = (s - cum[seg_idx]) / seg_len
        pts = a + t[:, None] * (b - a)
        return pts[0] if scalar else pts

    def distance_to(self, P) -> np.ndarray:
        """Euclidean distance from each point in ``P`` to the polyline."""
        P = _as_points(P)
        best = np.full(len(P), np.inf)
        for a, b in zip(self.vertices[:-1], self.vertices[1:]):
            ab = b - a
            denom = ab @ ab
            t = np.clip(((P - a) @ ab) / denom, 0.0, 1.0)
            proj = a + t[:, None] * ab
            d = np.hypot(P[:, 0] - proj[:, 0], P[:, 1] - proj[:, 1])
            np.minimum(best, d, out=best)
        return best

    def arclength_within(self, center, radius) -> float:
        """Total polyline arc length inside the closed disk around ``center``."""
        c = as_point(center)
        if radius <= 0:
            return 0.0
        total = 0.0
        r2 = radius * radius
        for a, b in zip(self.vertices[:-1], self.vertices[1:]):
            ab = b - a
            qa = ab @ ab
            qb = 2.0 * ((a - c) @ ab)
            qc = (a - c) @ (a - c) - r2
            disc = qb * qb - 4.0 * qa * qc
            if disc <= 0.0:
                continue
            sq = np.sqrt(disc)
            t1 = (-qb - sq) / (2.0 * qa)
            t2 = (-qb + sq) / (2.0 * qa)
            lo, hi = max(t1, 0.0), min(t2, 1.0)
            if hi > lo:
                total += (hi - lo) * np.sqrt(qa)
        return float(total)


# ---------------------------------------------------------------------------
# Assignment rules
# ---------------------------------------------------------------------------

def _parse_sign(s):
    if s in (1, +1, "+"):
        return 1.0
    if s in (-1, "-"):
        return -1.0
    raise InvalidInputError(f"sign must be '+' or '-', got {s!r}")


@dataclass(frozen=True)
class QuadrantRule:
    """Treatment region is a (closed) quadrant: sign1*x1 >= 0 and sign2*x2 >= 0.

    The boundary (where either product is zero) belongs to treatment, and
    points within BOUNDARY_TOL of it are snapped to treatment.
    """

    x1_sign: float = 1.0
    x2_sign: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "x1_sign", _parse_sign(self.x1_sign))
        object.__setattr__(self, "x2_sign", _parse_sign(self.x2_sign))

    def contains(self, P) -> np.ndarray:
        """Boolean treatment-membership mask for points ``P``."""
        P = _as_points(P)
        return (self.x1_sign * P[:, 0] >= -BOUNDARY_TOL) & (
            self.x2_sign * P[:, 1] >= -BOUNDARY_TOL
        )


@dataclass(frozen=True)
class PolygonRule:
    """Treatment region is the interior of a closed polygon (even-odd rule).

    Points within BOUNDARY_TOL of any polygon edge count as treated, matching
    the convention that the boundary belongs to the treatment region.
    """

    vertices: np.ndarray

    def __post_init__(self):
        V = _as_points(self.vertices)
        if len(V) < 3:
            raise InvalidInputError("polygon needs at least 3 vertices")
        if np.all(V[0] == V[-1]):
            V = V[:-1]
        if len(V) < 3:
            raise InvalidInputError("polygon needs at least 3 distinct vertices")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)

    def contains(self, P) -> np.ndarray:
        P = _as_points(P)
        V = self.vertices
        x, y = P[:, 0], P[:, 1]
        inside = np.zeros(len(P), dtype=bool)
        on_edge = np.zeros(len(P), dtype=bool)
        for i in range(len(V)):
            a = V[i]
            b = V[(i + 1) % len(V)]
            # Even-odd ray crossing (ray to +x), half-open in y to avoid
            # double counting vertices.
            crosses = (a[1] > y) != (b[1] > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                x_int = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            inside ^= crosses & (x < np.where(crosses, x_int, np.inf))
            # Edge snap: distance from P to segment [a, b].
            ab = b - a
            t = np.clip(((P - a) @ ab) / (ab @ ab), 0.0, 1.0)
            proj = a + t[:, None] * ab
            d = np.hypot(x - proj[:, 0], y - proj[:, 1])
            on_edge |= d <= BOUNDARY_TOL
        return inside | on_edge


# Either rule variant; both expose .contains(P) -> bool mask.
AssignmentRule = QuadrantRule | PolygonRule


def signed_distances(P, eval_pt, rule, metric="euclidean") -> np.ndarray:
    """Signed distances from points ``P`` to ``eval_pt``: + treated, - control."""
    P = _as_points(P)
    q = as_point(eval_pt)
    d = np.asarray(metric_function(metric)(P, q), dtype=float)
    sign = np.where(rule.contains(P), 1.0, -1.0)
    return sign * d


def signed_distance(x_i, eval_pt, rule, metric="euclidean") -> float:
    """Scalar signed distance score of one observation at one boundary point."""
    return float(signed_distances(as_point(x_i)[None, :], eval_pt, rule, metric)[0])


# ---------------------------------------------------------------------------
# Evaluation grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalGrid:
    """Ordered evaluation points on the boundary with matching arc lengths."""

    polyline: BoundaryPolyline
    points: np.ndarray
    arclengths: np.ndarray

    def __post_init__(self):
        pts = _as_points(self.points)
        arcs = np.asarray(self.arclengths, dtype=float)
        if len(pts) != len(arcs) or len(pts) < 1:
            raise InvalidInputError("points and arclengths must have equal positive length")
        if np.any(np.diff(arcs) < 0):
            raise InvalidInputError("grid arc lengths must be nondecreasing")
        off = self.polyline.distance_to(pts)
        scale = 1.0 + np.abs(self.polyline.vertices).max()
        if np.any(off > 1e-12 * scale):
            raise InvalidInputError("grid points must lie on the polyline")
        pts.setflags(write=False)
        arcs.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "arclengths", arcs)

    @property
    def count(self) -> int:
        return len(self.points)

    def kink_arc_distance(self) -> np.ndarray:
        """Arc-length distance from each grid point to the nearest kink vertex.

        Returns +inf everywhere if the polyline has no marked kinks.
        """
        idx = sorted(self.polyline.kink_indices)
        if not idx:
            return np.full(self.count, np.inf)
        kink_arcs = self.polyline.cumulative_arclength[idx]
        return np.min(np.abs(self.arclengths[:, None] - kink_arcs[None, :]), axis=1)


def make_grid(polyline: BoundaryPolyline, M: int) -> EvalGrid:
    """M evaluation points at equal arc-length spacing along the polyline.

    Endpoints are included; for M = 1 the single point is the midpoint.
    """
    if M < 1:
        raise InvalidInputError(f"grid size must be >= 1, got {M}")
    L = polyline.total_length
    if M == 1:
        arcs = np.array([L / 2.0])
    else:
        arcs = L * np.arange(M) / (M - 1)
    pts = polyline.point_at(arcs)
    return EvalGrid(polyline, np.atleast_2d(pts), arcs)


# ---------------------------------------------------------------------------
# Boundary spec files
# ---------------------------------------------------------------------------

def load_boundary(source) -> tuple[BoundaryPolyline, AssignmentRule]:
    """Load a boundary spec from a JSON file path or an already-parsed dict.

    Schema::

        {
          "vertices": [[x, y], ...],
          "kinks": [int, ...],                # optional; auto-detected if absent
          "assignment": {"quadrant": {"x1_sign": "+|-", "x2_sign": "+|-"}}
                        or {"polygon": [[x, y], ...]}
        }
    """
    if isinstance(source, dict):
        spec = source
    else:
        with open(source) as fh:
            spec = json.load(fh)
    try:
        vertices = spec["vertices"]
        assignment = spec["assignment"]
    except KeyError as exc:
        raise InvalidInputError(f"boundary spec missing key {exc}") from None
    kinks = spec.get("kinks")
    polyline = BoundaryPolyline.from_vertices(
        vertices, kinks=frozenset(kinks) if kinks is not None else None
    )
    if "quadrant" in assignment:
        q = assignment["quadrant"]
        rule = QuadrantRule(q.get("x1_sign", "+"), q.get("x2_sign", "+"))
    elif "polygon" in assignment:
        rule = PolygonRule(np.asarray(assignment["polygon"], dtype=float))
    else:
        raise InvalidInputError("assignment must specify 'quadrant' or 'polygon'")
    return polyline, rule
