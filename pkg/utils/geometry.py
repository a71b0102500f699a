"""Planar geometric predicates for trajectory and device layouts.

Positions are (x, y) pairs in meters. Everything here is a pure function of
its inputs.
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from pydantic import BaseModel, ConfigDict

from utils.exceptions import DegenerateFit, ZeroLengthVector
from utils.validators import Point, TurnDirection

# Cross products at or below this fraction of |v1||v2| count as zero.
COLLINEAR_TOLERANCE = 1e-9
DENSE_SAMPLES = 1000
DIP_TOLERANCE = 0.1
# Direction of travel is taken over the last tenth of the fitted length.
DIRECTION_WINDOW = 0.1


def cross2(v1: Sequence[float], v2: Sequence[float]) -> float:
    """z-component of the cross product of two 2-vectors."""
    return float(v1[0] * v2[1] - v1[1] * v2[0])


def _effective_sign(c: np.ndarray, norm_a: np.ndarray, norm_b: np.ndarray) -> np.ndarray:
    """Sign of cross products with near-collinear values mapped to 0."""
    signs = np.sign(c)
    signs[np.abs(c) <= COLLINEAR_TOLERANCE * norm_a * norm_b] = 0.0
    return signs


# ============================================================
# POLYNOMIAL FIT AND EXTENSION
# ============================================================

class FittedPath(BaseModel):
    """Parametric least-squares fit x(u), y(u) with a straight extension.

    For u in [0, 1] the polynomial is evaluated. For u in (1, 1 + p_extend]
    the path continues on a ray from the fitted endpoint along the direction
    of travel, covering ``p_extend`` times the fitted length at u = 1 + p_extend.
    """
    model_config = ConfigDict(frozen=True)

    coeffs_x: Tuple[float, ...]
    coeffs_y: Tuple[float, ...]
    p_extend: float
    arc_length: float
    end_point: Point
    direction: Point
    sample_step: float

    def evaluate(self, u: np.ndarray) -> np.ndarray:
        """Evaluate the path at parameters ``u``; returns an (n, 2) array."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty((u.size, 2))
        inside = u <= 1.0
        out[inside, 0] = P.polyval(u[inside], self.coeffs_x)
        out[inside, 1] = P.polyval(u[inside], self.coeffs_y)
        beyond = (u[~inside] - 1.0) * self.arc_length
        out[~inside] = np.asarray(self.end_point) + beyond[:, None] * np.asarray(self.direction)
        return out

    def dense_samples(self) -> np.ndarray:
        """Uniform parameter samples over the original span plus the extension."""
        u_fit = np.linspace(0.0, 1.0, DENSE_SAMPLES)
        n_ext = max(1, int(math.ceil(self.p_extend / self.sample_step)))
        u_ext = np.linspace(1.0, 1.0 + self.p_extend, n_ext + 1)[1:]
        return self.evaluate(np.concatenate([u_fit, u_ext]))


def fit_and_extend(points: Sequence[Point], d_poly: int, p_extend: float) -> FittedPath:
    """Fit a degree-``d_poly`` parametric polynomial and extend it.

    Args:
        points: Observed positions, one per timestep
        d_poly: Polynomial degree
        p_extend: Extension length as a fraction of the fitted length

    Returns:
        FittedPath evaluable over [0, 1 + p_extend]

    Raises:
        DegenerateFit: fewer than d_poly + 1 distinct points, a rank-deficient
            system or a fitted path of zero length
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(np.unique(pts, axis=0)) < d_poly + 1:
        raise DegenerateFit(f"need {d_poly + 1} distinct points for a degree {d_poly} fit")

    u = np.linspace(0.0, 1.0, len(pts))
    vander = P.polyvander(u, d_poly)
    coeffs, _, rank, _ = np.linalg.lstsq(vander, pts, rcond=None)
    if rank < d_poly + 1:
        raise DegenerateFit(f"rank {rank} < {d_poly + 1}")

    dense = np.column_stack([
        P.polyval(np.linspace(0.0, 1.0, DENSE_SAMPLES), coeffs[:, 0]),
        P.polyval(np.linspace(0.0, 1.0, DENSE_SAMPLES), coeffs[:, 1]),
    ])
    arc_length = float(np.sum(np.linalg.norm(np.diff(dense, axis=0), axis=1)))
    if arc_length <= 0.0:
        raise DegenerateFit("fitted path has zero length")

    end_point = dense[-1]
    chord = np.linalg.norm(dense - end_point, axis=1)
    far_enough = np.flatnonzero(chord >= DIRECTION_WINDOW * arc_length)
    anchor = dense[far_enough[-1]] if far_enough.size else dense[0]
    heading = end_point - anchor
    norm = float(np.linalg.norm(heading))
    if norm == 0.0:
        raise DegenerateFit("no direction of travel at the fitted endpoint")

    return FittedPath(
        coeffs_x=tuple(coeffs[:, 0].tolist()),
        coeffs_y=tuple(coeffs[:, 1].tolist()),
        p_extend=p_extend,
        arc_length=arc_length,
        end_point=(float(end_point[0]), float(end_point[1])),
        direction=(float(heading[0] / norm), float(heading[1] / norm)),
        sample_step=1.0 / (DENSE_SAMPLES - 1),
    )


def point_to_polyline_distance(polyline: np.ndarray, target: Point) -> float:
    """Minimum Euclidean distance from ``target`` to a polyline."""
    target = np.asarray(target, dtype=float)
    if len(polyline) == 1:
        return float(np.linalg.norm(polyline[0] - target))
    a = polyline[:-1]
    ab = polyline[1:] - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.einsum("ij,ij->i", target - a, ab) / np.where(denom > 0, denom, 1.0)
    t = np.clip(np.where(denom > 0, t, 0.0), 0.0, 1.0)
    closest = a + t[:, None] * ab
    return float(np.min(np.linalg.norm(closest - target, axis=1)))


def passes_point(path: FittedPath, target: Point, d_pass: float) -> bool:
    """True iff the densely resampled path comes within ``d_pass`` of ``target``."""
    return point_to_polyline_distance(path.dense_samples(), target) < d_pass


# ============================================================
# CROSSING TESTS
# ============================================================

def first_sign_flip_index(points: Sequence[Point], ref: Point) -> Optional[int]:
    """First 1-based timestep i where consecutive cross products change sign.

    At interior i the products cross2(P_{i-1}->L, L->P_i) and
    cross2(P_i->L, L->P_{i+1}) are compared; a strict negative product marks
    the passage.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        return None
    ref = np.asarray(ref, dtype=float)
    to_ref = ref - pts[:-1]          # P_k -> L, k = 1..n-1
    from_ref = pts[1:] - ref         # L -> P_k, k = 2..n
    c = to_ref[:, 0] * from_ref[:, 1] - to_ref[:, 1] * from_ref[:, 0]
    signs = _effective_sign(c, np.linalg.norm(to_ref, axis=1), np.linalg.norm(from_ref, axis=1))
    flips = np.flatnonzero(signs[:-1] * signs[1:] < 0)
    return int(flips[0]) + 2 if flips.size else None


def crossed_by_sign_flip(points: Sequence[Point], ref: Point) -> bool:
    """Cross-product sign-flip passage test."""
    return first_sign_flip_index(points, ref) is not None


def distance_dip_index(points: Sequence[Point], ref: Point, tolerance: float = DIP_TOLERANCE) -> Optional[int]:
    """1-based timestep of the interior distance minimum, if it dips below both ends."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        return None
    d = np.linalg.norm(pts - np.asarray(ref, dtype=float), axis=1)
    interior = d[1:-1]
    dips = (interior < d[0] - tolerance) & (interior < d[-1] - tolerance)
    if not dips.any():
        return None
    return int(np.argmin(interior)) + 2


def crossed_by_distance_dip(points: Sequence[Point], ref: Point, tolerance: float = DIP_TOLERANCE) -> bool:
    """Distance first decreases then increases by more than ``tolerance``."""
    return distance_dip_index(points, ref, tolerance) is not None


# ============================================================
# TURN DIRECTION
# ============================================================

class TurnThresholds(BaseModel):
    """η bounds. Without through bounds the non-turn band is Indeterminate."""
    model_config = ConfigDict(frozen=True)

    left: float
    right: float
    through_upper: Optional[float] = None
    through_lower: Optional[float] = None


def turn_measure(start: Point, ref: Point, end: Point) -> float:
    """η = cross2(unit(start->ref), unit(ref->end)).

    Raises:
        ZeroLengthVector: start == ref or ref == end
    """
    a = np.asarray(ref, dtype=float) - np.asarray(start, dtype=float)
    b = np.asarray(end, dtype=float) - np.asarray(ref, dtype=float)
    norm_a = float(np.hypot(*a))
    norm_b = float(np.hypot(*b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroLengthVector("turn vectors need distinct start, reference and end points")
    return cross2(a / norm_a, b / norm_b)


def classify_turn_measure(eta: float, thresholds: TurnThresholds) -> TurnDirection:
    """Map η onto a turn direction."""
    if eta > thresholds.left:
        return TurnDirection.LEFT
    if eta < thresholds.right:
        return TurnDirection.RIGHT
    if (
        thresholds.through_upper is not None
        and thresholds.through_lower is not None
        and thresholds.through_lower < eta < thresholds.through_upper
    ):
        return TurnDirection.STRAIGHT
    return TurnDirection.INDETERMINATE


def turn_direction(start: Point, ref: Point, end: Point, thresholds: TurnThresholds) -> TurnDirection:
    """Left, Right, Straight or Indeterminate turn through ``ref``."""
    return classify_turn_measure(turn_measure(start, ref, end), thresholds)


# ============================================================
# CONVEX QUADRILATERAL
# ============================================================

class PolarOrder(BaseModel):
    """Points sorted by polar angle around the lowest-left reference."""
    model_config = ConfigDict(frozen=True)

    reference: Point
    ordered: Tuple[Tuple[Point, float], ...]

    def ring(self) -> Tuple[Point, ...]:
        return (self.reference,) + tuple(p for p, _ in self.ordered)


def polar_order(points: Sequence[Point]) -> PolarOrder:
    """Sort points counter-clockwise around the lexicographic minimum.

    The reference is the minimum x (then minimum y). Angle ties break by
    ascending distance from the reference.
    """
    pts = [(float(p[0]), float(p[1])) for p in points]
    reference = min(pts)
    rest = list(pts)
    rest.remove(reference)

    def key(p: Point) -> Tuple[float, float]:
        dx, dy = p[0] - reference[0], p[1] - reference[1]
        return math.atan2(dy, dx), math.hypot(dx, dy)

    rest.sort(key=key)
    return PolarOrder(reference=reference, ordered=tuple((p, key(p)[0]) for p in rest))


def convex_quadrilateral(signs: Sequence[Point]) -> bool:
    """True iff four points form a strictly convex quadrilateral.

    After polar ordering, the four cyclic edge cross products must all share
    one strict sign. Duplicates and collinear triples give False.
    """
    pts = [(float(p[0]), float(p[1])) for p in signs]
    if len(pts) != 4 or len(set(pts)) != 4:
        return False

    ring = np.asarray(polar_order(pts).ring())
    edges = np.roll(ring, -1, axis=0) - ring
    nxt = np.roll(edges, -1, axis=0)
    c = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
    signs_ = _effective_sign(c, np.linalg.norm(edges, axis=1), np.linalg.norm(nxt, axis=1))
    return bool(np.all(signs_ > 0) or np.all(signs_ < 0))
