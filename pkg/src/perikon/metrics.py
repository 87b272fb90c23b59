"""Post-processing: crater and scabbing extents from a damage field."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree


@dataclass
class DamageZone:
    radius: float = 0.0
    depth: float = 0.0
    n_points: int = 0


def damaged_components(positions: np.ndarray, damaged: np.ndarray, dx: float):
    """Connected components of damaged points under the 26-neighborhood of the grid.

    Returns:
        (indices of damaged points, component label per damaged point)
    """
    idx = np.flatnonzero(damaged)
    if len(idx) == 0:
        return idx, np.zeros(0, dtype=np.int64)
    pts = positions[idx]
    pairs = cKDTree(pts).query_pairs(np.sqrt(3.0) * dx * (1 + 1e-6), output_type="ndarray")
    n = len(idx)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return idx, labels


def face_zone(positions, damage, dx, axis_point, face: float, inward: float,
              threshold: float = 0.35, axis: int = 2) -> DamageZone:
    """Damaged region connected to a face.

    Args:
        positions: point coordinates (N, 3).
        damage: damage per point.
        dx: grid spacing.
        axis_point: a point on the projectile axis (x, y used).
        face: coordinate of the face plane along ``axis``.
        inward: +1 if the body lies at larger coordinates than the face, else -1.
        threshold: damage level counted as damaged.

    Returns:
        Radial extent on the face layer and depth from the face of every
        damaged component that touches the face layer.
    """
    positions = np.asarray(positions, float)
    depth_of = inward * (positions[:, axis] - face)
    idx, labels = damaged_components(positions, np.asarray(damage) >= threshold, dx)
    if len(idx) == 0:
        return DamageZone()
    on_face = depth_of[idx] < dx
    touching = np.unique(labels[on_face])
    if len(touching) == 0:
        return DamageZone()
    members = idx[np.isin(labels, touching)]
    layer = members[depth_of[members] < dx]
    lateral = [a for a in range(3) if a != axis]
    r = np.hypot(positions[layer, lateral[0]] - axis_point[0],
                 positions[layer, lateral[1]] - axis_point[1])
    return DamageZone(radius=float(r.max()), depth=float(depth_of[members].max()),
                      n_points=int(len(members)))


def crater_metrics(positions, damage, dx, extent_min, extent_max, axis_point=None,
                   threshold: float = 0.35):
    """Crater (entry face, low z) and scabbing (exit face, high z) zones."""
    extent_min = np.asarray(extent_min, float)
    extent_max = np.asarray(extent_max, float)
    if axis_point is None:
        axis_point = 0.5 * (extent_min[:2] + extent_max[:2])
    crater = face_zone(positions, damage, dx, axis_point, extent_min[2], +1.0, threshold)
    scab = face_zone(positions, damage, dx, axis_point, extent_max[2], -1.0, threshold)
    return crater, scab
