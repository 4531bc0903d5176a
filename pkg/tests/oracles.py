"""Independent reference computations used to cross-check the library.

None of these share code with the package: winding numbers come from summing
signed angles, containment from barycentric signs or shapely, and pre-images
from a brute-force solve clustered by source position.
"""

from __future__ import annotations

import math

import numpy as np
from shapely.geometry import Point
from shapely.geometry import Polygon as ShapelyPolygon


def winding_by_angles(segments, q) -> int:
    """Winding number of a weighted set of oriented segments around q.

    ``segments`` is an iterable of (start, end, weight).  Sums the signed
    angle subtended by every segment and divides by 2 pi.
    """
    total = 0.0
    qx, qy = float(q[0]), float(q[1])
    for a, b, w in segments:
        ax, ay = a[0] - qx, a[1] - qy
        bx, by = b[0] - qx, b[1] - qy
        total += w * math.atan2(ax * by - ay * bx, ax * bx + ay * by)
    k = total / (2.0 * math.pi)
    r = round(k)
    assert abs(k - r) < 1e-6, f"angle sum {k} is not close to an integer"
    return int(r)


def chain_segments(images, chain):
    """Oriented image segments of a 1-chain given as {(i, j): coeff}."""
    return [(images[i], images[j], c) for (i, j), c in chain.items()]


def barycentric_indicator(tri, q) -> int:
    """+1 / -1 if q is strictly inside a positive / negative triangle, else 0."""
    a, b, c = (np.asarray(p, dtype=float) for p in tri)
    T = np.array([[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]])
    det = np.linalg.det(T)
    l1, l2 = np.linalg.solve(T, np.asarray(q, dtype=float) - a)
    l0 = 1.0 - l1 - l2
    if min(l0, l1, l2) > 0:
        return 1 if det > 0 else -1
    return 0


def inside_polygon(vertices, q) -> bool:
    return ShapelyPolygon([tuple(v) for v in vertices]).contains(Point(float(q[0]), float(q[1])))


def brute_preimages(source, images, faces, q, tol=1e-9) -> int:
    """Number of distinct source points mapping to q, found face by face."""
    q = np.asarray(q, dtype=float)
    faces = np.asarray(faces)
    U = np.asarray(images, dtype=float)[faces]
    T = np.stack([U[:, 1] - U[:, 0], U[:, 2] - U[:, 0]], axis=2)
    det = T[:, 0, 0] * T[:, 1, 1] - T[:, 0, 1] * T[:, 1, 0]
    keep = np.abs(det) >= 1e-14
    rhs = (q - U[keep, 0])[..., None]
    l12 = np.linalg.solve(T[keep], rhs)[..., 0]
    lam = np.column_stack([1.0 - l12.sum(axis=1), l12])
    hit = lam.min(axis=1) >= -tol
    X = np.einsum("fk,fkc->fc", lam[hit], np.asarray(source, dtype=float)[faces[keep][hit]])
    found = []
    for x in X:
        if not any(np.linalg.norm(x - y) < 1e-7 for y in found):
            found.append(x)
    return len(found)
