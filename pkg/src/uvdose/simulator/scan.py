"""Virtual depth scans of scene primitives and occlusion queries."""

from __future__ import annotations

import numpy as np

from ..mapping.octree import OccupancyOctree

VIEW_DISTANCE = 0.3


def segments_occluded(primitives, a, b, eps=0.0):
    """Mask over segments ``a[i] -> b[i]`` blocked by any primitive's interior.

    ``eps`` trims that length from both ends of every segment first, so
    endpoints lying on (or numerically just inside) a surface do not block
    themselves.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    if eps > 0:
        d = b - a
        length = np.linalg.norm(d, axis=1, keepdims=True)
        trim = np.minimum(eps, 0.5 * length)
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(length > 0, d / length, 0.0)
        a, b = a + trim * unit, b - trim * unit
    hit = np.zeros(len(a), dtype=bool)
    for prim in primitives:
        todo = ~hit
        if not np.any(todo):
            break
        hit[todo] = prim.segment_hits(a[todo], b[todo])
    return hit


def ray_occluded(scene, a, b, eps=0.0):
    """True iff the open segment (a, b) passes through any scene primitive."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if np.allclose(a, b):
        raise ValueError("segment endpoints must differ")
    return bool(segments_occluded(scene.primitives, a, b, eps)[0])


def visibility_mask(scene, source, points, eps=0.0):
    """True where ``source`` sees ``points`` without a primitive in between."""
    return ~segments_occluded(scene.primitives, np.asarray(source, dtype=float)[None, :],
                              points, eps)


def visible_samples(scene, primitive, spacing, view_distance=VIEW_DISTANCE):
    """Surface samples of ``primitive`` with the sensor origin that observes each.

    A sample counts as visible when a sensor ``view_distance`` out along its
    normal lies inside the room, outside every primitive, and has a clear line
    of sight to it.
    """
    pts, normals = primitive.sample_surface(spacing)
    origins = pts + view_distance * normals
    room = np.asarray(scene.room)
    ok = np.all((origins > 0) & (origins < room), axis=1)
    for prim in scene.primitives:
        ok &= ~prim.contains(origins)
    ok[ok] &= ~segments_occluded(scene.primitives, pts[ok], origins[ok], eps=1e-6)
    return pts[ok], normals[ok], origins[ok]


def synthesize_scan(scene, resolution=None):
    """Octree built from virtual scans of every scene object.

    Each visible surface sample is a depth return observed from a sensor
    placed along its normal, so free space in front of the surface is also
    carved.  Samples are spaced at half the leaf size.
    """
    resolution = float(resolution or scene.planning["octree_resolution"])
    tree = OccupancyOctree.covering(np.zeros(3), np.asarray(scene.room), resolution)
    for obj in scene.objects:
        hits, _, origins = visible_samples(scene, obj.primitive, 0.5 * resolution)
        tree.integrate_batch(origins, hits)
    return tree
