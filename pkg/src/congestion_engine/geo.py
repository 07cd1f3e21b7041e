"""Great-circle helpers for matching coordinates to road links."""

import math

EARTH_RADIUS_M = 6_371_008.8


def haversine(lat1, lon1, lat2, lon2):
    """Great-circle distance in meters."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(a)))


def segment_distance(lat, lon, a, b):
    """Distance in meters from a point to the segment ``a``-``b``.

    Uses an equirectangular projection centred on the point, which is
    accurate for segments of a few kilometres.
    """
    coslat = math.cos(math.radians(lat))

    def project(p):
        return (math.radians(p[1] - lon) * coslat * EARTH_RADIUS_M,
                math.radians(p[0] - lat) * EARTH_RADIUS_M)

    ax, ay = project(a)
    bx, by = project(b)
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    t = 0.0 if seg2 == 0 else max(0.0, min(1.0, -(ax * dx + ay * dy) / seg2))
    return math.hypot(ax + t * dx, ay + t * dy)
