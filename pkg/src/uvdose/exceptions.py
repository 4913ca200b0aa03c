"""Exception hierarchy shared by the uvdose modules."""


class UVDoseError(Exception):
    """Base class for every error raised by uvdose."""


class DegenerateGeometry(UVDoseError, ValueError):
    """A surface point lies on a lamp axis, where irradiance diverges."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NegativeDuration(UVDoseError, ValueError):
    pass


class OutOfBounds(UVDoseError, ValueError):
    pass


class EmptyRegion(UVDoseError):
    pass


class TooFewPoints(UVDoseError, ValueError):
    pass


class NoReachablePoses(UVDoseError):
    pass


class DimensionMismatch(UVDoseError, ValueError):
    pass


class TooLarge(UVDoseError, ValueError):
    pass


class UnreachablePoint(UVDoseError):
    """No trajectory segment delivers any irradiance to a surface point."""

    def __init__(self, indices, site=None):
        self.indices = [int(i) for i in indices]
        self.site = site
        where = f" at site {site!r}" if site is not None else ""
        super().__init__(f"surface points {self.indices[:10]} receive no irradiance{where}")


class NoFreeStopPoint(UVDoseError):
    pass


class NoPath(UVDoseError):
    def __init__(self, start, goal, site=None):
        self.start = start
        self.goal = goal
        self.site = site
        where = f" (site {site!r})" if site is not None else ""
        super().__init__(f"no path from {start} to {goal}{where}")


class UnreachableSite(NoPath):
    pass


class OrphanProbe(UVDoseError):
    def __init__(self, probe_id, distance):
        self.probe_id = probe_id
        self.distance = distance
        super().__init__(f"probe {probe_id!r} is {distance:.4f} m from the nearest surface point")
