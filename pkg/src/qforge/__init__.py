"""qforge: exact experiments with rational points on curves y^2 = (x-e1)(x-e2)(x-e3)."""
from .curves import INFINITY, Point, QuarticCurve, QuarticPoint, SplitCurve, to_quartic
from .errors import QForgeError

__all__ = ["INFINITY", "Point", "QuarticCurve", "QuarticPoint", "SplitCurve", "to_quartic", "QForgeError"]
