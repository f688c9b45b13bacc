"""Exception hierarchy.

Every domain failure raised by the library derives from :class:`QForgeError`
and carries a stable ``code`` so the CLI can emit a machine-readable error
object without string matching.
"""


class QForgeError(Exception):
    code = "QForgeError"

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class DegenerateColor(QForgeError):
    code = "DegenerateColor"


class NotASquare(QForgeError):
    code = "NotASquare"


class NotOnCurve(QForgeError):
    code = "NotOnCurve"


class SingularCurve(QForgeError):
    code = "SingularCurve"


class TwoTorsionBasePoint(QForgeError):
    code = "TwoTorsionBasePoint"


class SingularTranslate(QForgeError):
    code = "SingularTranslate"


class MapsToInfinity(QForgeError):
    code = "MapsToInfinity"


class MapsToBasePointPair(QForgeError):
    code = "MapsToBasePointPair"


class TwoTorsionInput(QForgeError):
    code = "TwoTorsionInput"


class TwoTorsionHit(QForgeError):
    code = "TwoTorsionHit"


class BadReduction(QForgeError):
    code = "BadReduction"


class BadReductionF(QForgeError):
    """The quartic is not squarefree modulo p."""

    code = "BadReductionF"


class BadPrimeForPoint(QForgeError):
    code = "BadPrimeForPoint"


class TorsionNotRational(QForgeError):
    code = "TorsionNotRational"


class InvalidColoring(QForgeError):
    code = "InvalidColoring"


class InternalError(QForgeError):
    code = "InternalError"


class ConfigError(QForgeError):
    code = "ConfigError"
