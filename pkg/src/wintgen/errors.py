"""Exception hierarchy shared by all wintgen modules."""


class WintgenError(Exception):
    """Base class for every error raised by the engine."""


# expression DSL / jets


class ExprSyntaxError(WintgenError):
    """Malformed expression text. ``offset`` is the byte offset of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifier(ExprSyntaxError):
    def __init__(self, name, offset):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name


class NonConstantExponent(ExprSyntaxError):
    def __init__(self, offset):
        super().__init__("exponent of '^' must be a constant expression", offset)


class DomainError(WintgenError):
    """A partial function was evaluated outside its domain (log(0), 1/0, ...)."""


class OrderTooLarge(WintgenError):
    pass


class IndexOutOfOrder(WintgenError):
    pass


class DimensionMismatch(WintgenError):
    pass


# geometry


class DegenerateImmersion(WintgenError):
    """The Jacobian is (numerically) rank deficient."""


class StencilOutsideDomain(WintgenError):
    pass


class UmbilicPoint(WintgenError):
    """The traceless second fundamental form vanishes, so the Moebius lift is undefined."""


class NotEquality(WintgenError):
    """Shape operators do not attain DDVV equality within tolerance."""


class NotASurface(WintgenError):
    pass


class GaugeAlignmentFailure(WintgenError):
    pass


# constructions


class NotOnSphere(WintgenError):
    pass


class NotInUpperHalfSpace(WintgenError):
    pass


class CenterOnImage(WintgenError):
    pass


class PoleOnImage(WintgenError):
    pass


class UnknownName(WintgenError):
    pass


# configuration


class ConfigError(WintgenError):
    """Any problem with a run configuration (maps to CLI exit status 2)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class ParseError(ConfigError):
    pass


class UnknownKey(ConfigError):
    def __init__(self, key, line=None):
        super().__init__(f"unknown key {key!r}", line)
        self.key = key


class MissingSection(ConfigError):
    def __init__(self, section):
        super().__init__(f"missing section [{section}]")
        self.section = section


class ValidationError(ConfigError):
    pass
