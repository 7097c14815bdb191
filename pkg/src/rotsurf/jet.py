"""Second-order Taylor jets in two variables.

A :class:`Jet2` carries the value of a scalar function at a point together
with its first and second partial derivatives in ``u`` and ``v``.  Arithmetic
on jets applies the product, quotient and chain rules truncated at order two,
which is all the curvature formulas need.
"""

from __future__ import annotations

import math

__all__ = [
    "Jet2",
    "JetError",
    "DomainError",
    "InvalidInputError",
    "seed",
    "constant",
    "var_u",
    "var_v",
    "apply_primitive",
    "PRIMITIVES",
]


class JetError(ValueError):
    """Base class for jet arithmetic failures."""


class InvalidInputError(JetError):
    """Raised when a jet is seeded with a non-finite value."""


class DomainError(JetError):
    """A primitive or operator was evaluated outside its domain.

    ``offset`` is filled in by the expression evaluator when the failing
    operation can be traced back to a source position.
    """

    def __init__(self, name, value, offset=None):
        self.name = name
        self.value = value
        self.offset = offset
        super().__init__(self._message())

    def _message(self):
        where = "" if self.offset is None else f" at offset {self.offset}"
        return f"{self.name}: argument {self.value!r} outside domain{where}"

    def with_offset(self, offset):
        self.offset = offset
        self.args = (self._message(),)
        return self


class Jet2:
    """Value plus first and second partials of a scalar at a point."""

    __slots__ = ("val", "du", "dv", "duu", "duv", "dvv")

    def __init__(self, val, du=0.0, dv=0.0, duu=0.0, duv=0.0, dvv=0.0):
        self.val = val
        self.du = du
        self.dv = dv
        self.duu = duu
        self.duv = duv
        self.dvv = dvv

    def fields(self):
        return (self.val, self.du, self.dv, self.duu, self.duv, self.dvv)

    def is_constant(self):
        return not (self.du or self.dv or self.duu or self.duv or self.dvv)

    def __repr__(self):
        return "Jet2(val={!r}, du={!r}, dv={!r}, duu={!r}, duv={!r}, dvv={!r})".format(
            *self.fields()
        )

    def __eq__(self, other):
        if not isinstance(other, Jet2):
            return NotImplemented
        return self.fields() == other.fields()

    __hash__ = None

    # arithmetic -----------------------------------------------------------

    def __neg__(self):
        return Jet2(-self.val, -self.du, -self.dv, -self.duu, -self.duv, -self.dvv)

    def __pos__(self):
        return self

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return _checked(
            "add",
            self.val + other.val,
            self.du + other.du,
            self.dv + other.dv,
            self.duu + other.duu,
            self.duv + other.duv,
            self.dvv + other.dvv,
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return _checked(
            "sub",
            self.val - other.val,
            self.du - other.du,
            self.dv - other.dv,
            self.duu - other.duu,
            self.duv - other.duv,
            self.dvv - other.dvv,
        )

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, b):
        b = _coerce(b)
        if b is NotImplemented:
            return b
        a = self
        # terms are paired so that swapping a and b is bit-for-bit identical
        return _checked(
            "mul",
            a.val * b.val,
            a.du * b.val + a.val * b.du,
            a.dv * b.val + a.val * b.dv,
            (a.duu * b.val + a.val * b.duu) + 2.0 * (a.du * b.du),
            (a.duv * b.val + a.val * b.duv) + (a.du * b.dv + a.dv * b.du),
            (a.dvv * b.val + a.val * b.dvv) + 2.0 * (a.dv * b.dv),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other * self.reciprocal()

    def reciprocal(self):
        x = self.val
        if x == 0.0:
            raise DomainError("div", x)
        inv = 1.0 / x
        return _compose(self, inv, -inv * inv, 2.0 * inv * inv * inv, "div")

    def __pow__(self, exponent):
        if isinstance(exponent, Jet2):
            if exponent.is_constant():
                exponent = exponent.val
            else:
                # general case: a^b = exp(b log a)
                return apply_primitive("exp", exponent * apply_primitive("log", self))
        if isinstance(exponent, int) or float(exponent).is_integer():
            return self.pow_int(int(exponent))
        return self.pow_real(float(exponent))

    def __rpow__(self, base):
        return constant(float(base)) ** self

    def pow_int(self, n):
        """Integer power by repeated squaring."""
        if n < 0:
            return self.pow_int(-n).reciprocal()
        result = constant(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def pow_real(self, exponent):
        if not self.val > 0.0:
            raise DomainError("pow", self.val)
        return apply_primitive("exp", exponent * apply_primitive("log", self))


def _coerce(x):
    if isinstance(x, Jet2):
        return x
    if isinstance(x, (int, float)):
        return constant(float(x))
    return NotImplemented


def _checked(name, *fields):
    for value in fields:
        if not math.isfinite(value):
            raise DomainError(name, fields[0])
    return Jet2(*fields)


def _compose(a, f0, f1, f2, name):
    """Chain rule for g(a) given g, g', g'' evaluated at ``a.val``."""
    return _checked(
        name,
        f0,
        f1 * a.du,
        f1 * a.dv,
        f2 * a.du * a.du + f1 * a.duu,
        f2 * a.du * a.dv + f1 * a.duv,
        f2 * a.dv * a.dv + f1 * a.dvv,
    )


def seed(kind, value):
    """Seed a jet as a constant or as one of the coordinate variables.

    Parameters
    ----------
    kind : {"constant", "var_u", "var_v"}
    value : float
        Value at the expansion point.
    """
    value = float(value)
    if not math.isfinite(value):
        raise InvalidInputError(f"cannot seed a jet with non-finite value {value!r}")
    if kind == "constant":
        return Jet2(value)
    if kind == "var_u":
        return Jet2(value, 1.0)
    if kind == "var_v":
        return Jet2(value, 0.0, 1.0)
    raise InvalidInputError(f"unknown seed kind {kind!r}")


def constant(value):
    return seed("constant", value)


def var_u(value):
    return seed("var_u", value)


def var_v(value):
    return seed("var_v", value)


# primitive table: x -> (g(x), g'(x), g''(x)); domain checks raise first


def _sin(x):
    s, c = math.sin(x), math.cos(x)
    return s, c, -s


def _cos(x):
    s, c = math.sin(x), math.cos(x)
    return c, -s, -c


def _tan(x):
    c = math.cos(x)
    if abs(c) < 1e-12:
        raise DomainError("tan", x)
    t = math.tan(x)
    sec2 = 1.0 + t * t
    return t, sec2, 2.0 * t * sec2


def _exp(x):
    e = math.exp(x) if x < 709.0 else math.inf
    return e, e, e


def _log(x):
    if not x > 0.0:
        raise DomainError("log", x)
    return math.log(x), 1.0 / x, -1.0 / (x * x)


def _sqrt(x):
    if not x > 0.0:
        # the value exists at 0 but the derivatives do not
        raise DomainError("sqrt", x)
    r = math.sqrt(x)
    return r, 0.5 / r, -0.25 / (r * x)


def _sinh(x):
    try:
        s, c = math.sinh(x), math.cosh(x)
    except OverflowError:
        raise DomainError("sinh", x) from None
    return s, c, s


def _cosh(x):
    try:
        s, c = math.sinh(x), math.cosh(x)
    except OverflowError:
        raise DomainError("cosh", x) from None
    return c, s, c


PRIMITIVES = {
    "sin": _sin,
    "cos": _cos,
    "tan": _tan,
    "exp": _exp,
    "log": _log,
    "sqrt": _sqrt,
    "sinh": _sinh,
    "cosh": _cosh,
}


def apply_primitive(name, a):
    """Evaluate primitive ``name`` on jet ``a`` with the order-2 chain rule."""
    try:
        table = PRIMITIVES[name]
    except KeyError:
        raise JetError(f"unknown primitive {name!r}") from None
    a = _coerce(a)
    f0, f1, f2 = table(a.val)
    return _compose(a, f0, f1, f2, name)
