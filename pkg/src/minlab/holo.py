"""Closed-form holomorphic expressions over planar domains.

Expression trees with a small set of node kinds: constants, the identity,
affine maps, simple-pole factors k*theta/(z-p) + 1, exponentials of
polynomials, products, quotients, integer powers and linear combinations.
Trees may share subtrees (DAG); evaluation is vectorized over numpy arrays
and memoized per call so shared nodes are evaluated once.

Every tree can report the finite set of poles and zeros it was built with,
so a caller can certify that a working domain avoids them.  For zero-free
certification on a concrete domain use :func:`winding_number`.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "HoloFun",
    "Const",
    "Z",
    "Affine",
    "PoleFactor",
    "ExpPoly",
    "Product",
    "Quotient",
    "IntPow",
    "LinComb",
    "ONE",
    "winding_number",
    "to_text",
    "from_text",
]


class HoloFun:
    """Base class for holomorphic expression nodes."""

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self._eval(z, {})

    def _eval(self, z, cache):
        key = id(self)
        hit = cache.get(key)
        if hit is None:
            hit = self._compute(z, cache)
            cache[key] = hit
        return hit

    def _compute(self, z, cache):  # pragma: no cover - abstract
        raise NotImplementedError

    def declared_zeros(self):
        """Finite zeros this expression is known to have."""
        return []

    def declared_poles(self):
        """Finite poles this expression is known to have."""
        return []

    # -- algebra ----------------------------------------------------------
    def __mul__(self, other):
        return Product([self, as_holo(other)])

    def __rmul__(self, other):
        return Product([as_holo(other), self])

    def __truediv__(self, other):
        return Quotient(self, as_holo(other))

    def __rtruediv__(self, other):
        return Quotient(as_holo(other), self)

    def __add__(self, other):
        other = as_holo(other)
        return LinComb([1.0, 1.0], [self, other])

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        return LinComb([1.0, -1.0], [self, as_holo(other)])

    def __neg__(self):
        return LinComb([-1.0], [self])


def as_holo(x) -> HoloFun:
    if isinstance(x, HoloFun):
        return x
    return Const(complex(x))


class Const(HoloFun):
    def __init__(self, value):
        self.value = complex(value)

    def _compute(self, z, cache):
        return np.broadcast_to(np.asarray(self.value), z.shape).copy()


class Z(HoloFun):
    """The identity z."""

    def _compute(self, z, cache):
        return z


class Affine(HoloFun):
    """a*z + b."""

    def __init__(self, a, b):
        self.a = complex(a)
        self.b = complex(b)

    def _compute(self, z, cache):
        return self.a * z + self.b

    def declared_zeros(self):
        if self.a != 0:
            return [-self.b / self.a]
        return []


class PoleFactor(HoloFun):
    """k*theta/(z - p) + 1 with k > 0 and |theta| = 1.

    Single simple pole at p, single zero at p - k*theta; tends to 1 at
    infinity.
    """

    def __init__(self, k, theta, p):
        k = float(k)
        theta = complex(theta)
        if k <= 0:
            raise ValueError("pole factor weight k must be positive")
        if abs(abs(theta) - 1.0) > 1e-12:
            raise ValueError("theta must be a unit complex number")
        self.k = k
        self.theta = theta
        self.p = complex(p)

    @property
    def zero(self):
        return self.p - self.k * self.theta

    def _compute(self, z, cache):
        return self.k * self.theta / (z - self.p) + 1.0

    def declared_zeros(self):
        return [self.zero]

    def declared_poles(self):
        return [self.p]


class ExpPoly(HoloFun):
    """exp(q(z)) for a polynomial q in the scaled variable (z-center)/scale.

    Structurally zero-free on all of C.
    """

    def __init__(self, center, scale, coeffs):
        self.center = complex(center)
        self.scale = float(scale)
        self.coeffs = np.asarray(coeffs, dtype=complex)
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def poly(self, z):
        w = (np.asarray(z, dtype=complex) - self.center) / self.scale
        acc = np.zeros_like(w)
        for c in self.coeffs[::-1]:
            acc = acc * w + c
        return acc

    def _compute(self, z, cache):
        return np.exp(self.poly(z))


class Product(HoloFun):
    def __init__(self, factors):
        self.factors = [as_holo(f) for f in factors]

    def _compute(self, z, cache):
        acc = self.factors[0]._eval(z, cache).copy()
        for f in self.factors[1:]:
            acc = acc * f._eval(z, cache)
        return acc

    def declared_zeros(self):
        out = []
        for f in self.factors:
            out.extend(f.declared_zeros())
        return out

    def declared_poles(self):
        out = []
        for f in self.factors:
            out.extend(f.declared_poles())
        return out


class Quotient(HoloFun):
    """num/den; den must be zero-free on the working domain."""

    def __init__(self, num, den):
        self.num = as_holo(num)
        self.den = as_holo(den)

    def _compute(self, z, cache):
        return self.num._eval(z, cache) / self.den._eval(z, cache)

    def declared_zeros(self):
        return self.num.declared_zeros() + self.den.declared_poles()

    def declared_poles(self):
        return self.num.declared_poles() + self.den.declared_zeros()


class IntPow(HoloFun):
    def __init__(self, base, n):
        self.base = as_holo(base)
        self.n = int(n)

    def _compute(self, z, cache):
        return self.base._eval(z, cache) ** self.n

    def declared_zeros(self):
        if self.n > 0:
            return self.base.declared_zeros() * self.n
        if self.n < 0:
            return self.base.declared_poles() * (-self.n)
        return []

    def declared_poles(self):
        if self.n > 0:
            return self.base.declared_poles() * self.n
        if self.n < 0:
            return self.base.declared_zeros() * (-self.n)
        return []


class LinComb(HoloFun):
    """const + sum_k coeffs[k]*children[k]."""

    def __init__(self, coeffs, children, const=0.0):
        self.coeffs = [complex(c) for c in coeffs]
        self.children = [as_holo(c) for c in children]
        self.const = complex(const)
        if len(self.coeffs) != len(self.children):
            raise ValueError("coeffs/children length mismatch")

    def _compute(self, z, cache):
        acc = np.full(z.shape, self.const, dtype=complex)
        for c, child in zip(self.coeffs, self.children):
            if c != 0:
                acc = acc + c * child._eval(z, cache)
        return acc

    def declared_poles(self):
        out = []
        for child in self.children:
            out.extend(child.declared_poles())
        return out


ONE = Const(1.0)


def winding_number(fun: HoloFun, loop: np.ndarray) -> int:
    """Winding of fun around 0 along a closed sampled loop.

    Counts zeros minus poles enclosed by the loop (argument principle);
    the loop must stay clear of zeros and poles and be sampled densely
    enough that consecutive values differ in argument by < pi.
    """
    w = fun(np.asarray(loop, dtype=complex))
    if w[0] != w[-1]:
        w = np.concatenate([w, w[:1]])
    dphase = np.angle(w[1:] / w[:-1])
    if np.max(np.abs(dphase)) > 0.9 * np.pi:
        raise ValueError("loop sampling too coarse for argument tracking")
    total = float(np.sum(dphase))
    return int(round(total / (2.0 * np.pi)))


# -- serialization ---------------------------------------------------------

def _fmt_c(c: complex) -> str:
    return "%.17g%+.17gj" % (c.real, c.imag)


def to_text(fun: HoloFun) -> str:
    """Prefix-notation text form of an expression tree."""
    if isinstance(fun, Const):
        return "(const %s)" % _fmt_c(fun.value)
    if isinstance(fun, Z):
        return "z"
    if isinstance(fun, Affine):
        return "(affine %s %s)" % (_fmt_c(fun.a), _fmt_c(fun.b))
    if isinstance(fun, PoleFactor):
        return "(pole %.17g %s %s)" % (fun.k, _fmt_c(fun.theta), _fmt_c(fun.p))
    if isinstance(fun, ExpPoly):
        parts = " ".join(_fmt_c(c) for c in fun.coeffs)
        return "(exppoly %s %.17g %s)" % (_fmt_c(fun.center), fun.scale, parts)
    if isinstance(fun, Product):
        return "(mul %s)" % " ".join(to_text(f) for f in fun.factors)
    if isinstance(fun, Quotient):
        return "(div %s %s)" % (to_text(fun.num), to_text(fun.den))
    if isinstance(fun, IntPow):
        return "(pow %s %d)" % (to_text(fun.base), fun.n)
    if isinstance(fun, LinComb):
        parts = " ".join(
            "%s %s" % (_fmt_c(c), to_text(f))
            for c, f in zip(fun.coeffs, fun.children)
        )
        return "(lin %s %s)" % (_fmt_c(fun.const), parts)
    raise TypeError("unknown node type %r" % type(fun))


def _tokenize(text: str):
    return text.replace("(", " ( ").replace(")", " ) ").split()


def from_text(text: str) -> HoloFun:
    """Parse the prefix-notation form produced by :func:`to_text`."""
    tokens = _tokenize(text)
    fun, rest = _parse(tokens)
    if rest:
        raise ValueError("trailing tokens: %r" % rest[:4])
    return fun


def _parse(tokens):
    if not tokens:
        raise ValueError("unexpected end of input")
    tok = tokens[0]
    if tok == "z":
        return Z(), tokens[1:]
    if tok != "(":
        raise ValueError("expected '(' or 'z', got %r" % tok)
    head, rest = tokens[1], tokens[2:]
    if head == "const":
        return Const(complex(rest[0])), _expect_close(rest[1:])
    if head == "affine":
        return Affine(complex(rest[0]), complex(rest[1])), _expect_close(rest[2:])
    if head == "pole":
        return (
            PoleFactor(float(rest[0]), complex(rest[1]), complex(rest[2])),
            _expect_close(rest[3:]),
        )
    if head == "exppoly":
        center = complex(rest[0])
        scale = float(rest[1])
        coeffs = []
        rest = rest[2:]
        while rest[0] != ")":
            coeffs.append(complex(rest[0]))
            rest = rest[1:]
        return ExpPoly(center, scale, coeffs), rest[1:]
    if head == "mul":
        factors = []
        while rest[0] != ")":
            f, rest = _parse(rest)
            factors.append(f)
        return Product(factors), rest[1:]
    if head == "div":
        num, rest = _parse(rest)
        den, rest = _parse(rest)
        return Quotient(num, den), _expect_close(rest)
    if head == "pow":
        base, rest = _parse(rest)
        return IntPow(base, int(rest[0])), _expect_close(rest[1:])
    if head == "lin":
        const = complex(rest[0])
        rest = rest[1:]
        coeffs, children = [], []
        while rest[0] != ")":
            coeffs.append(complex(rest[0]))
            child, rest = _parse(rest[1:])
            children.append(child)
        return LinComb(coeffs, children, const), rest[1:]
    raise ValueError("unknown node head %r" % head)


def _expect_close(tokens):
    if not tokens or tokens[0] != ")":
        raise ValueError("expected ')'")
    return tokens[1:]
