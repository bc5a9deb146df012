"""Exact arithmetic in Z[omega] and Z[i], and polynomials over them.

An element is a pair of Python ints ``(a, b)`` meaning ``a + b*z`` where
``z`` is omega = exp(2 pi i / 3) (so z^2 = -1 - z) or i (so z^2 = -1).
"""

from __future__ import annotations

import cmath
import math


class _QuadInt:
    __slots__ = ("a", "b")
    generator: complex = 0j

    def __init__(self, a=0, b=0):
        self.a = int(a)
        self.b = int(b)

    @classmethod
    def coerce(cls, other):
        if isinstance(other, cls):
            return other
        if isinstance(other, int):
            return cls(other, 0)
        return NotImplemented

    def __add__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        return type(self)(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return type(self)(-self.a, -self.b)

    def __sub__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        return type(self)(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, int):
            return type(self)(self.a * other, self.b * other)
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        return self._mul(other)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            return self.unit_inverse() ** (-k)
        result, base = type(self)(1, 0), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return False
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((type(self).__name__, self.a, self.b))

    def __bool__(self):
        return bool(self.a or self.b)

    def __complex__(self):
        return self.a + self.b * self.generator

    def __repr__(self):
        return f"{type(self).__name__}({self.a}, {self.b})"

    def exact_div(self, other):
        """self / other, raising ArithmeticError if not in the ring."""
        other = self.coerce(other)
        nrm = other.norm()
        if nrm == 0:
            raise ZeroDivisionError("division by zero in cyclotomic ring")
        num = self * other.conj()
        if num.a % nrm or num.b % nrm:
            raise ArithmeticError(f"{self!r} is not divisible by {other!r}")
        return type(self)(num.a // nrm, num.b // nrm)

    def unit_inverse(self):
        return type(self)(1, 0).exact_div(self)


class ZOmega(_QuadInt):
    """a + b*omega with omega^2 = -1 - omega."""

    generator = cmath.exp(2j * math.pi / 3)

    def _mul(self, o):
        ac, bd = self.a * o.a, self.b * o.b
        return ZOmega(ac - bd, self.a * o.b + self.b * o.a - bd)

    def conj(self):
        return ZOmega(self.a - self.b, -self.b)

    def norm(self):
        return self.a * self.a - self.a * self.b + self.b * self.b


class ZI(_QuadInt):
    """a + b*i, the Gaussian integers."""

    generator = 1j

    def _mul(self, o):
        return ZI(self.a * o.a - self.b * o.b, self.a * o.b + self.b * o.a)

    def conj(self):
        return ZI(self.a, -self.b)

    def norm(self):
        return self.a * self.a + self.b * self.b


OMEGA = ZOmega(0, 1)
I = ZI(0, 1)


def omega_pow(k):
    """omega^k for any integer k."""
    return (ZOmega(1, 0), ZOmega(0, 1), ZOmega(-1, -1))[k % 3]


def i_pow(k):
    return (ZI(1, 0), ZI(0, 1), ZI(-1, 0), ZI(0, -1))[k % 4]


def sixth_root_pow(k):
    """(-omega)^k = exp(-i pi k / 3), the sixth roots of unity inside Z[omega]."""
    w = omega_pow(k)
    return -w if k % 2 else w


class CyclotomicPoly:
    """Polynomial in one formal variable with coefficients in ZOmega or ZI.

    Coefficients are stored low degree first; the zero polynomial is empty.
    """

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring, coeffs=()):
        self.ring = ring
        cs = [ring.coerce(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def constant(cls, ring, c):
        return cls(ring, [c])

    @classmethod
    def linear(cls, ring, c0, c1):
        """c0 + c1 * lambda."""
        return cls(ring, [c0, c1])

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def coeff(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else self.ring(0, 0)

    def _lift(self, other):
        if isinstance(other, CyclotomicPoly):
            if other.ring is not self.ring:
                raise TypeError("mixing cyclotomic rings")
            return other
        c = self.ring.coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return CyclotomicPoly(self.ring, [c])

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        m = max(len(self.coeffs), len(other.coeffs))
        return CyclotomicPoly(self.ring, [self.coeff(k) + other.coeff(k) for k in range(m)])

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicPoly(self.ring, [-c for c in self.coeffs])

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if not self.coeffs or not other.coeffs:
            return CyclotomicPoly(self.ring)
        zero = self.ring(0, 0)
        out = [zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return CyclotomicPoly(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = CyclotomicPoly(self.ring, [1])
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return False
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, z):
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + complex(c)
        return acc

    def divmod(self, divisor):
        """Long division by a polynomial whose leading coefficient is a unit."""
        if not divisor.coeffs:
            raise ZeroDivisionError("polynomial division by zero")
        lead_inv = divisor.coeffs[-1].unit_inverse()
        rem = list(self.coeffs)
        dq = divisor.degree
        quot = [self.ring(0, 0)] * max(len(rem) - dq, 0)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] * lead_inv
            if not c:
                continue
            quot[k - dq] = c
            for j, d in enumerate(divisor.coeffs):
                rem[k - dq + j] = rem[k - dq + j] - c * d
        return CyclotomicPoly(self.ring, quot), CyclotomicPoly(self.ring, rem[:dq])

    def to_pairs(self):
        return [[c.a, c.b] for c in self.coeffs]

    def __repr__(self):
        return f"CyclotomicPoly({self.ring.__name__}, {self.to_pairs()})"


def one_minus(ring, c):
    """1 - c * lambda."""
    return CyclotomicPoly.linear(ring, 1, -ring.coerce(c))


def one_plus(ring, c):
    """1 + c * lambda."""
    return CyclotomicPoly.linear(ring, 1, ring.coerce(c))
