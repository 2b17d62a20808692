"""Exact scalars: the golden field Q(tau), icosian quaternions, truncated p-adics.

Window membership and self-similarity checks in this package are decided
with these types so that a point sitting exactly on a window boundary is
never misclassified by rounding.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from itertools import permutations, product

TAU = (1.0 + math.sqrt(5.0)) / 2.0
TAU_CONJ = 1.0 - TAU

Number = int | Fraction


def _is_rational(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


class Golden:
    """An element a + b*tau of Q(tau), tau = (1 + sqrt 5)/2.

    Coefficients are Python ints (the ring Z[tau]) or Fractions.  Instances
    are treated as immutable.
    """

    __slots__ = ("a", "b")

    def __init__(self, a: Number = 0, b: Number = 0):
        if not (_is_rational(a) and _is_rational(b)):
            raise TypeError(f"Golden coefficients must be int or Fraction, got {a!r}, {b!r}")
        self.a = a
        self.b = b

    @staticmethod
    def coerce(x) -> Golden:
        if isinstance(x, Golden):
            return x
        if _is_rational(x):
            return Golden(x, 0)
        raise TypeError(f"cannot convert {x!r} to Golden exactly")

    # ring structure
    def __add__(self, other):
        if isinstance(other, Golden):
            return Golden(self.a + other.a, self.b + other.b)
        if _is_rational(other):
            return Golden(self.a + other, self.b)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Golden(-self.a, -self.b)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, Golden):
            return Golden(self.a - other.a, self.b - other.b)
        if _is_rational(other):
            return Golden(self.a - other, self.b)
        return NotImplemented

    def __rsub__(self, other):
        if _is_rational(other):
            return Golden(other - self.a, -self.b)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Golden):
            a, b, c, d = self.a, self.b, other.a, other.b
            bd = b * d
            return Golden(a * c + bd, a * d + b * c + bd)
        if _is_rational(other):
            return Golden(self.a * other, self.b * other)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (self.inverse()) ** (-n)
        result, base = Golden(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conj(self) -> Golden:
        """Galois conjugate sqrt5 -> -sqrt5, i.e. tau -> 1 - tau."""
        return Golden(self.a + self.b, -self.b)

    def norm(self) -> Number:
        """Field norm x * conj(x) = a^2 + ab - b^2 (rational)."""
        return self.a * self.a + self.a * self.b - self.b * self.b

    def inverse(self) -> Golden:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(tau)")
        c = self.conj()
        return Golden(Fraction(c.a) / n, Fraction(c.b) / n)

    def __truediv__(self, other):
        if isinstance(other, Golden):
            return self * other.inverse()
        if _is_rational(other):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return Golden(Fraction(self.a) / other, Fraction(self.b) / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if _is_rational(other):
            return Golden(other) * self.inverse()
        return NotImplemented

    # order
    def sign(self) -> int:
        # a + b*tau = ((2a + b) + b*sqrt5) / 2
        p, q = 2 * self.a + self.b, self.b
        if p >= 0 and q >= 0:
            return 0 if (p == 0 and q == 0) else 1
        if p <= 0 and q <= 0:
            return -1
        s = p * p - 5 * q * q
        if p > 0:
            return 1 if s > 0 else -1
        return -1 if s > 0 else 1

    def _cmp(self, other) -> int:
        if isinstance(other, Golden) or _is_rational(other):
            return (self - other).sign()
        if isinstance(other, float):
            return (float(self) > other) - (float(self) < other)
        raise TypeError(f"cannot compare Golden with {type(other).__name__}")

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, Golden):
            return self.a == other.a and self.b == other.b
        if _is_rational(other):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __float__(self):
        return float(self.a) + float(self.b) * TAU

    @property
    def is_integral(self) -> bool:
        return all(isinstance(c, int) or c.denominator == 1 for c in (self.a, self.b))

    def __repr__(self):
        return f"Golden({self.a!r}, {self.b!r})"

    def __str__(self):
        return format_golden(self)


def _fmt_rat(x: Number) -> str:
    if isinstance(x, Fraction) and x.denominator != 1:
        return f"{x.numerator}/{x.denominator}"
    return str(int(x))


def format_golden(x) -> str:
    """Serialize as "a+b*tau" (the descriptor format)."""
    x = Golden.coerce(x)
    if x.b == 0:
        return _fmt_rat(x.a)
    b = _fmt_rat(x.b)
    if x.a == 0:
        return f"{b}*tau"
    if not b.startswith("-"):
        b = "+" + b
    return f"{_fmt_rat(x.a)}{b}*tau"


_TERM = re.compile(r"\s*([+-]?)\s*([0-9./]*)\s*(\*?\s*tau)?\s*", re.IGNORECASE)


def parse_golden(text) -> Golden:
    """Parse "a+b*tau" style strings; also plain numbers, "tau", "1/2*tau - 3"."""
    if isinstance(text, Golden):
        return text
    if isinstance(text, int):
        return Golden(text)
    if isinstance(text, float):
        raise TypeError("floats cannot be parsed exactly; pass a string")
    s = str(text).strip()
    if not s:
        raise ValueError("empty golden literal")
    a, b = Fraction(0), Fraction(0)
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"bad golden literal {text!r}")
        sign, num, has_tau = m.groups()
        if not num and not has_tau:
            raise ValueError(f"bad golden literal {text!r}")
        coeff = Fraction(num) if num else Fraction(1)
        if sign == "-":
            coeff = -coeff
        if has_tau:
            b += coeff
        else:
            a += coeff
        pos = m.end()
        if pos < len(s) and s[pos] not in "+-":
            raise ValueError(f"bad golden literal {text!r}")
    return Golden(_simplify(a), _simplify(b))


def _simplify(x: Fraction) -> Number:
    return int(x) if x.denominator == 1 else x


def golden_conjugate(x: Golden) -> Golden:
    return Golden.coerce(x).conj()


# ---------------------------------------------------------------------------
# Icosians


class Icosian:
    """Quaternion w + xi + yj + zk with components in (1/2) Z[tau].

    Stored as eight integers: the Z[tau] numerators (a, b) of 2w, 2x, 2y, 2z.
    """

    __slots__ = ("v",)

    def __init__(self, v):
        v = tuple(int(c) for c in v)
        if len(v) != 8:
            raise ValueError("Icosian needs 8 integer numerator coefficients")
        self.v = v

    @classmethod
    def from_components(cls, w, x, y, z) -> Icosian:
        out = []
        for c in (w, x, y, z):
            g = Golden.coerce(c) * 2
            if not g.is_integral:
                raise ValueError(f"component {c} is not in (1/2)Z[tau]")
            out += [int(g.a), int(g.b)]
        return cls(out)

    @property
    def components(self) -> tuple[Golden, ...]:
        v = self.v
        return tuple(Golden(_simplify(Fraction(v[2 * i], 2)), _simplify(Fraction(v[2 * i + 1], 2)))
                     for i in range(4))

    def __mul__(self, other):
        if not isinstance(other, Icosian):
            return NotImplemented
        a0, b0, a1, b1, a2, b2, a3, b3 = self.v
        c0, d0, c1, d1, c2, d2, c3, d3 = other.v

        def gm(a, b, c, d):
            bd = b * d
            return a * c + bd, a * d + b * c + bd

        p = {}
        for i, (a, b) in enumerate(((a0, b0), (a1, b1), (a2, b2), (a3, b3))):
            for j, (c, d) in enumerate(((c0, d0), (c1, d1), (c2, d2), (c3, d3))):
                p[i, j] = gm(a, b, c, d)

        def comb(*terms):
            sa = sb = 0
            for s, key in terms:
                sa += s * p[key][0]
                sb += s * p[key][1]
            if sa % 2 or sb % 2:
                raise ArithmeticError("product left the half-integral icosian form")
            return sa // 2, sb // 2

        w = comb((1, (0, 0)), (-1, (1, 1)), (-1, (2, 2)), (-1, (3, 3)))
        x = comb((1, (0, 1)), (1, (1, 0)), (1, (2, 3)), (-1, (3, 2)))
        y = comb((1, (0, 2)), (-1, (1, 3)), (1, (2, 0)), (1, (3, 1)))
        z = comb((1, (0, 3)), (1, (1, 2)), (-1, (2, 1)), (1, (3, 0)))
        return Icosian(w + x + y + z)

    def __add__(self, other):
        if not isinstance(other, Icosian):
            return NotImplemented
        return Icosian(tuple(s + o for s, o in zip(self.v, other.v)))

    def __sub__(self, other):
        if not isinstance(other, Icosian):
            return NotImplemented
        return Icosian(tuple(s - o for s, o in zip(self.v, other.v)))

    def __neg__(self):
        return Icosian(tuple(-s for s in self.v))

    def scale(self, g) -> Icosian:
        """Multiply by a scalar in Z[tau]."""
        g = Golden.coerce(g)
        if not g.is_integral:
            raise ValueError("icosian scalars must lie in Z[tau]")
        out = []
        for i in range(4):
            r = Golden(self.v[2 * i], self.v[2 * i + 1]) * g
            out += [int(r.a), int(r.b)]
        return Icosian(out)

    def bar(self) -> Icosian:
        """Quaternion conjugate w - xi - yj - zk."""
        v = self.v
        return Icosian((v[0], v[1], -v[2], -v[3], -v[4], -v[5], -v[6], -v[7]))

    def star(self) -> Icosian:
        """Galois conjugate applied to every component."""
        out = []
        for i in range(4):
            a, b = self.v[2 * i], self.v[2 * i + 1]
            out += [a + b, -b]
        return Icosian(out)

    def norm(self) -> Golden:
        """Quaternion norm w^2 + x^2 + y^2 + z^2 in Q(tau)."""
        s = Golden(0)
        for i in range(4):
            g = Golden(self.v[2 * i], self.v[2 * i + 1])
            s = s + g * g
        return Golden(_simplify(Fraction(s.a, 4)), _simplify(Fraction(s.b, 4)))

    def to_float(self) -> tuple[float, float, float, float]:
        return tuple(float(c) for c in self.components)

    def __eq__(self, other):
        return isinstance(other, Icosian) and self.v == other.v

    def __hash__(self):
        return hash(self.v)

    def __repr__(self):
        return "Icosian(" + ", ".join(format_golden(c) for c in self.components) + ")"


ONE = Icosian((2, 0, 0, 0, 0, 0, 0, 0))
I_UNIT = Icosian((0, 0, 2, 0, 0, 0, 0, 0))
J_UNIT = Icosian((0, 0, 0, 0, 2, 0, 0, 0))
K_UNIT = Icosian((0, 0, 0, 0, 0, 0, 2, 0))


def icosian_multiply(a: Icosian, b: Icosian) -> Icosian:
    return a * b


def _even_permutations(n: int):
    for perm in permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        if inversions % 2 == 0:
            yield perm


def icosian_generators() -> list[Icosian]:
    """The 120 unit icosians, in a fixed deterministic order."""
    half = Fraction(1, 2)
    out = []
    for signs in product((1, -1), repeat=4):
        out.append(Icosian.from_components(*(s * half for s in signs)))
    for pos in range(4):
        for s in (1, -1):
            comps = [0, 0, 0, 0]
            comps[pos] = s
            out.append(Icosian.from_components(*comps))
    tau, tau_c = Golden(0, 1), Golden(1, -1)
    base = (Golden(0), Golden(1), tau_c, tau)
    for perm in _even_permutations(4):
        for s1, s2, s3 in product((1, -1), repeat=3):
            vals = [base[0], base[1] * s1, base[2] * s2, base[3] * s3]
            comps = [None] * 4
            for src, dst in enumerate(perm):
                comps[dst] = vals[src] * half
            out.append(Icosian.from_components(*comps))
    return out


# ---------------------------------------------------------------------------
# p-adics


def is_prime(p: int) -> bool:
    if not isinstance(p, int) or p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def _check_prime(p):
    if not is_prime(p):
        raise ValueError(f"{p!r} is not a prime")


def _vp_int(n: int, p: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def padic_valuation(x, p: int):
    """nu_p(x) for rational x; returns math.inf for x == 0."""
    _check_prime(p)
    x = Fraction(x)
    if x == 0:
        return math.inf
    return _vp_int(x.numerator, p) - _vp_int(x.denominator, p)


def padic_distance(x, y, p: int) -> Fraction:
    """p^(-nu_p(y - x)), exact; zero when x == y."""
    v = padic_valuation(Fraction(y) - Fraction(x), p)
    if v == math.inf:
        return Fraction(0)
    return Fraction(p) ** (-v)


class PAdicApprox:
    """A p-adic integer known modulo p^depth.

    Internally the residue in [0, p^depth); ``digits`` gives the expansion
    sum a_n p^n, lowest digit first.
    """

    __slots__ = ("p", "depth", "residue")

    def __init__(self, p: int, residue: int, depth: int = 32):
        _check_prime(p)
        if depth < 1:
            raise ValueError("depth must be positive")
        self.p = p
        self.depth = depth
        self.residue = residue % (p ** depth)

    @classmethod
    def from_int(cls, n: int, p: int, depth: int = 32) -> PAdicApprox:
        return cls(p, n, depth)

    @classmethod
    def from_fraction(cls, x, p: int, depth: int = 32) -> PAdicApprox:
        x = Fraction(x)
        if x.denominator % p == 0:
            raise ValueError(f"{x} is not a {p}-adic integer")
        mod = p ** depth
        return cls(p, x.numerator * pow(x.denominator, -1, mod), depth)

    @classmethod
    def from_digits(cls, digits, p: int) -> PAdicApprox:
        digits = list(digits)
        if any(not 0 <= a < p for a in digits):
            raise ValueError("digits must lie in [0, p)")
        return cls(p, sum(a * p ** n for n, a in enumerate(digits)), len(digits))

    @property
    def digits(self) -> tuple[int, ...]:
        r, out = self.residue, []
        for _ in range(self.depth):
            r, a = divmod(r, self.p)
            out.append(a)
        return tuple(out)

    def _other(self, other):
        if isinstance(other, PAdicApprox):
            if other.p != self.p:
                raise ValueError("mixing different primes")
            return other.residue, min(self.depth, other.depth)
        if isinstance(other, int):
            return other, self.depth
        if isinstance(other, Fraction):
            o = PAdicApprox.from_fraction(other, self.p, self.depth)
            return o.residue, self.depth
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return PAdicApprox(self.p, self.residue + o[0], o[1])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return PAdicApprox(self.p, self.residue - o[0], o[1])

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return PAdicApprox(self.p, o[0] - self.residue, o[1])

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return PAdicApprox(self.p, self.residue * o[0], o[1])

    __rmul__ = __mul__

    def __neg__(self):
        return PAdicApprox(self.p, -self.residue, self.depth)

    def valuation(self):
        """Index of the first nonzero digit; math.inf if all known digits vanish."""
        if self.residue == 0:
            return math.inf
        return _vp_int(self.residue, self.p)

    def congruent(self, n: int, k: int) -> bool:
        """True if self = n mod p^k (requires k <= depth)."""
        if k > self.depth:
            raise ValueError(f"only {self.depth} digits known, asked for {k}")
        m = self.p ** k
        return (self.residue - n) % m == 0

    def distance(self, other) -> Fraction:
        v = (self - other).valuation()
        return Fraction(0) if v == math.inf else Fraction(self.p) ** (-v)

    def __eq__(self, other):
        if isinstance(other, PAdicApprox):
            return (self.p, self.depth, self.residue) == (other.p, other.depth, other.residue)
        if isinstance(other, int):
            return self.residue == other % self.p ** self.depth
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.depth, self.residue))

    def __int__(self):
        return self.residue

    def __repr__(self):
        return f"PAdicApprox(p={self.p}, residue={self.residue}, depth={self.depth})"

    def digit_string(self) -> str:
        """Digits most significant first, e.g. '...0101' for depth 4."""
        return "..." + "".join(str(a) for a in reversed(self.digits))

