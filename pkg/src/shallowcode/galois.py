"""Arithmetic over F_q for prime powers q <= 2**16.

Elements are integers in ``[0, q)``.  The base-p digits of an element are the
coefficients (low degree first) of a polynomial of degree < m, reduced modulo
the field's monic irreducible modulus.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import limits
from .errors import DivisionByZero, NotPrimePower


def _factor_prime_power(q: int) -> tuple[int, int]:
    if q < 2:
        raise NotPrimePower(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    m, rest = 0, q
    while rest % p == 0:
        rest //= p
        m += 1
    if rest != 1:
        raise NotPrimePower(f"{q} has at least two distinct prime factors")
    return p, m


# --- polynomials over F_p as coefficient tuples, low degree first -----------

def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], b: list[int], p: int) -> list[int]:
    """Remainder of a modulo b over F_p (b monic)."""
    a = _poly_trim(list(a))
    db = len(b) - 1
    while len(a) - 1 >= db and a:
        lead = a[-1]
        shift = len(a) - 1 - db
        for i, coef in enumerate(b):
            a[shift + i] = (a[shift + i] - lead * coef) % p
        _poly_trim(a)
    return a


def _monic_polys(p: int, degree: int):
    """Monic polynomials of the given degree in lexicographic low-degree-first order."""
    for low in itertools.product(range(p), repeat=degree):
        yield list(low) + [1]


def is_irreducible(poly: list[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    deg = len(poly) - 1
    if deg < 1 or poly[-1] != 1:
        return False
    for d in range(1, deg // 2 + 1):
        for div in _monic_polys(p, d):
            if not _poly_mod(poly, div, p):
                return False
    return True


def smallest_irreducible(p: int, m: int) -> tuple[int, ...]:
    if m == 1:
        return (0, 1)
    for cand in _monic_polys(p, m):
        if is_irreducible(cand, p):
            return tuple(cand)
    raise AssertionError("an irreducible polynomial of every degree exists")


@dataclass(frozen=True, eq=False)
class FieldSpec:
    q: int
    p: int
    m: int
    modulus: tuple[int, ...]
    _exp: np.ndarray | None = field(default=None, repr=False)
    _log: np.ndarray | None = field(default=None, repr=False)
    _pow: np.ndarray = field(default=None, repr=False)

    # identity is (p, m, modulus); tables are derived data
    def __eq__(self, other):
        return isinstance(other, FieldSpec) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @property
    def key(self) -> tuple:
        return (self.p, self.m, self.modulus)

    def to_json(self) -> dict:
        return {"p": self.p, "m": self.m, "modulus": list(self.modulus)}

    # --- scalar arithmetic ---------------------------------------------------

    def digits(self, a: int) -> list[int]:
        out = []
        for _ in range(self.m):
            out.append(a % self.p)
            a //= self.p
        return out

    def from_digits(self, ds) -> int:
        return sum(int(d) * int(w) for d, w in zip(ds, self._pow))

    def add(self, a: int, b: int) -> int:
        if self.m == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        return self.from_digits((x + y) % self.p for x, y in zip(self.digits(a), self.digits(b)))

    def neg(self, a: int) -> int:
        if self.m == 1:
            return (-a) % self.p
        if self.p == 2:
            return a
        return self.from_digits((-x) % self.p for x in self.digits(a))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def _poly_mul(self, a: int, b: int) -> int:
        prod = [0] * (2 * self.m - 1)
        for i, x in enumerate(self.digits(a)):
            if x:
                for j, y in enumerate(self.digits(b)):
                    prod[i + j] = (prod[i + j] + x * y) % self.p
        rem = _poly_mod(prod, list(self.modulus), self.p)
        return self.from_digits(rem + [0] * (self.m - len(rem)))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self.m == 1:
            return (a * b) % self.p
        if self._exp is not None:
            return int(self._exp[self._log[a] + self._log[b]])
        return self._poly_mul(a, b)

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("inverse of zero")
        if self.m == 1:
            return pow(a, self.p - 2, self.p)
        if self._exp is not None:
            return int(self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)])
        return self.pow(a, self.q - 2)

    def pow(self, a: int, e: int) -> int:
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    # --- vectorised arithmetic on integer arrays -----------------------------

    def vdigits(self, a: np.ndarray) -> np.ndarray:
        """Digit planes, shape ``a.shape + (m,)``."""
        a = np.asarray(a, dtype=np.int64)
        return (a[..., None] // self._pow) % self.p

    def vfrom_digits(self, d: np.ndarray) -> np.ndarray:
        return (np.asarray(d, dtype=np.int64) * self._pow).sum(axis=-1)

    def vadd(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.m == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        return self.vfrom_digits((self.vdigits(a) + self.vdigits(b)) % self.p)

    def vneg(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.m == 1:
            return (-a) % self.p
        if self.p == 2:
            return a.copy()
        return self.vfrom_digits((-self.vdigits(a)) % self.p)

    def vsub(self, a, b) -> np.ndarray:
        return self.vadd(a, self.vneg(b))

    def vmul(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.m == 1:
            return (a * b) % self.p
        if self._exp is None:
            return np.vectorize(self.mul, otypes=[np.int64])(a, b)
        a, b = np.broadcast_arrays(a, b)
        out = self._exp[self._log[a] + self._log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def vsum(self, a, axis: int = -1) -> np.ndarray:
        """Field sum along ``axis``."""
        a = np.asarray(a, dtype=np.int64)
        if self.m == 1:
            return a.sum(axis=axis) % self.p
        if self.p == 2:
            return np.bitwise_xor.reduce(a, axis=axis)
        d = self.vdigits(a)
        ax = axis if axis >= 0 else axis - 1
        return self.vfrom_digits(d.sum(axis=ax) % self.p)

    def matmul(self, a, b) -> np.ndarray:
        """Matrix product over F_q of integer-coded matrices."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        inner = a.shape[-1]
        if self.m == 1:
            return _modmatmul(a, b, self.p, inner)
        da = [((a // int(w)) % self.p) for w in self._pow]
        db = [((b // int(w)) % self.p) for w in self._pow]
        m = self.m
        planes = [None] * (2 * m - 1)
        for i in range(m):
            for j in range(m):
                prod = _modmatmul(da[i], db[j], self.p, inner)
                planes[i + j] = prod if planes[i + j] is None else (planes[i + j] + prod) % self.p
        # reduce x^l for l >= m using x^m = -sum modulus[t] x^t
        for l in range(2 * m - 2, m - 1, -1):
            top = planes[l]
            for t in range(m):
                c = self.modulus[t]
                if c:
                    planes[l - m + t] = (planes[l - m + t] - c * top) % self.p
        out = np.zeros(planes[0].shape, dtype=np.int64)
        for i in range(m):
            out += planes[i] * int(self._pow[i])
        return out


def _modmatmul(a: np.ndarray, b: np.ndarray, p: int, inner: int) -> np.ndarray:
    if inner * (p - 1) ** 2 < 2**53:
        prod = np.asarray(a, dtype=np.float64) @ np.asarray(b, dtype=np.float64)
        return np.rint(prod).astype(np.int64) % p
    return (a @ b) % p


def _primitive_exp_table(spec: FieldSpec) -> tuple[np.ndarray, np.ndarray]:
    q = spec.q
    order = q - 1
    prime_factors = [d for d in range(2, order + 1) if order % d == 0 and all(d % e for e in range(2, int(d**0.5) + 1))]
    for g in range(2, q):
        if all(spec.pow(g, order // f) != 1 for f in prime_factors):
            break
    else:  # q == 2
        g = 1
    exp = np.zeros(2 * order, dtype=np.int64)
    log = np.zeros(q, dtype=np.int64)
    x = 1
    for i in range(order):
        exp[i] = x
        log[x] = i
        x = spec._poly_mul(x, g)
    exp[order:] = exp[:order]
    return exp, log


_CACHE: dict[int, FieldSpec] = {}


def make_field(q: int) -> FieldSpec:
    """The canonical field of order ``q`` (lexicographically smallest modulus)."""
    q = int(q)
    if q in _CACHE:
        return _CACHE[q]
    p, m = _factor_prime_power(q)
    if q > limits.get("field_order"):
        raise NotPrimePower(f"field order {q} exceeds the supported cap")
    modulus = smallest_irreducible(p, m)
    pw = np.array([p**i for i in range(m)], dtype=np.int64)
    spec = FieldSpec(q, p, m, modulus, None, None, pw)
    if m > 1 and q <= limits.get("table_order"):
        exp, log = _primitive_exp_table(spec)
        spec = FieldSpec(q, p, m, modulus, exp, log, pw)
    _CACHE[q] = spec
    return spec


def field_from_json(obj: dict) -> FieldSpec:
    spec = make_field(int(obj["p"]) ** int(obj["m"]))
    if list(spec.modulus) != [int(c) for c in obj["modulus"]]:
        raise ValueError("field modulus differs from the canonical choice")
    return spec


def field_op(spec: FieldSpec, kind: str, a: int, b: int | None = None) -> int:
    if kind == "add":
        return spec.add(a, b)
    if kind == "sub":
        return spec.sub(a, b)
    if kind == "mul":
        return spec.mul(a, b)
    if kind == "inv":
        return spec.inv(a)
    if kind == "neg":
        return spec.neg(a)
    raise ValueError(f"unknown field operation {kind!r}")


def uniform_element(spec: FieldSpec, stream) -> int:
    return stream.integers(spec.q)


def uniform_nonzero(spec: FieldSpec, stream, size: int) -> np.ndarray:
    return stream.integers(spec.q - 1, size) + 1
