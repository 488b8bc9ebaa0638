"""Finite fields GF(p^k), polynomials over them and sequence prefixes.

Elements are canonical integer codes in ``[0, q)``: the code of
``c_0 + c_1 x + ... + c_{k-1} x^{k-1}`` (polynomial basis modulo the field
modulus) is ``sum(c_i * p**i)``. Code 0 is the additive identity and code 1 the
multiplicative identity.

Scalar arithmetic works on Python ints; the ``v*`` methods are the numpy
counterparts used on coefficient vectors by the continued fraction engine.
"""

from __future__ import annotations

import itertools
import logging
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property, total_ordering
from typing import TypeAlias

import numpy as np
from pyagnostics.spans import LabeledSpan, SourceSpan
from sympy import factorint, isprime

from mlincomp.errors import ParameterError

logger = logging.getLogger(__name__)

FieldElement: TypeAlias = int

MAX_ORDER = 1 << 16

FIELD_SPEC_PATTERN = re.compile(r"^(\d+)(?:\^(\d+)(?:/(\d+))?)?$")


@total_ordering
class _MinusInfinity:
    """Degree of the zero polynomial. Compares below every integer and refuses arithmetic."""

    _instance: _MinusInfinity | None = None

    def __new__(cls) -> _MinusInfinity:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other: object) -> bool:
        return other is self

    def __lt__(self, other: object) -> bool:
        if isinstance(other, int | _MinusInfinity):
            return other is not self
        return NotImplemented

    def __hash__(self) -> int:
        return hash("-inf")

    def __repr__(self) -> str:
        return "-inf"


MINUS_INFINITY = _MinusInfinity()

Degree: TypeAlias = int | _MinusInfinity


def _digits(code: int, p: int, k: int) -> list[int]:
    out = []
    for _ in range(k):
        code, digit = divmod(code, p)
        out.append(digit)
    return out


def _undigits(digits: Sequence[int], p: int) -> int:
    code = 0
    for digit in reversed(digits):
        code = code * p + digit
    return code


def _poly_rem(a: list[int], b: list[int], p: int) -> list[int]:
    """Remainder of ``a`` by the monic ``b`` over GF(p), coefficient lists low to high."""
    rem = list(a)
    db = len(b) - 1
    for top in range(len(rem) - 1, db - 1, -1):
        c = rem[top]
        if c:
            for i in range(db + 1):
                rem[top - db + i] = (rem[top - db + i] - c * b[i]) % p
    return rem[:db]


def _is_irreducible(modulus: list[int], p: int) -> bool:
    k = len(modulus) - 1
    for degree in range(1, k // 2 + 1):
        for tail in itertools.product(range(p), repeat=degree):
            divisor = [*tail, 1]
            if not any(_poly_rem(modulus, divisor, p)):
                return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """GF(p^k); ``modulus`` holds the monic modulus' coefficients low to high."""

    p: int
    k: int = 1
    modulus: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not isprime(self.p):
            raise ParameterError(
                code="mlincomp::algebra::non_prime_characteristic",
                message=f"Characteristic {self.p} is not prime",
            )
        if self.k < 1:
            raise ParameterError(
                code="mlincomp::algebra::invalid_degree",
                message=f"Extension degree must be at least 1, got {self.k}",
            )
        if self.p**self.k > MAX_ORDER:
            raise ParameterError(
                code="mlincomp::algebra::order_too_large",
                message=f"Field order {self.p}^{self.k} exceeds the bound 2^16",
            )
        match self.k, self.modulus:
            case 1, None:
                pass
            case 1, _:
                raise ParameterError(
                    code="mlincomp::algebra::unexpected_modulus",
                    message="A prime field takes no modulus",
                )
            case _, None:
                raise ParameterError(
                    code="mlincomp::algebra::missing_modulus",
                    message=f"GF({self.p}^{self.k}) needs a modulus of degree {self.k}",
                )
            case _, modulus:
                if len(modulus) != self.k + 1 or modulus[-1] != 1:
                    raise ParameterError(
                        code="mlincomp::algebra::invalid_modulus",
                        message=f"The modulus must be monic of degree {self.k}",
                    )
                if any(not 0 <= c < self.p for c in modulus):
                    raise ParameterError(
                        code="mlincomp::algebra::invalid_modulus",
                        message=f"Modulus coefficients must lie in [0, {self.p})",
                    )
                if not _is_irreducible(list(modulus), self.p):
                    raise ParameterError(
                        code="mlincomp::algebra::reducible_modulus",
                        message=f"The modulus {self.modulus_code} is reducible over GF({self.p})",
                    )

    @property
    def q(self) -> int:
        return self.p**self.k

    @property
    def modulus_code(self) -> int | None:
        return None if self.modulus is None else _undigits(self.modulus, self.p)

    def __str__(self) -> str:
        if self.k == 1:
            return str(self.p)
        return f"{self.p}^{self.k}/{self.modulus_code}"

    def elements(self) -> range:
        return range(self.q)

    def check(self, a: int) -> FieldElement:
        if not 0 <= a < self.q:
            raise ParameterError(
                code="mlincomp::algebra::invalid_element",
                message=f"{a} is not an element code of GF({self.q})",
            )
        return a

    # Tables. Only extension fields use them; prime fields compute mod p.

    @cached_property
    def _powers(self) -> np.ndarray:
        return self.p ** np.arange(self.k, dtype=np.int64)

    @cached_property
    def _digit_table(self) -> np.ndarray:
        codes = np.arange(self.q, dtype=np.int64)
        return (codes[:, None] // self._powers[None, :]) % self.p

    def _mul_slow(self, a: int, b: int) -> int:
        assert self.modulus is not None
        da, db = _digits(a, self.p, self.k), _digits(b, self.p, self.k)
        product = [0] * (2 * self.k - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    product[i + j] = (product[i + j] + x * y) % self.p
        return _undigits(_poly_rem(product, list(self.modulus), self.p), self.p)

    def _power(self, a: int, e: int) -> int:
        if self.k == 1:
            return pow(a, e, self.p)
        result = 1
        while e:
            if e & 1:
                result = self._mul_slow(result, a)
            a = self._mul_slow(a, a)
            e >>= 1
        return result

    @cached_property
    def generator(self) -> FieldElement:
        order = self.q - 1
        if order == 1:
            return 1
        for g in range(2, self.q):
            if all(self._power(g, order // r) != 1 for r in factorint(order)):
                logger.debug("GF(%s): primitive element %d", self, g)
                return g
        raise AssertionError(f"GF({self}) has no primitive element")

    @cached_property
    def _exp_log(self) -> tuple[list[int], list[int]]:
        g = self.generator
        # times_g[a] = g * a, as a linear map on digit vectors
        basis = [self._mul_slow(g, self.p**i) for i in range(self.k)]
        times_g_matrix = np.array(
            [_digits(code, self.p, self.k) for code in basis], dtype=np.int64
        )
        times_g = ((self._digit_table @ times_g_matrix) % self.p) @ self._powers
        times_g_list = times_g.tolist()

        exp = [0] * (2 * (self.q - 1))
        log = [0] * self.q
        a = 1
        for i in range(self.q - 1):
            exp[i] = exp[i + self.q - 1] = a
            log[a] = i
            a = times_g_list[a]
        assert a == 1
        return exp, log

    @cached_property
    def _exp_array(self) -> np.ndarray:
        return np.array(self._exp_log[0], dtype=np.int64)

    @cached_property
    def _log_array(self) -> np.ndarray:
        return np.array(self._exp_log[1], dtype=np.int64)

    # Scalar arithmetic

    def add(self, a: FieldElement, b: FieldElement) -> FieldElement:
        if self.k == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        da, db = _digits(a, self.p, self.k), _digits(b, self.p, self.k)
        return _undigits([(x + y) % self.p for x, y in zip(da, db)], self.p)

    def neg(self, a: FieldElement) -> FieldElement:
        if self.k == 1:
            return -a % self.p
        if self.p == 2:
            return a
        return _undigits([-x % self.p for x in _digits(a, self.p, self.k)], self.p)

    def sub(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return self.add(a, self.neg(b))

    def mul(self, a: FieldElement, b: FieldElement) -> FieldElement:
        if self.k == 1:
            return a * b % self.p
        if a == 0 or b == 0:
            return 0
        exp, log = self._exp_log
        return exp[log[a] + log[b]]

    def inv(self, a: FieldElement) -> FieldElement:
        if a == 0:
            raise ParameterError(
                code="mlincomp::algebra::division_by_zero",
                message=f"0 has no inverse in GF({self.q})",
            )
        if self.k == 1:
            return pow(a, self.p - 2, self.p)
        exp, log = self._exp_log
        return exp[(self.q - 1 - log[a]) % (self.q - 1)]

    def div(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return self.mul(a, self.inv(b))

    # Vector arithmetic on int64 code arrays

    def vadd(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.k == 1:
            return (x + y) % self.p
        if self.p == 2:
            return x ^ y
        table = self._digit_table
        return ((table[x] + table[y]) % self.p) @ self._powers

    def vneg(self, x: np.ndarray) -> np.ndarray:
        if self.k == 1:
            return -x % self.p
        if self.p == 2:
            return x
        return (-self._digit_table[x] % self.p) @ self._powers

    def vsub(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.vadd(x, self.vneg(y))

    def vmul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.k == 1:
            return x * y % self.p
        exp, log = self._exp_array, self._log_array
        return np.where((x == 0) | (y == 0), 0, exp[log[x] + log[y]])

    def vscale(self, c: FieldElement, x: np.ndarray) -> np.ndarray:
        if self.k == 1:
            return c * x % self.p
        if c == 0:
            return np.zeros_like(x)
        exp, log = self._exp_array, self._log_array
        return np.where(x == 0, 0, exp[log[x] + self._exp_log[1][c]])

    def vsum(self, x: np.ndarray) -> FieldElement:
        if len(x) == 0:
            return 0
        if self.k == 1:
            return int(x.sum() % self.p)
        if self.p == 2:
            return int(np.bitwise_xor.reduce(x))
        return int((self._digit_table[x].sum(axis=0) % self.p) @ self._powers)

    def vdot(self, x: np.ndarray, y: np.ndarray) -> FieldElement:
        if self.k == 1:
            return int((x * y).sum() % self.p)
        return self.vsum(self.vmul(x, y))


def make_field(
    p: int, k: int = 1, modulus: Polynomial | Sequence[int] | None = None
) -> FieldSpec:
    """Validated GF(p^k); ``modulus`` is a Polynomial over GF(p) or its coefficients."""
    match modulus:
        case None:
            coeffs = None
        case Polynomial() as poly:
            if poly.field.q != p:
                raise ParameterError(
                    code="mlincomp::algebra::invalid_modulus",
                    message=f"The modulus must be a polynomial over GF({p})",
                )
            coeffs = tuple(int(c) for c in poly.coeffs)
        case _:
            coeffs = tuple(int(c) for c in modulus)
    return FieldSpec(p, k, coeffs)


def parse_field_spec(text: str) -> FieldSpec:
    """Parse ``p`` or ``p^k/modulus-code`` (e.g. ``2^2/7`` for x^2+x+1)."""
    match_ = FIELD_SPEC_PATTERN.match(text.strip())
    if match_ is None:
        raise ParameterError(
            code="mlincomp::algebra::invalid_field_spec",
            message=f"Invalid field spec {text!r}, expected `p` or `p^k/modulus-code`",
            labels=[LabeledSpan(SourceSpan(0, len(text)), "field spec")],
        )
    p, k, code = match_.groups()
    p_int = int(p)
    k_int = 1 if k is None else int(k)
    if code is None:
        return make_field(p_int, k_int)
    if k_int == 1:
        raise ParameterError(
            code="mlincomp::algebra::unexpected_modulus",
            message=f"A prime field takes no modulus, got {code} for GF({p})",
            labels=[LabeledSpan(SourceSpan(*match_.span(3)), "modulus code")],
        )
    if int(code) >= p_int ** (k_int + 1):
        raise ParameterError(
            code="mlincomp::algebra::invalid_modulus",
            message=f"Modulus code {code} has degree above {k_int}",
            labels=[LabeledSpan(SourceSpan(*match_.span(3)), "modulus code")],
        )
    return make_field(p_int, k_int, _digits(int(code), p_int, k_int + 1))


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Dense polynomial, coefficients low to high with no trailing zeros."""

    field: FieldSpec
    coeffs: np.ndarray

    @classmethod
    def from_coeffs(cls, field: FieldSpec, coeffs: Iterable[int] | np.ndarray) -> Polynomial:
        array = np.asarray(
            coeffs if isinstance(coeffs, np.ndarray) else list(coeffs), dtype=np.int64
        )
        if array.size and (array.min() < 0 or array.max() >= field.q):
            raise ParameterError(
                code="mlincomp::algebra::invalid_element",
                message=f"Polynomial coefficients must be element codes of GF({field.q})",
            )
        nonzero = np.flatnonzero(array)
        array = array[: nonzero[-1] + 1].copy() if nonzero.size else array[:0].copy()
        array.flags.writeable = False
        return cls(field, array)

    @classmethod
    def zero(cls, field: FieldSpec) -> Polynomial:
        return cls.from_coeffs(field, [])

    @classmethod
    def one(cls, field: FieldSpec) -> Polynomial:
        return cls.from_coeffs(field, [1])

    @classmethod
    def monomial(cls, field: FieldSpec, e: int, c: FieldElement = 1) -> Polynomial:
        return cls.from_coeffs(field, [0] * e + [c])

    @property
    def degree(self) -> Degree:
        return len(self.coeffs) - 1 if len(self.coeffs) else MINUS_INFINITY

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    @property
    def leading(self) -> FieldElement:
        return int(self.coeffs[-1]) if len(self.coeffs) else 0

    def coefficient(self, i: int) -> FieldElement:
        return int(self.coeffs[i]) if 0 <= i < len(self.coeffs) else 0

    def _padded(self, length: int) -> np.ndarray:
        out = np.zeros(length, dtype=np.int64)
        out[: len(self.coeffs)] = self.coeffs
        return out

    def __add__(self, other: Polynomial) -> Polynomial:
        length = max(len(self.coeffs), len(other.coeffs))
        return Polynomial.from_coeffs(
            self.field, self.field.vadd(self._padded(length), other._padded(length))
        )

    def __neg__(self) -> Polynomial:
        return Polynomial.from_coeffs(self.field, self.field.vneg(self.coeffs))

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other: Polynomial) -> Polynomial:
        if self.is_zero or other.is_zero:
            return Polynomial.zero(self.field)
        out = np.zeros(len(self.coeffs) + len(other.coeffs) - 1, dtype=np.int64)
        for i, c in enumerate(self.coeffs.tolist()):
            if c:
                window = out[i : i + len(other.coeffs)]
                out[i : i + len(other.coeffs)] = self.field.vadd(
                    window, self.field.vscale(c, other.coeffs)
                )
        return Polynomial.from_coeffs(self.field, out)

    def scale(self, c: FieldElement) -> Polynomial:
        return Polynomial.from_coeffs(self.field, self.field.vscale(c, self.coeffs))

    def shift(self, e: int) -> Polynomial:
        if e < 0:
            raise ParameterError(
                code="mlincomp::algebra::negative_shift",
                message=f"Cannot shift a polynomial by x^{e}",
            )
        if self.is_zero:
            return self
        return Polynomial.from_coeffs(
            self.field, np.concatenate([np.zeros(e, dtype=np.int64), self.coeffs])
        )

    def make_monic(self) -> Polynomial:
        if self.is_zero:
            raise ParameterError(
                code="mlincomp::algebra::monic_of_zero",
                message="The zero polynomial has no leading coefficient",
            )
        return self.scale(self.field.inv(self.leading))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self) -> int:
        return hash((self.field, self.coeffs.tobytes()))

    def __repr__(self) -> str:
        return f"Polynomial({self})"

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        terms = []
        for e in range(len(self.coeffs) - 1, -1, -1):
            c = int(self.coeffs[e])
            if not c:
                continue
            power = "" if e == 0 else ("x" if e == 1 else f"x^{e}")
            if not power:
                terms.append(str(c))
            elif c == 1:
                terms.append(power)
            else:
                terms.append(f"{c}*{power}")
        return " + ".join(terms)


@dataclass(frozen=True, eq=False)
class SequencePrefix:
    """Symbols ``a[t][m]`` for positions t = 1..N and sequences m = 0..M-1.

    ``symbols`` is an (N, M) array; row t-1 holds position t.
    """

    field: FieldSpec
    symbols: np.ndarray

    def __post_init__(self) -> None:
        if self.symbols.ndim != 2 or self.symbols.shape[1] < 1:
            raise ParameterError(
                code="mlincomp::algebra::invalid_prefix_shape",
                message=f"A sequence prefix needs shape (N, M) with M >= 1, got {self.symbols.shape}",
            )
        if self.symbols.size and (
            self.symbols.min() < 0 or self.symbols.max() >= self.field.q
        ):
            raise ParameterError(
                code="mlincomp::algebra::invalid_element",
                message=f"Sequence symbols must be element codes of GF({self.field.q})",
            )

    @classmethod
    def from_rows(
        cls, field: FieldSpec, rows: Iterable[Sequence[int]], M: int | None = None
    ) -> SequencePrefix:
        array = np.array([list(row) for row in rows], dtype=np.int64)
        if array.size == 0:
            array = np.zeros((0, M or 1), dtype=np.int64)
        array.flags.writeable = False
        return cls(field, array)

    @classmethod
    def zeros(cls, field: FieldSpec, M: int, N: int) -> SequencePrefix:
        array = np.zeros((N, M), dtype=np.int64)
        array.flags.writeable = False
        return cls(field, array)

    @property
    def M(self) -> int:
        return int(self.symbols.shape[1])

    @property
    def N(self) -> int:
        return int(self.symbols.shape[0])

    def symbol(self, t: int, m: int) -> FieldElement:
        """``a[t][m]``, zero for t <= 0."""
        return int(self.symbols[t - 1, m]) if t >= 1 else 0

    def column(self, m: int) -> np.ndarray:
        return self.symbols[:, m]

    def truncate(self, N: int) -> SequencePrefix:
        return SequencePrefix(self.field, self.symbols[:N])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SequencePrefix):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.symbols, other.symbols)

    def __hash__(self) -> int:
        return hash((self.field, self.symbols.tobytes(), self.symbols.shape))


def residual_coeff(
    v: Polynomial, u: Polynomial, seq: SequencePrefix, m: int, n: int
) -> FieldElement:
    """Coefficient of x^(deg v - n) in ``v * G_m - u``."""
    if v.is_zero:
        raise ParameterError(
            code="mlincomp::algebra::zero_denominator",
            message="The residual of a zero denominator is undefined",
        )
    field = v.field
    deg = len(v.coeffs) - 1
    start = n - deg
    lo = max(1, start)
    window = seq.symbols[lo - 1 : n, m]
    coeffs = v.coeffs[lo - start : lo - start + len(window)]
    total = field.vdot(coeffs, window)
    if deg - n >= 0:
        total = field.sub(total, u.coefficient(deg - n))
    return total
