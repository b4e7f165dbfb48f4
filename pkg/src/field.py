"""
Prime field arithmetic for the computation field K and the authentication field F
"""
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import galois

from src.errors import (
    DivisionByZero,
    FieldTooSmall,
    MismatchedFields,
    ModulusTooLarge,
    NotPrime,
)

# CLI bound: values fit in 64 bits, products in 128
MAX_MODULUS = 2 ** 64


class FieldRole(str, Enum):
    COMPUTATION = "computation"
    AUTHENTICATION = "authentication"


@dataclass(frozen=True)
class FieldSpec:
    """GF(q) for a prime q, tagged with the role it plays"""

    modulus: int
    role: FieldRole = FieldRole.COMPUTATION

    def __post_init__(self):
        if not isinstance(self.modulus, int) or self.modulus < 2:
            raise NotPrime(f"field modulus must be an integer >= 2, got {self.modulus!r}")
        if not _is_prime(self.modulus):
            raise NotPrime(f"field modulus {self.modulus} is not prime")

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(value, self)

    def __repr__(self) -> str:
        return f"GF({self.modulus})"

    @property
    def order(self) -> int:
        return self.modulus

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(0, self)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(1, self)

    def vector(self, values: Iterable[int]) -> Tuple["FieldElement", ...]:
        return tuple(FieldElement(v, self) for v in values)

    def galois_field(self):
        """galois.GF class for this modulus (cached per modulus)"""
        return _galois_field(self.modulus)

    @classmethod
    def authentication_for(cls, computation: "FieldSpec", rows: int, k: int) -> "FieldSpec":
        """Smallest prime field F with |F| > max(|K|^rows, 2^k)"""
        bound = max(computation.modulus ** rows, 2 ** k)
        return cls(int(galois.next_prime(bound)), FieldRole.AUTHENTICATION)


@lru_cache(maxsize=256)
def _is_prime(q: int) -> bool:
    return bool(galois.is_prime(q))


@lru_cache(maxsize=64)
def _galois_field(q: int):
    return galois.GF(q)


def check_modulus(modulus: int, role: FieldRole = FieldRole.COMPUTATION) -> int:
    if modulus >= MAX_MODULUS:
        raise ModulusTooLarge(f"{role.value} modulus {modulus} does not fit in 64 bits")
    return modulus


def check_modulus_bound(spec: FieldSpec) -> FieldSpec:
    check_modulus(spec.modulus, spec.role)
    return spec


class FieldElement:
    """Immutable element of a prime field"""

    __slots__ = ("value", "spec")

    def __init__(self, value: int, spec: FieldSpec):
        object.__setattr__(self, "value", int(value) % spec.modulus)
        object.__setattr__(self, "spec", spec)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    def _other(self, other: Union["FieldElement", int]) -> int:
        if isinstance(other, FieldElement):
            if other.spec is not self.spec and other.spec.modulus != self.spec.modulus:
                raise MismatchedFields(f"{self.spec!r} vs {other.spec!r}")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return FieldElement(self.value + v, self.spec)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return FieldElement(self.value - v, self.spec)

    def __rsub__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return FieldElement(v - self.value, self.spec)

    def __mul__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return FieldElement(self.value * v, self.spec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return FieldElement(self.value * _inverse(v, self.spec.modulus), self.spec)

    def __neg__(self):
        return FieldElement(-self.value, self.spec)

    def __pow__(self, exponent: int):
        if exponent < 0:
            return FieldElement(pow(self.inverse().value, -exponent, self.spec.modulus), self.spec)
        return FieldElement(pow(self.value, exponent, self.spec.modulus), self.spec)

    def inverse(self) -> "FieldElement":
        return FieldElement(_inverse(self.value, self.spec.modulus), self.spec)

    def lift(self, target: FieldSpec) -> "FieldElement":
        """Same integer representative, read in another field"""
        return FieldElement(self.value, target)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.value == other.value and self.spec.modulus == other.spec.modulus
        if isinstance(other, int):
            return self.value == other % self.spec.modulus
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.spec.modulus))

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"{self.value}"

    def __reduce__(self):
        return (FieldElement, (self.value, self.spec))


def _inverse(a: int, q: int) -> int:
    """Inverse by extended Euclid"""
    a %= q
    if a == 0:
        raise DivisionByZero("cannot invert 0")
    old_r, r = a, q
    old_s, s = 1, 0
    while r:
        quotient = old_r // r
        old_r, r = r, old_r - quotient * r
        old_s, s = s, old_s - quotient * s
    return old_s % q


def as_element(value, spec: FieldSpec) -> Optional[FieldElement]:
    """Read a received value as an element of `spec`; None if it is not one"""
    if isinstance(value, FieldElement):
        return value if value.spec.modulus == spec.modulus else None
    if isinstance(value, int) and not isinstance(value, bool) and 0 <= value < spec.modulus:
        return FieldElement(value, spec)
    return None


def as_vector(values, spec: FieldSpec, length: int) -> Optional[Tuple[FieldElement, ...]]:
    if not isinstance(values, tuple) or len(values) != length:
        return None
    out = tuple(as_element(v, spec) for v in values)
    return None if any(v is None for v in out) else out


def field_op(x: FieldElement, y: FieldElement, kind: str) -> FieldElement:
    if x.spec.modulus != y.spec.modulus:
        raise MismatchedFields(f"{x.spec!r} vs {y.spec!r}")
    if kind == "add":
        return x + y
    if kind == "sub":
        return x - y
    if kind == "mul":
        return x * y
    if kind == "div":
        return x / y
    raise ValueError(f"unknown field operation: {kind}")


def dot(xs: Sequence[FieldElement], ys: Sequence[FieldElement]) -> FieldElement:
    if len(xs) != len(ys):
        raise ValueError("vector lengths differ")
    spec = xs[0].spec if xs else ys[0].spec
    q = spec.modulus
    return FieldElement(sum(a.value * b.value for a, b in zip(xs, ys)) % q, spec)


def encode_shares(shares: Sequence[FieldElement], target: FieldSpec) -> FieldElement:
    """Little-endian base-|K| encoding of a share vector as one element of F"""
    if not shares:
        return target.zero
    base = shares[0].spec.modulus
    if target.modulus <= base ** len(shares):
        raise FieldTooSmall(
            f"|F|={target.modulus} must exceed |K|^{len(shares)}={base ** len(shares)}"
        )
    value = 0
    for share in reversed(shares):
        value = value * base + share.value
    return FieldElement(value, target)


def decode_shares(encoded: FieldElement, source: FieldSpec, length: int) -> Tuple[FieldElement, ...]:
    """Inverse of encode_shares; raises FieldTooSmall when `encoded` is out of range"""
    value = encoded.value
    base = source.modulus
    if value >= base ** length:
        raise FieldTooSmall(f"{value} is not the encoding of {length} shares over {source!r}")
    digits: List[FieldElement] = []
    for _ in range(length):
        value, digit = divmod(value, base)
        digits.append(FieldElement(digit, source))
    return tuple(digits)
