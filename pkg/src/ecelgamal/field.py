"""Prime-field arithmetic.

Residues are plain Python integers kept in canonical form [0, p).  The
:class:`FieldElement` wrapper adds modulus tracking so that values from
different fields cannot be mixed silently; the int-level helpers at the
bottom are used directly by the curve code on its hot paths.

When gmpy2 is installed its modexp/modinv routines are used in place of
CPython's (same results, several times faster); everything works without it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache

from .errors import InvalidModulus, ModulusMismatch

try:
    from gmpy2 import invert as _gmp_invert, powmod as _gmp_powmod

    def powmod(base: int, exp: int, mod: int) -> int:
        return int(_gmp_powmod(base, exp, mod))

    def invmod(a: int, mod: int) -> int:
        """Multiplicative inverse of a mod `mod` (extended Euclid)."""
        if a % mod == 0:
            raise ZeroDivisionError("inverse of zero residue")
        return int(_gmp_invert(a, mod))

except ImportError:  # pragma: no cover - exercised only without gmpy2

    def powmod(base: int, exp: int, mod: int) -> int:
        return pow(base, exp, mod)

    def invmod(a: int, mod: int) -> int:
        if a % mod == 0:
            raise ZeroDivisionError("inverse of zero residue")
        return pow(a, -1, mod)


MAX_MODULUS_BITS = 521

_SMALL_PRIMES = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


@lru_cache(maxsize=None)
def is_probable_prime(n: int, rounds: int = 40) -> bool:
    """Miller-Rabin with `rounds` pseudo-random witnesses.

    Witnesses are drawn from an RNG seeded with n, so repeated checks of
    the same candidate are reproducible.
    """
    if n < 2:
        return False
    if n in (2, 3):
        return True
    if n % 2 == 0:
        return False
    for q in _SMALL_PRIMES:
        if n == q:
            return True
        if n % q == 0:
            return False

    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1

    rng = random.Random(n)
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = powmod(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = (x * x) % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeModulus:
    """A validated odd prime p with 5 <= p < 2^521."""

    value: int

    def __post_init__(self):
        p = self.value
        if not isinstance(p, int):
            raise InvalidModulus(f"modulus must be an integer, got {type(p).__name__}")
        if p <= 3:
            raise InvalidModulus(f"modulus {p} too small; need p > 3")
        if p.bit_length() > MAX_MODULUS_BITS:
            raise InvalidModulus(f"modulus has {p.bit_length()} bits; limit is {MAX_MODULUS_BITS}")
        if p % 2 == 0:
            raise InvalidModulus(f"modulus {p} is even")
        if not is_probable_prime(p):
            raise InvalidModulus(f"modulus {p} failed primality test")

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"PrimeModulus({self.value})"


@dataclass(frozen=True)
class FieldElement:
    """A residue in canonical form [0, p).

    Construction reduces any integer, so negative values and values at or
    above p are accepted and normalized.
    """

    value: int
    modulus: PrimeModulus

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.modulus.value)

    # -- arithmetic --

    def _check_same_field(self, other: "FieldElement") -> int:
        if not isinstance(other, FieldElement):
            raise TypeError(f"expected FieldElement, got {type(other).__name__}")
        p = self.modulus.value
        if other.modulus.value != p:
            raise ModulusMismatch(
                f"mixed moduli: {p} vs {other.modulus.value}"
            )
        return p

    def __add__(self, other: "FieldElement") -> "FieldElement":
        p = self._check_same_field(other)
        return FieldElement((self.value + other.value) % p, self.modulus)

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        p = self._check_same_field(other)
        return FieldElement((self.value - other.value) % p, self.modulus)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        p = self._check_same_field(other)
        return FieldElement((self.value * other.value) % p, self.modulus)

    def __neg__(self) -> "FieldElement":
        return FieldElement(-self.value, self.modulus)

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        p = self._check_same_field(other)
        return FieldElement(self.value * invmod(other.value, p), self.modulus)

    def __pow__(self, exponent: int) -> "FieldElement":
        if not isinstance(exponent, int):
            raise TypeError("exponent must be an integer")
        if exponent < 0:
            raise ValueError("exponent must be non-negative")
        return FieldElement(powmod(self.value, exponent, self.modulus.value), self.modulus)

    def inverse(self) -> "FieldElement":
        return FieldElement(invmod(self.value, self.modulus.value), self.modulus)

    # -- residue character --

    def is_zero(self) -> bool:
        return self.value == 0

    def is_quadratic_residue(self) -> bool:
        """Euler criterion; zero counts as a residue."""
        return is_quadratic_residue(self.value, self.modulus.value)

    def sqrt(self):
        """Both square roots as (r, p - r) with r <= p - r, or None."""
        root = sqrt_mod(self.value, self.modulus.value)
        if root is None:
            return None
        p = self.modulus.value
        other = (p - root) % p
        return (FieldElement(root, self.modulus), FieldElement(other, self.modulus))

    def __repr__(self) -> str:
        return f"FieldElement({self.value} mod {self.modulus.value})"

    def __int__(self) -> int:
        return self.value


def is_quadratic_residue(a: int, p: int) -> bool:
    a %= p
    if a == 0:
        return True
    return powmod(a, (p - 1) // 2, p) == 1


def sqrt_mod(a: int, p: int):
    """Smaller square root of a mod p, or None for a non-residue.

    Uses the a^((p+1)/4) shortcut when p = 3 (mod 4) and Tonelli-Shanks
    otherwise.  The non-residue needed by Tonelli-Shanks is found by
    scanning upward from 2, so results are reproducible.
    """
    a %= p
    if a == 0:
        return 0

    if p % 4 == 3:
        # the shortcut also decides residuosity: r^2 != a means no root
        r = powmod(a, (p + 1) // 4, p)
        if (r * r) % p != a:
            return None
        return min(r, p - r)

    if not is_quadratic_residue(a, p):
        return None

    # Tonelli-Shanks for p = 1 (mod 4)
    q = p - 1
    s = 0
    while q % 2 == 0:
        q //= 2
        s += 1

    z = 2
    while is_quadratic_residue(z, p):
        z += 1

    c = powmod(z, q, p)
    r = powmod(a, (q + 1) // 2, p)
    t = powmod(a, q, p)
    m = s
    while t != 1:
        i = 0
        t2 = t
        while t2 != 1:
            t2 = (t2 * t2) % p
            i += 1
        b = powmod(c, 1 << (m - i - 1), p)
        r = (r * b) % p
        c = (b * b) % p
        t = (t * c) % p
        m = i
    return min(r, p - r)


# -- hex wire format: lowercase, no prefix, no leading zeros, "0" for zero --

def to_hex(value: int) -> str:
    if value < 0:
        raise ValueError("negative integers have no wire form")
    return format(value, "x")


def from_hex(text: str) -> int:
    t = text.strip()
    if not t or any(ch not in "0123456789abcdefABCDEF" for ch in t):
        raise ValueError(f"not a hex integer: {text!r}")
    return int(t, 16)
