"""The elliptic-curve group over a prime field.

Points are affine coordinate pairs with an explicit identity element; the
group law is the chord-tangent construction and scalar multiplication is
plain most-significant-bit-first double-and-add (no windowing, no signed
recoding), so results are bit-for-bit reproducible.

Scalar multiplication dispatches to the compiled kernel when it is
available and to a pure-Python loop otherwise; both produce identical
points.  Use :func:`set_backend` to pin one explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import _native
from .errors import (
    BadOrder,
    CurveTooLarge,
    FormatError,
    GeneratorOffCurve,
    MixedCurve,
    OffCurveInput,
    SingularCurve,
    UnknownCurve,
)
from .field import FieldElement, PrimeModulus, from_hex, invmod, sqrt_mod, to_hex

ENUMERATION_BOUND = 1 << 20  # largest p for which brute-force walks are allowed


@dataclass(frozen=True)
class Point:
    """Affine curve point, or the identity when both coordinates are None."""

    x: FieldElement | None
    y: FieldElement | None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise ValueError("point needs both coordinates or neither")

    @property
    def is_identity(self) -> bool:
        return self.x is None

    @classmethod
    def identity(cls) -> "Point":
        return cls(None, None)

    def coords(self) -> tuple[int, int]:
        if self.x is None or self.y is None:
            raise ValueError("identity has no coordinates")
        return (self.x.value, self.y.value)

    def __repr__(self) -> str:
        if self.is_identity:
            return "Point(identity)"
        return f"Point({self.x.value}, {self.y.value})"


IDENTITY = Point.identity()


class CurveParams:
    """Public parameters (p, a, b, G, n) of a curve with generator order n.

    Construction validates non-singularity, that G lies on the curve, and
    that n annihilates G.
    """

    def __init__(self, p, a: int, b: int, gx: int, gy: int, n: int,
                 name: str | None = None):
        self.modulus = p if isinstance(p, PrimeModulus) else PrimeModulus(p)
        self.p = self.modulus.value
        self.a = FieldElement(a, self.modulus)
        self.b = FieldElement(b, self.modulus)
        self.n = int(n)
        self.name = name
        self._native_ctx = None

        av, bv, pv = self.a.value, self.b.value, self.p
        if (4 * av * av * av + 27 * bv * bv) % pv == 0:
            raise SingularCurve(f"4a^3 + 27b^2 = 0 mod {pv}")

        g = Point(FieldElement(gx, self.modulus), FieldElement(gy, self.modulus))
        if not self._on_curve_raw(g.x.value, g.y.value):
            raise GeneratorOffCurve(f"({gx}, {gy}) not on E_{pv}({av}, {bv})")
        self.g = g

        if self.n <= 1:
            raise BadOrder(f"generator order must exceed 1, got {n}")
        if not scalar_mul(self, self.n, self.g).is_identity:
            raise BadOrder(f"n*G is not the identity for n = {n}")

    def _on_curve_raw(self, x: int, y: int) -> bool:
        p = self.p
        return (y * y - (x * x * x + self.a.value * x + self.b.value)) % p == 0

    def field(self, value: int) -> FieldElement:
        return FieldElement(value, self.modulus)

    def point(self, x: int, y: int) -> Point:
        """Validated affine point; raises OffCurveInput for non-solutions."""
        pt = Point(self.field(x), self.field(y))
        if not self._on_curve_raw(pt.x.value, pt.y.value):
            raise OffCurveInput(f"({x}, {y}) not on {self!r}")
        return pt

    def _key(self):
        return (self.p, self.a.value, self.b.value, self.g.coords(), self.n)

    def __eq__(self, other) -> bool:
        return isinstance(other, CurveParams) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        label = self.name or "unnamed"
        return f"CurveParams({label}: p={self.p}, a={self.a.value}, b={self.b.value})"


def _require_member(c: CurveParams, pt: Point, what: str = "point") -> None:
    if not isinstance(pt, Point):
        raise TypeError(f"{what} must be a Point, got {type(pt).__name__}")
    if pt.is_identity:
        return
    if pt.x.modulus.value != c.p:
        raise MixedCurve(
            f"{what} is over F_{pt.x.modulus.value}, curve is over F_{c.p}"
        )
    if not c._on_curve_raw(pt.x.value, pt.y.value):
        raise OffCurveInput(f"{what} ({pt.x.value}, {pt.y.value}) not on {c!r}")


def is_on_curve(c: CurveParams, pt: Point) -> bool:
    """True for the identity and for affine solutions of the curve equation."""
    if pt.is_identity:
        return True
    if pt.x.modulus.value != c.p:
        return False
    return c._on_curve_raw(pt.x.value, pt.y.value)


def point_neg(c: CurveParams, pt: Point) -> Point:
    _require_member(c, pt)
    if pt.is_identity:
        return pt
    return Point(pt.x, -pt.y)


# -- raw group law on integer pairs (None is the identity) --

def _add_raw(c: CurveParams, P, Q):
    if P is None:
        return Q
    if Q is None:
        return P
    p = c.p
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        return _double_raw(c, P)
    lam = (y2 - y1) * invmod(x2 - x1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def _double_raw(c: CurveParams, P):
    if P is None:
        return None
    p = c.p
    x1, y1 = P
    if y1 == 0:
        return None
    lam = (3 * x1 * x1 + c.a.value) * invmod(2 * y1, p) % p
    x3 = (lam * lam - 2 * x1) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def _wrap(c: CurveParams, raw) -> Point:
    if raw is None:
        return IDENTITY
    return Point(c.field(raw[0]), c.field(raw[1]))


def _unwrap(pt: Point):
    return None if pt.is_identity else (pt.x.value, pt.y.value)


def point_add(c: CurveParams, P: Point, Q: Point) -> Point:
    """Chord-tangent sum of two curve members."""
    _require_member(c, P, "left operand")
    _require_member(c, Q, "right operand")
    return _wrap(c, _add_raw(c, _unwrap(P), _unwrap(Q)))


def point_double(c: CurveParams, P: Point) -> Point:
    _require_member(c, P)
    return _wrap(c, _double_raw(c, _unwrap(P)))


# -- scalar multiplication with backend dispatch --

_BACKEND = "auto"


def set_backend(name: str) -> str:
    """Select 'native', 'python', or 'auto'; returns the previous setting."""
    global _BACKEND
    if name not in ("auto", "native", "python"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "native" and _native.load_kernel() is None:
        raise RuntimeError("native backend requested but the kernel is unavailable")
    previous = _BACKEND
    _BACKEND = name
    return previous


def active_backend() -> str:
    """The backend scalar_mul would use right now: 'native' or 'python'."""
    if _BACKEND == "python":
        return "python"
    if _BACKEND == "native":
        return "native"
    return "native" if _native.load_kernel() is not None else "python"


def _scalar_mul_python(c: CurveParams, k: int, raw):
    acc = None
    for bit in range(k.bit_length() - 1, -1, -1):
        acc = _double_raw(c, acc)
        if (k >> bit) & 1:
            acc = _add_raw(c, acc, raw)
    return acc


def scalar_mul(c: CurveParams, k: int, P: Point) -> Point:
    """k * P over the bits of k, most significant first; 0 * P is the identity."""
    if not isinstance(k, int) or k < 0:
        raise ValueError(f"scalar must be a non-negative integer, got {k!r}")
    _require_member(c, P)
    raw = _unwrap(P)
    if raw is None or k == 0:
        return IDENTITY

    if active_backend() == "native" and k.bit_length() <= 64 * _native.MAX_SCALAR_LIMBS:
        kernel = _native.load_kernel()
        if c._native_ctx is None:
            c._native_ctx = kernel.field_context(c.p, c.a.value)
        return _wrap(c, kernel.scalar_mul(c._native_ctx, k, raw))
    return _wrap(c, _scalar_mul_python(c, k, raw))


# -- brute-force helpers, only for curves small enough to walk --

def enumerate_points(c: CurveParams) -> list[Point]:
    """Every curve member: the identity first, then affine points by (x, y)."""
    if c.p >= ENUMERATION_BOUND:
        raise CurveTooLarge(f"p = {c.p} exceeds the enumeration bound")
    points = [IDENTITY]
    for x in range(c.p):
        rhs = (x * x * x + c.a.value * x + c.b.value) % c.p
        root = sqrt_mod(rhs, c.p)
        if root is None:
            continue
        if root == 0:
            points.append(c.point(x, 0))
        else:
            points.append(c.point(x, root))
            points.append(c.point(x, c.p - root))
    points.sort(key=lambda pt: (-1, -1) if pt.is_identity else pt.coords())
    return points


def point_order(c: CurveParams, P: Point) -> int:
    """Smallest m >= 1 with m*P equal to the identity, by repeated addition."""
    if c.p >= ENUMERATION_BOUND:
        raise CurveTooLarge(f"p = {c.p} exceeds the enumeration bound")
    _require_member(c, P)
    raw = _unwrap(P)
    if raw is None:
        return 1
    acc = raw
    order = 1
    while acc is not None:
        acc = _add_raw(c, acc, raw)
        order += 1
    return order


# -- named-curve registry and the fixture file format --

_CURVE_FIELDS = ("name", "p", "a", "b", "Gx", "Gy", "n")


def parse_curve_records(text: str) -> list[CurveParams]:
    """Parse 'key = value' records separated by blank lines."""
    curves = []
    record: dict[str, str] = {}

    def flush():
        if not record:
            return
        missing = [f for f in _CURVE_FIELDS if f not in record]
        if missing:
            raise FormatError(f"curve record missing fields: {', '.join(missing)}")
        curves.append(CurveParams(
            from_hex(record["p"]),
            from_hex(record["a"]),
            from_hex(record["b"]),
            from_hex(record["Gx"]),
            from_hex(record["Gy"]),
            from_hex(record["n"]),
            name=record["name"],
        ))
        record.clear()

    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            flush()
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise FormatError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = key.strip(), value.strip()
        if key not in _CURVE_FIELDS:
            raise FormatError(f"line {lineno}: unknown field {key!r}")
        if key in record:
            raise FormatError(f"line {lineno}: duplicate field {key!r}")
        record[key] = value
    flush()
    return curves


def render_curve_records(curves) -> str:
    lines = []
    for c in curves:
        gx, gy = c.g.coords()
        lines.append(f"name = {c.name}")
        for key, value in (("p", c.p), ("a", c.a.value), ("b", c.b.value),
                           ("Gx", gx), ("Gy", gy), ("n", c.n)):
            lines.append(f"{key} = {to_hex(value)}")
        lines.append("")
    return "\n".join(lines)


_registry: dict[str, CurveParams] | None = None


def _load_builtin() -> dict[str, CurveParams]:
    global _registry
    if _registry is None:
        text = resources.files(__package__).joinpath("curves.txt").read_text()
        _registry = {c.name: c for c in parse_curve_records(text)}
    return _registry


def get_curve(name: str) -> CurveParams:
    registry = _load_builtin()
    if name not in registry:
        known = ", ".join(sorted(registry))
        raise UnknownCurve(f"{name!r}; known curves: {known}")
    return registry[name]


def register_curve(c: CurveParams) -> None:
    if c.name is None:
        raise ValueError("only named curves can be registered")
    _load_builtin()[c.name] = c


def load_curve_file(path) -> list[CurveParams]:
    """Parse and register every record in a curve file."""
    curves = parse_curve_records(Path(path).read_text())
    for c in curves:
        register_curve(c)
    return curves


def curve_names() -> list[str]:
    return sorted(_load_builtin())
