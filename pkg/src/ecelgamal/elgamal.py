"""EC-ElGamal: key generation, encryption, decryption, and the text formats.

Encryption of a message point P_M under public key P_B with nonce k is the
pair (k*G, P_M + k*P_B); the holder of the secret n_B recovers P_M by
subtracting n_B times the first component from the second.  Byte-string
messages are chunked, embedded into points, and processed block by block
through the execution pipeline in either mode.

The scheme is unauthenticated by design: decrypting with a wrong key gives
garbage, not an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .codec import (
    EncodingParams,
    decode_block,
    encode_block,
    join_message,
    split_message,
)
from .curve import (
    CurveParams,
    Point,
    _require_member,
    get_curve,
    point_add,
    point_neg,
    scalar_mul,
)
from .errors import EncodingFailure, FormatError, KeyConsistencyError
from .field import from_hex, to_hex
from .pipeline import CiphertextBlock, ExecMode, run_encrypt_pipeline


@dataclass(frozen=True)
class KeyPair:
    curve: CurveParams
    secret: int
    public: Point | None = None  # derived from the secret when omitted

    def __post_init__(self):
        if not 1 <= self.secret <= self.curve.n - 1:
            raise ValueError(
                f"secret must lie in [1, {self.curve.n - 1}], got {self.secret}"
            )
        expected = scalar_mul(self.curve, self.secret, self.curve.g)
        if self.public is None:
            object.__setattr__(self, "public", expected)
        elif self.public != expected:
            raise KeyConsistencyError("public point is not secret * G")


def keygen(c: CurveParams, rng) -> KeyPair:
    """Fresh key pair; rng needs a randrange method (random.Random works)."""
    secret = rng.randrange(1, c.n)
    return KeyPair(c, secret)


def random_nonces(c: CurveParams, rng) -> Iterator[int]:
    """Endless per-block nonces drawn uniformly from [1, n-1]."""
    while True:
        yield rng.randrange(1, c.n)


def encrypt_block(c: CurveParams, p_m: Point, p_b: Point, k: int) -> CiphertextBlock:
    """One block of the core scheme: (k*G, P_M + k*P_B)."""
    _require_member(c, p_m, "message point")
    _require_member(c, p_b, "public point")
    if not 1 <= k <= c.n - 1:
        raise ValueError(f"nonce must lie in [1, {c.n - 1}], got {k}")
    return CiphertextBlock(
        scalar_mul(c, k, c.g),
        point_add(c, p_m, scalar_mul(c, k, p_b)),
    )


def decrypt_block(c: CurveParams, block: CiphertextBlock, secret: int) -> Point:
    """Recover P_M as c2 - secret * c1."""
    _require_member(c, block.c1, "first component")
    _require_member(c, block.c2, "second component")
    if not 1 <= secret <= c.n - 1:
        raise ValueError(f"secret must lie in [1, {c.n - 1}], got {secret}")
    shared = scalar_mul(c, secret, block.c1)
    return point_add(c, block.c2, point_neg(c, shared))


@dataclass(frozen=True)
class Ciphertext:
    """Multi-block ciphertext plus the header needed to invert it."""

    curve_name: str | None
    block_bits: int
    kappa: int
    original_length: int
    blocks: tuple[CiphertextBlock, ...]

    def __post_init__(self):
        if self.original_length < 0:
            raise ValueError("original_length cannot be negative")
        if self.original_length > 0 and not self.blocks:
            raise ValueError("non-empty message requires at least one block")


def encrypt(
    c: CurveParams,
    plaintext: bytes,
    public: Point,
    params: EncodingParams,
    nonces: Iterable[int],
    mode: ExecMode = ExecMode.SINGLE,
) -> Ciphertext:
    """split -> embed -> per-block (k*G, P_M + k*P_B) in the chosen mode."""
    params.check_fits(c)
    values = split_message(plaintext, params.block_bits)

    points = []
    for i, m in enumerate(values):
        try:
            points.append(encode_block(c, params, m))
        except EncodingFailure as exc:
            raise EncodingFailure(f"block {i}: {exc}") from exc

    blocks, _trace = run_encrypt_pipeline(c, points, public, nonces, mode)
    return Ciphertext(
        curve_name=c.name,
        block_bits=params.block_bits,
        kappa=params.kappa,
        original_length=len(plaintext),
        blocks=tuple(blocks),
    )


def decrypt(ct: Ciphertext, secret: int, c: CurveParams | None = None) -> bytes:
    """Invert encrypt; the curve is resolved from the header when not given."""
    if c is None:
        c = get_curve(ct.curve_name)
    params = EncodingParams(kappa=ct.kappa, block_bits=ct.block_bits)
    values = [
        decode_block(params, decrypt_block(c, block, secret))
        for block in ct.blocks
    ]
    return join_message(values, ct.block_bits, ct.original_length)


# -- key file format --
#
#   curve = <name>
#   secret = <hex>
#   pub.x = <hex>
#   pub.y = <hex>
#
# The secret line is omitted in public-only files.

def render_keypair(kp: KeyPair, include_secret: bool = True) -> str:
    x, y = kp.public.coords()
    lines = [f"curve = {kp.curve.name}"]
    if include_secret:
        lines.append(f"secret = {to_hex(kp.secret)}")
    lines += [f"pub.x = {to_hex(x)}", f"pub.y = {to_hex(y)}", ""]
    return "\n".join(lines)


def _parse_kv_lines(text: str, allowed: tuple[str, ...]) -> dict[str, str]:
    fields: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise FormatError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = key.strip(), value.strip()
        if key not in allowed:
            raise FormatError(f"line {lineno}: unknown field {key!r}")
        if key in fields:
            raise FormatError(f"line {lineno}: duplicate field {key!r}")
        fields[key] = value
    return fields


def parse_public_key(text: str) -> tuple[CurveParams, Point]:
    """Curve and public point from a key file, full or public-only."""
    fields = _parse_kv_lines(text, ("curve", "secret", "pub.x", "pub.y"))
    for required in ("curve", "pub.x", "pub.y"):
        if required not in fields:
            raise FormatError(f"key file missing field {required!r}")
    c = get_curve(fields["curve"])
    public = c.point(from_hex(fields["pub.x"]), from_hex(fields["pub.y"]))
    if "secret" in fields:
        # full key file: reject silently corrupted ones here too
        KeyPair(c, from_hex(fields["secret"]), public)
    return c, public


def parse_keypair(text: str) -> KeyPair:
    """Full key pair; re-derives and checks the public half."""
    fields = _parse_kv_lines(text, ("curve", "secret", "pub.x", "pub.y"))
    for required in ("curve", "secret", "pub.x", "pub.y"):
        if required not in fields:
            raise FormatError(f"key file missing field {required!r}")
    c = get_curve(fields["curve"])
    public = c.point(from_hex(fields["pub.x"]), from_hex(fields["pub.y"]))
    return KeyPair(c, from_hex(fields["secret"]), public)


# -- ciphertext file format --
#
#   curve = <name>
#   block_bits = <dec>
#   kappa = <dec>
#   length = <dec>
#   <c1.x> <c1.y> <c2.x> <c2.y>     (one line per block, hex)
#
# An identity component is the single token "O" in place of its pair.

def _render_pair(pt: Point) -> str:
    if pt.is_identity:
        return "O"
    x, y = pt.coords()
    return f"{to_hex(x)} {to_hex(y)}"


def render_ciphertext(ct: Ciphertext) -> str:
    if ct.curve_name is None:
        raise ValueError("only ciphertexts on named curves can be serialized")
    lines = [
        f"curve = {ct.curve_name}",
        f"block_bits = {ct.block_bits}",
        f"kappa = {ct.kappa}",
        f"length = {ct.original_length}",
    ]
    for block in ct.blocks:
        lines.append(f"{_render_pair(block.c1)} {_render_pair(block.c2)}")
    lines.append("")
    return "\n".join(lines)


def _parse_point_tokens(c: CurveParams, tokens: list[str], lineno: int) -> Point:
    if tokens and tokens[0] == "O":
        tokens.pop(0)
        return Point.identity()
    if len(tokens) < 2:
        raise FormatError(f"line {lineno}: truncated point")
    x, y = from_hex(tokens.pop(0)), from_hex(tokens.pop(0))
    return c.point(x, y)


def parse_ciphertext(text: str) -> Ciphertext:
    lines = text.splitlines()
    header: dict[str, str] = {}
    body_start = 0
    for i, line in enumerate(lines):
        stripped = line.strip()
        if not stripped:
            continue
        if "=" not in stripped:
            body_start = i
            break
        key, _, value = stripped.partition("=")
        header[key.strip()] = value.strip()
        body_start = i + 1

    for required in ("curve", "block_bits", "kappa", "length"):
        if required not in header:
            raise FormatError(f"ciphertext header missing {required!r}")
    extra = set(header) - {"curve", "block_bits", "kappa", "length"}
    if extra:
        raise FormatError(f"ciphertext header has unknown fields: {sorted(extra)}")

    c = get_curve(header["curve"])
    try:
        block_bits = int(header["block_bits"])
        kappa = int(header["kappa"])
        length = int(header["length"])
    except ValueError as exc:
        raise FormatError(f"ciphertext header not numeric: {exc}") from None

    blocks = []
    for lineno, line in enumerate(lines[body_start:], body_start + 1):
        stripped = line.strip()
        if not stripped:
            continue
        tokens = stripped.split()
        c1 = _parse_point_tokens(c, tokens, lineno)
        c2 = _parse_point_tokens(c, tokens, lineno)
        if tokens:
            raise FormatError(f"line {lineno}: trailing tokens {tokens}")
        blocks.append(CiphertextBlock(c1, c2))

    step = max(1, block_bits // 8)
    expected = (length + step - 1) // step
    if expected != len(blocks):
        raise FormatError(
            f"length {length} implies {expected} blocks, file has {len(blocks)}"
        )

    return Ciphertext(header["curve"], block_bits, kappa, length, tuple(blocks))
