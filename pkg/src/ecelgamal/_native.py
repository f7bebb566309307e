"""Build and load the compiled scalar-multiplication kernel.

The kernel is a small plain-C shared library (no libpython dependency)
compiled on first use and cached.  Loading it through ctypes means calls
release the GIL, which is what lets the dual-worker pipeline use two cores.

Set ECELGAMAL_NATIVE=0 to force the pure-Python fallback, =1 to make a
missing kernel an error instead of a silent fallback.  ECELGAMAL_KERNEL_DIR
overrides where the .so is cached.
"""

from __future__ import annotations

import ctypes
import hashlib
import os
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

MAX_LIMBS = 9       # 576-bit arithmetic, covers moduli up to 521 bits
MAX_SCALAR_LIMBS = 64

_SOURCE = Path(__file__).with_name("_kernel.c")
_CFLAGS = ["-O3", "-fPIC", "-shared"]

_kernel = None
_load_attempted = False
_load_error: str | None = None


def _source_digest() -> str:
    return hashlib.sha256(_SOURCE.read_bytes()).hexdigest()[:16]


def _candidate_dirs():
    env_dir = os.environ.get("ECELGAMAL_KERNEL_DIR")
    if env_dir:
        yield Path(env_dir)
        return
    yield _SOURCE.parent
    yield Path.home() / ".cache" / "ecelgamal"
    yield Path(tempfile.gettempdir()) / "ecelgamal-kernel"


def _find_compiler() -> str | None:
    for cand in (os.environ.get("CC"), "cc", "gcc", "clang"):
        if cand and shutil.which(cand):
            return cand
    return None


def _compile_into(directory: Path, so_name: str) -> Path | None:
    compiler = _find_compiler()
    if compiler is None:
        return None
    try:
        directory.mkdir(parents=True, exist_ok=True)
        tmp = directory / f".{so_name}.{os.getpid()}.tmp"
        cmd = [compiler, *_CFLAGS, "-o", str(tmp), str(_SOURCE)]
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=120)
        if proc.returncode != 0:
            return None
        target = directory / so_name
        os.replace(tmp, target)
        return target
    except OSError:
        return None


class Kernel:
    """ctypes wrapper around the shared library."""

    def __init__(self, lib: ctypes.CDLL, path: Path):
        self.path = path
        self._mul = lib.eck_scalar_mul
        self._mul.restype = ctypes.c_int
        self._mul.argtypes = [
            ctypes.POINTER(ctypes.c_uint64), ctypes.c_int,   # p, nl
            ctypes.POINTER(ctypes.c_uint64),                 # a
            ctypes.POINTER(ctypes.c_uint64), ctypes.c_int,   # k, knl
            ctypes.POINTER(ctypes.c_uint64),                 # px
            ctypes.POINTER(ctypes.c_uint64), ctypes.c_int,   # py, pinf
            ctypes.POINTER(ctypes.c_uint64),                 # rx
            ctypes.POINTER(ctypes.c_uint64),                 # ry
        ]

    @staticmethod
    def _limbs(value: int, nl: int):
        return (ctypes.c_uint64 * nl).from_buffer_copy(value.to_bytes(nl * 8, "little"))

    def field_context(self, p: int, a: int):
        """Precomputed per-curve arrays; cache this on the curve object."""
        nl = max(1, (p.bit_length() + 63) // 64)
        if nl > MAX_LIMBS:
            raise ValueError(f"modulus needs {nl} limbs; kernel supports {MAX_LIMBS}")
        return (nl, self._limbs(p, nl), self._limbs(a % p, nl))

    def scalar_mul(self, ctx, k: int, point):
        """k * point; point is an (x, y) int pair or None for the identity."""
        nl, p_arr, a_arr = ctx
        knl = max(1, (k.bit_length() + 63) // 64)
        if knl > MAX_SCALAR_LIMBS:
            raise ValueError("scalar too wide for the kernel")
        k_arr = self._limbs(k, knl)
        if point is None:
            pinf = 1
            px = py = (ctypes.c_uint64 * nl)()
        else:
            pinf = 0
            px = self._limbs(point[0], nl)
            py = self._limbs(point[1], nl)
        rx = (ctypes.c_uint64 * nl)()
        ry = (ctypes.c_uint64 * nl)()
        rc = self._mul(p_arr, nl, a_arr, k_arr, knl, px, py, pinf, rx, ry)
        if rc == 1:
            return None
        if rc != 0:
            raise RuntimeError(f"kernel rejected scalar multiplication (rc={rc})")
        return (
            int.from_bytes(bytes(rx), "little"),
            int.from_bytes(bytes(ry), "little"),
        )


def _try_load(path: Path) -> Kernel | None:
    try:
        lib = ctypes.CDLL(str(path))
        selftest = lib.eck_selftest
        selftest.restype = ctypes.c_int
        if selftest() != 0:
            return None
        return Kernel(lib, path)
    except OSError:
        return None


def _locate_or_build() -> Kernel | None:
    global _load_error
    so_name = f"_kernel-{_source_digest()}-{sys.platform}.so"
    for directory in _candidate_dirs():
        existing = directory / so_name
        if existing.is_file():
            kernel = _try_load(existing)
            if kernel is not None:
                return kernel
    for directory in _candidate_dirs():
        built = _compile_into(directory, so_name)
        if built is not None:
            kernel = _try_load(built)
            if kernel is not None:
                return kernel
    _load_error = "no working C compiler or kernel failed its selftest"
    return None


def load_kernel() -> Kernel | None:
    """The process-wide kernel, or None when disabled or unavailable."""
    global _kernel, _load_attempted, _load_error
    if _load_attempted:
        return _kernel
    _load_attempted = True

    flag = os.environ.get("ECELGAMAL_NATIVE", "").strip().lower()
    if flag in ("0", "off", "no", "false"):
        _load_error = "disabled via ECELGAMAL_NATIVE"
        return None
    _kernel = _locate_or_build()
    if _kernel is None and flag in ("1", "on", "yes", "require", "true"):
        raise RuntimeError(f"native kernel required but unavailable: {_load_error}")
    return _kernel


def kernel_status() -> str:
    """Human-readable loader state for diagnostics and bench reports."""
    kernel = load_kernel()
    if kernel is not None:
        return f"native kernel at {kernel.path}"
    return f"pure Python ({_load_error})"
