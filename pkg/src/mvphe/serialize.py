"""Binary container format for keys, parameters, and ciphertexts.

Layout of every file:

    magic "MVPH" | version u16 | type u8 | params block | payload | sha256

All integers are little-endian.  Arbitrary-precision integers are encoded
as sign byte (0 or 1) + u32 byte count + magnitude; rationals as two such
integers (numerator, denominator).  The trailing 32 bytes are the SHA-256
digest of everything before them.  The version is checked before any
payload is parsed; a corrupted digest or a truncated file raises
FormatError.

Every file embeds the complete parameter block of the parameters it was
produced under.  The 8-byte parameter fingerprint — the first 8 bytes of
the SHA-256 of that block — is how tools decide whether two files belong
together without comparing full keys.

Secret-key files store only the core fields (g, points, R1, R2); all
derived matrices are recomputed on load, so a save/load round trip is
bit-exact by construction.  Evaluation keys store their factored form
verbatim.  Noise hints on ciphertexts are serialized (they are useful
diagnostics) but remain advisory.
"""

from __future__ import annotations

import hashlib
from fractions import Fraction
from typing import BinaryIO, Sequence

from .errors import FormatError, ParameterError
from .keys import EvalKey, Params, SecretKey
from .linalg import Matrix
from .mvpoly import Polynomial, grevlex_key
from .she import Ciphertext, PublicKey

__all__ = [
    "MAGIC", "VERSION", "params_fingerprint",
    "save_params", "load_params",
    "save_secret_key", "load_secret_key",
    "save_evalkey", "load_evalkey",
    "save_public_key", "load_public_key",
    "save_ciphertext", "load_ciphertext",
]

MAGIC = b"MVPH"
VERSION = 1

TYPE_PARAMS = 0x50      # 'P'
TYPE_SECRET = 0x53      # 'S'
TYPE_EVALKEY = 0x45     # 'E'
TYPE_PUBLIC = 0x4B      # 'K'
TYPE_CIPHERTEXT = 0x43  # 'C'

_TYPE_NAMES = {
    TYPE_PARAMS: "parameters",
    TYPE_SECRET: "secret key",
    TYPE_EVALKEY: "evaluation key",
    TYPE_PUBLIC: "public key",
    TYPE_CIPHERTEXT: "ciphertext",
}


# ---------------------------------------------------------------------------
# primitive encoders
# ---------------------------------------------------------------------------

def _w_uint(buf: bytearray, x: int, nbytes: int) -> None:
    buf += x.to_bytes(nbytes, "little")


def _w_int(buf: bytearray, x: int) -> None:
    sign = 1 if x < 0 else 0
    mag = abs(x)
    raw = mag.to_bytes((mag.bit_length() + 7) // 8, "little") if mag else b""
    buf.append(sign)
    _w_uint(buf, len(raw), 4)
    buf += raw


def _w_fraction(buf: bytearray, x) -> None:
    f = Fraction(x)
    _w_int(buf, f.numerator)
    _w_int(buf, f.denominator)


def _w_intvec(buf: bytearray, v: Sequence[int]) -> None:
    _w_uint(buf, len(v), 4)
    for x in v:
        _w_int(buf, x)


def _w_matrix(buf: bytearray, m: Matrix) -> None:
    rows = len(m)
    cols = len(m[0]) if rows else 0
    _w_uint(buf, rows, 4)
    _w_uint(buf, cols, 4)
    for row in m:
        if len(row) != cols:
            raise ParameterError("ragged matrix")
        for x in row:
            _w_int(buf, x)


def _w_poly(buf: bytearray, f: Polynomial) -> None:
    _w_uint(buf, f.v, 4)
    terms = sorted(f.terms.items(), key=lambda kv: grevlex_key(kv[0]), reverse=True)
    _w_uint(buf, len(terms), 4)
    for mono, coeff in terms:
        for e in mono:
            _w_uint(buf, e, 2)
        _w_int(buf, coeff)


def _w_points(buf: bytearray, pts: Sequence[tuple[int, ...]], v: int) -> None:
    _w_uint(buf, len(pts), 4)
    for z in pts:
        if len(z) != v:
            raise ParameterError("point arity mismatch")
        for c in z:
            _w_int(buf, c)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("truncated file")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def uint(self, nbytes: int) -> int:
        return int.from_bytes(self.take(nbytes), "little")

    def int_(self) -> int:
        sign = self.take(1)[0]
        if sign not in (0, 1):
            raise FormatError("bad integer sign byte")
        n = self.uint(4)
        mag = int.from_bytes(self.take(n), "little")
        if sign and mag == 0:
            raise FormatError("negative zero encoding")
        return -mag if sign else mag

    def fraction(self) -> Fraction:
        num = self.int_()
        den = self.int_()
        if den <= 0:
            raise FormatError("bad rational denominator")
        return Fraction(num, den)

    def intvec(self) -> list[int]:
        return [self.int_() for _ in range(self.uint(4))]

    def matrix(self) -> Matrix:
        rows = self.uint(4)
        cols = self.uint(4)
        return [[self.int_() for _ in range(cols)] for _ in range(rows)]

    def poly(self, q: int) -> Polynomial:
        v = self.uint(4)
        nterms = self.uint(4)
        terms = {}
        for _ in range(nterms):
            mono = tuple(self.uint(2) for _ in range(v))
            terms[mono] = self.int_()
        return Polynomial(v, q, terms)


# ---------------------------------------------------------------------------
# parameter block and fingerprint
# ---------------------------------------------------------------------------

def _params_block(p: Params) -> bytes:
    buf = bytearray()
    _w_uint(buf, p.lambda_, 4)
    _w_uint(buf, p.L, 4)
    _w_uint(buf, p.v, 4)
    _w_uint(buf, p.r_g, 4)
    _w_uint(buf, p.r_prime, 4)
    _w_uint(buf, p.ell, 4)
    _w_int(buf, p.q)
    _w_fraction(buf, p.sigma)
    _w_int(buf, p.B)
    _w_uint(buf, p.u, 4)
    buf.append(1 if p.gadget_enabled else 0)
    return bytes(buf)


def _read_params(r: _Reader) -> Params:
    lam = r.uint(4)
    L = r.uint(4)
    v = r.uint(4)
    r_g = r.uint(4)
    r_prime = r.uint(4)
    ell = r.uint(4)
    q = r.int_()
    sigma_f = r.fraction()
    sigma = int(sigma_f) if sigma_f.denominator == 1 else sigma_f
    B = r.int_()
    u = r.uint(4)
    flag = r.take(1)[0]
    if flag not in (0, 1):
        raise FormatError("bad gadget flag")
    return Params(lambda_=lam, L=L, v=v, r_g=r_g, r_prime=r_prime, ell=ell,
                  q=q, sigma=sigma, B=B, u=u, gadget_enabled=bool(flag))


def params_fingerprint(p: Params) -> str:
    """16-hex-character identifier of a parameter set."""
    return hashlib.sha256(_params_block(p)).digest()[:8].hex()


# ---------------------------------------------------------------------------
# container plumbing
# ---------------------------------------------------------------------------

def _write_container(path: str, type_byte: int, params: Params,
                     payload: bytes) -> None:
    buf = bytearray()
    buf += MAGIC
    _w_uint(buf, VERSION, 2)
    buf.append(type_byte)
    block = _params_block(params)
    _w_uint(buf, len(block), 4)
    buf += block
    buf += payload
    buf += hashlib.sha256(bytes(buf)).digest()
    with open(path, "wb") as fh:
        fh.write(bytes(buf))


def _read_container(path: str, expect_type: int) -> tuple[Params, _Reader]:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC) + 2 + 1 + 4 + 32:
        raise FormatError(f"{path}: too short to be a container file")
    if data[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic; not a container file")
    version = int.from_bytes(data[4:6], "little")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise FormatError(f"{path}: checksum mismatch; file corrupted")
    type_byte = data[6]
    if type_byte != expect_type:
        have = _TYPE_NAMES.get(type_byte, f"type 0x{type_byte:02x}")
        want = _TYPE_NAMES[expect_type]
        raise FormatError(f"{path}: contains {have}, expected {want}")
    r = _Reader(body)
    r.pos = 7
    block_len = r.uint(4)
    block = r.take(block_len)
    params = _read_params(_Reader(block))
    return params, r


# ---------------------------------------------------------------------------
# public save/load API
# ---------------------------------------------------------------------------

def save_params(p: Params, path: str) -> None:
    _write_container(path, TYPE_PARAMS, p, b"")


def load_params(path: str) -> Params:
    params, _ = _read_container(path, TYPE_PARAMS)
    return params


def save_secret_key(sk: SecretKey, path: str) -> None:
    buf = bytearray()
    _w_poly(buf, sk.g)
    _w_points(buf, sk.points, sk.params.v)
    _w_matrix(buf, sk.S)
    _w_matrix(buf, sk.R1)
    _w_matrix(buf, sk.R2)
    _write_container(path, TYPE_SECRET, sk.params, bytes(buf))


def load_secret_key(path: str) -> SecretKey:
    params, r = _read_container(path, TYPE_SECRET)
    g = r.poly(params.q)
    npts = r.uint(4)
    points = [tuple(r.int_() for _ in range(params.v)) for _ in range(npts)]
    S = r.matrix()
    R1 = r.matrix()
    R2 = r.matrix()
    if npts != params.t:
        raise FormatError(f"secret key has {npts} points, expected {params.t}")
    return SecretKey(params=params, g=g, points=points, S=S, R1=R1, R2=R2)


def save_evalkey(evk: EvalKey, path: str) -> None:
    buf = bytearray()
    buf.append(1 if evk.gadget_enabled else 0)
    _w_uint(buf, evk.u, 4)
    _w_fraction(buf, evk.k_max)
    _w_matrix(buf, evk.P1)
    _w_matrix(buf, evk.P2)
    _w_matrix(buf, evk.W)
    _write_container(path, TYPE_EVALKEY, evk.params, bytes(buf))


def load_evalkey(path: str) -> EvalKey:
    params, r = _read_container(path, TYPE_EVALKEY)
    gadget = bool(r.take(1)[0])
    u = r.uint(4)
    k_max = r.fraction()
    P1 = r.matrix()
    P2 = r.matrix()
    W = r.matrix()
    return EvalKey(params=params, gadget_enabled=gadget, u=u, P1=P1, P2=P2,
                   W=W, k_max=k_max)


def save_public_key(pk: PublicKey, path: str) -> None:
    buf = bytearray()
    _w_fraction(buf, pk.eps)
    _w_matrix(buf, pk.C0)
    _w_matrix(buf, pk.C_unit)
    _write_container(path, TYPE_PUBLIC, pk.params, bytes(buf))


def load_public_key(path: str) -> PublicKey:
    params, r = _read_container(path, TYPE_PUBLIC)
    eps = r.fraction()
    C0 = r.matrix()
    C_unit = r.matrix()
    return PublicKey(params=params, eps=eps, C0=C0, C_unit=C_unit)


def save_ciphertext(ct: Ciphertext, params: Params, path: str) -> None:
    if ct.q != params.q:
        raise ParameterError("ciphertext modulus does not match parameters")
    buf = bytearray()
    _w_uint(buf, ct.level, 4)
    if ct.noise_hint is None:
        buf.append(0)
    else:
        buf.append(1)
        _w_fraction(buf, ct.noise_hint)
    _w_intvec(buf, ct.vec)
    _write_container(path, TYPE_CIPHERTEXT, params, bytes(buf))


def load_ciphertext(path: str) -> tuple[Ciphertext, Params]:
    params, r = _read_container(path, TYPE_CIPHERTEXT)
    level = r.uint(4)
    has_hint = r.take(1)[0]
    hint = r.fraction() if has_hint else None
    vec = r.intvec()
    if len(vec) != params.ell:
        raise FormatError(f"ciphertext length {len(vec)} != ell = {params.ell}")
    ct = Ciphertext(vec=vec, level=level, q=params.q, noise_hint=hint)
    return ct, params
