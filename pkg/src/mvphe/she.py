"""Encryption, decryption, and the homomorphic operations.

A plaintext is a vector of ell − n bits.  Its encryption is

    c = (p·floor(q/2) + y·S_enc + e) · R   (mod q, balanced)

where y is a uniformly random head vector, e a discrete-Gaussian noise
vector, S_enc = [I | −S^T], and R the secret mixing matrix.  Decryption
computes w = c·S_dec (mod q, balanced) and rounds each w_j to the nearest
multiple of floor(q/2), modulo 2.  Correct as long as the noise stays below
floor(q/2)/2 in infinity norm.

Every ciphertext carries a ``noise_hint``: an upper bound on the infinity
norm of its noise, maintained through each operation by the tracked
formulas below.  The hint is advisory — decryption works off the actual
vector and merely warns when the hint crosses q/4 — and it is deliberately
excluded from equality comparisons and serialized only as a convenience.

Addition is entrywise (hint: h1 + h2 + 1).  Multiplication contracts the
evaluation-key tensor with the two (gadget-decomposed) ciphertexts and
floors; the hint follows

    4B' + 2(4B' + 1)·k_max + (8B'^2 + 1)/q + ell,     B' = max(h1, h2),

where k_max is the carry bound certified by the evaluation key.  The whole
pipeline is exact integer/rational arithmetic; the only rounding anywhere
is the final floor, by design.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from random import Random
from typing import Sequence

from .arith import NoiseSampler, Rational, balance, round_nearest
from .errors import DepthError, ParameterError
from .keys import EvalKey, Params, SecretKey, _powersoftwo_numerators
from .linalg import Matrix

__all__ = [
    "Ciphertext", "PublicKey", "encrypt", "decrypt", "noise_of",
    "eval_add", "eval_mult", "pk_keygen", "pk_encrypt",
]


@dataclass
class Ciphertext:
    """A length-ell vector over Z_q (balanced), at a multiplicative level.

    ``level`` counts consumed depth: fresh encryptions are level 0 and a
    product of levels l1, l2 sits at l1 + l2 + 1.  ``noise_hint`` is the
    tracked noise bound; it does not participate in equality.
    """

    vec: list[int]
    level: int
    q: int
    noise_hint: Rational | None = field(default=None, compare=False)

    def __post_init__(self):
        self.vec = [balance(x, self.q) for x in self.vec]

    def __len__(self) -> int:
        return len(self.vec)


def _check_message(params: Params, m: Sequence[int]) -> list[int]:
    m = list(m)
    if len(m) != params.message_bits:
        raise ParameterError(
            f"message must have {params.message_bits} bits, got {len(m)}"
        )
    if any(b not in (0, 1) for b in m):
        raise ParameterError("message bits must be 0 or 1")
    return m


def encrypt(sk: SecretKey, m: Sequence[int], rng: Random, *,
            zero_noise: bool = False) -> Ciphertext:
    """Encrypt a bit vector under the secret key.

    ``zero_noise`` drops the Gaussian term (debugging/test calibration);
    the hint is then 0 and decryption is exact.
    """
    p = sk.params
    q = p.q
    m = _check_message(p, m)
    half = q // 2
    y = [rng.randrange(q) for _ in range(p.n)]
    if zero_noise:
        e = [0] * p.message_bits
    else:
        sampler = NoiseSampler(p.sigma, rng, p.B)
        e = [sampler.sample() for _ in range(p.message_bits)]
    # pre-mixing vector: y spread by S_enc, message + noise on the message band
    # (the band is exactly what [S | I]^T reads back out, so noise added
    # anywhere else would be amplified by S at decryption)
    pre = [0] * p.ell
    for i in range(p.n):
        yi = y[i]
        if yi:
            row = sk.S_enc[i]
            for j in range(p.ell):
                pre[j] += yi * row[j]
    for j in range(p.message_bits):
        pre[p.n + j] += m[j] * half + e[j]
    vec = [0] * p.ell
    for i in range(p.ell):
        xi = pre[i]
        if xi:
            row = sk.R[i]
            for j in range(p.ell):
                vec[j] += xi * row[j]
    hint = 0 if zero_noise else p.B
    return Ciphertext(vec=vec, level=0, q=q, noise_hint=hint)


def decrypt(sk: SecretKey, ct: Ciphertext) -> list[int]:
    """Recover the plaintext bits.

    Emits a RuntimeWarning when the ciphertext's noise hint exceeds q/4 —
    past that bound rounding to the nearest multiple of floor(q/2) is no
    longer guaranteed to land on the encrypted bit.
    """
    p = sk.params
    q = p.q
    if ct.q != q:
        raise ParameterError("ciphertext modulus does not match this key")
    if ct.noise_hint is not None and ct.noise_hint > Fraction(q, 4):
        warnings.warn(
            f"noise hint {float(ct.noise_hint):.4g} exceeds q/4 = {q / 4:.4g}; "
            "decryption may be incorrect", RuntimeWarning, stacklevel=2)
    half = q // 2
    w = _apply_sdec(sk, ct.vec)
    return [round_nearest(Fraction(wj, half)) % 2 for wj in w]


def _apply_sdec(sk: SecretKey, vec: Sequence[int]) -> list[int]:
    p = sk.params
    q = p.q
    k = p.ell - p.n
    out = [0] * k
    for i in range(p.ell):
        xi = vec[i]
        if xi:
            row = sk.S_dec[i]
            for j in range(k):
                out[j] += xi * row[j]
    return [balance(x, q) for x in out]


def noise_of(sk: SecretKey, ct: Ciphertext, m: Sequence[int]) -> list[int]:
    """Exact noise vector of ct relative to plaintext m (balanced residues)."""
    p = sk.params
    m = _check_message(p, m)
    half = p.q // 2
    w = _apply_sdec(sk, ct.vec)
    return [balance(w[j] - m[j] * half, p.q) for j in range(p.ell - p.n)]


def eval_add(ct1: Ciphertext, ct2: Ciphertext) -> Ciphertext:
    """Homomorphic XOR: entrywise sum mod q."""
    if ct1.q != ct2.q or len(ct1.vec) != len(ct2.vec):
        raise ParameterError("ciphertexts come from different parameter sets")
    vec = [a + b for a, b in zip(ct1.vec, ct2.vec)]
    hint = None
    if ct1.noise_hint is not None and ct2.noise_hint is not None:
        hint = ct1.noise_hint + ct2.noise_hint + 1
    return Ciphertext(vec=vec, level=max(ct1.level, ct2.level), q=ct1.q,
                      noise_hint=hint)


def mult_noise_hint(evk: EvalKey, h1: Rational, h2: Rational) -> Fraction:
    """Tracked noise bound for a product of ciphertexts with hints h1, h2."""
    p = evk.params
    bp = Fraction(max(h1, h2))
    return (4 * bp + 2 * (4 * bp + 1) * evk.k_max
            + (8 * bp * bp + 1) / p.q + p.ell)


def eval_mult(evk: EvalKey, ct1: Ciphertext, ct2: Ciphertext) -> Ciphertext:
    """Homomorphic AND via the multiplication key.

    Contracts the key's tensor with the two transformed ciphertexts and
    floors the result.  Internally runs the factored form: with
    x_s = <t1, P1[:,s]>, y_s = <t2, P2[:,s]> (t_i the gadget transform of
    ct_i, or ct_i itself in the plain variant), the k-th output is

        floor( sum_s u_s * x_s * y_s * W[s,k] )  mod q,

    accumulated as a single integer numerator over the common denominator
    q·2^(2u'), so the floor is one exact integer division.
    """
    p = evk.params
    q = p.q
    if ct1.q != q or ct2.q != q:
        raise ParameterError("ciphertext modulus does not match this key")
    level = ct1.level + ct2.level + 1
    if level > p.L:
        raise DepthError(
            f"multiplication at levels {ct1.level} + {ct2.level} needs depth "
            f"{level} > L = {p.L}"
        )
    if evk.gadget_enabled:
        t1 = _powersoftwo_numerators(ct1.vec, q, evk.u)
        t2 = _powersoftwo_numerators(ct2.vec, q, evk.u)
        shift = 2 * evk.u  # each transform contributes denominator 2^u
    else:
        t1, t2 = ct1.vec, ct2.vec
        shift = 2 * evk.u  # both P factors carry denominator 2^u
    x = _columns_dot(t1, evk.P1)
    y = _columns_dot(t2, evk.P2)
    denom = q << shift
    n, ell, t = p.n, p.ell, p.t
    out = []
    for k in range(ell):
        acc = 0
        for s in range(t):
            w = evk.W[s][k]
            if not w:
                continue
            prod = x[s] * y[s]
            if not prod:
                continue
            # fold in u_s: 1 on head/extension slices, 2/q on the message band
            acc += (2 * prod * w) if n <= s < ell else (q * prod * w)
        out.append(balance((acc // denom) % q, q))
    hint = None
    if ct1.noise_hint is not None and ct2.noise_hint is not None:
        hint = mult_noise_hint(evk, ct1.noise_hint, ct2.noise_hint)
    return Ciphertext(vec=out, level=level, q=q, noise_hint=hint)


def _columns_dot(t: Sequence[int], P: Matrix) -> list[int]:
    """All column inner products <t, P[:,s]> as integers."""
    cols = len(P[0])
    out = [0] * cols
    for i, a in enumerate(t):
        if a:
            row = P[i]
            for s in range(cols):
                out[s] += a * row[s]
    return out


# ---------------------------------------------------------------------------
# public-key mode
# ---------------------------------------------------------------------------

@dataclass
class PublicKey:
    """Encryptions of zero (C0) and of the unit bit vectors (C_unit).

    d = ceil((1+eps)·ell·log2 q) zero encryptions make random subset sums
    statistically close to fresh encryptions of zero; adding the unit-vector
    rows for the set bits of m yields an encryption of m without the secret
    key.
    """

    params: Params
    eps: Fraction
    C0: Matrix
    C_unit: Matrix

    @property
    def d(self) -> int:
        return len(self.C0)


def pk_keygen(sk: SecretKey, rng: Random, eps: Rational = Fraction(1, 10)) -> PublicKey:
    p = sk.params
    eps = Fraction(eps)
    if eps < 0:
        raise ParameterError("eps must be >= 0")
    d = math.ceil((1 + eps) * p.ell * p.q_bits)
    zero = [0] * p.message_bits
    C0 = [encrypt(sk, zero, rng).vec for _ in range(d)]
    C_unit = []
    for j in range(p.message_bits):
        e_j = [1 if i == j else 0 for i in range(p.message_bits)]
        C_unit.append(encrypt(sk, e_j, rng).vec)
    return PublicKey(params=p, eps=eps, C0=C0, C_unit=C_unit)


def pk_encrypt(pk: PublicKey, m: Sequence[int], rng: Random) -> Ciphertext:
    """Encrypt with the public key: unit rows for set bits + random zero subset."""
    p = pk.params
    q = p.q
    m = _check_message(p, m)
    acc = [0] * p.ell
    weight = 0
    for j, bit in enumerate(m):
        if bit:
            weight += 1
            row = pk.C_unit[j]
            for i in range(p.ell):
                acc[i] += row[i]
    subset = 0
    for row in pk.C0:
        if rng.randrange(2):
            subset += 1
            for i in range(p.ell):
                acc[i] += row[i]
    hint = (weight + subset) * p.B
    return Ciphertext(vec=acc, level=0, q=q, noise_hint=hint)
