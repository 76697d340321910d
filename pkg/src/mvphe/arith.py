"""Exact arithmetic foundation: balanced residues, rationals, noise sampling.

Everything in the scheme core is computed exactly — integers of arbitrary
size and `fractions.Fraction` for rationals.  No floating point enters any
ciphertext or key computation.  The single place a ``float`` appears is in
building the noise sampler's weight table, and the weights themselves are
then fixed integers (numerators at a fixed power-of-two denominator), so the
sample stream is reproducible bit-for-bit from a seed.

The balanced representative convention: an integer x reduced mod an odd
prime q is reported in the interval (−q/2, q/2].  Serialization and all
cross-module arithmetic use this form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ParameterError

Rational = Union[int, Fraction]

# Moduli that already passed the primality check.  balanced_mod is called in
# hot loops, so the (probabilistic) primality test runs once per modulus.
_checked_moduli: set[int] = set()

_MR_ROUNDS = 64  # error probability <= 4^-64 = 2^-128 per candidate


def _miller_rabin_witness(n: int, a: int) -> bool:
    """True if a witnesses compositeness of odd n > 2."""
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return False
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def is_probable_prime(n: int, rng=None, rounds: int = _MR_ROUNDS) -> bool:
    """Miller–Rabin primality test with failure probability <= 4**-rounds.

    Witnesses are drawn from ``rng`` when given (keeps callers deterministic
    under a fixed seed), otherwise from a fixed small-prime list extended by
    a deterministic sweep.
    """
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    for i in range(rounds):
        if rng is not None:
            a = rng.randrange(2, n - 1)
        else:
            a = 2 + i * 0x9E3779B97F4A7C15 % (n - 3)
        if _miller_rabin_witness(n, a):
            return False
    return True


def _require_odd_prime(q: int) -> None:
    if q < 3 or q % 2 == 0:
        raise ParameterError(f"modulus must be an odd prime >= 3, got {q}")
    if q not in _checked_moduli:
        if not is_probable_prime(q):
            raise ParameterError(f"modulus {q} is not prime")
        _checked_moduli.add(q)
        if len(_checked_moduli) > 4096:  # stop an unbounded cache in pathological use
            _checked_moduli.clear()
            _checked_moduli.add(q)


def balanced_mod(x: int, q: int) -> int:
    """Reduce x modulo q into the balanced interval (−q/2, q/2]."""
    _require_odd_prime(q)
    r = x % q
    return r - q if r > q // 2 else r


def balance(x: int, q: int) -> int:
    """balanced_mod without the modulus check — internal hot-path form."""
    r = x % q
    return r - q if r > q // 2 else r


def round_floor(x: Rational) -> int:
    """Greatest integer <= x.  Exact on Fraction inputs."""
    return math.floor(x)


def round_nearest(x: Rational) -> int:
    """Nearest integer to x, half-values rounding toward +infinity."""
    return math.floor(2 * x + 1) // 2


@dataclass(frozen=True, slots=True)
class Residue:
    """An element of Z_q held as its balanced representative.

    Mostly a convenience wrapper for API-level code and tests; the inner
    linear-algebra loops work on raw ints in balanced form for speed.
    """

    value: int
    q: int

    def __post_init__(self):
        object.__setattr__(self, "value", balanced_mod(self.value, self.q))

    def _coerce(self, other: "Residue | int") -> int:
        if isinstance(other, Residue):
            if other.q != self.q:
                raise ParameterError(
                    f"mixed moduli in residue arithmetic: {self.q} vs {other.q}"
                )
            return other.value
        return other

    def __add__(self, other):
        return Residue(self.value + self._coerce(other), self.q)

    __radd__ = __add__

    def __sub__(self, other):
        return Residue(self.value - self._coerce(other), self.q)

    def __mul__(self, other):
        return Residue(self.value * self._coerce(other), self.q)

    __rmul__ = __mul__

    def __neg__(self):
        return Residue(-self.value, self.q)

    def inverse(self) -> "Residue":
        if self.value % self.q == 0:
            raise ZeroDivisionError("0 has no inverse")
        return Residue(pow(self.value, -1, self.q), self.q)

    def __int__(self):
        return self.value


_WEIGHT_BITS = 48  # weight table resolution: weights are numerators over 2^48


class NoiseSampler:
    """Discrete Gaussian on Z restricted to [−B, B], rejection-sampled.

    The target mass is proportional to exp(−x² / (2σ²)), i.e. σ is the
    standard deviation of the untruncated distribution.  With the default
    bound B = ceil(6σ) the truncated tail mass is below 2^−26, so the
    restriction is statistically invisible at test scale.

    σ = 0 is the degenerate zero-noise test mode: every sample is 0.

    A sampler owns its ``rng`` and is not safe for concurrent use; create
    one per thread, each with its own seed.
    """

    def __init__(self, sigma: Rational, rng, bound: int | None = None):
        if sigma < 0:
            raise ParameterError("sigma must be >= 0")
        self.sigma = sigma
        self.rng = rng
        if sigma == 0:
            self.bound = 0
            self._weights = None
            return
        self.bound = int(bound) if bound is not None else math.ceil(6 * Fraction(sigma))
        if self.bound < 1:
            raise ParameterError("bound must be >= 1 for sigma > 0")
        s = float(sigma)
        scale = 1 << _WEIGHT_BITS
        self._weights = [
            round(scale * math.exp(-(x * x) / (2 * s * s))) for x in range(self.bound + 1)
        ]

    def sample(self) -> int:
        """One sample, |result| <= bound, reproducible from the rng state."""
        if self.sigma == 0:
            return 0
        scale = 1 << _WEIGHT_BITS
        while True:
            x = self.rng.randrange(-self.bound, self.bound + 1)
            if self.rng.randrange(scale) < self._weights[abs(x)]:
                return x


def random_prime(bits: int, rng) -> int:
    """An odd prime with exactly ``bits`` significant bits.

    Primality is established by Miller–Rabin with certainty >= 1 − 2^−128.
    Deterministic for a fixed rng state.
    """
    if bits < 8:
        raise ParameterError("random_prime needs bits >= 8")
    while True:
        candidate = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if is_probable_prime(candidate, rng=rng):
            return candidate
