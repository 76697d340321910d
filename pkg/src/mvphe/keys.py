"""Parameters, secret keys, and construction of the multiplication key.

The scheme encrypts (ell − n)-bit messages into length-ell vectors over Z_q.
A secret key is built from

* a generator polynomial g of degree r_g (monic, nonzero constant term),
* the n monomials h_1..h_n of degree <= r_prime, so that the products
  g·h_i form a basis of the degree-(<= r) slice of the ideal <g>,
* evaluation points z_1..z_t in Z_q^v — the first ell define ciphertexts,
  the remaining t − ell only support multiplication,
* an annihilator matrix S, derived so that [S | I] kills the evaluations of
  every ideal element of degree <= r at z_1..z_ell,
* a random invertible mixing block R1 and a random block R2.

The mixing matrix R is assembled block upper-triangular,

    R = [[ R1, R2^T ],
         [ 0,  I    ]],

with the random R2 block strictly above the diagonal.  This placement is
what keeps homomorphic multiplication correct: the final entrywise floor is
taken after multiplying by R, and the pre-floor vector carries fractional
parts only in its last ell − n coordinates.  With R2 above the diagonal
those coordinates are passed through unscaled, so flooring commutes with the
mixing step; a random block *below* the diagonal would smear the fractional
tails across all coordinates and corrupt decryption (this fails empirically,
not just in the analysis — see the decision notes shipped with the tests).

The multiplication key is the order-3 tensor

    M = T ×1 D1~ ×2 D2~ ×3 (R^T Q^T B^T),      T = U ×1 A ×2 A,

assembled in five steps (unmasking matrices D_i with dyadic masking noise
eps_i, point-extension matrix A, rescaling tensor U, re-expression matrix B,
and the reduction matrix Q that realizes polynomial division back into
degree <= r on evaluations).  M is never materialized entry-by-entry during
evaluation; the rank-1 slice structure lets everything run through the two
factor matrices P_i = D_i~ · A and the combined third factor W = B·Q·R.
EvalKey.tensor() materializes M on demand for inspection and tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from random import Random
from typing import Sequence

from .arith import Rational, balance, is_probable_prime, random_prime
from .errors import (
    ConstructionError,
    GenerationFailure,
    ParameterError,
    SingularMatrixError,
)
from .linalg import (
    Matrix,
    Tensor3,
    balanced_matrix,
    identity,
    inverse_mod_q,
    mat_mul,
    rank_mod_q,
    solve_mod_q,
    transpose,
    zeros,
)
from .mvpoly import Monomial, Polynomial, enumerate_monomials, grevlex_key, reduce_by_set

RETRY_CAP = 100  # rejection-sampling cap for key generation

# Expected magnitude relation between q/B and (margin_c * n * log2 q)^L for
# depth-L correctness; margin_c = 1 is the factor the presets are sized for.
MARGIN_C = 1


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Params:
    """All scheme dimensions and moduli.

    Derived fields satisfy: r = r_prime + r_g, n = C(v+r_prime, r_prime),
    N = C(v+r, r), n1 = C(v + 2r − r_g, 2r − r_g), t = n1 + ell − n,
    n < ell <= N.
    """

    lambda_: int
    L: int
    v: int
    r_g: int
    r_prime: int
    ell: int
    q: int
    sigma: Rational
    B: int
    u: int
    gadget_enabled: bool = True
    # derived (filled by __post_init__ when left at 0)
    r: int = 0
    n: int = 0
    N: int = 0
    n1: int = 0
    t: int = 0

    def __post_init__(self):
        r = self.r_g + self.r_prime
        n = math.comb(self.v + self.r_prime, self.r_prime)
        N = math.comb(self.v + r, r)
        n1 = math.comb(self.v + 2 * r - self.r_g, 2 * r - self.r_g)
        t = n1 + self.ell - n
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "n1", n1)
        object.__setattr__(self, "t", t)
        self.validate()

    # -- checks ----------------------------------------------------------
    def validate(self) -> None:
        if self.lambda_ < 1 or self.L < 1:
            raise ParameterError("need lambda >= 1 and L >= 1")
        if self.v < 1 or self.r_g < 1 or self.r_prime < 1:
            raise ParameterError("need v, r_g, r_prime >= 1")
        if not self.n < self.ell <= self.N:
            raise ParameterError(
                f"need n < ell <= N, got n={self.n}, ell={self.ell}, N={self.N}"
            )
        if self.u < 0:
            raise ParameterError("gadget fractional bits u must be >= 0")
        if self.q < 3 or self.q % 2 == 0 or not is_probable_prime(self.q):
            raise ParameterError(f"q = {self.q} is not an odd prime")
        if self.sigma < 0:
            raise ParameterError("sigma must be >= 0")
        if self.B < 1:
            raise ParameterError("noise bound B must be >= 1")
        if self.sigma > 0 and self.B < math.ceil(6 * Fraction(self.sigma)):
            raise ParameterError("noise bound B must be >= ceil(6*sigma)")
        if not self.B < Fraction(self.q // 2, 2):
            raise ParameterError(
                f"decryption needs B < floor(q/2)/2: B={self.B}, q={self.q}"
            )
        if self.depth_margin() < 1:
            raise ParameterError(
                f"q/B ratio too small for depth L={self.L}: margin "
                f"{float(self.depth_margin()):.3g} < 1"
            )

    # -- convenience -------------------------------------------------------
    @property
    def q_bits(self) -> int:
        return self.q.bit_length()

    @property
    def message_bits(self) -> int:
        return self.ell - self.n

    @property
    def gadget_width(self) -> int:
        """Bit positions per vector entry in the gadget decomposition."""
        return self.u + self.q_bits

    def depth_margin(self) -> Fraction:
        """(q/B) / (margin_c * n * log2 q)^L; >= 1 on every valid preset."""
        return Fraction(self.q, self.B) / (MARGIN_C * self.n * self.q_bits) ** self.L


def _simulated_noise_after_depth(
    L: int, ell: int, u: int, bits: int, B: int
) -> Fraction:
    """Worst-case tracked noise after L levels of (multiply, then add)."""
    q_min = 1 << (bits - 1)
    k_max = Fraction(ell * (u + bits), 2) + 1
    h = Fraction(B)
    for _ in range(L):
        h = 4 * h + 2 * (4 * h + 1) * k_max + (8 * h * h + 1) / q_min + ell
        h = 2 * h + 1
    return h


def _auto_q_bits(L: int, ell: int, n: int, u: int, B: int) -> int:
    for bits in range(16, 65):
        q_min = 1 << (bits - 1)
        if not B < Fraction(q_min // 2, 2):
            continue
        if Fraction(q_min, B) < (MARGIN_C * n * bits) ** L:
            continue
        if 2 * _simulated_noise_after_depth(L, ell, u, bits, B) < Fraction(q_min // 2, 2):
            return bits
    raise ParameterError(
        f"no modulus size up to 64 bits supports depth L={L} at these dimensions"
    )


#: Named parameter sets.  q_bits values are pinned (not auto-derived) so the
#: file formats stay stable; each satisfies the depth-margin requirement.
PRESETS: dict[str, dict] = {
    # everyday testing scale: 2 message bits, depth 2
    "toy": dict(lambda_=64, L=2, v=2, r_g=1, r_prime=2, ell=8, q_bits=40,
                sigma=8, B=48, u=8),
    # small modulus + wide gadget: the one preset where the dyadic masking
    # blocks eps_i are nonzero, exercising that code path honestly
    "small": dict(lambda_=64, L=1, v=2, r_g=1, r_prime=2, ell=8, q_bits=21,
                  sigma=8, B=48, u=20),
    # depth-3 chains
    "depth3": dict(lambda_=64, L=3, v=2, r_g=1, r_prime=2, ell=8, q_bits=48,
                   sigma=8, B=48, u=8),
    # benchmark shapes: larger ciphertexts at fixed modulus size
    "bench12": dict(lambda_=64, L=1, v=2, r_g=1, r_prime=3, ell=12, q_bits=40,
                    sigma=8, B=48, u=8),
    "bench16": dict(lambda_=64, L=1, v=2, r_g=1, r_prime=4, ell=16, q_bits=40,
                    sigma=8, B=48, u=8),
}


def setup(lambda_: int = 64, L: int = 1, rng: Random | None = None,
          **overrides) -> Params:
    """Build a consistent Params object.

    Dimension knobs (v, r_g, r_prime, ell, sigma, B, u, q_bits, q,
    gadget_enabled) may be overridden; anything left out is defaulted, with
    the modulus size chosen as the smallest that passes a worst-case noise
    simulation for depth L.  Without an explicit ``rng`` the modulus is
    drawn from a generator seeded by (lambda_, L, overrides), so the result
    is a pure function of its arguments.
    """
    v = overrides.pop("v", 2)
    r_g = overrides.pop("r_g", 1)
    r_prime = overrides.pop("r_prime", 2)
    n = math.comb(v + r_prime, r_prime)
    ell = overrides.pop("ell", n + 2)
    sigma = overrides.pop("sigma", 8)
    B = overrides.pop("B", math.ceil(6 * Fraction(sigma)) if sigma else 48)
    u = overrides.pop("u", 8)
    gadget_enabled = overrides.pop("gadget_enabled", True)
    q = overrides.pop("q", None)
    q_bits = overrides.pop("q_bits", None)
    if overrides:
        raise ParameterError(f"unknown parameter overrides: {sorted(overrides)}")
    if q is None:
        if q_bits is None:
            q_bits = _auto_q_bits(L, ell, n, u, B)
        if rng is None:
            stamp = f"mvphe-setup|{lambda_}|{L}|{v}|{r_g}|{r_prime}|{ell}|{q_bits}"
            rng = Random(stamp)
        q = random_prime(q_bits, rng)
    return Params(lambda_=lambda_, L=L, v=v, r_g=r_g, r_prime=r_prime, ell=ell,
                  q=q, sigma=sigma, B=B, u=u, gadget_enabled=gadget_enabled)


def preset_params(name: str, rng: Random | None = None, **extra) -> Params:
    """Params for a named preset; ``extra`` overrides preset fields."""
    if name not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}; have {sorted(PRESETS)}")
    kwargs = dict(PRESETS[name])
    kwargs.update(extra)
    lam = kwargs.pop("lambda_")
    L = kwargs.pop("L")
    return setup(lam, L, rng=rng, **kwargs)


# ---------------------------------------------------------------------------
# secret keys
# ---------------------------------------------------------------------------

@dataclass
class SecretKey:
    """Secret key material plus derived encryption/decryption matrices.

    Core fields (g, points, S, R1, R2) determine everything; the derived
    matrices are recomputed deterministically on deserialization.
    """

    params: Params
    g: Polynomial
    points: list[tuple[int, ...]]
    S: Matrix
    R1: Matrix
    R2: Matrix
    # derived
    basis_h: list[Polynomial] = field(repr=False, default_factory=list)
    basis: list[Polynomial] = field(repr=False, default_factory=list)
    R: Matrix = field(repr=False, default_factory=list)
    R_inv: Matrix = field(repr=False, default_factory=list)
    S_enc: Matrix = field(repr=False, default_factory=list)
    S_dec: Matrix = field(repr=False, default_factory=list)
    E1_inv: Matrix = field(repr=False, default_factory=list)

    def __post_init__(self):
        if not self.basis:
            self._derive()

    def _derive(self) -> None:
        p = self.params
        q = p.q
        self.basis_h = [
            Polynomial.monomial(p.v, q, m) for m in enumerate_monomials(p.v, p.r_prime)
        ]
        self.basis = [self.g * h for h in self.basis_h]
        n, ell, k = p.n, p.ell, p.ell - p.n
        # R = [[R1, R2^T], [0, I]]  (random block above the diagonal)
        R = zeros(ell, ell)
        for i in range(n):
            for j in range(n):
                R[i][j] = self.R1[i][j] % q
            for j in range(k):
                R[i][n + j] = self.R2[j][i] % q
        for j in range(k):
            R[n + j][n + j] = 1
        self.R = R
        self.R_inv = inverse_mod_q(R, q)
        # S_enc = [I | -S^T]
        S_enc = zeros(n, ell)
        for i in range(n):
            S_enc[i][i] = 1
            for j in range(k):
                S_enc[i][n + j] = -self.S[j][i] % q
        self.S_enc = S_enc
        # S_dec = R^{-1} [S | I]^T
        SI_t = zeros(ell, k)
        for j in range(k):
            for i in range(n):
                SI_t[i][j] = self.S[j][i] % q
            SI_t[n + j][j] = 1
        self.S_dec = mat_mul(self.R_inv, SI_t, q)
        E1 = [[b.eval(z) % q for z in self.points[:n]] for b in self.basis]
        self.E1_inv = inverse_mod_q(E1, q)

    def eval_basis_at(self, z: tuple[int, ...]) -> list[int]:
        return [b.eval(z) % self.params.q for b in self.basis]


def _sample_generator(p: Params, rng: Random) -> Polynomial:
    """Monic degree-r_g polynomial with a nonzero constant term."""
    q = p.q
    monos = enumerate_monomials(p.v, p.r_g)
    terms = {m: rng.randrange(q) for m in monos}
    lead = max((m for m in monos if sum(m) == p.r_g), key=grevlex_key)
    terms[lead] = 1
    const = (0,) * p.v
    if terms.get(const, 0) % q == 0:
        terms[const] = rng.randrange(1, q)
    return Polynomial(p.v, q, terms)


def _sample_point(p: Params, g: Polynomial, rng: Random) -> tuple[int, ...]:
    for _ in range(RETRY_CAP * 100):
        z = tuple(rng.randrange(p.q) for _ in range(p.v))
        if g.eval(z) != 0:
            return z
    raise GenerationFailure("could not find a point where g is nonzero")


def _ideal_basis_2r(p: Params, g: Polynomial) -> list[Polynomial]:
    """Basis g*m of the degree-(<= 2r) slice of <g>; length n1."""
    monos = enumerate_monomials(p.v, 2 * p.r - p.r_g)
    return [g * Polynomial.monomial(p.v, p.q, m) for m in monos]


def keygen(params: Params, rng: Random) -> SecretKey:
    """Generate a secret key by rejection sampling.

    Point batches are redrawn until (1) evaluation at z_1..z_ell spans all
    of Z_q^ell for degree-<= r polynomials, (2) the ideal basis evaluated at
    z_1..z_n is invertible, and (3) the degree-(<= 2r) ideal basis evaluated
    at (z_1..z_n, z_{ell+1}..z_t) is invertible.  Each full redraw counts
    against a retry cap of RETRY_CAP.
    """
    p = params
    q = p.q
    all_monos = enumerate_monomials(p.v, p.r)
    for _ in range(RETRY_CAP):
        g = _sample_generator(p, rng)
        basis = [g * Polynomial.monomial(p.v, q, m)
                 for m in enumerate_monomials(p.v, p.r_prime)]
        pts = [_sample_point(p, g, rng) for _ in range(p.ell)]
        # condition 1: evaluations of degree-<= r polynomials fill Z_q^ell
        V = [[Polynomial.monomial(p.v, q, m).eval(z) % q for z in pts]
             for m in all_monos]
        if rank_mod_q(V, q) != p.ell:
            continue
        # condition 2: ideal evaluations at the first n points are a basis
        E = [[b.eval(z) % q for z in pts] for b in basis]
        E1 = [row[: p.n] for row in E]
        if rank_mod_q(E1, q) != p.n:
            continue
        # condition 3: extension points keep the 2r-slice evaluations full rank
        basis2 = _ideal_basis_2r(p, g)
        extras = None
        for _ in range(RETRY_CAP):
            cand = [_sample_point(p, g, rng) for _ in range(p.t - p.ell)]
            sub = pts[: p.n] + cand
            F1p = [[b.eval(z) % q for z in sub] for b in basis2]
            if rank_mod_q(F1p, q) == p.n1:
                extras = cand
                break
        if extras is None:
            continue
        pts = pts + extras
        # S annihilates ideal evaluations: row j-n solves E1 * s = -E[:, j]
        E1_inv = inverse_mod_q(E1, q)
        S = []
        for j in range(p.n, p.ell):
            col = [[-E[i][j] % q] for i in range(p.n)]
            S.append([row[0] for row in mat_mul(E1_inv, col, q)])
        R1 = None
        for _ in range(RETRY_CAP):
            cand_r1 = [[rng.randrange(q) for _ in range(p.n)] for _ in range(p.n)]
            if rank_mod_q(cand_r1, q) == p.n:
                R1 = cand_r1
                break
        if R1 is None:
            continue
        R2 = [[rng.randrange(q) for _ in range(p.n)] for _ in range(p.ell - p.n)]
        return SecretKey(params=p, g=g, points=pts, S=S, R1=R1, R2=R2)
    raise GenerationFailure(
        f"key generation failed after {RETRY_CAP} attempts; parameters degenerate?"
    )


# ---------------------------------------------------------------------------
# gadget decomposition
# ---------------------------------------------------------------------------

def _gadget_width(q: int, u: int) -> int:
    return u + q.bit_length()


def bitdecomp(vec: Sequence, q: int, u: int) -> list[int]:
    """Bit-decompose a vector of dyadic rationals (denominators | 2^u).

    Each entry x is mapped to the nonnegative representative of x·2^u
    modulo q·2^u and split into u + ceil(log2 q) bits.  The output is
    position-major: entry i's bit at position s lands at index s·len(vec)+i,
    matching the layout of powersoftwo so that the inner-product identity

        <v, w> = <bitdecomp(v), powersoftwo(w)>  (mod q)

    holds exactly.
    """
    width = _gadget_width(q, u)
    modulus = q << u
    scaled = []
    for x in vec:
        y = x * (1 << u)
        num = int(y)
        if num != y:
            raise ParameterError(f"entry {x} does not have {u} fractional bits")
        scaled.append(num % modulus)
    out = []
    for s in range(width):
        for num in scaled:
            out.append((num >> s) & 1)
    return out


def _powersoftwo_numerators(vec: Sequence[int], q: int, u: int) -> list[int]:
    """powersoftwo numerators at implied denominator 2^u (hot-path form)."""
    width = _gadget_width(q, u)
    modulus = q << u
    half = modulus // 2
    out = []
    for s in range(width):
        for w in vec:
            r = (w << s) % modulus
            out.append(r - modulus if r > half else r)
    return out


def powersoftwo(vec: Sequence[int], q: int, u: int) -> list[Fraction]:
    """Balanced multiples w·2^(s−u) reduced mod q, position-major.

    Entries are exact rationals with denominator 2^u and magnitude <= q/2.
    """
    return [Fraction(n, 1 << u) for n in _powersoftwo_numerators(vec, q, u)]


# ---------------------------------------------------------------------------
# multiplication-key construction
# ---------------------------------------------------------------------------

def build_G(sk: SecretKey) -> list[Polynomial]:
    """Reduction set: g·m for every monomial m of exact degree r_prime + 1.

    Ordered with the grevlex-largest leading monomial first, so top-reduction
    always finds its divisor at the earliest position.  g is monic, hence so
    is every element.
    """
    p = sk.params
    monos = [m for m in enumerate_monomials(p.v, p.r_prime + 1)
             if sum(m) == p.r_prime + 1]
    monos.sort(key=grevlex_key, reverse=True)
    out = []
    for m in monos:
        gi = sk.g * Polynomial.monomial(p.v, p.q, m)
        lead_mono, lead_coeff = gi.leading_term()
        if lead_coeff != 1:  # g is monic by construction; normalize defensively
            gi = gi.scale(pow(lead_coeff, -1, p.q))
        out.append(gi)
    return out


def _sample_masking_block(p: Params, rng: Random) -> Matrix:
    """Dyadic masking block (n x (ell−n)), entries k/2^u scaled to ints k.

    Entries are uniform dyadics with |k| <= kmax chosen so each column's
    one-norm stays strictly below B/q.  When the parameters leave no room
    (kmax = 0, as at the toy scale) the block is zero.
    """
    bound = Fraction((1 << p.u) * p.B, p.q * p.n)  # |k| must stay below this
    kmax = math.ceil(bound) - 1
    if kmax <= 0:
        return zeros(p.n, p.ell - p.n)
    return [[rng.randint(-kmax, kmax) for _ in range(p.ell - p.n)]
            for _ in range(p.n)]


def _build_D_scaled(sk: SecretKey, eps: Matrix) -> Matrix:
    """Unmasking matrix D = R^{-1}·[[I, S^T],[0, I]] + masking, times 2^u.

    Returned as the exact integer matrix D·2^u (entries of D are balanced
    integers plus dyadic masking with u fractional bits).
    """
    p = sk.params
    q = p.q
    n, ell = p.n, p.ell
    IS = identity(ell)
    for i in range(n):
        for j in range(ell - n):
            IS[i][n + j] = sk.S[j][i] % q
    D = balanced_matrix(mat_mul(sk.R_inv, IS, q), q)
    scaled = [[x << p.u for x in row] for row in D]
    for i in range(n):
        for j in range(ell - n):
            scaled[i][n + j] += eps[i][j]
    return scaled


def _build_A(sk: SecretKey) -> Matrix:
    """Point-extension matrix A (ell x t): [I | coefficient columns].

    Column k >= ell expresses evaluation at the extra point z_k as a linear
    combination of evaluations at z_1..z_n, valid on ideal elements of
    degree <= r.
    """
    p = sk.params
    q = p.q
    A = zeros(p.ell, p.t)
    for i in range(p.ell):
        A[i][i] = 1
    for k in range(p.ell, p.t):
        col = [[v] for v in sk.eval_basis_at(sk.points[k])]
        alpha = mat_mul(sk.E1_inv, col, q)
        for i in range(p.n):
            A[i][k] = alpha[i][0]
    return A


def _build_B(sk: SecretKey, F1: Matrix, F1p_inv: Matrix) -> Matrix:
    """Re-expression matrix B (t x t).

    Identity except in columns n..ell−1: column j additionally carries the
    coefficients writing evaluation-at-z_j of any degree-(<= 2r) ideal
    element as a combination of its evaluations at z_1..z_n and the extra
    points.
    """
    p = sk.params
    q = p.q
    B = identity(p.t)
    for j in range(p.n, p.ell):
        rhs = [[F1[r][j]] for r in range(p.n1)]
        beta = mat_mul(F1p_inv, rhs, q)
        for i in range(p.n):
            B[i][j] = beta[i][0]
        for i in range(p.n1 - p.n):
            B[p.ell + i][j] = beta[p.n + i][0]
    return B


def _build_Q(sk: SecretKey, F1: Matrix, F2: Matrix, F1p_inv: Matrix) -> Matrix:
    """Reduction matrix Q (t x ell) with F1·Q = F2 (mod q).

    Rows n..ell−1 are pinned to [0 | I]; the remaining rows are solved for.
    The pinning matters beyond uniqueness: those rows multiply the only
    coordinates whose entries are non-integers during multiplication, and
    0/1 coefficients let the fractional parts pass straight into the tail
    of the output where the final floor can absorb them.
    """
    p = sk.params
    q = p.q
    rhs = [[(F2[r][j] - (F1[r][j] if p.n <= j < p.ell else 0)) % q
            for j in range(p.ell)] for r in range(p.n1)]
    X = mat_mul(F1p_inv, rhs, q)
    Q = zeros(p.t, p.ell)
    for i in range(p.n):
        Q[i] = X[i][:]
    for j in range(p.ell - p.n):
        Q[p.n + j][p.n + j] = 1
    for i in range(p.n1 - p.n):
        Q[p.ell + i] = X[p.n + i][:]
    return Q


@dataclass
class EvalKey:
    """Public multiplication key in factored form.

    ``P1``/``P2`` hold D_i~·A — in gadget form the bit-decomposed D columns
    times A (plain integers), in the plain variant D·A scaled by 2^u.  ``W``
    is the balanced combined third factor B·Q·R mod q.  ``k_max`` is the
    certified bound on the transient carry coefficients appearing during
    multiplication, which feeds the tracked noise formula.

    The full tensor M (dims ell(u+w)^2 x ell in gadget form, ell^3 plain) is
    available from tensor(); evaluation never needs it.
    """

    params: Params
    gadget_enabled: bool
    u: int
    P1: Matrix
    P2: Matrix
    W: Matrix
    k_max: Fraction

    @property
    def input_dim(self) -> int:
        return len(self.P1)

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.input_dim, self.input_dim, self.params.ell)

    def scale_bits(self) -> int:
        """P entries carry an implied denominator 2^scale_bits."""
        return 0 if self.gadget_enabled else self.u

    def u_coeffs(self) -> list[Fraction]:
        """Diagonal of the rescaling tensor: 2/q on the message band."""
        p = self.params
        return [Fraction(2, p.q) if p.n <= s < p.ell else Fraction(1)
                for s in range(p.t)]

    def tensor(self) -> Tensor3:
        """Materialize M entrywise (test/inspection use; O(dim^2 * ell * t))."""
        p = self.params
        dim = self.input_dim
        shift = 2 * self.scale_bits()
        coeffs = self.u_coeffs()
        T = Tensor3.zeros(dim, dim, p.ell)
        for k in range(p.ell):
            wk = [self.W[s][k] for s in range(p.t)]
            sl = T.slices[k]
            for i in range(dim):
                row1 = self.P1[i]
                out_row = sl[i]
                for j in range(dim):
                    row2 = self.P2[j]
                    acc = Fraction(0)
                    for s in range(p.t):
                        if wk[s] and row1[s] and row2[s]:
                            acc += coeffs[s] * row1[s] * row2[s] * wk[s]
                    out_row[j] = acc / (1 << shift)
        return T


def _max_column_one_norm_scaled(D_scaled: Matrix, u: int) -> Fraction:
    width = len(D_scaled)
    return max(
        Fraction(sum(abs(D_scaled[i][j]) for i in range(width)), 1 << u)
        for j in range(len(D_scaled[0]))
    )


def build_evalkey(sk: SecretKey, params: Params | None = None,
                  rng: Random | None = None, *, zero_eps: bool = False,
                  gadget: bool | None = None) -> EvalKey:
    """Construct the multiplication key from a secret key.

    The five steps: (1) unmasking matrices D_i with fresh dyadic masking
    blocks, (2) point-extension matrix A, (3) rescaling diagonal folded into
    the rank-1 slice structure, (4) re-expression matrix B, (5) reduction
    matrix Q from the division remainders of the degree-(<= 2r) ideal basis.
    The mandatory post-check F1·Q = F2 (mod q) runs on every build.

    ``zero_eps`` forces both masking blocks to zero (exact-arithmetic test
    mode).  ``gadget`` overrides params.gadget_enabled.
    """
    p = params or sk.params
    q = p.q
    if gadget is None:
        gadget = p.gadget_enabled
    rng = rng or Random()

    # step 1: unmasking matrices
    eps1 = zeros(p.n, p.ell - p.n) if zero_eps else _sample_masking_block(p, rng)
    eps2 = zeros(p.n, p.ell - p.n) if zero_eps else _sample_masking_block(p, rng)
    D1s = _build_D_scaled(sk, eps1)
    D2s = _build_D_scaled(sk, eps2)

    # step 2: extension matrix
    A = _build_A(sk)

    # steps 4+5 share the evaluation matrices of the degree-(<= 2r) basis
    basis2 = _ideal_basis_2r(p, sk.g)
    F1 = [[b.eval(z) % q for z in sk.points] for b in basis2]
    sub_idx = list(range(p.n)) + list(range(p.ell, p.t))
    F1p = [[F1[r][c] for c in sub_idx] for r in range(p.n1)]
    try:
        F1p_inv = inverse_mod_q(F1p, q)
    except SingularMatrixError as exc:
        raise ConstructionError(
            "extension-point evaluations lost rank; regenerate the key"
        ) from exc
    B = _build_B(sk, F1, F1p_inv)

    G = build_G(sk)
    F2 = []
    for b in basis2:
        rem = reduce_by_set(b, G, p.r)
        F2.append([rem.eval(z) % q for z in sk.points[: p.ell]])
    Q = _build_Q(sk, F1, F2, F1p_inv)
    if mat_mul(F1, Q, q) != F2:
        raise ConstructionError("post-check failed: F1·Q != F2 (mod q)")

    W = balanced_matrix(mat_mul(mat_mul(B, Q, q), sk.R, q), q)

    if gadget:
        width = _gadget_width(q, p.u)
        P1 = _bitdecomp_matrix_times(D1s, A, p, q)
        P2 = _bitdecomp_matrix_times(D2s, A, p, q)
        k_max = Fraction(p.ell * width, 2) + 1
    else:
        P1 = mat_mul_exact(D1s, A)
        P2 = mat_mul_exact(D2s, A)
        k_max = max(_max_column_one_norm_scaled(D1s, p.u),
                    _max_column_one_norm_scaled(D2s, p.u)) / 2 + 1
    return EvalKey(params=p, gadget_enabled=gadget, u=p.u, P1=P1, P2=P2,
                   W=W, k_max=k_max)


def mat_mul_exact(A: Matrix, B: Matrix) -> Matrix:
    """Integer matrix product without modular reduction."""
    n, k, m = len(A), len(B), len(B[0])
    out = zeros(n, m)
    for i in range(n):
        row_a = A[i]
        row_o = out[i]
        for s in range(k):
            a = row_a[s]
            if a:
                row_b = B[s]
                for j in range(m):
                    row_o[j] += a * row_b[j]
    return out


def _bitdecomp_matrix_times(D_scaled: Matrix, A: Matrix, p: Params, q: int) -> Matrix:
    """Rows of bitdecomp(D columns) times A, i.e. D~·A, position-major."""
    width = _gadget_width(q, p.u)
    ell = p.ell
    modulus = q << p.u
    cols = [[D_scaled[i][j] % modulus for i in range(ell)] for j in range(ell)]
    rows = ell * width
    Dt = zeros(rows, ell)
    for s in range(width):
        for i in range(ell):
            row = Dt[s * ell + i]
            for j in range(ell):
                row[j] = (cols[j][i] >> s) & 1
    return mat_mul_exact(Dt, A)


def mult_intermediates(sk: SecretKey, evk: EvalKey,
                       c1: Sequence[int], c2: Sequence[int]) -> dict:
    """Every intermediate of one homomorphic multiplication (test oracle).

    Recomputes the stage matrices from the secret key (they are
    deterministic given sk) and carries the pipeline through with exact
    rationals: transformed inputs, per-slice products, re-expression,
    reduction, mixing, flooring.  Production evaluation folds these stages
    together; this expansion exists so tests can pin each stage separately.
    """
    p = sk.params
    q = p.q
    basis2 = _ideal_basis_2r(p, sk.g)
    F1 = [[b.eval(z) % q for z in sk.points] for b in basis2]
    sub_idx = list(range(p.n)) + list(range(p.ell, p.t))
    F1p_inv = inverse_mod_q([[F1[r][c] for c in sub_idx] for r in range(p.n1)], q)
    B = _build_B(sk, F1, F1p_inv)
    G = build_G(sk)
    F2 = [[reduce_by_set(b, G, p.r).eval(z) % q for z in sk.points[: p.ell]]
          for b in basis2]
    Q = _build_Q(sk, F1, F2, F1p_inv)

    shift = evk.scale_bits()
    if evk.gadget_enabled:
        t1 = _powersoftwo_numerators(c1, q, evk.u)
        t2 = _powersoftwo_numerators(c2, q, evk.u)
        denom = 1 << evk.u
    else:
        t1, t2 = list(c1), list(c2)
        denom = 1
    x1 = [Fraction(sum(a * evk.P1[i][s] for i, a in enumerate(t1)),
                   denom << shift) for s in range(p.t)]
    x2 = [Fraction(sum(a * evk.P2[i][s] for i, a in enumerate(t2)),
                   denom << shift) for s in range(p.t)]
    coeffs = evk.u_coeffs()
    c_prime = [coeffs[s] * x1[s] * x2[s] for s in range(p.t)]
    c_dprime = [sum(c_prime[s] * B[s][j] for s in range(p.t)) for j in range(p.t)]
    c_tilde = [sum(c_dprime[s] * Q[s][j] for s in range(p.t)) for j in range(p.ell)]
    pre_floor = [sum(c_tilde[i] * sk.R[i][j] for i in range(p.ell))
                 for j in range(p.ell)]
    floored = [balance(math.floor(x), q) for x in pre_floor]
    return {
        "transformed": (x1, x2),
        "sliced": c_prime,
        "reexpressed": c_dprime,
        "reduced": c_tilde,
        "pre_floor": pre_floor,
        "product": floored,
    }
