"""The Markov generator of the two-component exclusion process.

Exchange rules on a bond (k, k+1):

    A0 -> 0A,  0B -> B0,  AB -> BA   with rate r
    0A -> A0,  B0 -> 0B,  BA -> AB   with rate l

with reflecting boundaries.  The generator is stored as the transition
matrix H with H[target, source] = -rate and the total exit rate on the
diagonal, so that probability vectors evolve as exp(-H t) and the
all-ones row vector annihilates H.

In exact mode the matrix entries are Laurent monomials in q: the time
scale w = sqrt(r*l) is factored out globally (exact H is H/w, with the
rates r -> q and l -> 1/q), which keeps the ring univariate.  Float mode
carries the physical rates r and l.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .lattice import (
    A,
    B,
    VACANT,
    BondOutOfRange,
    Config,
    Sector,
    all_configs,
    bonds,
    enumerate_sector,
)
from .qring import QINV, ZERO, LaurentPoly, Q
from .sparse import Basis, SparseMatrix


class Ring(enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


# pairs (state_k, state_{k+1}) that exchange with the right/left rate
RIGHT_PAIRS = frozenset({(A, VACANT), (VACANT, B), (A, B)})
LEFT_PAIRS = frozenset({(VACANT, A), (B, VACANT), (B, A)})

EXACT_FULL_MAX_L = 3
FLOAT_FULL_MAX_L = 6


@dataclass(frozen=True)
class ModelParams:
    """Hopping rates; q = sqrt(r/l) and w = sqrt(r*l) are derived."""

    L: int
    r: Fraction
    ell: Fraction

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be a positive integer")
        object.__setattr__(self, "r", Fraction(self.r))
        object.__setattr__(self, "ell", Fraction(self.ell))
        if self.r <= 0 or self.ell <= 0:
            raise ValueError("hopping is partially asymmetric: need r, l > 0")

    @classmethod
    def from_qw(cls, L: int, q, w=1) -> "ModelParams":
        q = Fraction(q)
        w = Fraction(w)
        if q <= 0 or w <= 0:
            raise ValueError("need q, w > 0")
        return cls(L, q * w, w / q)

    @property
    def q0(self) -> float:
        return math.sqrt(float(self.r / self.ell))

    @property
    def w0(self) -> float:
        return math.sqrt(float(self.r * self.ell))


def local_rate(p: ModelParams, c: Config, k: int) -> Fraction:
    """Exchange rate of the bond (k, k+1) in configuration c."""
    if not -c.L + 1 <= k <= c.L - 1:
        raise BondOutOfRange(f"bond ({k},{k + 1}) outside lattice")
    pair = (c.state(k), c.state(k + 1))
    if pair in RIGHT_PAIRS:
        return p.r
    if pair in LEFT_PAIRS:
        return p.ell
    return Fraction(0)


def rate_over_w(c: Config, k: int) -> LaurentPoly:
    """Bond rate with the time scale factored out: q, 1/q, or 0."""
    pair = (c.state(k), c.state(k + 1))
    if pair in RIGHT_PAIRS:
        return Q
    if pair in LEFT_PAIRS:
        return QINV
    return ZERO


def _accumulate(H: dict, src: int, tgt: int, rate) -> None:
    H[(tgt, src)] = H.get((tgt, src), rate * 0) - rate
    H[(src, src)] = H.get((src, src), rate * 0) + rate


def build_H(p: ModelParams, ring: Ring = Ring.EXACT) -> SparseMatrix:
    """Generator on the full ternary basis of dimension 3^(2L)."""
    cap = EXACT_FULL_MAX_L if ring is Ring.EXACT else FLOAT_FULL_MAX_L
    if p.L > cap:
        raise ValueError(
            f"full basis capped at L <= {cap} in {ring.value} mode; "
            "use build_H_sector beyond"
        )
    entries: dict = {}
    for c in all_configs(p.L):
        src = c.ternary_index() - 1
        for k in bonds(p.L):
            rate = rate_over_w(c, k) if ring is Ring.EXACT else float(local_rate(p, c, k))
            if not rate:
                continue
            tgt = c.swap(k).ternary_index() - 1
            _accumulate(entries, src, tgt, rate)
    return SparseMatrix(3 ** (2 * p.L), entries, Basis(p.L))


def build_H_sector(p: ModelParams, sector: Sector, ring: Ring = Ring.EXACT) -> SparseMatrix:
    """Generator restricted to a particle-number sector basis."""
    if sector.L != p.L:
        raise ValueError("sector and parameters disagree on L")
    configs = enumerate_sector(sector)
    index = {c: i for i, c in enumerate(configs)}
    entries: dict = {}
    for c in configs:
        src = index[c]
        for k in bonds(p.L):
            rate = rate_over_w(c, k) if ring is Ring.EXACT else float(local_rate(p, c, k))
            if not rate:
                continue
            tgt = index[c.swap(k)]  # exchanges conserve (N, M)
            _accumulate(entries, src, tgt, rate)
    return SparseMatrix(len(configs), entries, Basis(p.L, (sector.N, sector.M)))


def apply_generator(f, c: Config, p: ModelParams, ring: Ring = Ring.FLOAT):
    """Generator applied to an observable: sum of rate * (f(swapped) - f(c)).

    Agrees entrywise with -(H^T f) for the matching matrix; in exact mode
    the rates are the w-scaled symbols q and 1/q.
    """
    total = ZERO if ring is Ring.EXACT else 0.0
    for k in bonds(p.L):
        rate = rate_over_w(c, k) if ring is Ring.EXACT else float(local_rate(p, c, k))
        if not rate:
            continue
        total = total + rate * (f(c.swap(k)) - f(c))
    return total


@lru_cache(maxsize=None)
def h_exact(L: int) -> SparseMatrix:
    """Cached full exact generator (independent of the rates)."""
    return build_H(ModelParams(L, Fraction(2), Fraction(1, 2)), Ring.EXACT)


@lru_cache(maxsize=None)
def h_sector_exact(L: int, N: int, M: int) -> SparseMatrix:
    return build_H_sector(
        ModelParams(L, Fraction(2), Fraction(1, 2)), Sector(L, N, M), Ring.EXACT
    )


def _format_value(v) -> str:
    return str(v) if isinstance(v, LaurentPoly) else repr(float(v))


def dump_matrix(op: SparseMatrix, fh, p: ModelParams) -> None:
    """Write `row col value` lines, column-compressed order, after a header.

    Header: `dim basis L N M r ell` with N M dashed out on the full basis.
    Exact values are serialised Laurent polynomials; float values use
    shortest round-trip decimals.
    """
    basis = op.basis if op.basis is not None else Basis(p.L)
    if basis.sector is None:
        n_tag = m_tag = "-"
    else:
        n_tag, m_tag = basis.sector
    fh.write(f"{op.dim} {basis.kind} {basis.L} {n_tag} {m_tag} {p.r} {p.ell}\n")
    for (r, c), v in op.sorted_items():
        fh.write(f"{r} {c} {_format_value(v)}\n")
