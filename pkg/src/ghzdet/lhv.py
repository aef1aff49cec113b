"""Joint-distribution (local hidden variable) feasibility for three ±1 variables.

Given the four moments E(A), E(B), E(C), E(ABC), a local hidden variable model
exists iff a probability distribution over the eight atoms abc ... a'b'c'
reproduces them.  Feasibility is decided two independent ways:

* four two-sided linear inequalities, each of the form
  -2 <= ±E(A) ± E(B) ± E(C) ± E(ABC) <= 2 (odd number of minus signs);
* an exact enumeration oracle over the 8-atom simplex that either produces an
  explicit witness distribution or certifies that none exists.

The two routes are required to agree everywhere; the test suite checks this on
grids and random draws.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

SIMPLEX_TOL = 1e-12
WITNESS_TOL = 1e-9

# Atom order: abc, ab'c, abc', ab'c', a'bc, a'b'c, a'bc', a'b'c'
# (prime/bar = value -1).  Column k of ATOM_SIGNS.T is the sign vector of atom k.
ATOM_SIGNS = np.array(
    [
        [+1, +1, +1],
        [+1, -1, +1],
        [+1, +1, -1],
        [+1, -1, -1],
        [-1, +1, +1],
        [-1, -1, +1],
        [-1, +1, -1],
        [-1, -1, -1],
    ],
    dtype=float,
)

ATOM_LABELS = ("abc", "ab'c", "abc'", "ab'c'", "a'bc", "a'b'c", "a'bc'", "a'b'c'")

# Sign patterns of the four inequalities applied to (E_A, E_B, E_C, E_ABC).
INEQUALITY_SIGNS = np.array(
    [
        [+1, +1, +1, -1],
        [-1, +1, +1, +1],
        [+1, -1, +1, +1],
        [+1, +1, -1, +1],
    ],
    dtype=float,
)


@dataclass(frozen=True)
class CorrelationSet:
    """The moment tetrad (E_A, E_B, E_C, E_ABC), each in [-1, 1]."""

    e_a: float
    e_b: float
    e_c: float
    e_abc: float

    def __post_init__(self):
        for name, value in zip(("e_a", "e_b", "e_c", "e_abc"), self.as_tuple()):
            if not -1.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [-1, 1]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.e_a, self.e_b, self.e_c, self.e_abc)


@dataclass(frozen=True)
class JointDistribution8:
    """Probabilities of the eight atoms, in ATOM_LABELS order."""

    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) != 8:
            raise ValueError("expected 8 atom probabilities")
        if any(p < 0.0 for p in self.probs):
            raise ValueError("negative atom probability")
        if abs(sum(self.probs) - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"atom probabilities sum to {sum(self.probs)}, not 1")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)


@dataclass(frozen=True)
class SymmetricParams:
    """Symmetric marginals: p = P(a) = P(b) = P(c), q = P(ABC = 1)."""

    p: float
    q: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p={self.p} outside [0, 1]")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q={self.q} outside [0, 1]")


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    # (lower, upper) slack for each of the four inequalities, flattened:
    # [lo1, up1, lo2, up2, lo3, up3, lo4, up4].  All >= 0 iff feasible.
    slacks: tuple[float, ...]
    f_value: float
    witness: Optional[JointDistribution8] = None


def mermin_f(c: CorrelationSet) -> float:
    """F = E_A + E_B + E_C - E_ABC.  LHV models bound |F| <= 2; GHZ gives 4."""
    return c.e_a + c.e_b + c.e_c - c.e_abc


def check_inequalities(c: CorrelationSet) -> FeasibilityReport:
    """Evaluate the four two-sided inequalities; feasible iff all hold.

    Bounds are inclusive: a tetrad sitting exactly on a bound is feasible.
    """
    e = np.asarray(c.as_tuple())
    values = INEQUALITY_SIGNS @ e
    slacks = []
    for v in values:
        slacks.append(v + 2.0)  # distance above the lower bound
        slacks.append(2.0 - v)  # distance below the upper bound
    feasible = all(s >= 0.0 for s in slacks)
    return FeasibilityReport(feasible=feasible, slacks=tuple(slacks), f_value=mermin_f(c))


# --- exact feasibility oracle ------------------------------------------------
#
# The witness problem is: find p >= 0 on the 8 atoms with M p = b, where M
# stacks normalization and the four expectation rows and b = (1, e_a, e_b,
# e_c, e_abc).  M has rank 5, so if the polytope is nonempty it has a vertex
# supported on the columns of some nonsingular 5x5 basic subsystem.
# Enumerating all C(8,5) = 56 column subsets and solving the square systems
# is therefore a complete decision procedure; no iterative solver is needed.

_CONSTRAINTS = np.vstack(
    [np.ones(8), ATOM_SIGNS.T, np.prod(ATOM_SIGNS, axis=1)]
)  # shape (5, 8)


def _basic_subsystems() -> tuple[np.ndarray, np.ndarray]:
    inverses, columns = [], []
    for cols in combinations(range(8), 5):
        sub = _CONSTRAINTS[:, cols]
        if abs(np.linalg.det(sub)) > 0.5:  # entries are ±1/1; dets are integers
            inverses.append(np.linalg.inv(sub))
            columns.append(cols)
    return np.array(inverses), np.array(columns)


_BASIS_INV, _BASIS_COLS = _basic_subsystems()


def feasible_oracle(c: CorrelationSet) -> Optional[JointDistribution8]:
    """Exact feasibility decision; returns a witness distribution or None.

    Solves every nonsingular basic square subsystem of the equality
    constraints and accepts the first solution that is nonnegative up to
    SIMPLEX_TOL (tiny negatives are clamped to zero).  Absence of a witness
    proves infeasibility.
    """
    b = np.array([1.0, *c.as_tuple()])
    solutions = _BASIS_INV @ b  # shape (n_bases, 5)
    for cols, x in zip(_BASIS_COLS, solutions):
        if np.all(x >= -SIMPLEX_TOL):
            p = np.zeros(8)
            p[cols] = np.clip(x, 0.0, None)
            p /= p.sum()  # absorb the clamped mass (at most a few SIMPLEX_TOL)
            return JointDistribution8(tuple(float(v) for v in p))
    return None


def feasible_mask_oracle(tetrads: np.ndarray) -> np.ndarray:
    """Vectorized oracle decision for an (n, 4) array of tetrads."""
    tetrads = np.asarray(tetrads, dtype=float)
    b = np.hstack([np.ones((len(tetrads), 1)), tetrads])  # (n, 5)
    # (n_bases, 5, 5) x (n, 5) -> (n, n_bases, 5)
    solutions = np.einsum("kij,nj->nki", _BASIS_INV, b)
    return (solutions >= -SIMPLEX_TOL).all(axis=2).any(axis=1)


def feasible_mask_inequalities(tetrads: np.ndarray) -> np.ndarray:
    """Vectorized inequality decision for an (n, 4) array of tetrads."""
    values = np.asarray(tetrads, dtype=float) @ INEQUALITY_SIGNS.T
    return (np.abs(values) <= 2.0).all(axis=1)


def expectations_from_joint(j: JointDistribution8) -> CorrelationSet:
    """Recover (E_A, E_B, E_C, E_ABC) by signed atom sums."""
    p = j.as_array()
    e_a, e_b, e_c = ATOM_SIGNS.T @ p
    e_abc = np.prod(ATOM_SIGNS, axis=1) @ p
    clip = lambda v: float(min(1.0, max(-1.0, v)))
    return CorrelationSet(clip(e_a), clip(e_b), clip(e_c), clip(e_abc))


def construct_symmetric_joint(s: SymmetricParams) -> JointDistribution8:
    """Explicit joint distribution for symmetric marginals with 0 <= 3p-q <= 2.

    Interpolates between the two boundary distributions: on 3p = q the atoms
    take (x, y, z, w) = (0, q/3, 0, 1-q); on 3p = q + 2 they take
    ((1-q)/3, 0, q, 0).  The mixing weight lam = (3p-q)/2 multiplies the
    3p = q + 2 boundary; this is the orientation whose marginals reconstruct
    p and q exactly (the opposite orientation fails off the boundaries, which
    a regression test pins down).  x is shared by the three single-bar atoms,
    y by the three double-bar atoms, z sits on abc and w on a'b'c'.
    """
    t = 3.0 * s.p - s.q
    if t < -SIMPLEX_TOL:
        raise ValueError(f"3p - q = {t} < 0: below the symmetric feasibility band")
    if t > 2.0 + SIMPLEX_TOL:
        raise ValueError(f"3p - q = {t} > 2: above the symmetric feasibility band")
    lam = min(1.0, max(0.0, t / 2.0))
    x = lam * (1.0 - s.q) / 3.0
    y = (1.0 - lam) * s.q / 3.0
    z = lam * s.q
    w = (1.0 - lam) * (1.0 - s.q)
    #        abc  ab'c  abc'  ab'c'  a'bc  a'b'c  a'bc'  a'b'c'
    probs = (z,   x,    x,    y,     x,    y,     y,     w)
    return JointDistribution8(probs)


def epsilon_feasible(epsilon: float) -> bool:
    """LHV-compatibility of the eroded GHZ tetrad (1-eps, 1-eps, 1-eps, -1+eps).

    F = 4 - 4*eps, so a joint distribution exists iff eps >= 1/2.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon={epsilon} outside [0, 1]")
    return epsilon >= 0.5
