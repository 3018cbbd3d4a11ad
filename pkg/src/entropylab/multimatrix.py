"""Calculus of finite-dimensional algebras carrying a tracial state.

A multi-matrix algebra is a finite direct sum of full matrix factors.  With a
fixed tracial state it is determined, up to isomorphism, by one pair per
central summand: the factor rank m and the trace t of a minimal projection in
that summand.  Everything here (entropy, rank, trace-band excision, tensor
joins, the commuting-pair defect identity) is computed from those pairs.

Summand families that repeat are stored with an integer multiplicity instead
of being expanded, so algebras with astronomically many identical summands
(e.g. large abelian parts) remain exactly representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .util import make_rng

TRACE_TOL = 1e-9


@dataclass(frozen=True)
class Summand:
    """A family of `count` identical central summands of rank `m`, atom trace `t`."""

    m: int
    t: float
    count: int = 1

    def __post_init__(self):
        if self.m < 1 or self.m != int(self.m):
            raise ValueError(f"factor rank must be a positive integer, got {self.m}")
        if not self.t > 0.0:
            raise ValueError(f"minimal-projection trace must be positive, got {self.t}")
        if self.count < 1:
            raise ValueError(f"summand multiplicity must be positive, got {self.count}")

    @property
    def mass(self) -> float:
        """Trace of this family's central support, count * m * t."""
        return self.count * self.m * self.t


@dataclass(frozen=True)
class MultiMatrix:
    """Finite-dimensional algebra with tracial state, as central summand families."""

    summands: tuple[Summand, ...]

    def __post_init__(self):
        if not self.summands:
            raise ValueError("algebra needs at least one summand")
        total = math.fsum(s.mass for s in self.summands)
        if abs(total - 1.0) > TRACE_TOL:
            raise ValueError(
                f"trace is not a state: sum of m*t over summands is {total!r}, "
                f"expected 1 within {TRACE_TOL}"
            )

    @classmethod
    def from_pairs(cls, pairs) -> "MultiMatrix":
        """Build from (m, t) pairs, each a single summand."""
        return cls(tuple(Summand(int(m), float(t)) for m, t in pairs))

    def to_json_dict(self) -> dict:
        out = []
        for s in self.summands:
            d = {"m": s.m, "t": s.t}
            if s.count != 1:
                d["count"] = s.count
            out.append(d)
        return {"summands": out}

    @classmethod
    def from_json_dict(cls, data: dict) -> "MultiMatrix":
        return cls(
            tuple(
                Summand(int(d["m"]), float(d["t"]), int(d.get("count", 1)))
                for d in data["summands"]
            )
        )

    @property
    def n_summands(self) -> int:
        return sum(s.count for s in self.summands)


def entropy(algebra: MultiMatrix) -> float:
    """Von Neumann entropy of the tracial state, -sum m_i t_i log t_i (nats)."""
    return -math.fsum(s.mass * math.log(s.t) for s in algebra.summands)


def rank_total(algebra: MultiMatrix) -> int:
    """Total rank sum m_i, the number of atoms in any masa."""
    return sum(s.count * s.m for s in algebra.summands)


def join_independent(a: MultiMatrix, b: MultiMatrix) -> MultiMatrix:
    """Tensor product with the product trace; entropy is additive."""
    return MultiMatrix(
        tuple(
            Summand(sa.m * sb.m, sa.t * sb.t, sa.count * sb.count)
            for sa in a.summands
            for sb in b.summands
        )
    )


@dataclass(frozen=True)
class BandReport:
    """Result of excising summands whose atom trace leaves the (h, eps) band.

    The band is the open interval (e^{-n(h+eps)}, e^{-n(h-eps)}); an atom trace
    exactly on an endpoint counts as out of band.  `z_mass` is the trace of the
    central projection onto the out-of-band summands.
    """

    n: int
    h: float
    eps: float
    z_mass: float
    in_band_mass: float
    out_summands: tuple[int, ...]

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "h": self.h,
            "eps": self.eps,
            "z_mass": self.z_mass,
            "in_band_mass": self.in_band_mass,
            "out_summands": list(self.out_summands),
        }


def mcmillan_band_report(algebra: MultiMatrix, n: int, h: float, eps: float) -> BandReport:
    """Check which central summands have atom trace inside the (h, eps) band."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if h < 0:
        raise ValueError(f"h must be nonnegative, got {h}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    lower = math.exp(-n * (h + eps))
    upper = math.exp(-n * (h - eps))
    out = [i for i, s in enumerate(algebra.summands) if not lower < s.t < upper]
    z_mass = math.fsum(algebra.summands[i].mass for i in out)
    return BandReport(
        n=n,
        h=h,
        eps=eps,
        z_mass=z_mass,
        in_band_mass=1.0 - z_mass,
        out_summands=tuple(out),
    )


@dataclass(frozen=True)
class CommutingPairModel:
    """Two commuting algebras seen through masa atoms e_i, f_j.

    `left_ranks[i]` is the rank of the corner over e_i (a full factor),
    `right_ranks[j]` likewise for f_j, and `joint[i][j]` is the trace of the
    product projection e_i f_j.  The joint table is a probability matrix.
    """

    left_ranks: tuple[int, ...]
    right_ranks: tuple[int, ...]
    joint: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if not self.left_ranks or not self.right_ranks:
            raise ValueError("need at least one atom on each side")
        if any(m < 1 for m in self.left_ranks) or any(m < 1 for m in self.right_ranks):
            raise ValueError("corner ranks must be positive integers")
        if len(self.joint) != len(self.left_ranks) or any(
            len(row) != len(self.right_ranks) for row in self.joint
        ):
            raise ValueError("joint table shape does not match the atom lists")
        flat = [p for row in self.joint for p in row]
        if any(p < 0 for p in flat):
            raise ValueError("joint traces must be nonnegative")
        total = math.fsum(flat)
        if abs(total - 1.0) > TRACE_TOL:
            raise ValueError(f"joint traces sum to {total!r}, expected 1 within {TRACE_TOL}")


@dataclass(frozen=True)
class PairEntropies:
    h_join_full: float
    h_join_abelian: float
    defect_left: float
    defect_right: float


def pair_entropies(model: CommutingPairModel) -> PairEntropies:
    """Joint entropies and rank defects of a commuting pair.

    h_join_full is the entropy of the join of the two full algebras,
    h_join_abelian that of the join of their masa atoms; the difference always
    equals defect_left + defect_right (each side's average log corner rank).
    Terms with zero joint trace contribute nothing.
    """
    full_terms = []
    abelian_terms = []
    for i, m in enumerate(model.left_ranks):
        for j, nrank in enumerate(model.right_ranks):
            p = model.joint[i][j]
            if p > 0.0:
                full_terms.append(p * math.log(p / (m * nrank)))
                abelian_terms.append(p * math.log(p))
    row_sums = [math.fsum(row) for row in model.joint]
    col_sums = [
        math.fsum(model.joint[i][j] for i in range(len(model.left_ranks)))
        for j in range(len(model.right_ranks))
    ]
    return PairEntropies(
        h_join_full=-math.fsum(full_terms),
        h_join_abelian=-math.fsum(abelian_terms),
        defect_left=math.fsum(
            w * math.log(m) for w, m in zip(row_sums, model.left_ranks) if w > 0.0
        ),
        defect_right=math.fsum(
            w * math.log(nrank) for w, nrank in zip(col_sums, model.right_ranks) if w > 0.0
        ),
    )


def random_pair_model(seed_or_rng, sparsity: float = 0.0) -> CommutingPairModel:
    """Seeded random CommutingPairModel.

    Atom counts and corner ranks are uniform on {1..4}; the joint table is
    drawn from a flat Dirichlet.  With `sparsity` > 0 entries are zeroed at
    that rate and any resulting all-zero rows/columns are dropped before
    renormalizing, so the model keeps only genuine atoms.
    """
    rng = seed_or_rng if hasattr(seed_or_rng, "dirichlet") else make_rng(seed_or_rng)
    while True:
        nl = int(rng.integers(1, 5))
        nr = int(rng.integers(1, 5))
        left = [int(v) for v in rng.integers(1, 5, size=nl)]
        right = [int(v) for v in rng.integers(1, 5, size=nr)]
        p = rng.dirichlet([1.0] * (nl * nr)).reshape(nl, nr)
        if sparsity > 0.0:
            p = p * (rng.random(size=(nl, nr)) >= sparsity)
        keep_rows = [i for i in range(nl) if p[i].sum() > 0.0]
        keep_cols = [j for j in range(nr) if p[:, j].sum() > 0.0]
        if not keep_rows or not keep_cols:
            continue
        p = p[keep_rows][:, keep_cols]
        p = p / p.sum()
        return CommutingPairModel(
            left_ranks=tuple(left[i] for i in keep_rows),
            right_ranks=tuple(right[j] for j in keep_cols),
            joint=tuple(tuple(float(v) for v in row) for row in p),
        )
