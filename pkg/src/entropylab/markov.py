"""Finite-state stationary Markov sources and exact typical-set computations.

A source is a row-stochastic transition matrix together with its stationary
distribution; the generating partition is the alphabet itself.  Word measures
are plain products pi(w_0) * prod P(w_t, w_{t+1}).  Besides full atom
enumeration there is a measure-bucket dynamic program that aggregates words
sharing the same running product, which is what makes exact band masses cheap
even when the word count is in the millions: band membership only depends on
the measure value, never on the word.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .util import EnumerationBudgetError, make_rng, resolve_budget

ROW_TOL = 1e-12
STATIONARY_TOL = 1e-10


def _is_strongly_connected(adj: np.ndarray) -> bool:
    """Strong connectivity of the digraph with edge set adj[i, j] = True."""
    k = adj.shape[0]

    def reach(mat):
        seen = np.zeros(k, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            i = stack.pop()
            for j in np.nonzero(mat[i])[0]:
                if not seen[j]:
                    seen[j] = True
                    stack.append(int(j))
        return seen

    return bool(reach(adj).all() and reach(adj.T).all())


def stationary_distribution(P, tol: float = 1e-14) -> np.ndarray:
    """Unique stationary distribution of an irreducible row-stochastic matrix.

    Solves the linear system directly for up to 64 states and falls back to
    power iteration (residual below `tol`) for larger chains.  Reducible
    matrices are rejected.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError(f"transition matrix must be square, got shape {P.shape}")
    if (P < 0).any():
        raise ValueError("transition probabilities must be nonnegative")
    rows = P.sum(axis=1)
    if np.abs(rows - 1.0).max() > ROW_TOL:
        raise ValueError(f"rows must sum to 1 within {ROW_TOL}; sums are {rows}")
    if not _is_strongly_connected(P > 0):
        raise ValueError("transition matrix is reducible: "
                         "no unique stationary distribution, chain is not ergodic")
    k = P.shape[0]
    if k <= 64:
        a = np.eye(k) - P.T
        a[-1, :] = 1.0
        b = np.zeros(k)
        b[-1] = 1.0
        pi = np.linalg.solve(a, b)
    else:
        pi = np.full(k, 1.0 / k)
        for _ in range(1_000_000):
            nxt = pi @ P
            if np.abs(nxt - pi).sum() < tol:
                pi = nxt
                break
            pi = nxt
        pi = pi / pi.sum()
    if (pi <= 0).any():
        raise ValueError("stationary distribution has nonpositive entries; "
                         "matrix is numerically degenerate")
    return pi


@dataclass(frozen=True)
class MarkovSource:
    """Stationary finite-state Markov measure with its alphabet partition."""

    P: np.ndarray
    pi: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        pi = np.asarray(self.pi, dtype=float)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "pi", pi)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError(f"transition matrix must be square, got shape {P.shape}")
        if (P < 0).any():
            raise ValueError("transition probabilities must be nonnegative")
        if np.abs(P.sum(axis=1) - 1.0).max() > ROW_TOL:
            raise ValueError(f"rows must sum to 1 within {ROW_TOL}")
        if pi.shape != (P.shape[0],):
            raise ValueError("stationary vector length does not match the matrix")
        if np.abs(pi @ P - pi).max() > STATIONARY_TOL:
            raise ValueError(f"pi is not stationary within {STATIONARY_TOL}")
        if abs(pi.sum() - 1.0) > 1e-10:
            raise ValueError("pi must sum to 1")
        if not _is_strongly_connected(P > 0):
            raise ValueError("transition matrix is reducible; the source is not ergodic")
        if self.labels is not None and len(self.labels) != P.shape[0]:
            raise ValueError("label count does not match the alphabet size")

    @property
    def k(self) -> int:
        return self.P.shape[0]

    @classmethod
    def from_matrix(cls, P, labels=None) -> "MarkovSource":
        P = np.asarray(P, dtype=float)
        return cls(P=P, pi=stationary_distribution(P),
                   labels=tuple(labels) if labels is not None else None)

    @classmethod
    def bernoulli(cls, probs) -> "MarkovSource":
        """I.i.d. source: every row equals the symbol law, pi is the law itself."""
        p = np.asarray(probs, dtype=float)
        if p.ndim == 0:
            p = np.array([float(probs), 1.0 - float(probs)])
        return cls(P=np.tile(p, (len(p), 1)), pi=p.copy())

    @classmethod
    def from_json_dict(cls, data: dict) -> "MarkovSource":
        return cls.from_matrix(data["P"], labels=data.get("labels"))

    def to_json_dict(self) -> dict:
        out = {"P": self.P.tolist()}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out


def entropy_rate(src: MarkovSource) -> float:
    """Entropy rate -sum_i pi_i sum_j P_ij log P_ij in nats."""
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(src.P > 0, src.P * np.log(src.P), 0.0)
    return float(-(src.pi @ plogp.sum(axis=1)))


@dataclass(frozen=True)
class PartitionAtoms:
    """Exact measures of all positive-measure length-n words."""

    n: int
    measures: dict[tuple[int, ...], float]

    def __post_init__(self):
        total = math.fsum(self.measures.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"atom measures sum to {total!r}, expected 1 within 1e-9")
        if any(mu <= 0 for mu in self.measures.values()):
            raise ValueError("zero-measure words must be omitted")


def atom_measures(src: MarkovSource, n: int, budget: int | None = None) -> PartitionAtoms:
    """Enumerate every positive-measure word of length n with its exact measure.

    Refuses (EnumerationBudgetError) when k^n exceeds the budget; use
    typical_mass_mc for band masses at larger n.
    """
    if n < 1:
        raise ValueError(f"word length must be positive, got {n}")
    limit = resolve_budget(budget)
    if src.k**n > limit:
        raise EnumerationBudgetError(
            f"{src.k}^{n} words exceed the enumeration budget {limit}; "
            "use typical_mass_mc for this n"
        )
    P = src.P
    measures: dict[tuple[int, ...], float] = {}
    # iterative DFS over positive transitions only
    stack = [((s,), float(src.pi[s])) for s in range(src.k - 1, -1, -1) if src.pi[s] > 0]
    while stack:
        word, mu = stack.pop()
        if len(word) == n:
            measures[word] = mu
            continue
        i = word[-1]
        for j in range(src.k - 1, -1, -1):
            if P[i, j] > 0:
                stack.append((word + (j,), mu * float(P[i, j])))
    return PartitionAtoms(n=n, measures=measures)


def measure_buckets(src: MarkovSource, n: int, budget: int | None = None
                    ) -> dict[tuple[int, float], int]:
    """Group length-n words by (last symbol, running measure product).

    The running product is accumulated left to right exactly as atom_measures
    does per word, so a bucket's measure is bit-identical to each member's.
    Returns {(last_symbol, measure): word_count}.
    """
    if n < 1:
        raise ValueError(f"word length must be positive, got {n}")
    limit = resolve_budget(budget)
    P = src.P
    cur: dict[tuple[int, float], int] = {}
    for s in range(src.k):
        if src.pi[s] > 0:
            cur[(s, float(src.pi[s]))] = 1
    for _ in range(n - 1):
        nxt: dict[tuple[int, float], int] = {}
        for (i, mu), cnt in cur.items():
            for j in range(src.k):
                pij = P[i, j]
                if pij > 0:
                    key = (j, mu * float(pij))
                    nxt[key] = nxt.get(key, 0) + cnt
        if len(nxt) > limit:
            raise EnumerationBudgetError(
                f"measure buckets exceed the enumeration budget {limit} at length {n}"
            )
        cur = nxt
    return cur


def typical_mass_exact(src: MarkovSource, n: int, h: float, eps: float,
                       budget: int | None = None) -> float:
    """Exact total measure of words with measure inside the open (h, eps) band.

    The band is (e^{-n(h+eps)}, e^{-n(h-eps)}), endpoints excluded.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    limit = resolve_budget(budget)
    if src.k**n > limit:
        raise EnumerationBudgetError(
            f"{src.k}^{n} words exceed the enumeration budget {limit}; "
            "use typical_mass_mc for this n"
        )
    lower = math.exp(-n * (h + eps))
    upper = math.exp(-n * (h - eps))
    buckets = measure_buckets(src, n, budget=limit)
    return math.fsum(mu * cnt for (_, mu), cnt in buckets.items() if lower < mu < upper)


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    ci_halfwidth: float


_Z99 = 2.5758293035489004  # two-sided 99% normal quantile


def typical_mass_mc(src: MarkovSource, n: int, h: float, eps: float,
                    samples: int, seed: int) -> McEstimate:
    """Monte-Carlo estimate of the (h, eps) band mass at word length n.

    Samples stationary trajectories with a Philox stream derived from `seed`,
    counts those whose empirical rate -(1/n) log mu lies in (h-eps, h+eps),
    and attaches a 99% normal-approximation half-width.  Deterministic in
    (seed, samples).
    """
    if samples < 1:
        raise ValueError(f"sample count must be positive, got {samples}")
    if n < 1:
        raise ValueError(f"word length must be positive, got {n}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    rng = make_rng(seed)
    cum_pi = np.cumsum(src.pi)
    cum_rows = np.cumsum(src.P, axis=1)
    with np.errstate(divide="ignore"):
        log_pi = np.log(src.pi)
        log_P = np.where(src.P > 0, np.log(np.where(src.P > 0, src.P, 1.0)), -np.inf)
    state = np.searchsorted(cum_pi, rng.random(samples), side="right")
    state = np.minimum(state, src.k - 1)
    log_mu = log_pi[state].copy()
    for _ in range(n - 1):
        u = rng.random(samples)
        nxt = (u[:, None] >= cum_rows[state]).sum(axis=1)
        nxt = np.minimum(nxt, src.k - 1)
        log_mu += log_P[state, nxt]
        state = nxt
    rate = -log_mu / n
    hits = (rate > h - eps) & (rate < h + eps)
    p_hat = float(hits.mean())
    ci = _Z99 * math.sqrt(p_hat * (1.0 - p_hat) / samples)
    return McEstimate(estimate=p_hat, ci_halfwidth=ci)


def _row_entropy(row: np.ndarray) -> float:
    return -math.fsum(float(v) * math.log(float(v)) for v in row if v > 0)


def static_block_entropy(src: MarkovSource, length: int) -> float:
    """Entropy of the length-`length` word partition, H(pi) + (length-1) h."""
    if length < 1:
        raise ValueError(f"block length must be positive, got {length}")
    return _row_entropy(src.pi) + (length - 1) * entropy_rate(src)


@dataclass(frozen=True)
class BlockEntropy:
    value: float
    normalized: float


def block_entropy(src: MarkovSource, n: int, p: int) -> BlockEntropy:
    """Entropy rate of the sampled block process: length n-p windows under T^n.

    Consecutive windows are separated by a gap of p symbols, so for a Markov
    source the conditional entropy of one window given the previous one is
    exact: sum_s pi(s) H(P^{p+1}(s,.)) + (n-p-1) h.  `normalized` divides by n
    and converges to the entropy rate.
    """
    if p < 1:
        raise ValueError(f"gap must be at least 1, got {p}")
    if n <= p:
        raise ValueError(f"block period must exceed the gap, got n={n}, p={p}")
    Q = np.linalg.matrix_power(src.P, p + 1)
    h = entropy_rate(src)
    value = math.fsum(
        float(src.pi[s]) * _row_entropy(Q[s]) for s in range(src.k)
    ) + (n - p - 1) * h
    return BlockEntropy(value=value, normalized=value / n)


def block_entropy_brute(src: MarkovSource, n: int, p: int,
                        budget: int | None = None, chunk: int = 256) -> float:
    """Brute-force H(B1 | B0) over all consecutive block pairs.

    Enumerates every positive-measure pair of length n-p windows separated by
    a gap of p symbols and evaluates -sum mu log mu verbatim; kept independent
    of block_entropy so the two can check each other.
    """
    if p < 1:
        raise ValueError(f"gap must be at least 1, got {p}")
    if n <= p:
        raise ValueError(f"block period must exceed the gap, got n={n}, p={p}")
    limit = resolve_budget(budget)
    if src.k ** (2 * (n - p)) > limit:
        raise EnumerationBudgetError(
            f"{src.k}^{2 * (n - p)} block pairs exceed the enumeration budget {limit}"
        )
    atoms = atom_measures(src, n - p, budget=budget)
    words = list(atoms.measures)
    mu = np.array([atoms.measures[w] for w in words])
    first = np.array([w[0] for w in words])
    last = np.array([w[-1] for w in words])
    Q = np.linalg.matrix_power(src.P, p + 1)
    # conditional continuation measure of w' given its first symbol
    cont = mu / src.pi[first]
    h_b0 = -math.fsum(float(v) * math.log(float(v)) for v in mu)
    chunk_sums = []
    for start in range(0, len(words), chunk):
        sl = slice(start, start + chunk)
        joint = mu[sl, None] * Q[last[sl]][:, first] * cont[None, :]
        mask = joint > 0
        vals = joint[mask]
        chunk_sums.append(float(np.sum(vals * np.log(vals))))
    h_pair = -math.fsum(chunk_sums)
    return h_pair - h_b0
