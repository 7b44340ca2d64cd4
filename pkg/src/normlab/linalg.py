"""Randomized linear-algebra substrate: seeded streams, Haar projections, nets.

Everything downstream (norm construction, subspace probes, Monte Carlo
verifiers) draws its randomness through :class:`Seed` so that every run is
reproducible bit for bit.  The geometric primitives kept here are the ones
with clean, independently checkable contracts: orthogonal projections sampled
from the rotation-invariant ensemble, distances to subspaces, greedy covering
nets with an explicit covering certificate, and the exact distribution of the
distance from a random unit vector to a fixed subspace.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc

# Tolerances used by constructor validation.  These mirror the contracts the
# test suite enforces; they are deliberately loose multiples of float epsilon.
IDEMPOTENCY_TOL = 1e-10   # scaled by n for ||P @ P - P||_F
TRACE_TOL = 1e-8
ORTHONORMALITY_TOL = 1e-10
UNIT_TOL = 1e-12

_MASK64 = (1 << 64) - 1


class NetBudgetError(RuntimeError):
    """Greedy net construction exceeded its cardinality budget."""

    def __init__(self, m: int, gamma: float, budget: int, size: int):
        super().__init__(
            f"net on a {m}-dimensional sphere at resolution {gamma} grew to "
            f"{size} points, past the budget of {budget}; refusing to truncate"
        )
        self.budget = budget
        self.size = size


@dataclass(frozen=True)
class Seed:
    """Master entropy plus a derived stream index.

    Independent consumers (one per section of a run, one per trial) derive
    their own stream with :meth:`derive`, which hashes the tags into a fresh
    64-bit stream id.  Identical (master, stream) pairs always produce
    identical generators.
    """

    master: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.master <= _MASK64:
            raise ValueError("master seed must fit in 64 bits")
        if not 0 <= self.stream <= _MASK64:
            raise ValueError("stream id must fit in 64 bits")

    def derive(self, *tags: object) -> "Seed":
        """Child seed whose stream hashes (master, stream, *tags)."""
        h = hashlib.sha256()
        h.update(repr((self.master, self.stream) + tags).encode())
        return Seed(self.master, int.from_bytes(h.digest()[:8], "big"))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(entropy=self.master, spawn_key=(self.stream,))
        )


@dataclass(frozen=True)
class Frame:
    """Orthonormal columns spanning a subspace of R^n."""

    columns: np.ndarray  # shape (n, k)

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=float)
        if cols.ndim != 2:
            raise ValueError("frame needs a 2-d array of columns")
        if cols.shape[1]:  # zero columns = the zero subspace, trivially fine
            gram = cols.T @ cols
            if np.max(np.abs(gram - np.eye(cols.shape[1]))) > ORTHONORMALITY_TOL:
                raise ValueError("columns are not orthonormal to working precision")
        object.__setattr__(self, "columns", cols)

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def dim(self) -> int:
        return self.columns.shape[1]


@dataclass(frozen=True)
class ProjectionPair:
    """Complementary orthogonal projections P and Q = I - P.

    ``basis`` holds an orthonormal basis of range(P); it is what the sampler
    actually draws, with P assembled from it.  Q is stored as the exact
    floating-point difference I - P, so P + Q == I holds bit for bit.
    """

    P: np.ndarray
    Q: np.ndarray
    rank: int
    basis: Frame

    def __post_init__(self):
        n = self.P.shape[0]
        if self.P.shape != (n, n) or self.Q.shape != (n, n):
            raise ValueError("projection matrices must be square and same shape")
        if not np.array_equal(self.P + self.Q, np.eye(n)):
            raise ValueError("Q must be stored as the exact complement I - P")
        resid = np.linalg.norm(self.P @ self.P - self.P)
        if resid > IDEMPOTENCY_TOL * n:
            raise ValueError(f"P fails idempotency: residual {resid:.3e}")
        if abs(np.trace(self.P) - self.rank) > TRACE_TOL:
            raise ValueError("trace of P does not match the declared rank")

    @property
    def n(self) -> int:
        return self.P.shape[0]


def _haar_frame(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal n x k frame from the rotation-invariant ensemble.

    QR of a Gaussian matrix, with the sign convention that makes the R factor
    have a positive diagonal; that convention is what makes the distribution
    exactly invariant rather than merely invariant up to column signs.
    """
    g = rng.standard_normal((n, k))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def sample_projection(n: int, rank: int, seed: Seed) -> ProjectionPair:
    """Draw a rank-``rank`` orthogonal projection on R^n, rotation invariant."""
    if not 1 <= rank <= n:
        raise ValueError("rank must satisfy 1 <= rank <= n")
    if rank == n:
        eye = np.eye(n)
        return ProjectionPair(P=eye, Q=np.zeros((n, n)), rank=n, basis=Frame(eye))
    u = _haar_frame(n, rank, seed.generator())
    p = u @ u.T
    p = (p + p.T) / 2.0  # enforce exact symmetry
    q = np.eye(n) - p
    return ProjectionPair(P=p, Q=q, rank=rank, basis=Frame(u))


def sample_frame(n: int, k: int, seed: Seed) -> Frame:
    """Rotation-invariant random k-dimensional frame in R^n."""
    if not 0 < k <= n:
        raise ValueError("need 0 < k <= n")
    return Frame(_haar_frame(n, k, seed.generator()))


def sample_unit_sphere(n: int, seed: Seed, size: int | None = None) -> np.ndarray:
    """Uniform point(s) on the Euclidean unit sphere of R^n.

    Returns shape (n,) when ``size`` is None, else (size, n).  Norm of each
    row is 1 to within UNIT_TOL.
    """
    rng = seed.generator()
    if size is None:
        x = rng.standard_normal(n)
        return x / np.linalg.norm(x)
    x = rng.standard_normal((size, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def distance_to_subspace(x: np.ndarray, frame: Frame | None) -> float:
    """Euclidean distance from x to the span of the frame's columns.

    A ``None`` or zero-column frame denotes the zero subspace, so the
    distance is just ``|x|``.
    """
    x = np.asarray(x, dtype=float)
    if frame is None or frame.dim == 0:
        return float(np.linalg.norm(x))
    cols = frame.columns
    return float(np.linalg.norm(x - cols @ (cols.T @ x)))


@dataclass(frozen=True)
class GammaNet:
    """Covering net of a unit sphere inside a subspace, with certificate.

    ``points`` are unit vectors of R^n lying in the subspace.  The covering
    certificate records how many random unit points of the subspace were
    tested and the largest distance any of them had to the net; the net only
    counts as covering when that distance is at most gamma.
    """

    points: np.ndarray        # (N, n), rows unit
    gamma: float
    budget: int
    certificate_trials: int
    certificate_max_dist: float
    covering_certified: bool
    coords: np.ndarray = field(repr=False, default=None)  # (N, m) rows in frame coords

    def __len__(self) -> int:
        return self.points.shape[0]


def gamma_net(
    m: int,
    gamma: float,
    frame: Frame,
    seed: Seed,
    certificate_trials: int = 100_000,
) -> GammaNet:
    """Greedy gamma-net of the unit sphere of an m-dimensional subspace.

    Random candidates are scanned and kept whenever they sit farther than
    gamma from everything kept so far, which yields a gamma-separated set;
    saturation makes it a covering net, and the covering property is then
    certified by rejection on ``certificate_trials`` fresh random unit points
    (any uncovered point found is absorbed and certification restarts).
    Cardinality above ceil((3/gamma)^m) raises :class:`NetBudgetError`.
    """
    if m != frame.dim:
        raise ValueError("declared dimension does not match the frame")
    if not 0 < gamma <= 2:
        raise ValueError("gamma must lie in (0, 2]")
    budget = int(np.ceil((3.0 / gamma) ** m))
    rng = seed.generator()

    def unit_batch(count: int) -> np.ndarray:
        g = rng.standard_normal((count, m))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    kept: list[np.ndarray] = []

    def absorb(batch: np.ndarray) -> int:
        added = 0
        for cand in batch:
            if not kept:
                kept.append(cand)
                added += 1
                continue
            arr = np.asarray(kept)
            if np.min(np.linalg.norm(arr - cand, axis=1)) > gamma:
                kept.append(cand)
                added += 1
                if len(kept) > budget:
                    raise NetBudgetError(m, gamma, budget, len(kept))
        return added

    # Saturation phase: batches until a full batch adds nothing.
    batch_size = max(2048, 64 * budget if budget < 4096 else 2048)
    while absorb(unit_batch(batch_size)) > 0:
        pass

    # Certification phase, absorbing any stragglers and retrying.
    max_dist = 0.0
    for _attempt in range(8):
        probes = unit_batch(certificate_trials)
        arr = np.asarray(kept)
        # distance matrix in subspace coordinates; chunked to bound memory
        max_dist = 0.0
        worst: np.ndarray | None = None
        for lo in range(0, certificate_trials, 8192):
            chunk = probes[lo : lo + 8192]
            d = np.linalg.norm(chunk[:, None, :] - arr[None, :, :], axis=2)
            nearest = d.min(axis=1)
            i = int(np.argmax(nearest))
            if nearest[i] > max_dist:
                max_dist = float(nearest[i])
                worst = chunk[i]
        if max_dist <= gamma:
            break
        absorb(np.asarray([worst]))
    certified = max_dist <= gamma

    coords = np.asarray(kept)
    points = coords @ frame.columns.T
    return GammaNet(
        points=points,
        gamma=gamma,
        budget=budget,
        certificate_trials=certificate_trials,
        certificate_max_dist=max_dist,
        covering_certified=certified,
        coords=coords,
    )


def subspace_incidence_probability(n: int, m: int, gamma: float) -> float:
    """Exact P[d(x, Y) <= gamma] for uniform unit x and a fixed m-dim Y.

    The squared distance from a uniform point of S^{n-1} to an m-dimensional
    subspace is Beta((n-m)/2, m/2) distributed, so the probability is the
    regularized incomplete beta function evaluated at gamma^2.
    """
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    return float(betainc((n - m) / 2.0, m / 2.0, gamma * gamma))


def principal_sine(frame_a: np.ndarray, frame_b: np.ndarray) -> float:
    """sin of the smallest principal angle between two spanned subspaces.

    Arguments are orthonormal column blocks.  The smallest principal angle
    theta_1 has cos(theta_1) equal to the largest singular value of A^T B,
    and sin(theta_1) equals the smallest possible distance from a unit vector
    of span(A) to span(B).
    """
    s = np.linalg.svd(frame_a.T @ frame_b, compute_uv=False)
    c = min(1.0, float(s[0]) if s.size else 0.0)
    return float(np.sqrt(max(0.0, 1.0 - c * c)))
