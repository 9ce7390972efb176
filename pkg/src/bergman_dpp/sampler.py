"""Exact simulation of the restricted determinantal process.

Two phases.  First an independent Bernoulli draw per eigenvalue selects
the active index set I.  Then positions are drawn sequentially: the i-th
point follows the residual density

    p_i(x) = ( ||phi_I(x)||**2 - sum_{k < i} |<e_k, phi_I(x)>|**2 ) / (|I| - i + 1)

where e_1, .., e_{i-1} orthonormalize the feature vectors of the points
already placed.  Proposals are uniform on the region (interval chosen
proportionally to its area, radius by inverse transform, angle uniform)
against the constant envelope sup ||phi_I||**2 / (|I| - i + 1); the sup
sits at the outermost radius because every |phi_n| is nondecreasing in
|x|.  The envelope is asserted on every evaluated proposal.

Stream discipline: proposals are consumed in fixed chunks of growing size,
so a given (seed, replica) replays byte-identically regardless of how many
rejections occur.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DomainError,
    EnvelopeError,
    OrthogonalizationError,
    RejectionBudgetError,
)
from .spectral import BergmanSpectrum
from .streams import PHASE_CONJECTURE, PHASE_SAMPLE, make_rng

__all__ = [
    "GS_NORM_FLOOR",
    "SamplerConfig",
    "ActiveIndexSet",
    "SampleMeta",
    "PointConfiguration",
    "default_truncation",
    "bernoulli_phase",
    "sample_positions",
    "sample",
    "sample_moduli",
    "min_radius_cdf",
    "ModuliExperimentReport",
    "moduli_experiment",
]

GS_NORM_FLOOR = 1e-12
_CHUNKS = (8, 16, 32, 64, 128, 256)
_ENVELOPE_SLACK = 1e-9


@dataclass(frozen=True)
class SamplerConfig:
    """Run configuration: exactly one of beta (truncation multiplier) or n_eigen."""

    beta: float | None = None
    n_eigen: int | None = None
    seed: int = 0
    max_rejections: int = 10_000_000

    def __post_init__(self):
        if (self.beta is None) == (self.n_eigen is None):
            raise DomainError("provide exactly one of beta or n_eigen")
        if self.beta is not None and not (float(self.beta) > 0.0 and math.isfinite(self.beta)):
            raise DomainError(f"beta must be positive and finite, got {self.beta}")
        if self.n_eigen is not None:
            if int(self.n_eigen) != self.n_eigen or self.n_eigen < 1:
                raise DomainError(f"n_eigen must be a positive integer, got {self.n_eigen}")
            object.__setattr__(self, "n_eigen", int(self.n_eigen))
        if int(self.seed) != self.seed or self.seed < 0:
            raise DomainError(f"seed must be a non-negative integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))
        if int(self.max_rejections) != self.max_rejections or self.max_rejections < 1:
            raise DomainError(
                f"max_rejections must be a positive integer, got {self.max_rejections}"
            )
        object.__setattr__(self, "max_rejections", int(self.max_rejections))

    def resolve_truncation(self, spectrum) -> int:
        if self.n_eigen is not None:
            return self.n_eigen
        return default_truncation(spectrum, self.beta)


@dataclass(frozen=True)
class ActiveIndexSet:
    """Outcome of the Bernoulli phase: active eigenfunction indices below n_eigen."""

    indices: tuple[int, ...]
    n_eigen: int

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        object.__setattr__(self, "n_eigen", int(self.n_eigen))
        if self.n_eigen < 0:
            raise DomainError(f"n_eigen must be non-negative, got {self.n_eigen}")
        prev = -1
        for i in self.indices:
            if not prev < i:
                raise DomainError("active indices must be strictly increasing")
            if not 0 <= i < self.n_eigen:
                raise DomainError(
                    f"active index {i} outside truncation range [0, {self.n_eigen})"
                )
            prev = i

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class SampleMeta:
    """Provenance of one configuration: where, how truncated, which seed, and
    the acceptance telemetry of the rejection sampler."""

    region: str
    n_eigen: int
    active_indices: tuple[int, ...]
    rejections: tuple[int, ...]
    proposals: int
    seed: int | None = None
    replica: int | None = None

    @property
    def acceptance_rate(self) -> float | None:
        if self.proposals == 0:
            return None
        return len(self.rejections) / self.proposals

    def to_dict(self) -> dict:
        return {
            "region": self.region,
            "n_eigen": self.n_eigen,
            "active_indices": list(self.active_indices),
            "rejections": list(self.rejections),
            "proposals": self.proposals,
            "seed": self.seed,
            "replica": self.replica,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SampleMeta":
        return cls(
            region=data["region"],
            n_eigen=data["n_eigen"],
            active_indices=tuple(data["active_indices"]),
            rejections=tuple(data["rejections"]),
            proposals=data["proposals"],
            seed=data.get("seed"),
            replica=data.get("replica"),
        )


@dataclass(frozen=True)
class PointConfiguration:
    """A sampled configuration; one point per active index."""

    points: tuple[complex, ...]
    meta: SampleMeta

    def __len__(self):
        return len(self.points)

    def moduli(self) -> np.ndarray:
        return np.sort(np.abs(np.array(self.points, dtype=complex)))

    def to_dict(self) -> dict:
        return {
            "points": [{"re": z.real, "im": z.imag} for z in self.points],
            "meta": self.meta.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PointConfiguration":
        pts = tuple(complex(p["re"], p["im"]) for p in data["points"])
        return cls(points=pts, meta=SampleMeta.from_dict(data["meta"]))


def default_truncation(spectrum, beta: float) -> int:
    """ceil(beta * trace), at least 1; needs a closed-form-trace spectrum."""
    if not isinstance(spectrum, BergmanSpectrum):
        raise DomainError("default truncation needs a Bergman-restriction spectrum")
    beta = float(beta)
    if not (beta > 0.0 and math.isfinite(beta)):
        raise DomainError(f"beta must be positive and finite, got {beta}")
    return max(1, math.ceil(beta * spectrum.trace()))


def bernoulli_phase(spectrum, n_eigen: int, rng: np.random.Generator) -> ActiveIndexSet:
    """Select each index n < n_eigen independently with probability lambda_n."""
    if int(n_eigen) != n_eigen or n_eigen < 1:
        raise DomainError(f"n_eigen must be a positive integer, got {n_eigen}")
    n_eigen = int(n_eigen)
    lam = np.asarray(spectrum.eigenvalues(n_eigen), dtype=float)
    if lam.shape != (n_eigen,) or np.any(lam < 0.0) or np.any(lam > 1.0):
        raise DomainError("spectrum must provide eigenvalues in [0, 1]")
    hits = np.nonzero(rng.random(n_eigen) < lam)[0]
    return ActiveIndexSet(indices=tuple(int(i) for i in hits), n_eigen=n_eigen)


def _propose(rng, c, a_sq, w_sq, cum_w):
    u = rng.random((c, 3))
    j = np.searchsorted(cum_w, u[:, 0] * cum_w[-1], side="right")
    j = np.minimum(j, len(cum_w) - 1)
    r = np.sqrt(a_sq[j] + u[:, 1] * w_sq[j])
    return r * np.exp(2j * math.pi * u[:, 2])


def sample_positions(
    spectrum: BergmanSpectrum,
    active: ActiveIndexSet,
    rng: np.random.Generator,
    max_rejections: int = 10_000_000,
) -> PointConfiguration:
    """Draw one position per active index through the residual densities."""
    if not isinstance(spectrum, BergmanSpectrum):
        raise DomainError("positional sampling needs a monomial eigenfunction family")
    if not isinstance(active, ActiveIndexSet):
        raise DomainError(f"expected an ActiveIndexSet, got {type(active).__name__}")
    region = spectrum.region
    idx = np.array(active.indices, dtype=int)
    m = len(idx)
    meta = SampleMeta(
        region=region.literal(),
        n_eigen=active.n_eigen,
        active_indices=active.indices,
        rejections=(),
        proposals=0,
    )
    if m == 0:
        return PointConfiguration(points=(), meta=meta)

    a = np.array([ai for ai, _ in region.intervals])
    b = np.array([bi for _, bi in region.intervals])
    a_sq = a * a
    w_sq = b * b - a_sq
    cum_w = np.cumsum(w_sq)

    boundary = spectrum.feature_matrix(idx, np.array([complex(region.outer_radius)]))[0]
    sup_sq = float(np.sum((boundary * boundary.conjugate()).real))

    basis = np.zeros((m, m), dtype=complex)
    points: list[complex] = []
    rejections: list[int] = []
    proposals = 0

    for i in range(m):
        remaining = m - i
        envelope = sup_sq / remaining
        consumed = 0
        chunk_no = 0
        accepted = None
        while accepted is None:
            c = _CHUNKS[min(chunk_no, len(_CHUNKS) - 1)]
            chunk_no += 1
            z = _propose(rng, c, a_sq, w_sq, cum_w)
            accept_u = rng.random(c)
            feats = spectrum.feature_matrix(idx, z)
            dens = np.einsum("ij,ij->i", feats, feats.conj()).real
            if i:
                coef = feats @ basis[:i].conj().T
                dens = dens - np.einsum("ij,ij->i", coef, coef.conj()).real
            dens /= remaining
            if np.any(dens > envelope * (1.0 + _ENVELOPE_SLACK) + 1e-300):
                worst = float(dens.max())
                raise EnvelopeError(
                    f"residual density {worst} exceeded its envelope {envelope} "
                    f"at point {i + 1} of {m}"
                )
            proposals += c
            hits = np.nonzero(accept_u * envelope < dens)[0]
            if len(hits):
                j = int(hits[0])
                accepted = (complex(z[j]), feats[j].copy())
                rejections.append(consumed + j)
            else:
                consumed += c
                if consumed >= max_rejections:
                    raise RejectionBudgetError(
                        f"no acceptance within {max_rejections} proposals at point "
                        f"{i + 1} of {m} (envelope {envelope}, region {region.literal()})"
                    )
        z_i, phi = accepted
        u_vec = phi
        for _ in range(2):  # one re-orthogonalization pass
            for k in range(i):
                u_vec = u_vec - np.vdot(basis[k], u_vec) * basis[k]
        nrm = float(np.linalg.norm(u_vec))
        if nrm < GS_NORM_FLOOR:
            raise OrthogonalizationError(
                f"Gram-Schmidt residual {nrm} below {GS_NORM_FLOOR} at point "
                f"{i + 1} of {m}: numerically duplicate draw"
            )
        basis[i] = u_vec / nrm
        points.append(z_i)

    meta = replace(meta, rejections=tuple(rejections), proposals=proposals)
    return PointConfiguration(points=tuple(points), meta=meta)


def sample(spectrum: BergmanSpectrum, config: SamplerConfig, replica: int = 0) -> PointConfiguration:
    """Bernoulli phase then positional phase under one seeded stream."""
    n_eigen = config.resolve_truncation(spectrum)
    rng = make_rng(config.seed, replica, PHASE_SAMPLE)
    active = bernoulli_phase(spectrum, n_eigen, rng)
    conf = sample_positions(spectrum, active, rng, config.max_rejections)
    return PointConfiguration(
        points=conf.points,
        meta=replace(conf.meta, seed=config.seed, replica=replica),
    )


# ---------------------------------------------------------------------------
# radial laws of the unrestricted process


def sample_moduli(n: int, rng: np.random.Generator) -> np.ndarray:
    """One draw of the moduli set {U_k**(1/(2k)), k = 1..n}, U_k iid uniform."""
    if int(n) != n or n < 1:
        raise DomainError(f"count must be a positive integer, got {n}")
    n = int(n)
    k = np.arange(1, n + 1, dtype=float)
    return rng.random(n) ** (1.0 / (2.0 * k))


def min_radius_cdf(n: int, x: float) -> float:
    """P(min of the first n moduli <= x) = 1 - prod_{k=1}^n (1 - x**(2k))."""
    if int(n) != n or n < 1:
        raise DomainError(f"count must be a positive integer, got {n}")
    x = float(x)
    if math.isnan(x):
        raise DomainError("x must be a real number")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    if n == 1:
        return x * x
    k = np.arange(1, int(n) + 1, dtype=float)
    return -math.expm1(float(np.log1p(-(x ** (2.0 * k))).sum()))


# ---------------------------------------------------------------------------
# exploratory comparison of restricted moduli with powered uniforms


def _ks_two_sample(xs: np.ndarray, ys: np.ndarray) -> float:
    xs = np.sort(xs)
    ys = np.sort(ys)
    grid = np.concatenate([xs, ys])
    fx = np.searchsorted(xs, grid, side="right") / len(xs)
    fy = np.searchsorted(ys, grid, side="right") / len(ys)
    return float(np.abs(fx - fy).max())


@dataclass(frozen=True)
class ModuliExperimentReport:
    """Exploratory output only: no verdict is attached.

    Two readings of the conditional powered-uniform law are compared with
    the sampled moduli, both mapping an active index n to the exponent
    1/(2(n+1)): 'literal' draws U uniform on [0, R] before the power,
    'capped' scales the powered uniform into [0, R].
    """

    radius: float
    reps: int
    n_eigen: int
    seed: int
    runs_with_points: int
    ks_min_literal: float | None
    ks_min_capped: float | None
    order_quantiles: dict

    def to_dict(self) -> dict:
        return {
            "exploratory": True,
            "radius": self.radius,
            "reps": self.reps,
            "n_eigen": self.n_eigen,
            "seed": self.seed,
            "runs_with_points": self.runs_with_points,
            "ks_min_literal": self.ks_min_literal,
            "ks_min_capped": self.ks_min_capped,
            "order_quantiles": self.order_quantiles,
        }


def moduli_experiment(
    radius: float, config: SamplerConfig, reps: int, max_rank: int = 8
) -> ModuliExperimentReport:
    """Sample the restricted process and, conditioned on the same active set,
    the two powered-uniform variants; report KS distances between min-radius
    samples and per-rank quantile tables."""
    if int(reps) != reps or reps < 1:
        raise DomainError(f"reps must be a positive integer, got {reps}")
    reps = int(reps)
    spectrum = BergmanSpectrum.disc(radius)
    n_eigen = config.resolve_truncation(spectrum)

    dpp_sorted: list[np.ndarray] = []
    lit_sorted: list[np.ndarray] = []
    cap_sorted: list[np.ndarray] = []
    for r in range(reps):
        rng = make_rng(config.seed, r, PHASE_SAMPLE)
        active = bernoulli_phase(spectrum, n_eigen, rng)
        conf = sample_positions(spectrum, active, rng, config.max_rejections)
        if len(conf) == 0:
            continue
        crng = make_rng(config.seed, r, PHASE_CONJECTURE)
        us = crng.random((len(conf), 2))
        expo = 1.0 / (2.0 * (np.array(active.indices, dtype=float) + 1.0))
        dpp_sorted.append(conf.moduli())
        lit_sorted.append(np.sort((us[:, 0] * radius) ** expo))
        cap_sorted.append(np.sort(radius * us[:, 1] ** expo))

    runs = len(dpp_sorted)
    ks_lit = ks_cap = None
    if runs:
        dpp_min = np.array([m[0] for m in dpp_sorted])
        ks_lit = _ks_two_sample(dpp_min, np.array([m[0] for m in lit_sorted]))
        ks_cap = _ks_two_sample(dpp_min, np.array([m[0] for m in cap_sorted]))

    probs = (0.1, 0.25, 0.5, 0.75, 0.9)
    table: dict = {"probs": list(probs), "ranks": {}}
    for rank in range(max_rank):
        d = [m[rank] for m in dpp_sorted if len(m) > rank]
        if not d:
            break
        li = [m[rank] for m in lit_sorted if len(m) > rank]
        ca = [m[rank] for m in cap_sorted if len(m) > rank]
        table["ranks"][rank] = {
            "runs": len(d),
            "dpp": [float(q) for q in np.quantile(d, probs)],
            "literal": [float(q) for q in np.quantile(li, probs)],
            "capped": [float(q) for q in np.quantile(ca, probs)],
        }

    return ModuliExperimentReport(
        radius=float(radius),
        reps=reps,
        n_eigen=n_eigen,
        seed=config.seed,
        runs_with_points=runs,
        ks_min_literal=ks_lit,
        ks_min_capped=ks_cap,
        order_quantiles=table,
    )
