"""Synthetic fractal panels: fBm paths with randomly drawn Hurst exponents,
mixed through a (random orthogonal) coordinates matrix.

fBm paths use circulant embedding of the increment process (Davies & Harte
1987; Dieker 2004), which is exact and O(n log n); a Cholesky factorization
of the full covariance is the fallback for embeddings that fail to be
positive semidefinite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, DomainError

__all__ = [
    "HurstDistribution",
    "MixingMatrix",
    "Panel",
    "fbm_covariance",
    "fbm_path",
    "gen_panel",
    "sample_hurst",
]


def subseed(seed: int, *path: int) -> np.random.Generator:
    """Generator for a (seed, *path) address in a splittable seed tree.

    Derived streams are independent and reproducible, so rows of a panel
    or replications of an experiment can be generated in any order.
    """
    return np.random.default_rng(np.random.SeedSequence((int(seed),) + tuple(int(q) for q in path)))


@dataclass(frozen=True)
class HurstDistribution:
    """Discrete law of Hurst exponents: sorted modes in (0,1) with probabilities."""

    modes: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        modes = tuple(float(h) for h in self.modes)
        probs = tuple(float(w) for w in self.probs)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "probs", probs)
        if len(modes) == 0 or len(modes) != len(probs):
            raise ConfigError("modes and probs must be non-empty and of equal length")
        if any(not (0.0 < h < 1.0) for h in modes):
            raise ConfigError(f"modes must lie in the open interval (0,1): {modes}")
        if any(h2 <= h1 for h1, h2 in zip(modes, modes[1:])):
            raise ConfigError(f"modes must be strictly increasing: {modes}")
        if any(not (0.0 < w <= 1.0) for w in probs):
            raise ConfigError(f"probabilities must lie in (0,1]: {probs}")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ConfigError(f"probabilities must sum to 1 within 1e-12, got {sum(probs)!r}")

    @property
    def r(self) -> int:
        return len(self.modes)

    @property
    def delta_min(self) -> float:
        """Smallest gap between adjacent modes (inf for a single mode)."""
        if self.r == 1:
            return float("inf")
        return min(h2 - h1 for h1, h2 in zip(self.modes, self.modes[1:]))

    @property
    def varpi(self) -> float:
        """Smallest mode."""
        return self.modes[0]

    @classmethod
    def point(cls, h: float) -> "HurstDistribution":
        return cls((h,), (1.0,))

    @classmethod
    def uniform(cls, modes) -> "HurstDistribution":
        modes = tuple(sorted(float(h) for h in modes))
        k = len(modes)
        probs = (1.0 / k,) * k
        # nudge the last weight so the tuple sums to 1 exactly in binary
        probs = probs[:-1] + (1.0 - sum(probs[:-1]),)
        return cls(modes, probs)


@dataclass(frozen=True)
class MixingMatrix:
    """Invertible p x p coordinates matrix applied to the latent panel."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"mixing matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise DomainError("mixing matrix has non-finite entries")
        if np.linalg.cond(m) > 1.0 / np.finfo(float).eps:
            raise DomainError("mixing matrix is singular (condition number not finite)")

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    def orthogonality_defect(self) -> float:
        """max |M M^T - I|; ~0 for orthogonal matrices."""
        g = self.matrix @ self.matrix.T
        return float(np.max(np.abs(g - np.eye(self.p))))

    @classmethod
    def haar(cls, p: int, seed: int) -> "MixingMatrix":
        """Haar-distributed random orthogonal matrix.

        QR of an i.i.d. Gaussian matrix with the R-diagonal sign fixed so the
        factor is drawn from the Haar measure rather than a skewed slice of it.
        """
        rng = subseed(seed, 1)
        q, r = np.linalg.qr(rng.standard_normal((p, p)))
        q = q * np.sign(np.diag(r))
        return cls(q)


@dataclass(frozen=True)
class Panel:
    """p x n panel of observations (rows = components, columns = time)."""

    data: np.ndarray
    kind: str = "observed"  # "latent" or "observed"
    seed: int | None = None
    series: tuple[str, ...] | None = None

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float)
        object.__setattr__(self, "data", d)
        if d.ndim != 2:
            raise DataError(f"panel data must be 2-D, got ndim={d.ndim}")
        p, n = d.shape
        if p < 1 or n < 2:
            raise DataError(f"panel needs p >= 1 and n >= 2, got shape {d.shape}")
        if not np.all(np.isfinite(d)):
            raise DataError("panel contains non-finite entries")
        if self.kind not in ("latent", "observed"):
            raise ConfigError(f"panel kind must be 'latent' or 'observed', got {self.kind!r}")
        if self.series is not None and len(self.series) != p:
            raise DataError("series names do not match the number of rows")

    @property
    def p(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]


def sample_hurst(dist: HurstDistribution, p: int, seed: int) -> np.ndarray:
    """p i.i.d. draws from the Hurst distribution, reproducible under seed."""
    if not isinstance(dist, HurstDistribution):
        dist = HurstDistribution(tuple(dist[0]), tuple(dist[1]))
    if p < 1:
        raise DomainError(f"need p >= 1, got {p}")
    rng = subseed(seed, 0)
    return rng.choice(np.asarray(dist.modes), size=p, p=np.asarray(dist.probs))


def fgn_autocovariance(H: float, n: int) -> np.ndarray:
    """Autocovariance gamma(0..n-1) of unit-step fBm increments."""
    k = np.arange(n, dtype=float)
    return 0.5 * ((k + 1.0) ** (2.0 * H) - 2.0 * k ** (2.0 * H) + np.abs(k - 1.0) ** (2.0 * H))


def fbm_covariance(H: float, n: int) -> np.ndarray:
    """Covariance matrix of (B_H(1), ..., B_H(n)): (|s|^2H + |t|^2H - |t-s|^2H)/2."""
    t = np.arange(1, n + 1, dtype=float)
    s, u = np.meshgrid(t, t, indexing="ij")
    return 0.5 * (s ** (2.0 * H) + u ** (2.0 * H) - np.abs(s - u) ** (2.0 * H))


# circulant eigenvalue cache keyed by (H, n): the FFT of the embedded
# autocovariance is deterministic and reused across paths for the same mode
_EMBED_CACHE: dict[tuple[float, int], np.ndarray] = {}
_EMBED_CACHE_MAX = 64


def _embedding_sqrt_eigs(H: float, n: int) -> np.ndarray | None:
    """sqrt of the circulant-embedding eigenvalues, or None if not PSD."""
    key = (float(H), int(n))
    hit = _EMBED_CACHE.get(key)
    if hit is not None:
        return hit
    gamma = fgn_autocovariance(H, n + 1)
    row = np.concatenate([gamma, gamma[1:-1][::-1]])  # circulant row, length 2n
    lam = np.fft.fft(row).real
    if lam.min() < -1e-9 * lam.max():
        return None
    out = np.sqrt(np.clip(lam, 0.0, None))
    if len(_EMBED_CACHE) >= _EMBED_CACHE_MAX:
        _EMBED_CACHE.clear()
    _EMBED_CACHE[key] = out
    return out


def _fgn_from_noise(z: np.ndarray, sqrt_lam: np.ndarray, n: int) -> np.ndarray:
    """Deterministic linear map from 2n standard normals to an exact fGn path.

    Kept separate from the random draws so its implied covariance can be
    checked column by column in tests.
    """
    m = 2 * n
    v = np.zeros(m, dtype=complex)
    v[0] = z[0] * np.sqrt(2.0)
    v[n] = z[1] * np.sqrt(2.0)
    v[1:n] = z[2 : n + 1] + 1j * z[n + 1 : m]
    v[n + 1 :] = np.conj(v[1:n][::-1])
    path = np.fft.fft(sqrt_lam * v)[:n].real
    return path / (2.0 * np.sqrt(n))


def _fgn_cholesky(H: float, n: int, z: np.ndarray) -> np.ndarray:
    cov = np.empty((n, n))
    gamma = fgn_autocovariance(H, n)
    for i in range(n):
        cov[i, :] = gamma[np.abs(np.arange(n) - i)]
    return np.linalg.cholesky(cov) @ z[:n]


def fbm_path(H: float, n: int, seed: int | None = None, rng: np.random.Generator | None = None,
             method: str = "auto") -> np.ndarray:
    """One exact discrete-time fBm path (B_H(1), ..., B_H(n)).

    method: "auto" (circulant embedding, Cholesky fallback), "embedding",
    or "cholesky".
    """
    if not (0.0 < H < 1.0):
        raise DomainError(f"Hurst exponent must lie in (0,1), got {H}")
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    if rng is None:
        rng = subseed(0 if seed is None else seed, 2, 0)
    if method not in ("auto", "embedding", "cholesky"):
        raise ConfigError(f"unknown fbm method {method!r}")

    z = rng.standard_normal(2 * n)
    if method == "cholesky":
        fgn = _fgn_cholesky(H, n, z)
    else:
        sqrt_lam = _embedding_sqrt_eigs(H, n)
        if sqrt_lam is None:
            if method == "embedding":
                raise ConfigError(f"circulant embedding not PSD for H={H}, n={n}")
            warnings.warn(f"circulant embedding not PSD for H={H}, n={n}; "
                          "falling back to Cholesky", RuntimeWarning)
            fgn = _fgn_cholesky(H, n, z)
        else:
            fgn = _fgn_from_noise(z, sqrt_lam, n)
    return np.cumsum(fgn)


def gen_panel(dist: HurstDistribution, p: int, n: int,
              mix: MixingMatrix | np.ndarray | str | None = "orthogonal",
              seed: int = 0) -> tuple[Panel, np.ndarray]:
    """p x n observed panel Y = M X with independent fBm rows in X.

    Returns the panel together with the true Hurst exponents of the latent
    rows (for scoring in simulation studies).  mix may be "orthogonal"
    (Haar-random, drawn from seed), "identity"/None, a MixingMatrix, or a raw
    square array (validated for invertibility).
    """
    if p < 1 or n < 2:
        raise DomainError(f"need p >= 1 and n >= 2, got p={p}, n={n}")
    h = sample_hurst(dist, p, seed)
    x = np.empty((p, n))
    for i in range(p):
        x[i] = fbm_path(h[i], n, rng=subseed(seed, 2, i))

    if mix is None or (isinstance(mix, str) and mix == "identity"):
        y = x
        kind = "latent"
    else:
        if isinstance(mix, str):
            if mix != "orthogonal":
                raise ConfigError(f"unknown mixing policy {mix!r}")
            mix = MixingMatrix.haar(p, seed)
        elif not isinstance(mix, MixingMatrix):
            mix = MixingMatrix(np.asarray(mix))
        if mix.p != p:
            raise DomainError(f"mixing matrix is {mix.p}x{mix.p} but panel has p={p}")
        y = mix.matrix @ x
        kind = "observed"
    return Panel(y, kind=kind, seed=seed), h
