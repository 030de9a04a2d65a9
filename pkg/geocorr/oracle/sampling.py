"""Monte Carlo sampling of coupled Geometric pairs.

Pairs are produced by the inverse transform: ``X1 = F1^{-1}(U)`` and, for
the countermonotone coupling, ``X2 = F2^{-1}(1 - U)`` (antithetic
variates), for the comonotone coupling ``X2 = F2^{-1}(U)``, and for the
independent coupling ``X2 = F2^{-1}(V)`` with a second uniform ``V``.

Samples are drawn in shards of fixed size. Shard ``k`` uses its own
``PCG64`` stream spawned from ``SeedSequence(seed)``, so the output only
depends on ``(seed, n)`` and not on how many workers draw the shards.
"""

import logging
import math
import multiprocessing as mpi
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from geocorr.exceptions import DomainError
from geocorr.geom import as_param, quantile, quantile_array
from geocorr.extremal.engine import nondegenerate_pair


logger = logging.getLogger(__name__)

default_options = {
    "shard_size": 2**16,
    "min_samples": 1000,
}
"""dict: default sampling options

The keys represent:
 * ``shard_size``: number of pairs drawn from each spawned stream
 * ``min_samples``: smallest sample accepted by the correlation estimators
"""

# uniforms live on the grid (k + 1/2) / 2**52, which keeps both u and 1 - u
# exact doubles strictly inside (0, 1)
_UNIFORM_BITS = 52


class Coupling(Enum):
    COUNTERMONOTONE = "countermonotone"
    COMONOTONE = "comonotone"
    INDEPENDENT = "independent"

    @classmethod
    def parse(cls, name):
        """Looks a coupling up by its (case-insensitive) name."""
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            choices = ", ".join(c.value for c in cls)
            raise DomainError(f"unknown coupling {name!r}, choose one of "
                              f"{choices}") from None


@dataclass(frozen=True)
class McEstimate:
    """A Monte Carlo estimate with its standard error.

    Attributes:
        mean (float): the estimate (a sample correlation or mean product)
        std_error (float): standard error estimated from the same sample
        n (int): sample size
        seed (int): seed of the root ``SeedSequence``
    """
    mean: float
    std_error: float
    n: int
    seed: int

    def within(self, value, n_se=4.0):
        return abs(self.mean - value) <= n_se * self.std_error


def sample_pair(p1, p2, u, coupling, rng=None):
    """Maps one uniform level to a coupled pair.

    Args:
        p1 (GeoParam or float): parameter of ``X1``
        p2 (GeoParam or float): parameter of ``X2``
        u (float): uniform level in ``(0, 1)``
        coupling (Coupling or str): how ``X2`` is tied to `u`
        rng (np.random.Generator): source of the second uniform for the
            independent coupling

    Returns:
        tuple of two ints
    """
    p1, p2 = as_param(p1), as_param(p2)
    coupling = Coupling.parse(coupling)
    if not 0 < u < 1:
        raise DomainError(f"uniform level must lie in (0, 1), got {u!r}")
    x1 = quantile(p1, u)
    if coupling is Coupling.COUNTERMONOTONE:
        return x1, quantile(p2, 1 - u)
    if coupling is Coupling.COMONOTONE:
        return x1, quantile(p2, u)
    rng = np.random.default_rng() if rng is None else rng
    return x1, quantile(p2, _uniforms(rng, 1)[0])


def _uniforms(rng, size):
    k = rng.integers(0, 2**_UNIFORM_BITS, size=size, dtype=np.int64)
    return (k + 0.5) / 2**_UNIFORM_BITS


def _sample_shard(task):
    p1, p2, coupling, seed_seq, size = task
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    u = _uniforms(rng, size)
    x1 = quantile_array(p1, u)
    if coupling is Coupling.COUNTERMONOTONE:
        x2 = quantile_array(p2, 1 - u)
    elif coupling is Coupling.COMONOTONE:
        x2 = quantile_array(p2, u)
    else:
        x2 = quantile_array(p2, _uniforms(rng, size))
    return np.column_stack([x1, x2])


def _shard_tasks(p1, p2, n, seed, coupling, shard_size):
    n_shards = max(math.ceil(n / shard_size), 1)
    children = np.random.SeedSequence(seed).spawn(n_shards)
    sizes = [min(shard_size, n - k * shard_size) for k in range(n_shards)]
    return [(p1, p2, coupling, child, size)
            for child, size in zip(children, sizes)]


def sample_pairs(p1, p2, n, seed, coupling, shard_size=None, workers=1):
    """Draws `n` coupled pairs.

    Args:
        p1 (GeoParam or float): parameter of ``X1``
        p2 (GeoParam or float): parameter of ``X2``
        n (int): number of pairs
        seed (int): seed of the root ``SeedSequence``
        coupling (Coupling or str): the coupling
        shard_size (int): pairs per spawned stream, defaults to
            ``default_options["shard_size"]``
        workers (int): number of processes drawing shards

    Returns:
        ``np.ndarray`` of shape ``(n, 2)`` and dtype ``int64``; shards are
        concatenated in shard order
    """
    shard_size = shard_size or default_options["shard_size"]
    p1, p2 = as_param(p1), as_param(p2)
    coupling = Coupling.parse(coupling)
    if int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n!r}")
    tasks = _shard_tasks(p1, p2, int(n), seed, coupling, shard_size)
    logger.debug("drawing %d pairs in %d shards", n, len(tasks))
    if workers > 1 and len(tasks) > 1:
        with mpi.Pool(min(workers, len(tasks))) as pool:
            shards = pool.map(_sample_shard, tasks)
    else:
        shards = [_sample_shard(task) for task in tasks]
    return np.concatenate(shards)


def correlation_estimate(x, y, n, seed):
    """Sample Pearson correlation with its delta-method standard error.

    Uses the large-sample variance of the sample correlation,

        n Var(r) = r^2/4 (m40/m20^2 + m04/m02^2 + 2 m22/(m20 m02))
                   + m22/(m20 m02) - m11 m31/(m20^2 m02) - m11 m13/(m20 m02^2)

    with ``mjk`` the central moments of the sample.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx, dy = x - x.mean(), y - y.mean()
    m20, m02, m11 = np.mean(dx**2), np.mean(dy**2), np.mean(dx * dy)
    if m20 == 0 or m02 == 0:
        warnings.warn("a sampled marginal is constant, the correlation is "
                      "undefined", RuntimeWarning)
        return McEstimate(mean=math.nan, std_error=math.nan, n=n, seed=seed)
    m40, m04, m22 = np.mean(dx**4), np.mean(dy**4), np.mean(dx**2 * dy**2)
    m31, m13 = np.mean(dx**3 * dy), np.mean(dx * dy**3)

    rho = m11 / math.sqrt(m20 * m02)
    n_var = (rho**2 / 4 * (m40 / m20**2 + m04 / m02**2 + 2 * m22 / (m20 * m02))
             + m22 / (m20 * m02)
             - m11 * m31 / (m20**2 * m02)
             - m11 * m13 / (m20 * m02**2))
    return McEstimate(mean=float(rho),
                      std_error=math.sqrt(max(n_var, 0.0) / n),
                      n=n, seed=seed)


def _check_sample_size(n):
    if n < default_options["min_samples"]:
        raise DomainError(f"Monte Carlo estimates need n >= "
                          f"{default_options['min_samples']}, got {n!r}")


def mc_corr(p1, p2, n, seed, coupling, **kwargs):
    """Sample correlation of `n` coupled pairs.

    Raises:
        DegenerateMarginal: if either parameter equals 1
        DomainError: if ``n < 1000``
    """
    p1, p2 = nondegenerate_pair(p1, p2)
    _check_sample_size(n)
    pairs = sample_pairs(p1, p2, n, seed, coupling, **kwargs)
    return correlation_estimate(pairs[:, 0], pairs[:, 1], n, seed)


def mc_mean_product(p1, p2, n, seed, coupling, **kwargs):
    """Sample mean of ``X1 X2`` with the usual ``s / sqrt(n)`` error.

    Raises:
        DegenerateMarginal: if either parameter equals 1
        DomainError: if ``n < 1000``
    """
    p1, p2 = nondegenerate_pair(p1, p2)
    _check_sample_size(n)
    pairs = sample_pairs(p1, p2, n, seed, coupling, **kwargs)
    product = pairs[:, 0].astype(float) * pairs[:, 1]
    return McEstimate(mean=float(product.mean()),
                      std_error=float(product.std(ddof=1) / math.sqrt(n)),
                      n=n, seed=seed)


def exponential_lift(p, x, u):
    """Adds ``Exp(lambda)`` conditioned on ``[0, 1]`` to Geometric values.

    With ``lambda = -ln(1-p)`` the sum ``X + W`` is ``Exp(lambda)``
    distributed when ``X ~ Geo(p)`` and ``W`` is independent of it. `W` is
    drawn by inverting its cdf ``(1 - exp(-lambda w)) / p`` at the levels `u`.

    Args:
        p (GeoParam or float): parameter of the Geometric values
        x (array_like): Geometric values
        u (array_like): uniform levels in ``(0, 1)``, one per value

    Returns:
        ``np.ndarray`` of floats
    """
    p = as_param(p)
    lam = -math.log1p(-p.p)
    w = -np.log1p(-np.asarray(u, dtype=float) * p.p) / lam
    return np.asarray(x, dtype=float) + w


def lifted_mc_corr(p1, p2, n, seed, **kwargs):
    """Sample correlation of countermonotone pairs after the exponential
    lift; it estimates a correlation of two exponential variables and is
    therefore at least ``1 - pi^2/6``."""
    p1, p2 = nondegenerate_pair(p1, p2)
    _check_sample_size(n)
    pairs = sample_pairs(p1, p2, n, seed, Coupling.COUNTERMONOTONE, **kwargs)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 1])))
    y1 = exponential_lift(p1, pairs[:, 0], _uniforms(rng, n))
    y2 = exponential_lift(p2, pairs[:, 1], _uniforms(rng, n))
    return correlation_estimate(y1, y2, n, seed)
