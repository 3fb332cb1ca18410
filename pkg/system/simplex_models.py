"""
Ймовірнісні моделі на симплексі та закони похибок експериментів.

Dirichlet, логістично-нормальний закон (через ilr) і забруднений гауссів
закон (1-δ)N(0,1) + δN(μ, sd²). Усі генератори є детермінованими
функціями стану RngStream.
"""

import numpy as np
from scipy import stats
from scipy.special import gammaln

from system.exceptions import SmoothingErrorCode, SmoothingException
from system.models import DirichletParams, ErrorLaw, LogisticNormalParams
from system.simplex_core import IlrVector, SimplexPoint, closure, inv_ilr
from tools.rng import RngStream

MAX_GAMMA_RETRIES = 100


def dirichlet_density(x: SimplexPoint, p: DirichletParams) -> float:
    """
    Щільність Діріхле відносно міри Лебега на симплексі.

    :param x: Композиція.
    :param p: Параметри форми alpha.
    :return: Γ(Σα)/ΠΓ(α_j) · Π x_j^(α_j-1).
    """
    alpha = np.asarray(p.alpha, dtype=float)
    if x.dim != alpha.size:
        raise SmoothingException(SmoothingErrorCode.DIMENSION_MISMATCH, f"{x.dim} != {alpha.size}")
    log_norm = gammaln(alpha.sum()) - gammaln(alpha).sum()
    return float(np.exp(log_norm + np.sum((alpha - 1.0) * np.log(x.parts))))


def dirichlet_sample(p: DirichletParams, rng: RngStream) -> SimplexPoint:
    """Замикання D незалежних Gamma(α_j, 1) величин."""
    alpha = np.asarray(p.alpha, dtype=float)
    for _ in range(MAX_GAMMA_RETRIES):
        # Generator.gamma точний (Marsaglia-Tsang з відбором)
        draws = rng.generator.gamma(alpha, 1.0)
        if np.all(draws > 0.0):
            return closure(draws)
    raise SmoothingException(SmoothingErrorCode.DEGENERATE_DRAW, f"alpha={p.alpha}")


def dirichlet_sample_rows(p: DirichletParams, size: int, rng: RngStream) -> np.ndarray:
    """Пакетна вибірка size x D; кожен рядок проходить ту ж перевірку, що й dirichlet_sample."""
    rows = np.empty((size, p.dim))
    for i in range(size):
        rows[i] = dirichlet_sample(p, rng).parts
    return rows


def logistic_normal_sample(p: LogisticNormalParams, rng: RngStream) -> SimplexPoint:
    """z ~ N(μ, Σ) у координатах ilr, повертає inv_ilr(z)."""
    return inv_ilr(logistic_normal_draw(p, rng))


def logistic_normal_draw(p: LogisticNormalParams, rng: RngStream) -> IlrVector:
    mu = np.asarray(p.mu, dtype=float)
    factor = np.linalg.cholesky(np.asarray(p.sigma, dtype=float))
    z = mu + factor @ rng.generator.standard_normal(mu.size)
    return IlrVector(z)


def logistic_normal_density_ilr(v: IlrVector, p: LogisticNormalParams) -> float:
    """Щільність N_{D-1}(μ, Σ) у точці v."""
    if len(v) != len(p.mu):
        raise SmoothingException(SmoothingErrorCode.DIMENSION_MISMATCH, f"{len(v)} != {len(p.mu)}")
    return float(stats.multivariate_normal(mean=p.mu, cov=p.sigma).pdf(v.coords))


def error_sample(law: ErrorLaw, rng: RngStream) -> float:
    """Одна похибка із забрудненого закону."""
    return float(error_sample_rows(law, 1, rng)[0])


def error_sample_rows(law: ErrorLaw, size: int, rng: RngStream) -> np.ndarray:
    """size похибок: з імовірністю 1-δ з N(0,1), інакше з N(mu_shift, sd_contam²)."""
    generator = rng.generator
    contaminated = generator.random(size) < law.delta
    z = generator.standard_normal(size)
    return np.where(contaminated, law.mu_shift + law.sd_contam * z, z)
