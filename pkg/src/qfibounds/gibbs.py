"""Gibbs ensembles over eigensystems: thermal averages, variance and the
susceptibility of the conjugate observable by two independent routes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import ModelSpec, build_tfim, check_hermitian
from .spectral import (
    DegeneracyPolicy,
    EigenSystem,
    eigendecompose,
    rotate_within_clusters,
    to_eigenbasis,
)

_IMAG_TOL = 1e-10


@dataclass(frozen=True)
class GibbsEnsemble:
    """Normalized thermal populations tied to a (rotated) eigensystem."""

    beta: float
    populations: np.ndarray
    log_z: float
    eigs: EigenSystem

    @property
    def dim(self) -> int:
        return self.eigs.dim

    def density_matrix(self) -> np.ndarray:
        return self.eigs.density_matrix(self.populations)


def gibbs_ensemble(eigs: EigenSystem, beta: float) -> GibbsEnsemble:
    """Populations p_n = exp(-beta(E_n - E_min)) / Z, overflow-safe."""
    if not math.isfinite(beta) or beta < 0:
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    e = eigs.energies
    shifted = -beta * (e - e[0])
    w = np.exp(shifted)
    z = float(w.sum())
    log_z = math.log(z) - beta * float(e[0])
    return GibbsEnsemble(beta=beta, populations=w / z, log_z=log_z, eigs=eigs)


def prepared_gibbs(
    H: np.ndarray,
    O: np.ndarray,
    beta: float,
    eps_deg: float | None = None,
) -> GibbsEnsemble:
    """Diagonalize H, rotate degenerate clusters against O, thermalize.

    This is the canonical pipeline every downstream formula expects: the
    returned ensemble's eigenbasis makes O diagonal inside each degenerate
    cluster.
    """
    eigs = eigendecompose(H, DegeneracyPolicy(eps_deg))
    eigs = rotate_within_clusters(eigs, O)
    return gibbs_ensemble(eigs, beta)


def _real_or_raise(value: complex, scale: float, what: str) -> float:
    if abs(value.imag) > _IMAG_TOL * max(1.0, scale):
        raise ValueError(f"{what} has non-negligible imaginary part {value.imag:.3e}")
    return float(value.real)


def thermal_average(ens: GibbsEnsemble, A: np.ndarray) -> float:
    """<A> = sum_n p_n <n|A|n>."""
    A = check_hermitian(A)
    if A.shape[0] != ens.dim:
        raise ValueError("dimension mismatch")
    v = ens.eigs.vectors
    diag = np.einsum("ij,ij->j", v.conj(), A @ v)
    val = complex(np.dot(ens.populations, diag))
    return _real_or_raise(val, float(np.max(np.abs(A))) or 1.0, "thermal average")


def variance(ens: GibbsEnsemble, O: np.ndarray) -> float:
    """<(O - <O>)^2>, evaluated in the eigenbasis."""
    O = check_hermitian(O)
    if O.shape[0] != ens.dim:
        raise ValueError("dimension mismatch")
    Oe = to_eigenbasis(ens.eigs, O)
    mean = float(np.dot(ens.populations, Oe.diagonal().real))
    second = float(np.dot(ens.populations, np.sum(np.abs(Oe) ** 2, axis=0)))
    return second - mean * mean


def iter_distinct_cluster_pairs(ens: GibbsEnsemble, Oe: np.ndarray, chunk: int = 1024):
    """Yield flat arrays (dE, p_m, p_n, |O_mn|^2) over ordered index pairs
    (m, n) belonging to distinct degeneracy clusters.

    dE = E_m - E_n.  Row-chunked so d^2 temporaries stay bounded.
    """
    e = ens.eigs.energies
    p = ens.populations
    cid = ens.eigs.cluster_ids()
    d = ens.dim
    for a in range(0, d, chunk):
        b = min(a + chunk, d)
        mask = cid[a:b, None] != cid[None, :]
        if not mask.any():
            continue
        dE = (e[a:b, None] - e[None, :])[mask]
        pm = np.broadcast_to(p[a:b, None], (b - a, d))[mask]
        pn = np.broadcast_to(p[None, :], (b - a, d))[mask]
        o2 = (np.abs(Oe[a:b, :]) ** 2)[mask]
        yield dE, pm, pn, o2


def _classical_weights(ens: GibbsEnsemble, Oe: np.ndarray) -> np.ndarray:
    """p_n (O_nn - <O>)^2 for each n."""
    diag = Oe.diagonal().real
    mean = float(np.dot(ens.populations, diag))
    return ens.populations * (diag - mean) ** 2


def susceptibility(ens: GibbsEnsemble, O: np.ndarray) -> float:
    """Thermodynamic susceptibility of <O> from the Lehmann representation.

    beta sum_n p_n (O_nn - <O>)^2
      + sum over ordered pairs in distinct clusters of
        (p_m - p_n) / (E_n - E_m) |O_mn|^2

    Non-negative at equilibrium; with the +theta O coupling this equals
    -(d<O>/dtheta) (cross-checked by ``susceptibility_fd``).
    """
    O = check_hermitian(O)
    if O.shape[0] != ens.dim:
        raise ValueError("dimension mismatch")
    Oe = to_eigenbasis(ens.eigs, O)
    total = ens.beta * float(np.sum(_classical_weights(ens, Oe)))
    for dE, pm, pn, o2 in iter_distinct_cluster_pairs(ens, Oe):
        total += float(np.sum((pm - pn) / (-dE) * o2))
    return total


def susceptibility_fd(
    model: ModelSpec,
    beta: float,
    delta: float,
    eps_deg: float | None = None,
) -> float:
    """Independent oracle: central finite difference of <O> in theta, with a
    full rebuild and rediagonalization at theta +/- delta.

    Returned with the sign convention of ``susceptibility``: the +theta O
    coupling makes d<O>/dtheta <= 0 at equilibrium, so the response magnitude
    -(d<O>/dtheta) is what the spectral route (and the bounds chain) uses.
    """
    if not (1e-6 <= delta <= 1e-2):
        raise ValueError(f"delta must lie in [1e-6, 1e-2], got {delta}")
    values = []
    for shift in (delta, -delta):
        H, O = build_tfim(model.with_theta(model.theta + shift))
        ens = prepared_gibbs(H, O, beta, eps_deg)
        values.append(thermal_average(ens, O))
    return -(values[0] - values[1]) / (2.0 * delta)
