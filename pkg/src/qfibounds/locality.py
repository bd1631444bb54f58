"""Locality diagnostics for dressed operators: Heisenberg evolution,
exponential time-filtering, commutator decay against distant probes, and the
finite-support approximation with its sampled commutator bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import PauliString, check_hermitian, pauli_string_matrix
from .spectral import EigenSystem, from_eigenbasis, to_eigenbasis
from .sld import _gauss_panels


@dataclass(frozen=True)
class DressSpec:
    """Exponential time filter e^{-mu |t|} and its quadrature controls."""

    mu: float
    horizon: float = 0.0
    panels: int = 256
    closed_form: bool = True

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.closed_form and not self.horizon > 0:
            raise ValueError("quadrature route needs a positive horizon")
        if self.panels < 1:
            raise ValueError("panels must be >= 1")


@dataclass(frozen=True)
class LocalityProfile:
    distances: np.ndarray
    commutator_norms: np.ndarray
    fitted_rate: float
    fit_r2: float
    mu: float


@dataclass(frozen=True)
class LocalApproximation:
    """Finite-support compression of an operator onto the leading sites.

    ``eps_hat`` is the sampled surrogate for the commutator supremum over
    complement operators; it can only underestimate the true value, so the
    theorem bound err <= 2 eps is recorded, not certified.
    """

    a_prime: np.ndarray
    err: float
    eps_hat: float
    max_probe: str


def spectral_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2))


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    """Spectral norm of [a, b]; exact via eigenvalues when both are
    Hermitian (i[a,b] is then Hermitian)."""
    c = a @ b - b @ a
    herm_a = np.allclose(a, a.conj().T, atol=1e-12)
    herm_b = np.allclose(b, b.conj().T, atol=1e-12)
    if herm_a and herm_b:
        return float(np.max(np.abs(np.linalg.eigvalsh(1j * c)))) if c.size else 0.0
    return spectral_norm(c)


def heisenberg_evolve(eigs: EigenSystem, A: np.ndarray, t: float) -> np.ndarray:
    """A(t) = e^{iHt} A e^{-iHt} via elementwise phases in the eigenbasis."""
    A = np.asarray(A, dtype=complex)
    if A.shape[0] != eigs.dim:
        raise ValueError("dimension mismatch")
    Ae = to_eigenbasis(eigs, A)
    e = eigs.energies
    phases = np.exp(1j * t * (e[:, None] - e[None, :]))
    return from_eigenbasis(eigs, phases * Ae)


def dressed_operator(
    eigs: EigenSystem, A_loc: np.ndarray, spec: DressSpec
) -> np.ndarray:
    """Time average of A(t) against e^{-mu |t|}.

    Closed form: the filter is a Lorentzian 2 mu / (mu^2 + (E_m - E_n)^2)
    acting elementwise in the eigenbasis.  The quadrature route integrates
    the phases directly over |t| <= horizon and exists as a cross-check.
    """
    A_loc = check_hermitian(A_loc)
    if A_loc.shape[0] != eigs.dim:
        raise ValueError("dimension mismatch")
    Ae = to_eigenbasis(eigs, A_loc)
    e = eigs.energies
    dE = e[:, None] - e[None, :]
    if spec.closed_form:
        filt = 2.0 * spec.mu / (spec.mu**2 + dE**2)
    else:
        t, w = _gauss_panels(0.0, spec.horizon, spec.panels)
        q = w * np.exp(-spec.mu * t)
        filt = 2.0 * (np.cos(np.outer(dE.ravel(), t)) @ q).reshape(dE.shape)
    out = filt * Ae
    out = (out + out.conj().T) / 2.0
    return from_eigenbasis(eigs, out)


def commutator_decay_profile(
    eigs: EigenSystem,
    A_loc: np.ndarray,
    spec: DressSpec,
    probe_kind: str = "Z",
    fit_min_distance: int = 2,
) -> LocalityProfile:
    """Dress a site-0 operator, then record || [L_loc, sigma_j^probe] || for
    every site j and fit the exponential tail of the decay."""
    n_sites = int(round(math.log2(eigs.dim)))
    if 1 << n_sites != eigs.dim:
        raise ValueError("eigensystem dimension is not a power of two")
    dressed = dressed_operator(eigs, A_loc, spec)
    distances = np.arange(n_sites)
    norms = np.empty(n_sites)
    for j in range(n_sites):
        probe = pauli_string_matrix(PauliString({j: probe_kind}), n_sites)
        norms[j] = commutator_norm(dressed, probe)

    usable = (distances >= fit_min_distance) & (norms > 1e-12)
    if usable.sum() < 4:
        raise ValueError("chain too short for a decay fit (< 4 usable points)")
    r = distances[usable].astype(float)
    y = np.log(norms[usable])
    slope, intercept = np.polyfit(r, y, 1)
    resid = y - (slope * r + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return LocalityProfile(
        distances=distances,
        commutator_norms=norms,
        fitted_rate=float(-slope),
        fit_r2=r2,
        mu=spec.mu,
    )


def _complement_probes(n_sites: int, region: int, n_random: int, seed: int):
    """Single-site Paulis plus seeded Haar-ish unitaries on the complement."""
    dc = 1 << (n_sites - region)
    for j in range(region, n_sites):
        for axis in ("X", "Y", "Z"):
            b = pauli_string_matrix(
                PauliString({j - region: axis}), n_sites - region
            )
            yield f"pauli:{axis}{j}", b
    rng = np.random.default_rng(seed)
    for k in range(n_random):
        g = rng.standard_normal((dc, dc)) + 1j * rng.standard_normal((dc, dc))
        q, r = np.linalg.qr(g)
        q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
        yield f"random:{k}", q


def local_approximation(
    A: np.ndarray,
    region: int,
    n_random_probes: int = 100,
    probe_seed: int = 2024,
) -> LocalApproximation:
    """Compress A onto its leading ``region`` sites.

    A' is the normalized partial trace over the complement; err is the
    spectral norm of A - A' (x) I.  eps_hat is the largest sampled
    ||[A, I (x) B]|| / ||B|| over the probe set.
    """
    A = np.asarray(A, dtype=complex)
    d = A.shape[0]
    n_sites = int(round(math.log2(d)))
    if 1 << n_sites != d:
        raise ValueError("operator dimension is not a power of two")
    if not (1 <= region <= n_sites):
        raise ValueError(f"region must be in [1, {n_sites}]")
    dk = 1 << region
    dc = d // dk

    a_prime = np.einsum("ajbj->ab", A.reshape(dk, dc, dk, dc)) / dc
    err = spectral_norm(A - np.kron(a_prime, np.eye(dc)))

    eps_hat = 0.0
    max_probe = ""
    ident = np.eye(dk)
    for label, b in _complement_probes(n_sites, region, n_random_probes, probe_seed):
        full = np.kron(ident, b)
        val = commutator_norm(A, full) / spectral_norm(b)
        if val > eps_hat:
            eps_hat = val
            max_probe = label
    return LocalApproximation(a_prime=a_prime, err=err, eps_hat=eps_hat, max_probe=max_probe)
