"""Quantum Fisher information of Gibbs states, its bounds chain and the
thermodynamic uncertainty diagnostics, plus an independent fidelity oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .operators import ModelSpec, build_tfim, check_hermitian
from .gibbs import (
    GibbsEnsemble,
    _classical_weights,
    iter_distinct_cluster_pairs,
    prepared_gibbs,
    susceptibility,
    variance,
)
from .spectral import to_eigenbasis

_TINY_POP = 1e-300


@dataclass(frozen=True)
class BoundsReport:
    """The (LB, F, UB1, UB2) quadruple with derived angle and uncertainty
    diagnostics.  Angle/uncertainty fields are NaN when undefined (beta = 0
    or vanishing Fisher information)."""

    lb: float
    qfi: float
    ub1: float
    ub2: float
    beta: float
    alpha: float
    phi: float
    dtheta_min: float
    d_o: float
    d_o_bar: float

    def to_dict(self) -> dict:
        return asdict(self)


def _check_rotated(ens: GibbsEnsemble, Oe: np.ndarray) -> None:
    """Reject within-cluster off-diagonal elements of O; they must have been
    removed by the cluster rotation before any spectral formula is applied."""
    scale = float(np.max(np.abs(Oe))) or 1.0
    for a, b in ens.eigs.clusters:
        if b - a < 2:
            continue
        block = Oe[a:b, a:b].copy()
        np.fill_diagonal(block, 0.0)
        if np.max(np.abs(block)) > 1e-9 * scale:
            raise ValueError(
                "degenerate cluster carries off-diagonal O elements; "
                "rotate_within_clusters must run before spectral formulas"
            )


def qfi_spectral(ens: GibbsEnsemble, O: np.ndarray) -> float:
    """Spectral QFI of a Gibbs state.

    beta^2 sum_n p_n (O_nn - <O>)^2
      + 2 sum over ordered pairs in distinct clusters of
        (p_m - p_n)^2 / ((p_m + p_n)(E_m - E_n)^2) |O_mn|^2

    Pairs with both populations numerically zero are skipped.
    """
    O = check_hermitian(O)
    if O.shape[0] != ens.dim:
        raise ValueError("dimension mismatch")
    Oe = to_eigenbasis(ens.eigs, O)
    _check_rotated(ens, Oe)
    total = ens.beta**2 * float(np.sum(_classical_weights(ens, Oe)))
    for dE, pm, pn, o2 in iter_distinct_cluster_pairs(ens, Oe):
        sp = pm + pn
        keep = sp > _TINY_POP
        if not keep.any():
            continue
        dp = pm[keep] - pn[keep]
        total += 2.0 * float(
            np.sum(dp * dp / (sp[keep] * dE[keep] ** 2) * o2[keep])
        )
    return total


def bounds_chain(ens: GibbsEnsemble, O: np.ndarray) -> BoundsReport:
    """Assemble LB <= F <= UB1 <= UB2 with the geometric-mean lower bound."""
    qfi = qfi_spectral(ens, O)
    var = variance(ens, O)
    chi = susceptibility(ens, O)
    beta = ens.beta
    ub1 = beta * chi
    ub2 = beta**2 * var
    if ub2 > 0:
        lb = ub1**2 / ub2
    else:
        if abs(ub1) > 1e-12 * max(1.0, abs(qfi)):
            raise RuntimeError(
                f"ub2 = 0 with ub1 = {ub1:.3e}: numerically corrupt ensemble"
            )
        lb = 0.0

    def _arccos_ratio(num, den):
        if den <= 0:
            return math.nan
        return math.acos(min(1.0, max(-1.0, num / den)))

    alpha = _arccos_ratio(ub1, ub2)
    phi = _arccos_ratio(lb, qfi)
    dtheta_min = 1.0 / math.sqrt(qfi) if qfi > 0 else math.nan
    d_o = math.sqrt(max(var, 0.0))
    d_o_bar = chi * dtheta_min if qfi > 0 else math.nan
    return BoundsReport(
        lb=lb,
        qfi=qfi,
        ub1=ub1,
        ub2=ub2,
        beta=beta,
        alpha=alpha,
        phi=phi,
        dtheta_min=dtheta_min,
        d_o=d_o,
        d_o_bar=d_o_bar,
    )


def check_bounds_report(rep: BoundsReport, rel_slack: float = 1e-9) -> None:
    """Raise if the chain inequality or geometric-mean identity is violated."""
    scale = max(abs(rep.ub2), 1e-300)
    slack = rel_slack * max(1.0, scale)
    chain = (rep.lb, rep.qfi, rep.ub1, rep.ub2)
    for lo, hi in zip(chain, chain[1:]):
        if lo > hi + slack:
            raise RuntimeError(f"bounds chain violated: {chain}")
    if rep.lb < -slack:
        raise RuntimeError(f"negative lower bound {rep.lb}")
    gm = rep.ub2 * rep.lb
    if abs(rep.ub1**2 - gm) > rel_slack * max(1.0, rep.ub1**2, abs(gm)):
        raise RuntimeError(
            f"geometric-mean identity violated: ub1^2={rep.ub1**2}, ub2*lb={gm}"
        )


def uncertainty_report(rep: BoundsReport) -> dict:
    """Both thermodynamic uncertainty products and their ratios to 1/beta.

    product_direct   = dtheta_min * dO        (variance-based uncertainty)
    product_response = dtheta_min * dO_bar    (response-based uncertainty)
    """
    if not (rep.beta > 0) or not (rep.qfi > 0):
        return {
            "defined": False,
            "reason": "qfi or beta vanishes; uncertainty products undefined",
        }
    product_direct = rep.dtheta_min * rep.d_o
    product_response = rep.dtheta_min * rep.d_o_bar
    inv_beta = 1.0 / rep.beta
    return {
        "defined": True,
        "beta": rep.beta,
        "product_direct": product_direct,
        "product_response": product_response,
        "ratio_direct": product_direct / inv_beta,
        "ratio_response": product_response / inv_beta,
        "response_leq_direct": rep.d_o_bar <= rep.d_o + 1e-12,
    }


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    if w[0] < -1e-10:
        raise RuntimeError(f"density matrix not PSD (min eigenvalue {w[0]:.3e})")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def uhlmann_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    s = _psd_sqrt(rho)
    inner = s @ sigma @ s
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2.0)
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)


def qfi_from_states(rho0: np.ndarray, rho1: np.ndarray, delta: float) -> float:
    """Finite-difference Bures estimate 8(1 - sqrt(Fid))/delta^2.

    O(delta^2)-biased; keep delta well above sqrt(machine eps).
    """
    sqrt_fid = math.sqrt(uhlmann_fidelity(rho0, rho1))
    return 8.0 * (1.0 - sqrt_fid) / delta**2


def _sqrt_fidelity(a: GibbsEnsemble, b: GibbsEnsemble) -> float:
    """sqrt(Fid) = Tr |sqrt(rho_a) sqrt(rho_b)| from thermal populations.

    Populations are known to full relative precision, so the singular values
    of diag(sqrt(p)) U diag(sqrt(q)) carry only O(machine eps) absolute
    error.  Going through dense density matrices instead (eigh + clip + sqrt)
    amplifies eigenvalue roundoff by 1/sqrt(w) near the kernel and ruins the
    1 - sqrt(Fid) ~ F delta^2 / 8 cancellation the oracle relies on.
    """
    u = a.eigs.vectors.conj().T @ b.eigs.vectors
    m = np.sqrt(a.populations)[:, None] * u * np.sqrt(b.populations)[None, :]
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def _qfi_from_ensembles(a: GibbsEnsemble, b: GibbsEnsemble, delta: float) -> float:
    return 8.0 * (1.0 - _sqrt_fidelity(a, b)) / delta**2


def qfi_fidelity_oracle(
    model: ModelSpec,
    beta: float,
    delta: float,
    eps_deg: float | None = None,
) -> float:
    """Independent oracle for the spectral QFI via Uhlmann fidelity of the
    exactly built Gibbs states at theta -/+ delta/2 (centered, so the
    finite-difference bias is O(delta^2) rather than O(delta))."""
    if not (1e-4 <= delta <= 1e-2):
        raise ValueError(f"delta must lie in [1e-4, 1e-2], got {delta}")
    if not beta > 0:
        raise ValueError("beta must be positive")
    states = []
    for shift in (-delta / 2.0, delta / 2.0):
        H, O = build_tfim(model.with_theta(model.theta + shift))
        states.append(prepared_gibbs(H, O, beta, eps_deg))
    return _qfi_from_ensembles(states[0], states[1], delta)


def qfi_fidelity_oracle_generic(
    H: np.ndarray, O: np.ndarray, beta: float, delta: float
) -> float:
    """Same oracle for an arbitrary pair with H(theta) = H + theta O."""
    if not (1e-4 <= delta <= 1e-2):
        raise ValueError(f"delta must lie in [1e-4, 1e-2], got {delta}")
    if not beta > 0:
        raise ValueError("beta must be positive")
    ens0 = prepared_gibbs(H - (delta / 2.0) * O, O, beta)
    ens1 = prepared_gibbs(H + (delta / 2.0) * O, O, beta)
    return _qfi_from_ensembles(ens0, ens1, delta)
