"""Exact delta-spike line spectra for fluctuation and dissipation, the
generalized fluctuation-dissipation relation with its zero-frequency
correction, and kernel moments that reproduce the QFI and both bounds."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .operators import check_hermitian
from .gibbs import GibbsEnsemble, _classical_weights, iter_distinct_cluster_pairs
from .spectral import to_eigenbasis

FREQ_MERGE_TOL = 1e-10

AUTOCORRELATION = "autocorrelation"
DISSIPATION = "dissipation"


@dataclass(frozen=True)
class LineSpectrum:
    """Finite list of (frequency, weight) delta spikes, frequencies sorted
    ascending and deduplicated within FREQ_MERGE_TOL."""

    omegas: np.ndarray
    weights: np.ndarray
    kind: str

    def __len__(self) -> int:
        return len(self.omegas)

    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def rows(self):
        return zip(self.omegas.tolist(), self.weights.tolist())


class KernelKind(enum.Enum):
    """Integral kernels of the three line-sum representations.

    Pointwise qfi <= susceptibility <= variance for every frequency, which is
    the whole content of the bounds chain.  The omega -> 0 limits are encoded
    explicitly; naive substitution at omega = 0 is ill-defined.
    """

    QFI = "qfi_kernel"
    SUSCEPTIBILITY = "susceptibility_kernel"
    VARIANCE = "variance_kernel"

    def evaluate(self, omega: np.ndarray, beta: float) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        limit = beta**2 / 4.0
        if self is KernelKind.VARIANCE:
            return np.full_like(omega, limit)
        out = np.full_like(omega, limit)
        # below this the formula is the limit to better than 1e-12 relative,
        # and evaluating it directly risks underflow (0/0 for subnormal omega)
        nz = np.abs(beta * omega) > 1e-6
        w = omega[nz]
        if self is KernelKind.QFI:
            out[nz] = np.tanh(beta * w / 2.0) ** 2 / w**2
        else:
            out[nz] = np.tanh(beta * w / 2.0) * beta / (2.0 * w)
        return out


def _aggregate(omegas, weights, kind: str) -> LineSpectrum:
    omegas = np.asarray(omegas, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if len(omegas) == 0:
        return LineSpectrum(omegas, weights, kind)
    order = np.argsort(omegas, kind="stable")
    omegas = omegas[order]
    weights = weights[order]
    group = np.concatenate([[0], np.cumsum(np.diff(omegas) > FREQ_MERGE_TOL)])
    n_groups = int(group[-1]) + 1
    out_w = np.bincount(group, weights=weights, minlength=n_groups)
    counts = np.bincount(group, minlength=n_groups)
    out_o = np.bincount(group, weights=omegas, minlength=n_groups) / counts
    out_o[np.abs(out_o) <= FREQ_MERGE_TOL] = 0.0
    return LineSpectrum(out_o, out_w, kind)


def _pair_lines(ens: GibbsEnsemble, O: np.ndarray):
    """(dE, p_m, p_n, |O_mn|^2) flattened over distinct-cluster pairs plus
    the classical zero-frequency weight sum."""
    O = check_hermitian(O)
    if O.shape[0] != ens.dim:
        raise ValueError("dimension mismatch")
    Oe = to_eigenbasis(ens.eigs, O)
    zero_weight = 2.0 * math.pi * float(np.sum(_classical_weights(ens, Oe)))
    chunks = list(iter_distinct_cluster_pairs(ens, Oe))
    if chunks:
        dE = np.concatenate([c[0] for c in chunks])
        pm = np.concatenate([c[1] for c in chunks])
        pn = np.concatenate([c[2] for c in chunks])
        o2 = np.concatenate([c[3] for c in chunks])
    else:
        dE = pm = pn = o2 = np.zeros(0)
    return dE, pm, pn, o2, zero_weight


def autocorrelation_spectrum(ens: GibbsEnsemble, O: np.ndarray) -> LineSpectrum:
    """Symmetrized fluctuation spectrum S(omega).

    One line per distinct energy difference omega = E_n - E_m with weight
    pi (p_m + p_n) |O_mn|^2, plus the zero-frequency line
    2 pi sum_n p_n (O_nn - <O>)^2.  Sum rule: total weight = 2 pi Var(O).
    """
    dE, pm, pn, o2, zero_weight = _pair_lines(ens, O)
    omegas = np.concatenate([-dE, [0.0]])
    weights = np.concatenate([math.pi * (pm + pn) * o2, [zero_weight]])
    return _aggregate(omegas, weights, AUTOCORRELATION)


def dissipation_spectrum(ens: GibbsEnsemble, O: np.ndarray) -> LineSpectrum:
    """Im chi(omega): odd line spectrum with no zero-frequency weight."""
    dE, pm, pn, o2, _ = _pair_lines(ens, O)
    return _aggregate(-dE, math.pi * (pm - pn) * o2, DISSIPATION)


def generalized_fdt(
    dissipation: LineSpectrum, ens: GibbsEnsemble, O: np.ndarray
) -> LineSpectrum:
    """Reconstruct S(omega) as coth(beta omega / 2) Im chi(omega) plus the
    singular zero-frequency line carrying the classical fluctuations."""
    if dissipation.kind != DISSIPATION:
        raise ValueError("expected a dissipation spectrum")
    if not ens.beta > 0:
        raise ValueError("generalized FDT needs beta > 0")
    O = check_hermitian(O)
    Oe = to_eigenbasis(ens.eigs, O)
    zero_weight = 2.0 * math.pi * float(np.sum(_classical_weights(ens, Oe)))

    # Guard against a spectrum from a different ensemble: every line must sit
    # at an energy difference of this eigensystem.
    e = np.sort(ens.eigs.energies)
    diffs = np.sort((e[None, :] - e[:, None]).ravel())
    pos = np.searchsorted(diffs, dissipation.omegas)
    for k, w in enumerate(dissipation.omegas):
        near = [diffs[j] for j in (max(pos[k] - 1, 0), min(pos[k], len(diffs) - 1))]
        if min(abs(w - x) for x in near) > 1e-8:
            raise ValueError(
                f"dissipation line at omega={w} does not match any energy "
                "difference of the ensemble"
            )

    nz = dissipation.omegas != 0.0
    omegas = np.concatenate([dissipation.omegas[nz], [0.0]])
    coth = 1.0 / np.tanh(ens.beta * dissipation.omegas[nz] / 2.0)
    weights = np.concatenate([coth * dissipation.weights[nz], [zero_weight]])
    return _aggregate(omegas, weights, AUTOCORRELATION)


def moment(spectrum: LineSpectrum, kernel: KernelKind, beta: float) -> float:
    """(2/pi) sum over lines of kernel(omega) * weight.

    With the autocorrelation spectrum this reproduces, kernel by kernel, the
    QFI, beta * susceptibility and beta^2 * variance.
    """
    if spectrum.kind != AUTOCORRELATION:
        raise ValueError("moments are defined on autocorrelation spectra")
    if len(spectrum) == 0:
        return 0.0
    k = kernel if isinstance(kernel, KernelKind) else KernelKind(kernel)
    vals = k.evaluate(spectrum.omegas, beta)
    return (2.0 / math.pi) * float(np.dot(vals, spectrum.weights))
