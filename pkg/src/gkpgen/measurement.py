"""Homodyne projection, the photon-subtraction Kraus family and PNR sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt, pi, log, cos, radians

import numpy as np

from . import fock
from .errors import (
    InvalidDimensionError,
    InvalidParameterError,
    ZeroProbabilityBranchError,
)

PNR_SATURATION = 10  # detectors resolve fewer than 10 photons


def hermite_wavefunctions(n_max: int, x) -> np.ndarray:
    """ψ_n(x) for n = 0..n_max, shape (n_max+1, len(x)).

    Stable recurrence: ψ_0 = π^{-1/4} e^{-x²/2},
    ψ_n = √(2/n)·x·ψ_{n-1} − √((n-1)/n)·ψ_{n-2}.
    """
    if n_max < 0:
        raise InvalidParameterError("n_max must be >= 0")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((n_max + 1, xs.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * xs ** 2)
    if n_max >= 1:
        out[1] = sqrt(2.0) * xs * out[0]
    for n in range(2, n_max + 1):
        out[n] = sqrt(2.0 / n) * xs * out[n - 1] - sqrt((n - 1) / n) * out[n - 2]
    return out


def quadrature_wavefunction(n: int, x):
    """Position-basis wavefunction ⟨x|n⟩ under the q = (a†+a)/√2 convention."""
    vals = hermite_wavefunctions(n, x)[n]
    return float(vals[0]) if np.isscalar(x) else vals


def homodyne_project(state: fock.FockState, mode: int, theta: float, m: float):
    """Project one mode of a two-mode state onto the rotated-quadrature outcome m.

    Applies R(θ) to the measured mode so the θ-quadrature lands on q, contracts
    against ψ_n(m) and renormalizes.  Returns (post_state, density) where density
    is the unnormalized projection weight, useful for diagnostics.
    """
    if state.modes != 2 or mode not in (0, 1):
        raise InvalidDimensionError("homodyne_project needs a two-mode state and mode in {0, 1}")
    d = state.cutoff
    psi = state.matrix()
    phases = np.exp(-1j * theta * np.arange(d))
    weights = hermite_wavefunctions(d - 1, m)[:, 0] * phases
    v = weights @ psi if mode == 0 else psi @ weights
    density = float(np.linalg.norm(v) ** 2)
    if density < 1e-14:
        raise ZeroProbabilityBranchError(
            f"homodyne branch at m={m} has density {density:.3e}"
        )
    return fock.FockState(v / np.sqrt(density), d, 1), density


@dataclass(frozen=True)
class KrausFamily:
    """Photon-subtraction operators O_n for a beam splitter of transmittance e^{-β}.

    O_n = ((1-e^{-2β})^{n/2} e^{nβ} / √n!) aⁿ e^{-β a†a}, the unique normalization
    with Σ O†O = I (equivalently e^{-βa†a} aⁿ order); global phases dropped.
    """

    beta: float
    cutoff: int
    operators: np.ndarray  # shape (cutoff, cutoff, cutoff), index n first

    def completeness_defect(self) -> float:
        acc = np.zeros((self.cutoff, self.cutoff), dtype=np.complex128)
        for op in self.operators:
            acc += op.conj().T @ op
        half = self.cutoff // 2
        return float(np.max(np.abs((acc - np.eye(self.cutoff))[:half, :half])))


def subtraction_kraus(beta: float, cutoff: int) -> KrausFamily:
    if not np.isfinite(beta) or beta <= 0:
        raise InvalidParameterError(f"beta must be > 0, got {beta}")
    a = fock.ladder_and_quadratures(cutoff)[0].matrix
    damp = np.diag(np.exp(-beta * np.arange(cutoff))).astype(np.complex128)
    ops = np.zeros((cutoff, cutoff, cutoff), dtype=np.complex128)
    ops[0] = damp
    ratio_base = np.exp(beta) * sqrt(1.0 - np.exp(-2.0 * beta))
    for n in range(1, cutoff):
        ops[n] = (ratio_base / sqrt(n)) * (a @ ops[n - 1])
    return KrausFamily(beta=beta, cutoff=cutoff, operators=ops)


def beta_from_angle(theta_bs_deg: float) -> float:
    """β = −ln t for a beam splitter with transmittance t = cos θ."""
    if not 0.0 < theta_bs_deg < 90.0:
        raise InvalidParameterError(f"θ_bs must lie in (0°, 90°), got {theta_bs_deg}")
    return -log(cos(radians(theta_bs_deg)))


def _subtracted_vectors(state: fock.FockState, mode: int, beta: float):
    """Unnormalized O_n|ψ⟩ for all n, computed by the stable ratio recurrence."""
    d = state.cutoff
    a = fock.ladder_and_quadratures(d)[0].matrix
    damp = np.exp(-beta * np.arange(d))
    if state.modes == 1:
        vecs = np.zeros((d, d), dtype=np.complex128)
        vecs[0] = damp * state.amplitudes
        apply = lambda v: a @ v
    else:
        psi = state.matrix()
        vecs = np.zeros((d, d, d), dtype=np.complex128)
        vecs[0] = damp[:, None] * psi if mode == 0 else psi * damp[None, :]
        apply = (lambda v: a @ v) if mode == 0 else (lambda v: v @ a.T)
    ratio_base = np.exp(beta) * sqrt(1.0 - np.exp(-2.0 * beta))
    for n in range(1, d):
        vecs[n] = (ratio_base / sqrt(n)) * apply(vecs[n - 1])
    return vecs


def subtraction_probabilities(state: fock.FockState, mode: int, beta: float) -> np.ndarray:
    """P(n) = ‖O_n|ψ⟩‖² for every resolvable n."""
    vecs = _subtracted_vectors(state, mode, beta)
    flat = vecs.reshape(state.cutoff, -1)
    return np.sum(np.abs(flat) ** 2, axis=1)


@dataclass(frozen=True)
class SubtractionOutcome:
    n: int
    probability: float
    post_state: fock.FockState
    flags: tuple = field(default_factory=tuple)


def sample_subtraction(state: fock.FockState, mode: int, theta_bs_deg: float,
                       rng: np.random.Generator) -> SubtractionOutcome:
    """Sample a PNR outcome behind the subtraction beam splitter, return the post-state."""
    beta = beta_from_angle(theta_bs_deg)
    vecs = _subtracted_vectors(state, mode, beta)
    flat = vecs.reshape(state.cutoff, -1)
    probs = np.sum(np.abs(flat) ** 2, axis=1)
    total = float(probs.sum())
    flags = []
    if total < 1.0 - 1e-6:
        flags.append("truncation:subtraction")
    n = int(np.searchsorted(np.cumsum(probs / total), rng.random(), side="right"))
    n = min(n, state.cutoff - 1)
    if n >= PNR_SATURATION:
        flags.append("saturation")
    post = flat[n]
    post_state = fock.FockState(post / np.linalg.norm(post), state.cutoff, state.modes)
    return SubtractionOutcome(
        n=n, probability=float(probs[n]), post_state=post_state, flags=tuple(flags)
    )
