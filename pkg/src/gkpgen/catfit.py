"""Fit single-mode states to squeezed cats: (α, r′, parity, fidelity, α_c)."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import exp

import numpy as np

from . import fock
from .errors import InvalidParameterError

ACCEPT_FIDELITY = 0.9


@dataclass(frozen=True)
class CatFitSearch:
    """Grid-then-refine search configuration; deterministic for fixed values."""

    alpha_max: float = 7.0
    r_min: float = -1.0
    r_max: float = 1.8
    alpha_grid: int = 60
    r_grid: int = 40
    refine_tol: float = 1e-4
    refine_rounds: int = 10


@dataclass(frozen=True)
class CatFit:
    alpha: float
    r_prime: float
    parity: str            # 'even' | 'odd'
    fidelity: float
    alpha_c: float
    accepted: bool

    @property
    def parity_sign(self) -> int:
        return 1 if self.parity == "even" else -1


@lru_cache(maxsize=8)
def _displacement_bank(cutoff: int, alphas: tuple) -> np.ndarray:
    """Stacked D(α) matrices for a grid of real α (cached per search grid)."""
    w, v = fock._real_displacement_eig(cutoff)
    phases = np.exp(-1j * np.outer(np.asarray(alphas), w))  # (A, D)
    return np.einsum("ij,aj,kj->aik", v, phases, v.conj(), optimize=True)


def squeezed_vacuum_vector(cutoff: int, r: float) -> np.ndarray:
    """S(r)|0⟩ amplitudes via the even-sector recurrence (no matrix exponential)."""
    c = np.zeros(cutoff, dtype=np.complex128)
    c[0] = 1.0 / np.sqrt(np.cosh(r))
    t = -np.tanh(r)
    for m in range(1, (cutoff + 1) // 2):
        c[2 * m] = c[2 * (m - 1)] * t * np.sqrt((2 * m - 1) / (2 * m))
    return c


@lru_cache(maxsize=64)
def _squeezed_bank(cutoff: int, rs: tuple) -> np.ndarray:
    """Squeezed-vacuum vectors S(r)|0⟩ for a grid of r values, shape (R, D)."""
    out = np.empty((len(rs), cutoff), dtype=np.complex128)
    for i, r in enumerate(rs):
        out[i] = squeezed_vacuum_vector(cutoff, float(r))
    return out


def _cat_overlaps(psi: np.ndarray, cutoff: int, alphas: np.ndarray,
                  rs: np.ndarray, parity_sign: int) -> np.ndarray:
    """|⟨cat(α,r′,P)|ψ⟩|² over the (α, r′) grid."""
    dbank = _displacement_bank(cutoff, tuple(np.round(alphas, 12)))
    sbank = _squeezed_bank(cutoff, tuple(np.round(rs, 12)))
    plus = np.einsum("aij,rj->ari", dbank, sbank, optimize=True)
    # D(-α) = D(α)^T for real α
    minus = np.einsum("aji,rj->ari", dbank, sbank, optimize=True)
    cats = plus + parity_sign * minus
    norms = np.linalg.norm(cats, axis=2)
    ovl = np.abs(np.einsum("ari,i->ar", cats.conj(), psi, optimize=True))
    with np.errstate(divide="ignore", invalid="ignore"):
        fid = np.where(norms > 1e-9, (ovl / norms) ** 2, 0.0)
    return fid


def fit_squeezed_cat(state: fock.FockState, search: CatFitSearch | None = None) -> CatFit:
    """Deterministic coarse-grid + local-refinement fit of a squeezed cat.

    Parity is fixed first from the sign of the parity expectation; the (α, r′)
    surface is scanned on the configured grid and the best cell is refined by
    shrinking local grids until the fidelity gain drops below refine_tol.
    """
    if state.modes != 1:
        raise InvalidParameterError("fit_squeezed_cat needs a single-mode state")
    search = search or CatFitSearch()
    psi = state.amplitudes / np.linalg.norm(state.amplitudes)
    cutoff = state.cutoff
    parity_sign = 1 if fock.parity_expectation(state) >= 0 else -1

    alphas = np.linspace(0.0, search.alpha_max, search.alpha_grid)
    rs = np.linspace(search.r_min, search.r_max, search.r_grid)
    fid = _cat_overlaps(psi, cutoff, alphas, rs, parity_sign)
    ia, ir = np.unravel_index(np.argmax(fid), fid.shape)
    best = (float(alphas[ia]), float(rs[ir]), float(fid[ia, ir]))

    da = alphas[1] - alphas[0]
    dr = rs[1] - rs[0]
    for round_idx in range(search.refine_rounds):
        a0, r0, f0 = best
        local_a = np.clip(np.linspace(a0 - da, a0 + da, 7), 0.0, None)
        local_r = np.linspace(r0 - dr, r0 + dr, 7)
        f = _cat_overlaps(psi, cutoff, local_a, local_r, parity_sign)
        ja, jr = np.unravel_index(np.argmax(f), f.shape)
        if f[ja, jr] > best[2]:
            best = (float(local_a[ja]), float(local_r[jr]), float(f[ja, jr]))
        da *= 0.35
        dr *= 0.35
        # keep zooming until the alpha resolution supports ~0.01 accuracy
        if round_idx >= 5 and best[2] - f0 < search.refine_tol:
            break

    alpha, r_prime, fidelity = best
    return CatFit(
        alpha=alpha,
        r_prime=r_prime,
        parity="even" if parity_sign > 0 else "odd",
        fidelity=fidelity,
        alpha_c=fock.corrected_amplitude(alpha, r_prime),
        accepted=fidelity >= ACCEPT_FIDELITY,
    )
