"""Truncated Fock-space states, Gaussian unitaries, Wigner maps and state metrics.

Conventions: q = (a† + a)/√2, p = (a − a†)/(i√2), [q, p] = i, vacuum quadrature
variance 1/2.  Single-mode states are complex vectors of length D; two-mode
states are row-major vectors of length D² (index n1*D + n2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from math import sqrt, log, log10, e

import numpy as np
from scipy.linalg import expm

from .errors import (
    InvalidDimensionError,
    InvalidParameterError,
    NumericalConsistencyError,
    TruncationError,
    UndefinedMetricError,
)

DB_PER_NAT = 20.0 * log10(e)  # 8.685889638065035
TRUNCATION_GUARD = 5          # boundary band checked for leakage
TRUNCATION_TOL = 1e-6


def nats_to_db(r: float) -> float:
    return DB_PER_NAT * abs(r)


def db_to_nats(db: float) -> float:
    return db / DB_PER_NAT


@dataclass(frozen=True)
class SqueezingValue:
    """Dimensionless squeezing parameter with its dB reading (dB = 8.6859·|r|)."""

    nats: float

    @property
    def db(self) -> float:
        return nats_to_db(self.nats)

    @classmethod
    def from_db(cls, db: float) -> "SqueezingValue":
        return cls(db_to_nats(db))


@dataclass(frozen=True)
class ClusterSqueezing:
    """Source squeezing r0, cluster squeezing r = ½·ln(1/sech 2r0) and ε = sech 2r0."""

    r0_nats: float
    r_nats: float
    epsilon: float

    @property
    def r_db(self) -> float:
        return nats_to_db(self.r_nats)

    @property
    def r0_db(self) -> float:
        return nats_to_db(self.r0_nats)


def cluster_from_source(r0: float | SqueezingValue) -> ClusterSqueezing:
    """Map two-mode source squeezing r0 (nats) to the cluster squeezing pair."""
    r0_nats = r0.nats if isinstance(r0, SqueezingValue) else float(r0)
    eps = 1.0 / np.cosh(2.0 * r0_nats)
    r = 0.5 * log(1.0 / eps)
    return ClusterSqueezing(r0_nats=r0_nats, r_nats=r, epsilon=eps)


def cluster_from_cluster(r: float | SqueezingValue) -> ClusterSqueezing:
    """Inverse map: cluster squeezing r (nats) back to the source parameter r0."""
    r_nats = r.nats if isinstance(r, SqueezingValue) else float(r)
    eps = np.exp(-2.0 * abs(r_nats))
    r0 = 0.5 * np.arccosh(1.0 / eps)
    return ClusterSqueezing(r0_nats=r0, r_nats=abs(r_nats), epsilon=eps)


def cluster_from_source_db(r0_db: float) -> ClusterSqueezing:
    return cluster_from_source(db_to_nats(r0_db))


def cluster_from_cluster_db(r_db: float) -> ClusterSqueezing:
    return cluster_from_cluster(db_to_nats(r_db))


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FockState:
    """Immutable pure state over a truncated photon-number basis (1 or 2 modes)."""

    amplitudes: np.ndarray
    cutoff: int
    modes: int = 1

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        expected = self.cutoff ** self.modes
        if self.modes not in (1, 2) or amps.shape != (expected,):
            raise InvalidDimensionError(
                f"amplitude vector of length {amps.shape} does not match "
                f"cutoff {self.cutoff} with {self.modes} mode(s)"
            )
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "FockState":
        n = self.norm
        if n == 0.0:
            raise InvalidParameterError("cannot normalize a zero state")
        return FockState(self.amplitudes / n, self.cutoff, self.modes)

    def matrix(self) -> np.ndarray:
        """Two-mode amplitudes reshaped to (n1, n2)."""
        if self.modes != 2:
            raise InvalidDimensionError("matrix() requires a two-mode state")
        return self.amplitudes.reshape(self.cutoff, self.cutoff)


def vacuum(cutoff: int, modes: int = 1) -> FockState:
    amps = np.zeros(cutoff ** modes, dtype=np.complex128)
    amps[0] = 1.0
    return FockState(amps, cutoff, modes)


def fock(n: int, cutoff: int) -> FockState:
    if not 0 <= n < cutoff:
        raise InvalidDimensionError(f"|{n}> outside cutoff {cutoff}")
    amps = np.zeros(cutoff, dtype=np.complex128)
    amps[n] = 1.0
    return FockState(amps, cutoff)


def product_state(a: FockState, b: FockState) -> FockState:
    if a.cutoff != b.cutoff or a.modes != 1 or b.modes != 1:
        raise InvalidDimensionError("product_state needs two single-mode states at equal cutoff")
    return FockState(np.kron(a.amplitudes, b.amplitudes), a.cutoff, 2)


def pad_cutoff(state: FockState, cutoff: int) -> FockState:
    """Embed a state into a larger cutoff (zero-padded)."""
    if cutoff < state.cutoff:
        raise InvalidDimensionError("pad_cutoff cannot shrink the basis")
    if cutoff == state.cutoff:
        return state
    if state.modes == 1:
        amps = np.zeros(cutoff, dtype=np.complex128)
        amps[: state.cutoff] = state.amplitudes
    else:
        amps = np.zeros((cutoff, cutoff), dtype=np.complex128)
        amps[: state.cutoff, : state.cutoff] = state.matrix()
        amps = amps.reshape(-1)
    return FockState(amps, cutoff, state.modes)


def boundary_mass(state: FockState, guard: int = TRUNCATION_GUARD) -> float:
    """Probability mass with any mode index within `guard` of the cutoff."""
    d = state.cutoff
    lo = max(d - guard, 0)
    if state.modes == 1:
        return float(np.sum(np.abs(state.amplitudes[lo:]) ** 2))
    m = np.abs(state.matrix()) ** 2
    return float(m[lo:, :].sum() + m[:lo, lo:].sum())


def truncation_flagged(state: FockState, tol: float = TRUNCATION_TOL) -> bool:
    return boundary_mass(state) > tol


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator with its construction label (for diagnostics)."""

    matrix: np.ndarray
    cutoff: int
    label: str = ""


def _as_matrix(op) -> np.ndarray:
    return op.matrix if isinstance(op, OperatorMatrix) else np.asarray(op)


@lru_cache(maxsize=None)
def _ladder(cutoff: int) -> np.ndarray:
    a = np.zeros((cutoff, cutoff), dtype=np.complex128)
    ns = np.arange(1, cutoff)
    a[ns - 1, ns] = np.sqrt(ns)
    a.flags.writeable = False
    return a


def ladder_and_quadratures(cutoff: int):
    """Return (a, a†, q, p) on the truncated space."""
    if cutoff < 2:
        raise InvalidDimensionError(f"cutoff {cutoff} < 2")
    a = _ladder(cutoff)
    adag = a.conj().T
    q = (adag + a) / sqrt(2.0)
    p = (a - adag) / (1j * sqrt(2.0))
    return (
        OperatorMatrix(a, cutoff, "a"),
        OperatorMatrix(adag, cutoff, "adag"),
        OperatorMatrix(q, cutoff, "q"),
        OperatorMatrix(p, cutoff, "p"),
    )


@lru_cache(maxsize=None)
def _quad_matrix(cutoff: int, which: str) -> np.ndarray:
    a = _ladder(cutoff)
    if which == "q":
        m = (a.conj().T + a) / sqrt(2.0)
    elif which == "p":
        m = (a - a.conj().T) / (1j * sqrt(2.0))
    else:
        raise InvalidParameterError(f"unknown quadrature {which!r}")
    m.flags.writeable = False
    return m


@lru_cache(maxsize=None)
def _quad_eig(cutoff: int, which: str):
    """Eigendecomposition of a quadrature matrix (Hermitian), cached per cutoff."""
    w, v = np.linalg.eigh(_quad_matrix(cutoff, which))
    w.flags.writeable = False
    v.flags.writeable = False
    return w, v


@lru_cache(maxsize=None)
def displacement_matrix(cutoff: int, alpha: complex) -> np.ndarray:
    """D(α) = exp(α a† − α* a)."""
    alpha = complex(alpha)
    if not np.isfinite(alpha):
        raise InvalidParameterError("non-finite displacement")
    a = _ladder(cutoff)
    m = expm(alpha * a.conj().T - np.conj(alpha) * a)
    m.flags.writeable = False
    return m


@lru_cache(maxsize=None)
def _real_displacement_eig(cutoff: int):
    """eigh of i(a† − a); D(α) for real α is V·exp(−iα·w)·V†."""
    a = _ladder(cutoff)
    h = 1j * (a.conj().T - a)
    w, v = np.linalg.eigh(h)
    w.flags.writeable = False
    v.flags.writeable = False
    return w, v


def displacement_real(cutoff: int, alpha: float) -> np.ndarray:
    """Fast D(α) for real α via the cached eigenbasis of a† − a."""
    w, v = _real_displacement_eig(cutoff)
    return (v * np.exp(-1j * alpha * w)) @ v.conj().T


@lru_cache(maxsize=None)
def squeeze_matrix(cutoff: int, r: float, theta_r: float = 0.0) -> np.ndarray:
    """S(ξ) = exp(½(ξ* a² − ξ a†²)) with ξ = r·e^{iθ_r}; r > 0 squeezes q at θ_r = 0."""
    if not (np.isfinite(r) and np.isfinite(theta_r)):
        raise InvalidParameterError("non-finite squeeze parameters")
    a = _ladder(cutoff)
    xi = r * np.exp(1j * theta_r)
    m = expm(0.5 * (np.conj(xi) * (a @ a) - xi * (a.conj().T @ a.conj().T)))
    m.flags.writeable = False
    return m


@lru_cache(maxsize=None)
def rotation_matrix(cutoff: int, theta: float) -> np.ndarray:
    """R(θ) = exp(−iθ a†a), diagonal in the Fock basis."""
    if not np.isfinite(theta):
        raise InvalidParameterError("non-finite rotation angle")
    m = np.diag(np.exp(-1j * theta * np.arange(cutoff))).astype(np.complex128)
    m.flags.writeable = False
    return m


@lru_cache(maxsize=None)
def exp_iuq_matrix(cutoff: int, u: float, which: str = "q") -> np.ndarray:
    """exp(i·u·quad) via the cached quadrature eigenbasis."""
    if not np.isfinite(u):
        raise InvalidParameterError("non-finite displacement magnitude")
    w, v = _quad_eig(cutoff, which)
    m = (v * np.exp(1j * u * w)) @ v.conj().T
    m.flags.writeable = False
    return m


@lru_cache(maxsize=None)
def quad_damping_matrix(cutoff: int, which: str, strength: float) -> np.ndarray:
    """exp(−strength·quad²/2): the non-unitary Gaussian damper used by the noise channel."""
    if strength < 0 or not np.isfinite(strength):
        raise InvalidParameterError("damping strength must be finite and >= 0")
    w, v = _quad_eig(cutoff, which)
    m = (v * np.exp(-0.5 * strength * w ** 2)) @ v.conj().T
    m.flags.writeable = False
    return m


def build_gaussian_unitary(kind: str, cutoff: int, **params) -> OperatorMatrix:
    """Dense Gaussian unitary of the exact generator.

    Two-mode kinds ('beamsplitter', 'cz') return the full D²×D² matrix and are
    only meant for small cutoffs; the production path is apply_two_mode_gate.
    """
    if cutoff < 2:
        raise InvalidDimensionError(f"cutoff {cutoff} < 2")
    for val in params.values():
        if not np.all(np.isfinite(np.atleast_1d(val).astype(complex))):
            raise InvalidParameterError(f"non-finite parameter in {params}")
    if kind == "displacement":
        m = displacement_matrix(cutoff, params.get("alpha", 0.0))
        label = f"D({params.get('alpha', 0.0)})"
    elif kind == "squeeze":
        m = squeeze_matrix(cutoff, params.get("r", 0.0), params.get("theta_r", 0.0))
        label = f"S({params.get('r', 0.0)},{params.get('theta_r', 0.0)})"
    elif kind == "rotate":
        m = rotation_matrix(cutoff, params.get("theta", 0.0))
        label = f"R({params.get('theta', 0.0)})"
    elif kind == "beamsplitter":
        theta, phi = params.get("theta", 0.0), params.get("phi", 0.0)
        a = _ladder(cutoff)
        eye = np.eye(cutoff)
        a1, a2 = np.kron(a, eye), np.kron(eye, a)
        gen = theta * (a1.conj().T @ a2 * np.exp(1j * phi) - a1 @ a2.conj().T * np.exp(-1j * phi))
        m = expm(gen)
        label = f"B({theta},{phi})"
    elif kind == "cz":
        g = params.get("g", 0.0)
        q = _quad_matrix(cutoff, "q")
        m = expm(1j * g * np.kron(q, q))
        label = f"CZ({g})"
    else:
        raise InvalidParameterError(f"unknown Gaussian unitary kind {kind!r}")
    return OperatorMatrix(np.asarray(m), cutoff, label)


def apply_single_mode(state: FockState, op, mode: int = 0) -> FockState:
    """Apply a D×D operator to one mode (no renormalization)."""
    m = _as_matrix(op)
    if m.shape != (state.cutoff, state.cutoff):
        raise InvalidDimensionError("operator/state cutoff mismatch")
    if state.modes == 1:
        return FockState(m @ state.amplitudes, state.cutoff, 1)
    psi = state.matrix()
    out = m @ psi if mode == 0 else psi @ m.T
    return FockState(out.reshape(-1), state.cutoff, 2)


# ---------------------------------------------------------------------------
# two-mode gates at production cutoffs
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _bs_blocks(cutoff: int, theta: float, phi: float):
    """Per-total-photon-number blocks of exp(θ(a1†a2 e^{iφ} − a1a2† e^{−iφ})).

    The generator conserves N = n1 + n2, so the truncated unitary is exactly
    block-diagonal; each block is the expm of a tridiagonal sector generator.
    """
    blocks = []
    for total in range(2 * cutoff - 1):
        lo = max(0, total - cutoff + 1)
        hi = min(total, cutoff - 1)
        size = hi - lo + 1
        gen = np.zeros((size, size), dtype=np.complex128)
        for i in range(size - 1):
            n1 = lo + i
            # a1†a2 : |n1, total-n1> -> sqrt((n1+1)(total-n1)) |n1+1, total-n1-1>
            amp = sqrt((n1 + 1) * (total - n1))
            gen[i + 1, i] = theta * amp * np.exp(1j * phi)
            gen[i, i + 1] = -theta * amp * np.exp(-1j * phi)
        u = expm(gen) if size > 1 else np.ones((1, 1), dtype=np.complex128)
        blocks.append((lo, u))
    return tuple(blocks)


def _apply_beamsplitter(state: FockState, theta: float, phi: float) -> FockState:
    d = state.cutoff
    psi = state.matrix()
    out = np.zeros_like(psi)
    for total, (lo, u) in enumerate(_bs_blocks(d, theta, phi)):
        size = u.shape[0]
        n1 = np.arange(lo, lo + size)
        vec = psi[n1, total - n1]
        res = u @ vec
        out[n1, total - n1] = res
    return FockState(out.reshape(-1), d, 2)


def _apply_cz(state: FockState, g: float) -> FockState:
    """Spectral applied action of exp(i·g·q1·q2) (never materializes D²×D²)."""
    d = state.cutoff
    w, v = _quad_eig(d, "q")
    psi = state.matrix()
    y = v.conj().T @ psi @ v.conj()
    y *= np.exp(1j * g * np.outer(w, w))
    out = v @ y @ v.T
    return FockState(out.reshape(-1), d, 2)


def apply_two_mode_gate(state: FockState, kind: str, flags: list | None = None,
                        **params) -> FockState:
    """Beam splitter (block-exact) or C_Z (spectral) on a two-mode state."""
    if state.modes != 2:
        raise InvalidDimensionError("apply_two_mode_gate requires a two-mode state")
    for val in params.values():
        if not np.isfinite(val):
            raise InvalidParameterError(f"non-finite parameter in {params}")
    if kind == "beamsplitter":
        out = _apply_beamsplitter(state, params.get("theta", 0.0), params.get("phi", 0.0))
    elif kind == "cz":
        out = _apply_cz(state, params.get("g", 0.0))
    else:
        raise InvalidParameterError(f"unknown two-mode gate {kind!r}")
    if flags is not None and truncation_flagged(out):
        flags.append(f"truncation:{kind}")
    return out


# ---------------------------------------------------------------------------
# Wigner function
# ---------------------------------------------------------------------------

def wigner_map(state: FockState, qs: np.ndarray, ps: np.ndarray) -> np.ndarray:
    """W(q, p) on the grid, shape (len(qs), len(ps)); ∫∫W ≈ 1 for covered states.

    Iterative Laguerre-ladder evaluation over displaced Gaussians; O(D²) grid
    passes.  Emits a coverage warning when the Riemann sum visibly loses mass.
    """
    if state.modes != 1:
        raise InvalidDimensionError("wigner_map requires a single-mode state")
    c = state.amplitudes
    d = state.cutoff
    qg, pg = np.meshgrid(np.asarray(qs, float), np.asarray(ps, float), indexing="ij")
    amp = (qg + 1j * pg) / sqrt(2.0)

    rho = np.outer(c, np.conj(c))  # rho[m, n] = <m|rho|n>
    wlist = np.zeros((d,) + amp.shape, dtype=np.complex128)
    wlist[0] = np.exp(-2.0 * np.abs(amp) ** 2) / np.pi
    w = np.real(rho[0, 0]) * np.real(wlist[0])
    for n in range(1, d):
        wlist[n] = (2.0 * amp * wlist[n - 1]) / sqrt(n)
        w += 2.0 * np.real(rho[0, n] * wlist[n])
    for m in range(1, d):
        # raise the bra index: W_{m,n} = (2Ā·W_{m-1,n} − √n·W_{m-1,n-1})/√m
        prev = wlist[m].copy()
        wlist[m] = (2.0 * np.conj(amp) * prev - sqrt(m) * wlist[m - 1]) / sqrt(m)
        w += np.real(rho[m, m] * wlist[m])
        for n in range(m + 1, d):
            temp = (2.0 * np.conj(amp) * wlist[n] - sqrt(n) * prev) / sqrt(m)
            prev = wlist[n].copy()
            wlist[n] = temp
            w += 2.0 * np.real(rho[m, n] * wlist[n])

    if len(qs) > 2 and len(ps) > 2:
        dq = qs[1] - qs[0]
        dp = ps[1] - ps[0]
        total = float(w.sum() * dq * dp)
        if abs(total - 1.0) > 0.01:
            warnings.warn(
                f"Wigner grid may not cover the state support (Riemann sum {total:.4f})",
                stacklevel=2,
            )
    return w


# ---------------------------------------------------------------------------
# metrics and constructors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateMetrics:
    fidelity: float
    overlap: complex
    parity: float
    mean_photon: float


def overlap(a: FockState, b: FockState) -> complex:
    if a.cutoff != b.cutoff or a.modes != b.modes:
        raise InvalidDimensionError("overlap needs matching cutoffs and mode counts")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: FockState, b: FockState) -> float:
    return abs(overlap(a, b)) ** 2


def parity_expectation(state: FockState) -> float:
    if state.modes == 1:
        signs = (-1.0) ** np.arange(state.cutoff)
        return float(np.sum(signs * np.abs(state.amplitudes) ** 2))
    n1 = np.arange(state.cutoff)
    signs = (-1.0) ** (n1[:, None] + n1[None, :])
    return float(np.sum(signs * np.abs(state.matrix()) ** 2))


def mean_photon(state: FockState) -> float:
    n1 = np.arange(state.cutoff)
    if state.modes == 1:
        return float(np.sum(n1 * np.abs(state.amplitudes) ** 2))
    tot = n1[:, None] + n1[None, :]
    return float(np.sum(tot * np.abs(state.matrix()) ** 2))


def state_metrics(a: FockState, b: FockState) -> StateMetrics:
    """Pure-state fidelity/overlap between a and b; parity and ⟨n⟩ of a."""
    ov = overlap(a, b)
    return StateMetrics(
        fidelity=abs(ov) ** 2,
        overlap=ov,
        parity=parity_expectation(a),
        mean_photon=mean_photon(a),
    )


def quad_moments(state: FockState, which: str = "q") -> tuple[float, float]:
    """(mean, variance) of a quadrature on a single-mode state."""
    if state.modes != 1:
        raise InvalidDimensionError("quad_moments requires a single-mode state")
    m = _quad_matrix(state.cutoff, which)
    psi = state.amplitudes
    mean = float(np.real(np.vdot(psi, m @ psi)))
    msq = float(np.real(np.vdot(psi, m @ (m @ psi))))
    return mean, msq - mean ** 2


def make_squeezed_vacuum(r: float, theta_r: float = 0.0, cutoff: int = 60) -> FockState:
    """S(r·e^{iθ_r})|0⟩; θ_r = 0 squeezes q, θ_r = π squeezes p."""
    s = squeeze_matrix(cutoff, r, theta_r)
    return FockState(s[:, 0].copy(), cutoff).normalized()


def make_cat(alpha: float, r_prime: float, parity: str = "even",
             cutoff: int = 60, leak_tol: float = TRUNCATION_TOL) -> FockState:
    """(D(α) ± D(−α)) S(r′)|0⟩, normalized; raises on cutoff leakage."""
    if parity not in ("even", "odd"):
        raise InvalidParameterError(f"parity must be 'even' or 'odd', got {parity!r}")
    sq = squeeze_matrix(cutoff, r_prime)[:, 0]
    dplus = displacement_real(cutoff, float(alpha))
    plus = dplus @ sq
    minus = dplus.conj().T @ sq  # D(−α) = D(α)† for real α
    amps = plus + minus if parity == "even" else plus - minus
    norm = np.linalg.norm(amps)
    if norm < 1e-14:
        raise InvalidParameterError(f"degenerate cat (α={alpha}, parity={parity})")
    state = FockState(amps / norm, cutoff)
    if boundary_mass(state) > leak_tol:
        raise TruncationError(
            f"cat(α={alpha}, r'={r_prime}) leaks {boundary_mass(state):.2e} past cutoff {cutoff}"
        )
    return state


def corrected_amplitude(alpha: float, r_prime: float) -> float:
    """α_c = α·e^{r′} (cosh + sinh collapse at θ′ = 0)."""
    return float(alpha) * float(np.exp(r_prime))


@dataclass(frozen=True)
class EffectiveSqueezing:
    delta: float
    db: float


def effective_squeezing(state: FockState, u: float, quadrature: str = "q") -> EffectiveSqueezing:
    """Δ = (1/|u|)·√(−ln|⟨e^{iu·quad}⟩|); dB = −20·log10(2Δ), so vacuum reads 0 dB."""
    if state.modes != 1:
        raise InvalidDimensionError("effective_squeezing requires a single-mode state")
    if u == 0 or not np.isfinite(u):
        raise InvalidParameterError("displacement magnitude must be finite and nonzero")
    op = exp_iuq_matrix(state.cutoff, float(u), quadrature)
    val = abs(np.vdot(state.amplitudes, op @ state.amplitudes))
    if val < 1e-300:
        raise UndefinedMetricError("displacement expectation vanished")
    if val > 1.0 + 1e-9:
        raise NumericalConsistencyError(f"|<D(u)>| = {val} exceeds 1")
    val = min(val, 1.0)
    delta = sqrt(-log(val)) / abs(u) if val < 1.0 else 0.0
    if delta == 0.0:
        raise UndefinedMetricError("state is a perfect eigenstate at this u; Δ = 0")
    return EffectiveSqueezing(delta=delta, db=-20.0 * log10(2.0 * delta))
