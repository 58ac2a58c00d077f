"""Teleportation-based squeezing gate, finite-squeezing noise channel and PhANTM.

The reduced two-mode PhANTM step adjoins a p-squeezed ancilla at the cluster
squeezing r, couples through C_Z(tanh 2r0), subtracts photons on the input
mode, p-homodynes it at zero and closes with R†(π/2), S(ln tanh 2r0) and the
residual q-damping.  With zero subtractions the whole step reduces exactly to
the noise channel exp(−εq²/2)·exp(−εp²/(2 tanh²2r0)) times a parity rotation,
which is the map the teleportation gate is defined by.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log, radians, sqrt, tanh, pi

import numpy as np

from . import fock, measurement
from .errors import (
    DegenerateChannelError,
    InvalidParameterError,
    ScheduleOverflowError,
    ZeroProbabilityBranchError,
)

MAX_HOMODYNE_RETRIES = 25


def _noise_factors(cutoff: int, cluster: fock.ClusterSqueezing):
    eps = cluster.epsilon
    if eps >= 1.0:
        raise DegenerateChannelError("noise channel degenerates at r0 = 0 (epsilon >= 1)")
    t = tanh(2.0 * cluster.r0_nats)
    mq = fock.quad_damping_matrix(cutoff, "q", eps)
    mp = fock.quad_damping_matrix(cutoff, "p", eps / t ** 2)
    return mq, mp


def noise_channel(state: fock.FockState, cluster: fock.ClusterSqueezing) -> fock.FockState:
    """Apply exp(−εq²/2)·exp(−εp²/(2 tanh²2r0)) and renormalize."""
    if state.modes != 1:
        raise InvalidParameterError("noise_channel acts on single-mode states")
    mq, mp = _noise_factors(state.cutoff, cluster)
    out = mq @ (mp @ state.amplitudes)
    return fock.FockState(out, state.cutoff).normalized()


def teleport_squeeze(state: fock.FockState, cluster: fock.ClusterSqueezing,
                     r_a: float) -> fock.FockState:
    """𝒮(r, r_a): anti-squeeze by r_a (positive r_a stretches q), then the noise channel.

    Homodyne outcomes are post-selected to zero, so the displacement correction
    C_m drops out.
    """
    if not np.isfinite(r_a):
        raise InvalidParameterError("non-finite gate squeezing")
    s = fock.squeeze_matrix(state.cutoff, -float(r_a))
    mq, mp = _noise_factors(state.cutoff, cluster)
    out = mq @ (mp @ (s @ state.amplitudes))
    return fock.FockState(out, state.cutoff).normalized()


def subtraction_statistics(state: fock.FockState, cluster: fock.ClusterSqueezing,
                           r_a: float, theta_bs_deg: float,
                           apply_gate: bool = True):
    """(P0, n̄) of one photon subtraction, optionally after the anti-squeezing gate."""
    probe = teleport_squeeze(state, cluster, r_a) if apply_gate else state
    beta = measurement.beta_from_angle(theta_bs_deg)
    probs = measurement.subtraction_probabilities(probe, 0, beta)
    ns = np.arange(probs.size)
    return float(probs[0]), float(np.sum(ns * probs))


def schedule_angles(theta0: float, a: float, b: float, count: int) -> np.ndarray:
    """θ_{x+1} = θ_x + a·e^{b·x}, x = 0..count−2, in degrees."""
    if count < 1:
        raise InvalidParameterError("count must be >= 1")
    angles = np.empty(count)
    angles[0] = theta0
    for x in range(count - 1):
        angles[x + 1] = angles[x] + a * np.exp(b * x)
    if np.any(angles >= 90.0):
        raise ScheduleOverflowError(f"schedule reaches {angles.max():.2f} degrees")
    return angles


@dataclass(frozen=True)
class PhantmConfig:
    """Cat-generation run parameters; defaults follow the dual-rail architecture.

    r_db is the squeezing of the two-mode source driving the wire (the figures'
    r axis); the derived cluster quantities come from the `cluster` property.
    """

    r_db: float = 11.5            # two-mode source squeezing, dB
    n_steps: int = 10
    subtractors_per_step: int = 8
    theta0_deg: float = 18.0
    grad_a: float = 0.75
    grad_b: float = 0.35
    ra1_db: float = 2.39
    ra2_db: float = 0.43
    t_ph: int = 55
    cutoff: int = 60
    antisqueeze_enabled: bool = True

    def __post_init__(self):
        if self.n_steps < 1:
            raise InvalidParameterError("n_steps must be >= 1")
        if self.cutoff < 40:
            raise InvalidParameterError("cutoff must be >= 40")

    @property
    def cluster(self) -> fock.ClusterSqueezing:
        return fock.cluster_from_source_db(self.r_db)

    @property
    def ra1_nats(self) -> float:
        return fock.db_to_nats(self.ra1_db)

    @property
    def ra2_nats(self) -> float:
        return fock.db_to_nats(self.ra2_db)

    @property
    def angles(self) -> np.ndarray:
        return schedule_angles(self.theta0_deg, self.grad_a, self.grad_b,
                               self.subtractors_per_step)


@dataclass(frozen=True)
class StepOutcome:
    post_state: fock.FockState
    photons: tuple
    homodyne_m: float
    reset_applied: bool
    antisqueeze_level: int
    flags: tuple = ()


@dataclass(frozen=True)
class CatRunRecord:
    final_state: fock.FockState
    per_step: tuple
    total_photons: int
    seed: int
    truncation_flags: tuple


def cluster_node_state(cluster: fock.ClusterSqueezing, cutoff: int) -> fock.FockState:
    """Fresh cluster-node resource: p-squeezed vacuum at the cluster squeezing."""
    return fock.make_squeezed_vacuum(cluster.r_nats, theta_r=pi, cutoff=cutoff)


def phantm_step(state: fock.FockState, cluster: fock.ClusterSqueezing,
                angles: np.ndarray, rng: np.random.Generator) -> StepOutcome:
    """One reduced PhANTM step; raises ZeroProbabilityBranchError on dead branches."""
    if state.modes != 1:
        raise InvalidParameterError("phantm_step acts on single-mode states")
    if cluster.epsilon >= 1.0:
        raise DegenerateChannelError("C_Z weight vanishes at r0 = 0")
    cutoff = state.cutoff
    g = tanh(2.0 * cluster.r0_nats)

    anc = cluster_node_state(cluster, cutoff)
    joint = fock.product_state(state, anc)
    joint = fock.apply_two_mode_gate(joint, "cz", g=g)

    flags = []
    photons = []
    for theta in angles:
        out = measurement.sample_subtraction(joint, 0, float(theta), rng)
        photons.append(out.n)
        flags.extend(out.flags)
        joint = out.post_state

    survivor, _ = measurement.homodyne_project(joint, 0, pi / 2, 0.0)

    # closing corrections: R†(π/2), S(ln g), residual q-damping exp(−εq²/2)
    v = fock.rotation_matrix(cutoff, -pi / 2) @ survivor.amplitudes
    v = fock.squeeze_matrix(cutoff, log(g)) @ v
    v = fock.quad_damping_matrix(cutoff, "q", cluster.epsilon) @ v
    post = fock.FockState(v, cutoff).normalized()
    if fock.truncation_flagged(post):
        flags.append("truncation:phantm_step")
    return StepOutcome(
        post_state=post,
        photons=tuple(photons),
        homodyne_m=0.0,
        reset_applied=False,
        antisqueeze_level=1,
        flags=tuple(flags),
    )


def run_phantm(config: PhantmConfig, rng: np.random.Generator,
               seed: int = 0) -> CatRunRecord:
    """Full cat-generation sequence with reset logic and the anti-squeezing switch."""
    cluster = config.cluster
    angles = config.angles
    state = cluster_node_state(cluster, config.cutoff)
    steps = []
    run_flags = []
    total = 0
    for _ in range(config.n_steps):
        outcome = None
        for _attempt in range(MAX_HOMODYNE_RETRIES):
            try:
                outcome = phantm_step(state, cluster, angles, rng)
                break
            except ZeroProbabilityBranchError:
                run_flags.append("retry:homodyne")
        if outcome is None:
            raise ZeroProbabilityBranchError(
                f"homodyne branch stayed dead after {MAX_HOMODYNE_RETRIES} retries"
            )
        got = sum(outcome.photons)
        if total == 0 and got == 0:
            # reinitialize to the squeezed cluster state; no gate afterwards
            state = cluster_node_state(cluster, config.cutoff)
            outcome = StepOutcome(
                post_state=state,
                photons=outcome.photons,
                homodyne_m=0.0,
                reset_applied=True,
                antisqueeze_level=1,
                flags=outcome.flags,
            )
        else:
            total += got
            state = outcome.post_state
            level = 1 if total < config.t_ph else 2
            if config.antisqueeze_enabled:
                r_a = config.ra1_nats if level == 1 else config.ra2_nats
                state = teleport_squeeze(state, cluster, r_a)
            outcome = StepOutcome(
                post_state=state,
                photons=outcome.photons,
                homodyne_m=0.0,
                reset_applied=False,
                antisqueeze_level=level,
                flags=outcome.flags,
            )
        run_flags.extend(outcome.flags)
        steps.append(outcome)
    return CatRunRecord(
        final_state=state,
        per_step=tuple(steps),
        total_photons=total,
        seed=seed,
        truncation_flags=tuple(run_flags),
    )
