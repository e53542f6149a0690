"""Noise model: physical photonic parameters to per-face flip and loss rates.

Computational errors are one- and two-qubit depolarizing events attached to
the gates that build each redundantly-encoded qubit; only their Z-component
matters for the tracked error channel (the X-component belongs to the dual
channel, decoded independently). Independent Z-flip events combine by XOR:

    p = (1 - prod_i (1 - 2 e_i)) / 2

Loss is heralded: a face qubit is lost when any of its fusion links fails
all its attempts, or when any constituent photon is lost at emission or
detection. A lost block decoheres completely, so the X measurement of a
lost qubit returns a uniformly random bit; that bit is sampled into
`lost_outcomes`, separate from the ordinary `flips`.
"""

from dataclasses import dataclass

import numpy as np

from .lattice import QubitRole

# Z-or-Y fraction of a single-qubit depolarizing event (2 of 3 Paulis)
SINGLE_QUBIT_Z_FRACTION = 2.0 / 3.0
# Z-or-Y-on-tracked-qubit fraction of a two-qubit depolarizing event
# (8 of 15 Pauli pairs act as Z or Y on the tracked side)
TWO_QUBIT_Z_FRACTION = 8.0 / 15.0


@dataclass(frozen=True)
class PhysicalParams:
    """Physical error rates of the source, fusion and detection stages.

    p1        single-qubit depolarizing rate (faulty precession Hadamard,
              faulty measurement)
    p2        two-qubit depolarizing rate of the emission CNOT
    p2_prime  two-qubit depolarizing rate of a successful fusion
    p_dot     photon loss probability at emission
    p_det     photon loss probability at detection
    R         fusion attempts per link
    """

    p1: float
    p2: float
    p2_prime: float
    p_dot: float
    p_det: float
    R: int

    def __post_init__(self):
        for name in ("p1", "p2", "p2_prime", "p_dot", "p_det"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.R < 0 or int(self.R) != self.R:
            raise ValueError(f"R must be a non-negative integer, got {self.R}")

    @classmethod
    def identified(cls, p_C, p_L, R):
        """Two-parameter family: all gate errors p_C, all loss p_L."""
        return cls(p1=p_C, p2=p_C, p2_prime=p_C, p_dot=p_L, p_det=p_L, R=R)

    @property
    def p_C(self):
        if not (self.p1 == self.p2 == self.p2_prime):
            raise ValueError("gate rates are not identified to a single p_C")
        return self.p1

    @property
    def p_L(self):
        if self.p_dot != self.p_det:
            raise ValueError("loss rates are not identified to a single p_L")
        return self.p_dot


@dataclass(frozen=True)
class QubitChannel:
    """Effective per-qubit rates for one face role."""

    p_flip: float
    p_lost: float
    p_linkfail: float


def link_success_prob(R):
    """Probability that a link forms within R fusion attempts: 1 - 2^-R."""
    if R < 0:
        raise ValueError(f"R must be non-negative, got {R}")
    return 1.0 - 0.5 ** R


def effective_flip_prob(role, params):
    """XOR-combined Z-flip probability of one face qubit.

    Per constituent photon: one single-qubit depolarizing event (precession)
    and one two-qubit depolarizing event (emission). Per formed link: one
    two-qubit depolarizing event. One final single-qubit event for the
    measurement.
    """
    n = role.photons(params.R)
    e_h = SINGLE_QUBIT_Z_FRACTION * params.p1
    e_e = TWO_QUBIT_Z_FRACTION * params.p2
    e_l = TWO_QUBIT_Z_FRACTION * params.p2_prime
    e_m = SINGLE_QUBIT_Z_FRACTION * params.p1
    prod = ((1.0 - 2.0 * e_h) ** n
            * (1.0 - 2.0 * e_e) ** n
            * (1.0 - 2.0 * e_l) ** role.fusion_bonds
            * (1.0 - 2.0 * e_m))
    return 0.5 * (1.0 - prod)


def effective_loss_prob(role, params):
    """Probability the qubit is heralded lost to photon loss.

    Every constituent photon must be both emitted and detected; losing any
    one photon decoheres the whole redundantly-encoded block.
    """
    n = role.photons(params.R)
    return 1.0 - ((1.0 - params.p_dot) * (1.0 - params.p_det)) ** n


def qubit_channel(role, params):
    """Collected effective rates for one face role."""
    return QubitChannel(
        p_flip=effective_flip_prob(role, params),
        p_lost=effective_loss_prob(role, params),
        p_linkfail=1.0 - link_success_prob(params.R),
    )


@dataclass
class FaceTables:
    """Per-face sampling probabilities for one (lattice, params) pair."""

    p_flip: np.ndarray       # flip probability of a surviving face
    p_photon_loss: np.ndarray  # loss from photon loss alone
    p_link_loss: np.ndarray    # loss from any fusion link failing all tries
    p_lost: np.ndarray         # combined heralded-loss probability


def face_tables(lat, params):
    p_fail = 1.0 - link_success_prob(params.R)
    bonds = lat.fusion_bonds.astype(np.int64)
    p_link = 1.0 - (1.0 - p_fail) ** bonds
    p_flip = np.empty(lat.n_faces)
    p_photon = np.empty(lat.n_faces)
    for b in (2, 4):
        sel = bonds == b
        role = QubitRole(b)
        p_flip[sel] = effective_flip_prob(role, params)
        p_photon[sel] = effective_loss_prob(role, params)
    p_lost = 1.0 - (1.0 - p_link) * (1.0 - p_photon)
    return FaceTables(p_flip, p_photon, p_link, p_lost)


@dataclass
class ErrorConfig:
    """One sampled error realization over the faces of a lattice.

    flips          Z flips on surviving faces (always zero on lost faces)
    lost           heralded-loss mask
    lost_outcomes  uniformly random measurement bits of the lost faces;
                   the physically observed parity toggles are
                   flips XOR lost_outcomes
    mode           'photonic' or 'phenomenological'
    """

    flips: np.ndarray
    lost: np.ndarray
    lost_outcomes: np.ndarray
    mode: str

    def __post_init__(self):
        if (self.flips & self.lost).any():
            raise ValueError("lost faces cannot carry a sampled gate flip")
        if (self.lost_outcomes & ~self.lost.astype(bool)).any():
            raise ValueError("lost_outcomes only defined on lost faces")

    def total_flips(self):
        """Parity-toggling faces as seen by the syndrome measurements."""
        return self.flips ^ self.lost_outcomes


def sample_error_config(lat, params, rng, tables=None):
    """Draw one photonic error configuration.

    Per face, in order: any of its fusion links fails all R attempts
    (heralded loss); else the block loses a photon (heralded loss); else a
    gate flip with the effective rate. Lost faces then draw the uniform
    measurement bit. Four uniform vectors are always drawn, in this order,
    so replay is stable.
    """
    if tables is None:
        tables = face_tables(lat, params)
    F = lat.n_faces
    u_link = rng.random(F)
    u_photon = rng.random(F)
    u_flip = rng.random(F)
    u_out = rng.random(F)
    lost = (u_link < tables.p_link_loss) | (u_photon < tables.p_photon_loss)
    flips = ~lost & (u_flip < tables.p_flip)
    outcomes = lost & (u_out < 0.5)
    return ErrorConfig(flips.astype(np.uint8), lost.astype(np.uint8),
                       outcomes.astype(np.uint8), "photonic")


def phenomenological_config(lat, p_flip, p_lost, rng):
    """Direct per-face rates, bypassing the photonic mapping."""
    if not 0.0 <= p_flip <= 1.0 or not 0.0 <= p_lost <= 1.0:
        raise ValueError("probabilities must lie in [0, 1]")
    F = lat.n_faces
    u_lost = rng.random(F)
    u_flip = rng.random(F)
    u_out = rng.random(F)
    lost = u_lost < p_lost
    flips = ~lost & (u_flip < p_flip)
    outcomes = lost & (u_out < 0.5)
    return ErrorConfig(flips.astype(np.uint8), lost.astype(np.uint8),
                       outcomes.astype(np.uint8), "phenomenological")
