"""Constitutive laws for the rod: diagonal stiffness/compliance pairs,
strain energy, complementary energy and resultant contact forces.

Compliance is stored explicitly so that rigid strain directions are
first-class values: a zero compliance entry encodes a constraint (e.g.
shear rigidity or inextensibility) without any infinities.  Such laws can
only be used with the mixed formulation.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstrainedLaw

# stiffness/compliance diagonal ordering
_COMPONENTS = ("ke", "ksy", "ksz", "kt", "kby", "kbz")


@dataclass(frozen=True)
class ElasticLaw:
    """Diagonal quadratic law (ke, ksy, ksz | kt, kby, kbz).

    ``stiffness`` is None when at least one direction is rigid; the
    compliance diagonal is always finite and nonnegative.
    """

    compliance: np.ndarray
    stiffness: np.ndarray | None = field(default=None)

    def __post_init__(self):
        c = np.asarray(self.compliance, dtype=float)
        if c.shape != (6,) or np.any(c < 0.0):
            raise ValueError("compliance must be 6 nonnegative diagonal entries")
        object.__setattr__(self, "compliance", c)
        if self.stiffness is not None:
            k = np.asarray(self.stiffness, dtype=float)
            if k.shape != (6,) or np.any(k <= 0.0):
                raise ValueError("stiffness must be 6 positive diagonal entries")
            object.__setattr__(self, "stiffness", k)

    @classmethod
    def from_stiffness(cls, ke, ksy, ksz, kt, kby, kbz):
        k = np.array([ke, ksy, ksz, kt, kby, kbz], dtype=float)
        if np.any(k <= 0.0):
            raise ValueError("all stiffness entries must be positive")
        return cls(compliance=1.0 / k, stiffness=k)

    @classmethod
    def from_compliance(cls, ke, ksy, ksz, kt, kby, kbz):
        """Entries are inverse stiffnesses; zeros encode rigid directions."""
        c = np.array([ke, ksy, ksz, kt, kby, kbz], dtype=float)
        k = 1.0 / c if np.all(c > 0.0) else None
        return cls(compliance=c, stiffness=k)

    @classmethod
    def from_quadratic_cross_section(cls, E, G, w):
        """Saint-Venant stiffnesses of a square w x w cross-section."""
        A = w * w
        I = w**4 / 12.0
        return cls.from_stiffness(E * A, G * A, G * A, 2.0 * G * I, E * I, E * I)

    @classmethod
    def from_circular_cross_section(cls, E, G, r):
        A = np.pi * r**2
        I = np.pi * r**4 / 4.0
        return cls.from_stiffness(E * A, G * A, G * A, 2.0 * G * I, E * I, E * I)

    @classmethod
    def from_rectangular_cross_section(cls, E, G, h, w, kt=None):
        """Height h and width w; ``kt`` overrides the geometric torsion
        stiffness (rectangular sections have non-polar torsion constants)."""
        A = h * w
        Iy = w * h**3 / 12.0
        Iz = h * w**3 / 12.0
        if kt is None:
            kt = G * (Iy + Iz)
        return cls.from_stiffness(E * A, G * A, G * A, kt, E * Iy, E * Iz)

    @property
    def is_constrained(self):
        return self.stiffness is None

    @property
    def stiffness_gamma(self):
        self._require_finite()
        return self.stiffness[:3]

    @property
    def stiffness_kappa(self):
        self._require_finite()
        return self.stiffness[3:]

    @property
    def compliance_gamma(self):
        return self.compliance[:3]

    @property
    def compliance_kappa(self):
        return self.compliance[3:]

    def _require_finite(self):
        if self.stiffness is None:
            raise ConstrainedLaw(
                "law has rigid directions; only usable through compliance (MX)"
            )

    def as_dict(self):
        return dict(zip(_COMPONENTS, self.compliance))


@dataclass(frozen=True)
class StrainState:
    """Strain measures at one point: stretched quantities, the reference
    tangent length J and the arc-length strain measures."""

    gamma_bar: np.ndarray
    kappa_bar: np.ndarray
    J: float
    eps_gamma: np.ndarray
    eps_kappa: np.ndarray

    @classmethod
    def from_measures(cls, gamma_bar, kappa_bar, gamma_bar0, kappa_bar0, J):
        if J <= 0.0:
            raise ValueError("reference tangent length must be positive")
        gamma_bar = np.asarray(gamma_bar, dtype=float)
        kappa_bar = np.asarray(kappa_bar, dtype=float)
        return cls(
            gamma_bar=gamma_bar,
            kappa_bar=kappa_bar,
            J=float(J),
            eps_gamma=(gamma_bar - np.asarray(gamma_bar0, dtype=float)) / J,
            eps_kappa=(kappa_bar - np.asarray(kappa_bar0, dtype=float)) / J,
        )


def contact_forces(law, state):
    """Resultant contact force and moment n = C_gamma e_gamma, m = C_kappa e_kappa."""
    n = law.stiffness_gamma * state.eps_gamma
    m = law.stiffness_kappa * state.eps_kappa
    return n, m


def strain_energy(law, state):
    """Quadratic strain energy density (per reference arc length)."""
    n, m = contact_forces(law, state)
    return 0.5 * (n @ state.eps_gamma + m @ state.eps_kappa)


def complementary_energy(law, n, m):
    """Complementary energy density; finite also for constrained laws."""
    n = np.asarray(n, dtype=float)
    m = np.asarray(m, dtype=float)
    return 0.5 * (n @ (law.compliance_gamma * n) + m @ (law.compliance_kappa * m))
