# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn

Hypoelastic (Jaumann) stress update and Drucker-Prager return mapping.
Stresses are 3x3 plane-strain tensors, tension positive.
"""

import warnings

import numpy as np

YIELD_NONE = 0
YIELD_SHEAR = 1
YIELD_TENSILE = 2
YIELD_NAMES = {YIELD_NONE: 'none', YIELD_SHEAR: 'shear', YIELD_TENSILE: 'tensile'}

I3 = np.eye(3)


def dp_coefficients(phi, c):
    """
    Slope and intercept of the Drucker-Prager cone fitted to Mohr-Coulomb
    under plane strain.

    :param phi: float. Friction angle in radians.
    :param c: float. Cohesion.
    :return: (q_phi, k_phi).
    """
    t = np.tan(phi)
    den = np.sqrt(9. + 12. * t * t)
    return 3. * t / den, 3. * c / den


class ElasticParams:
    """
    Isotropic linear elasticity.

    :param K: float. Bulk modulus.
    :param G: float. Shear modulus.
    :param nu: float. Poisson ratio, informational only.
    """

    def __init__(self, K, G, nu=None):
        self.K = float(K)
        self.G = float(G)
        self.nu = nu

    @property
    def lame(self):
        return self.K - 2. * self.G / 3.

    def stiffness(self):
        """
        :return: np.array (3, 3, 3, 3). C_ijkl.
        """
        d = I3
        return self.lame * np.einsum('ij,kl->ijkl', d, d) \
            + self.G * (np.einsum('ik,jl->ijkl', d, d) + np.einsum('il,jk->ijkl', d, d))

    def p_wave_speed(self, density):
        return np.sqrt((self.K + 4. * self.G / 3.) / density)

    def check(self, name=''):
        errors = []
        if not (self.K > 0 and self.G > 0):
            errors.append(('elastic-moduli', '%s: K and G must be positive (K=%g, G=%g)'
                           % (name, self.K, self.G)))
        elif self.nu is not None:
            nu = (3. * self.K - 2. * self.G) / (2. * (3. * self.K + self.G))
            if abs(nu - self.nu) > 0.05:
                warnings.warn("%s: Poisson ratio %.3f differs from K/G value %.3f"
                              % (name, self.nu, nu))
        return errors


class DruckerPragerParams:
    """
    :param phi: float. Friction angle (rad).
    :param c: float. Cohesion.
    :param tensile: float. Tensile strength.
    :param psi: float. Dilation angle (rad).
    """

    def __init__(self, phi, c, tensile=0., psi=0.):
        self.phi = float(phi)
        self.c = float(c)
        self.tensile = float(tensile)
        self.psi = float(psi)
        self.q_phi, self.k_phi = dp_coefficients(self.phi, self.c)
        self.q_psi, _ = dp_coefficients(self.psi, 0.)

    @property
    def tension_cap(self):
        if self.q_phi > 0.:
            return min(self.tensile, self.k_phi / self.q_phi)
        return self.tensile

    def check(self, name=''):
        errors = []
        if not 0. <= self.phi < np.pi / 2:
            errors.append(('dp-params', '%s: friction angle out of [0, 90) deg' % name))
        if self.c < 0. or self.tensile < 0.:
            errors.append(('dp-params', '%s: cohesion and tensile strength must be >= 0'
                           % name))
        if not 0. <= self.psi <= self.phi:
            errors.append(('dp-params', '%s: dilation angle must lie in [0, phi]' % name))
        return errors


class StressState:
    """
    Stress of a single point with its accumulated strain.
    """

    def __init__(self, sigma=None, strain=None):
        self.sigma = np.zeros((3, 3)) if sigma is None else np.array(sigma, dtype=np.float64)
        self.strain = np.zeros((2, 2)) if strain is None else np.array(strain, dtype=np.float64)

    @classmethod
    def from_2d(cls, s2, szz=0.):
        sigma = np.zeros((3, 3))
        sigma[:2, :2] = s2
        sigma[2, 2] = szz
        return cls(sigma)

    def invariants(self):
        return stress_invariants(self.sigma)


def embed(t2):
    """2x2 tensor(s) into 3x3 with zero out-of-plane components."""
    t2 = np.asarray(t2)
    t3 = np.zeros(t2.shape[:-2] + (3, 3))
    t3[..., :2, :2] = t2
    return t3


def stress_invariants(sigma):
    """
    :param sigma: np.array (..., 3, 3).
    :return: (I1, J2, mean stress, tau).
    """
    i1 = np.trace(sigma, axis1=-2, axis2=-1)
    sm = i1 / 3.
    s = sigma - sm[..., None, None] * I3
    j2 = 0.5 * np.einsum('...ij,...ij->...', s, s)
    return i1, j2, sm, np.sqrt(np.maximum(j2, 0.))


def elastic_stress_increment(sigma, strain_rate, spin_rate, dt, params):
    """
    Jaumann-rate hypoelastic update.

    :param sigma: np.array (..., 3, 3).
    :param strain_rate: np.array (..., 2, 2) or (..., 3, 3). Symmetric.
    :param spin_rate: np.array (..., 2, 2) or (..., 3, 3). Antisymmetric.
    :param dt: float.
    :param params: ElasticParams.
    :return: np.array (..., 3, 3).
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    d = np.asarray(strain_rate, dtype=np.float64)
    w = np.asarray(spin_rate, dtype=np.float64)
    if d.shape[-1] == 2:
        d = embed(d)
    if w.shape[-1] == 2:
        w = embed(w)
    tr = np.trace(d, axis1=-2, axis2=-1)
    rate = params.lame * tr[..., None, None] * I3 + 2. * params.G * d
    rate = rate + w @ sigma - sigma @ w
    new = sigma + dt * rate
    return 0.5 * (new + np.swapaxes(new, -1, -2))


def dp_return_map(sigma, dp, elastic):
    """
    Drucker-Prager return mapping with shear cone f_s = tau + q*sm - k and
    tension cap f_t = sm - st.

    :param sigma: np.array (..., 3, 3). Trial stress.
    :param dp: DruckerPragerParams.
    :param elastic: ElasticParams.
    :return: (returned stress, yield flags).
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    single = sigma.ndim == 2
    sig = sigma.reshape(-1, 3, 3)
    _, _, sm, tau = stress_invariants(sig)
    dev = sig - sm[:, None, None] * I3
    q, k, st = dp.q_phi, dp.k_phi, dp.tension_cap
    K, G = elastic.K, elastic.G
    norm = np.max(np.abs(sig.reshape(len(sig), -1)), axis=1) if len(sig) else np.zeros(0)
    tol = 1e-9 * np.maximum(max(k, st), norm)
    fs = tau + q * sm - k
    ft = sm - st

    tau_p = k - q * st
    alpha_p = np.sqrt(1. + q * q) - q
    h = tau - tau_p - alpha_p * (sm - st)
    tensile_region = ft > tol
    shear = (fs > tol) & ((~tensile_region) | (h > 0.))
    tensile = tensile_region & ~shear

    # shear return along the dilatant potential
    dlam = np.where(shear, fs, 0.) / (G + K * q * dp.q_psi)
    sm_new = np.where(shear, sm - K * dp.q_psi * dlam, sm)
    tau_new = np.where(shear, k - q * sm_new, tau)
    apex = shear & ((sm_new > st) | (tau_new < 0.))
    sm_new = np.where(apex, st, sm_new)
    tau_new = np.where(apex, max(0., tau_p), tau_new)

    sm_new = np.where(tensile, st, sm_new)
    tau_new = np.where(tensile, np.minimum(tau, max(0., tau_p)), tau_new)

    yielded = shear | tensile
    scale = np.where(tau > 0., tau_new / np.where(tau > 0., tau, 1.), 0.)
    out = np.where(yielded[:, None, None],
                   dev * scale[:, None, None] + sm_new[:, None, None] * I3, sig)
    flags = np.where(shear, YIELD_SHEAR, np.where(tensile, YIELD_TENSILE, YIELD_NONE))
    if single:
        return out[0], int(flags[0])
    return out.reshape(sigma.shape), flags.reshape(sigma.shape[:-2])


def yield_values(sigma, dp):
    """
    :return: (f_s, f_t).
    """
    _, _, sm, tau = stress_invariants(sigma)
    return tau + dp.q_phi * sm - dp.k_phi, sm - dp.tension_cap


class Material:
    """
    Continuum material of a group of material points.

    :param name: str.
    :param density: float.
    :param elastic: ElasticParams.
    :param plastic: DruckerPragerParams or None.
    :param scheme: mpm.TransferScheme.
    """

    def __init__(self, name, density, elastic, plastic=None, scheme=None):
        self.name = name
        self.density = float(density)
        self.elastic = elastic
        self.plastic = plastic
        self.scheme = scheme

    def check(self):
        errors = self.elastic.check(self.name)
        if self.density <= 0.:
            errors.append(('elastic-moduli', '%s: density must be positive' % self.name))
        if self.plastic is not None:
            errors += self.plastic.check(self.name)
        return errors

    def update(self, sigma, strain_rate, spin_rate, dt):
        """
        Elastic predictor then plastic corrector.

        :return: (stress, yield flags).
        """
        trial = elastic_stress_increment(sigma, strain_rate, spin_rate, dt, self.elastic)
        if self.plastic is None:
            return trial, np.zeros(trial.shape[:-2], dtype=int)
        return dp_return_map(trial, self.plastic, self.elastic)
