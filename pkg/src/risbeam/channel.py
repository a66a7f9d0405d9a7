"""
Deterministic line-of-sight mmWave channels for the RIS-assisted ISAC link.

Geometry conventions
--------------------
* The DFBS carries an M-element ULA whose axis is the global y-axis.
* The RIS is an N1 x N2 URA lying in the y-z plane. Axis 1 (index n1) runs
  along y, axis 2 (index n2) along z. Elements are flattened row-major,
  i.e. flat index = n1 * N2 + n2.
* Every link is a single LoS path with amplitude
  ``sqrt(10**(-ref_pathloss_db/10)) * d**(-exponent/2)`` and propagation
  phase ``exp(-j 2 pi d / wavelength)``. The direct DFBS-user link can take
  an extra blockage loss (``direct_link_loss_db``).

Channel objects follow the Hermitian conventions of the signal model: the
user sees ``h_u^H w`` with ``h_u^H = h_bu^H + h_ru^H diag(xi) H_br``, and the
RIS-target link enters the echo model through ``diag(g_rt^H) H_br``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError, InvalidInputError

DEFAULT_RHO = (1.0 + 0j, 0.3 + 0j, 0.3 + 0j, 0.3 + 0j, 0.3 + 0j)

_ULA_AXIS = np.array([0.0, 1.0, 0.0])
_URA_AXIS1 = np.array([0.0, 1.0, 0.0])
_URA_AXIS2 = np.array([0.0, 0.0, 1.0])
_URA_NORMAL = np.array([-1.0, 0.0, 0.0])


def _as_point(value, name):
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} must be a finite 3-vector, got {value!r}")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class Scenario:
    """One physical setup: node positions, array sizes, powers and echo gains.

    Powers and noise variances are linear (watts). ``rho`` holds the five
    complex echo coefficients in the order target, RIS-user-RIS,
    RIS-user-DFBS, DFBS-user-DFBS, DFBS-user-RIS.
    """

    dfbs_pos: tuple = (0.0, 0.0, 15.0)
    ris_pos: tuple = (30.0, 0.0, 10.0)
    target_pos: tuple = (15.0, -25.0, 0.0)
    user_pos: tuple = (15.0, 30.0, 0.0)
    M: int = 8
    N1: int = 8
    N2: int = 8
    wavelength: float = 0.0107
    element_spacing: float = 0.5
    pathloss_exponent_los: float = 2.0
    ref_pathloss_db: float = 30.0
    direct_link_loss_db: float = 0.0
    P: float = 1.0
    sigma_c_sq: float = 1e-10
    sigma_s_sq: float = 1e-20
    rho: tuple = field(default=DEFAULT_RHO)
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("dfbs_pos", "ris_pos", "target_pos", "user_pos"):
            object.__setattr__(self, name, _as_point(getattr(self, name), name))
        rho = tuple(complex(r) for r in self.rho)
        if len(rho) != 5 or not all(np.isfinite(r) for r in rho):
            raise InvalidInputError("rho must hold 5 finite complex coefficients")
        object.__setattr__(self, "rho", rho)
        if int(self.M) < 1 or int(self.N1) < 1 or int(self.N2) < 1:
            raise InvalidInputError("M, N1 and N2 must be >= 1")
        if not self.P > 0:
            raise InvalidInputError("P must be > 0")
        if self.sigma_c_sq < 0 or self.sigma_s_sq < 0:
            raise InvalidInputError("noise variances must be >= 0")
        if self.direct_link_loss_db < 0:
            raise InvalidInputError("direct_link_loss_db must be >= 0")
        if not (self.wavelength > 0 and self.element_spacing > 0):
            raise InvalidInputError("wavelength and element_spacing must be > 0")
        pts = [self.dfbs_pos, self.ris_pos, self.target_pos, self.user_pos]
        for a in range(4):
            for b in range(a + 1, 4):
                if pts[a] == pts[b]:
                    raise DegenerateGeometryError(
                        f"nodes {a} and {b} share position {pts[a]}"
                    )

    @property
    def N(self):
        return self.N1 * self.N2


@dataclass(frozen=True)
class ChannelSet:
    H_br: np.ndarray  # (N, M) DFBS -> RIS
    h_bu: np.ndarray  # (M,)  DFBS -> user
    h_ru: np.ndarray  # (N,)  RIS -> user
    g_rt: np.ndarray  # (N,)  RIS -> target

    def __post_init__(self):
        N, M = np.shape(self.H_br)
        if np.shape(self.h_bu) != (M,) or np.shape(self.h_ru) != (N,) or np.shape(self.g_rt) != (N,):
            raise InvalidInputError("channel dimensions are inconsistent")
        for arr in (self.H_br, self.h_bu, self.h_ru, self.g_rt):
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError("channel entries must be finite")

    @property
    def M(self):
        return self.H_br.shape[1]

    @property
    def N(self):
        return self.H_br.shape[0]


def steering_vector_ula(angle, M, spacing_over_wavelength=0.5):
    """ULA response ``exp(j 2 pi s m sin(angle))`` for m = 0..M-1."""
    if not np.isfinite(angle):
        raise InvalidInputError(f"angle must be finite, got {angle!r}")
    if M < 1:
        raise InvalidInputError("M must be >= 1")
    m = np.arange(M)
    return np.exp(1j * 2 * np.pi * spacing_over_wavelength * m * np.sin(angle))


def steering_vector_ura(azimuth, elevation, N1, N2, spacing_over_wavelength=0.5):
    """URA response as the Kronecker product of the two axis responses.

    Axis 1 carries the phase progression ``sin(az) cos(el)``, axis 2
    ``sin(el)``; the result is flattened row-major over (N1, N2).
    """
    if not (np.isfinite(azimuth) and np.isfinite(elevation)):
        raise InvalidInputError("angles must be finite")
    if N1 < 1 or N2 < 1:
        raise InvalidInputError("N1 and N2 must be >= 1")
    s = spacing_over_wavelength
    a1 = np.exp(1j * 2 * np.pi * s * np.arange(N1) * np.sin(azimuth) * np.cos(elevation))
    a2 = np.exp(1j * 2 * np.pi * s * np.arange(N2) * np.sin(elevation))
    return np.kron(a1, a2)


def _direction(src, dst):
    diff = np.asarray(dst, float) - np.asarray(src, float)
    d = float(np.linalg.norm(diff))
    if d == 0.0:
        raise DegenerateGeometryError(f"coincident nodes at {src}")
    return diff / d, d


def _ula_angle(u):
    return float(np.arcsin(np.clip(u @ _ULA_AXIS, -1.0, 1.0)))


def _ura_angles(u):
    elevation = float(np.arcsin(np.clip(u @ _URA_AXIS2, -1.0, 1.0)))
    azimuth = float(np.arctan2(u @ _URA_AXIS1, u @ _URA_NORMAL))
    return azimuth, elevation


def path_gain(distance, scenario):
    """Complex LoS gain: free-space-style amplitude times propagation phase."""
    amp = np.sqrt(10 ** (-scenario.ref_pathloss_db / 10)) * distance ** (-scenario.pathloss_exponent_los / 2)
    return amp * np.exp(-1j * 2 * np.pi * distance / scenario.wavelength)


def generate_channels(scenario):
    """Build the four LoS channels from the scenario geometry (no randomness)."""
    s = scenario.element_spacing
    M, N1, N2 = scenario.M, scenario.N1, scenario.N2

    u_br, d_br = _direction(scenario.dfbs_pos, scenario.ris_pos)
    u_bu, d_bu = _direction(scenario.dfbs_pos, scenario.user_pos)
    u_ru, d_ru = _direction(scenario.ris_pos, scenario.user_pos)
    u_rt, d_rt = _direction(scenario.ris_pos, scenario.target_pos)

    a_dep = steering_vector_ula(_ula_angle(u_br), M, s)
    a_arr = steering_vector_ura(*_ura_angles(-u_br), N1, N2, s)
    H_br = path_gain(d_br, scenario) * np.outer(a_arr, a_dep.conj())

    blockage = 10 ** (-scenario.direct_link_loss_db / 20)
    h_bu = blockage * np.conj(path_gain(d_bu, scenario)) * steering_vector_ula(_ula_angle(u_bu), M, s)
    h_ru = np.conj(path_gain(d_ru, scenario) * steering_vector_ura(*_ura_angles(u_ru), N1, N2, s))
    g_rt = np.conj(path_gain(d_rt, scenario) * steering_vector_ura(*_ura_angles(u_rt), N1, N2, s))
    return ChannelSet(H_br=H_br, h_bu=h_bu, h_ru=h_ru, g_rt=g_rt)


def _check_xi(channels, xi, tol=1e-9):
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (channels.N,):
        raise InvalidInputError(f"xi must have length {channels.N}, got shape {xi.shape}")
    if np.any(np.abs(np.abs(xi) - 1.0) > tol):
        raise InvalidInputError("RIS coefficients must be unit-modulus")
    return xi


def _check_w(channels, w):
    w = np.asarray(w, dtype=complex)
    if w.shape != (channels.M,):
        raise InvalidInputError(f"w must have length {channels.M}, got shape {w.shape}")
    return w


def effective_row(channels, xi, form="phi"):
    """Row vector ``h_u^H`` of the combined direct + RIS channel.

    ``form="phi"`` evaluates ``h_bu^H + h_ru^H diag(xi) H_br``;
    ``form="xi"`` evaluates ``h_bu^H + xi^T diag(h_ru^H) H_br``.
    """
    xi = _check_xi(channels, xi)
    if form == "phi":
        cascade = (channels.h_ru.conj() * xi) @ channels.H_br
    elif form == "xi":
        cascade = xi @ (channels.h_ru.conj()[:, None] * channels.H_br)
    else:
        raise InvalidInputError(f"unknown form {form!r}")
    return channels.h_bu.conj() + cascade


def effective_channel(channels, xi, form="phi"):
    """Combined user channel ``h_u`` (so the user receives ``vdot(h_u, w)``)."""
    return effective_row(channels, xi, form).conj()


def echo_signal(channels, rho, w, xi, noise=None, P=None, rtol=1e-6):
    """Superimposed DFBS echo for a unit pilot, summed over the five paths.

    With ``B_t = diag(g_rt^H) H_br`` and ``B_u = diag(h_ru^H) H_br``:

        y = rho1 B_t^H xi* (xi^T B_t w) + rho2 B_u^H xi* (xi^T B_u w)
          + rho3 h_bu (xi^T B_u w) + rho4 h_bu (h_bu^H w)
          + rho5 B_u^H xi* (h_bu^H w) + noise

    When ``P`` is given the transmit power constraint is enforced.
    """
    w = _check_w(channels, w)
    xi = _check_xi(channels, xi)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (5,):
        raise InvalidInputError("rho must hold 5 coefficients")
    if P is not None and abs(np.vdot(w, w).real - P) > rtol * P:
        raise InvalidInputError(f"||w||^2 must equal P={P}")

    B_t = channels.g_rt.conj()[:, None] * channels.H_br
    B_u = channels.h_ru.conj()[:, None] * channels.H_br
    s_t = xi @ (B_t @ w)
    s_u = xi @ (B_u @ w)
    s_d = np.vdot(channels.h_bu, w)
    back_t = (xi @ B_t).conj()
    back_u = (xi @ B_u).conj()

    y = (
        rho[0] * back_t * s_t
        + rho[1] * back_u * s_u
        + rho[2] * channels.h_bu * s_u
        + rho[3] * channels.h_bu * s_d
        + rho[4] * back_u * s_d
    )
    if noise is not None:
        noise = np.asarray(noise, dtype=complex)
        if noise.shape != (channels.M,):
            raise InvalidInputError("noise must have length M")
        y = y + noise
    return y
