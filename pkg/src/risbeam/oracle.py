"""Scalar feedback interface that keeps all channel state hidden.

Optimizers only ever see two numbers per probed beam pair: the power the
user reports back and the echo power collected at the DFBS.
"""

from dataclasses import dataclass

import numpy as np

from .channel import generate_channels
from .errors import InvalidInputError

UNIT_MODULUS_TOL = 1e-9
POWER_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class BeamPair:
    """Active beam ``w`` (length M) and RIS reflection ``xi`` (length N)."""

    w: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=complex)
        xi = np.asarray(self.xi, dtype=complex)
        if w.ndim != 1 or xi.ndim != 1:
            raise InvalidInputError("w and xi must be 1-D")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(xi))):
            raise InvalidInputError("beam entries must be finite")
        if np.any(np.abs(np.abs(xi) - 1.0) > UNIT_MODULUS_TOL):
            raise InvalidInputError("RIS coefficients must be unit-modulus")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "xi", xi)

    @property
    def power(self):
        return float(np.vdot(self.w, self.w).real)


class FeedbackOracle:
    """Measurement-only view of one scenario.

    Each call to a ``measure_*`` method corresponds to one pilot slot and
    bumps the matching counter by one. With ``measurement_noise`` enabled,
    every measurement draws fresh AWGN from a stream seeded by
    ``scenario.rng_seed``.
    """

    def __init__(self, scenario, measurement_noise=False, channels=None):
        self.scenario = scenario
        self.measurement_noise = bool(measurement_noise)
        self.eval_count_echo = 0
        self.eval_count_user = 0
        self._rng = np.random.default_rng(np.random.SeedSequence(scenario.rng_seed, spawn_key=(1,)))

        ch = generate_channels(scenario) if channels is None else channels
        if ch.M != scenario.M or ch.N != scenario.N:
            raise InvalidInputError("channel dimensions do not match the scenario")
        self._channels = ch
        self._h_bu = ch.h_bu
        self._B_t = ch.g_rt.conj()[:, None] * ch.H_br
        self._B_u = ch.h_ru.conj()[:, None] * ch.H_br
        self._rho = np.asarray(scenario.rho, dtype=complex)

    @property
    def M(self):
        return self.scenario.M

    @property
    def N(self):
        return self.scenario.N

    @property
    def P(self):
        return self.scenario.P

    def _check(self, beam):
        if beam.w.shape != (self.M,) or beam.xi.shape != (self.N,):
            raise InvalidInputError(
                f"beam dimensions {beam.w.shape}/{beam.xi.shape} do not match M={self.M}, N={self.N}"
            )
        if abs(beam.power - self.P) > POWER_RTOL * self.P:
            raise InvalidInputError(f"||w||^2 = {beam.power} violates P = {self.P}")

    def _user_amplitude(self, w, xi):
        return np.vdot(self._h_bu, w) + xi @ (self._B_u @ w)

    def _echo(self, w, xi):
        s_t = xi @ (self._B_t @ w)
        s_u = xi @ (self._B_u @ w)
        s_d = np.vdot(self._h_bu, w)
        back_t = (xi @ self._B_t).conj()
        back_u = (xi @ self._B_u).conj()
        r = self._rho
        return (
            back_t * (r[0] * s_t)
            + back_u * (r[1] * s_u + r[4] * s_d)
            + self._h_bu * (r[2] * s_u + r[3] * s_d)
        )

    def _awgn(self, var, size=None):
        scale = np.sqrt(var / 2)
        if size is None:
            return complex(self._rng.normal(0, scale), self._rng.normal(0, scale))
        return self._rng.normal(0, scale, size) + 1j * self._rng.normal(0, scale, size)

    def measure_user_power(self, beam):
        """Power the user reports for one pilot slot, ``|h_u^H w|^2 + sigma_c^2``."""
        self._check(beam)
        self.eval_count_user += 1
        amp = self._user_amplitude(beam.w, beam.xi)
        if self.measurement_noise:
            return float(abs(amp + self._awgn(self.scenario.sigma_c_sq)) ** 2)
        return float(abs(amp) ** 2 + self.scenario.sigma_c_sq)

    def measure_echo_power(self, beam):
        """Total echo power ``||y_s||^2`` at the DFBS; this is the fitness."""
        self._check(beam)
        self.eval_count_echo += 1
        y = self._echo(beam.w, beam.xi)
        if self.measurement_noise:
            y = y + self._awgn(self.scenario.sigma_s_sq, self.M)
        return float(np.vdot(y, y).real)

    def measure(self, beam):
        """One probe slot: returns ``(echo_power, user_power)``."""
        return self.measure_echo_power(beam), self.measure_user_power(beam)

    def user_snr(self, beam):
        if self.scenario.sigma_c_sq == 0:
            raise ZeroDivisionError("user SNR undefined for sigma_c_sq = 0")
        self._check(beam)
        return float(abs(self._user_amplitude(beam.w, beam.xi)) ** 2 / self.scenario.sigma_c_sq)

    def feasibility(self, beam, eta_min, eta_max):
        if eta_min > eta_max:
            raise InvalidInputError(f"eta_min={eta_min} exceeds eta_max={eta_max}")
        return eta_min <= self.measure_user_power(beam) <= eta_max

    def final_metrics(self, beam):
        """Noiseless ``(echo_power, user_power)`` of a trained beam; not counted."""
        self._check(beam)
        y = self._echo(beam.w, beam.xi)
        user = abs(self._user_amplitude(beam.w, beam.xi)) ** 2 + self.scenario.sigma_c_sq
        return float(np.vdot(y, y).real), float(user)

    def counters(self):
        return self.eval_count_echo, self.eval_count_user
