import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import echo_reference, random_channels, random_w, random_xi
from risbeam.channel import (
    ChannelSet,
    Scenario,
    echo_signal,
    effective_channel,
    effective_row,
    generate_channels,
    path_gain,
    steering_vector_ula,
    steering_vector_ura,
)
from risbeam.errors import DegenerateGeometryError, InvalidInputError


class TestSteering:
    def test_ula_broadside(self):
        np.testing.assert_allclose(steering_vector_ula(0.0, 4, 0.5), np.ones(4))

    def test_ula_single_element(self):
        np.testing.assert_allclose(steering_vector_ula(1.234, 1, 0.5), [1.0])

    def test_ula_hand_value(self):
        a = steering_vector_ula(np.pi / 6, 2, 0.5)
        np.testing.assert_allclose(a, [1.0, np.exp(1j * np.pi * 0.5)], atol=1e-15)

    def test_ula_rejects_nonfinite(self):
        with pytest.raises(InvalidInputError):
            steering_vector_ula(np.nan, 4)

    def test_ura_broadside(self):
        np.testing.assert_allclose(steering_vector_ura(0, 0, 2, 2, 0.5), np.ones(4))

    def test_ura_single_element(self):
        np.testing.assert_allclose(steering_vector_ura(0.3, -0.7, 1, 1, 0.5), [1.0])

    def test_ura_degenerates_to_ula(self):
        np.testing.assert_allclose(
            steering_vector_ura(np.pi / 4, 0, 2, 1, 0.5), steering_vector_ula(np.pi / 4, 2, 0.5)
        )

    def test_ura_row_major(self):
        az, el = 0.4, 0.2
        a = steering_vector_ura(az, el, 3, 2, 0.5).reshape(3, 2)
        p1 = np.pi * np.sin(az) * np.cos(el)
        p2 = np.pi * np.sin(el)
        for n1 in range(3):
            for n2 in range(2):
                assert a[n1, n2] == pytest.approx(np.exp(1j * (n1 * p1 + n2 * p2)))

    def test_ura_rejects_nonfinite(self):
        with pytest.raises(InvalidInputError):
            steering_vector_ura(0.0, np.inf, 2, 2)

    @given(st.floats(-10, 10), st.floats(-10, 10), st.integers(1, 5), st.integers(1, 5))
    def test_unit_modulus(self, az, el, n1, n2):
        np.testing.assert_allclose(np.abs(steering_vector_ura(az, el, n1, n2)), 1.0)


class TestGenerateChannels:
    def test_default_geometry_dimensions(self):
        sc = Scenario(M=8, N1=8, N2=8)
        ch = generate_channels(sc)
        assert ch.H_br.shape == (64, 8)
        assert ch.h_bu.shape == (8,)
        assert ch.h_ru.shape == (64,)
        assert ch.g_rt.shape == (64,)
        for arr in (ch.H_br, ch.h_bu, ch.h_ru, ch.g_rt):
            assert np.all(np.isfinite(arr))
            assert np.any(arr != 0)

    def test_broadside_user_equal_magnitudes(self):
        # user straight along +x from the DFBS: broadside to a y-axis ULA
        sc = Scenario(user_pos=(20.0, 0.0, 15.0), M=4, N1=2, N2=2)
        ch = generate_channels(sc)
        expected = abs(path_gain(20.0, sc))
        np.testing.assert_allclose(np.abs(ch.h_bu), expected, rtol=1e-12)
        np.testing.assert_allclose(ch.h_bu / ch.h_bu[0], np.ones(4), atol=1e-12)

    def test_distance_doubling_halves_norm(self):
        base = np.array([0.0, 0.0, 15.0])
        offset = np.array([10.0, 12.0, -15.0])
        near = Scenario(user_pos=tuple(base + offset), M=4, N1=2, N2=2)
        far = Scenario(user_pos=tuple(base + 2 * offset), M=4, N1=2, N2=2)
        ratio = np.linalg.norm(generate_channels(far).h_bu) / np.linalg.norm(generate_channels(near).h_bu)
        assert ratio == pytest.approx(0.5, rel=1e-12)

    def test_H_br_rank_one(self):
        ch = generate_channels(Scenario(M=4, N1=3, N2=3))
        assert np.linalg.matrix_rank(ch.H_br) == 1

    def test_deterministic(self):
        sc = Scenario(M=4, N1=4, N2=2)
        a, b = generate_channels(sc), generate_channels(sc)
        for name in ("H_br", "h_bu", "h_ru", "g_rt"):
            assert np.array_equal(getattr(a, name), getattr(b, name))

    def test_direct_link_loss_scales_h_bu(self):
        a = generate_channels(Scenario(M=4, N1=2, N2=2))
        b = generate_channels(Scenario(M=4, N1=2, N2=2, direct_link_loss_db=20.0))
        np.testing.assert_allclose(b.h_bu, 0.1 * a.h_bu, rtol=1e-12)
        np.testing.assert_array_equal(a.H_br, b.H_br)

    def test_coincident_nodes_rejected(self):
        with pytest.raises(DegenerateGeometryError):
            Scenario(user_pos=(30.0, 0.0, 10.0))

    def test_invalid_scenario(self):
        with pytest.raises(InvalidInputError):
            Scenario(P=0.0)
        with pytest.raises(InvalidInputError):
            Scenario(rho=(1, 2, 3))
        with pytest.raises(InvalidInputError):
            Scenario(dfbs_pos=(0, np.nan, 1))


class TestEffectiveChannel:
    def test_zero_ris_user_link(self, rng):
        ch = random_channels(rng, 3, 4)
        ch = ChannelSet(ch.H_br, ch.h_bu, np.zeros(4, complex), ch.g_rt)
        np.testing.assert_allclose(effective_channel(ch, random_xi(rng, 4)), ch.h_bu)

    def test_zero_ris_channel(self, rng):
        ch = random_channels(rng, 3, 4)
        ch = ChannelSet(np.zeros((4, 3), complex), ch.h_bu, ch.h_ru, ch.g_rt)
        np.testing.assert_allclose(effective_channel(ch, random_xi(rng, 4)), ch.h_bu)

    def test_matches_diag_expression(self, rng):
        ch = random_channels(rng, 2, 2)
        xi = random_xi(rng, 2)
        row = ch.h_bu.conj() + ch.h_ru.conj() @ np.diag(xi) @ ch.H_br
        np.testing.assert_allclose(effective_channel(ch, xi), row.conj(), rtol=1e-13)

    def test_two_forms_agree(self, rng):
        for _ in range(200):
            M, N = rng.integers(1, 9, 2)
            ch = random_channels(rng, M, N)
            xi = random_xi(rng, N)
            a = ch.h_ru.conj() @ np.diag(xi) @ ch.H_br
            b = xi @ np.diag(ch.h_ru.conj()) @ ch.H_br
            assert np.linalg.norm(a - b) <= 1e-12 * np.linalg.norm(a)
            np.testing.assert_allclose(effective_row(ch, xi, "phi"), effective_row(ch, xi, "xi"), rtol=1e-12)

    def test_dimension_mismatch(self, rng):
        ch = random_channels(rng, 2, 3)
        with pytest.raises(InvalidInputError):
            effective_channel(ch, np.ones(4))

    def test_non_unit_modulus(self, rng):
        ch = random_channels(rng, 2, 3)
        with pytest.raises(InvalidInputError):
            effective_channel(ch, np.full(3, 1.1))


class TestEchoSignal:
    def test_no_paths_no_echo(self, rng):
        ch = random_channels(rng, 3, 4)
        y = echo_signal(ch, np.zeros(5), random_w(rng, 3), random_xi(rng, 4), noise=np.zeros(3))
        np.testing.assert_array_equal(y, np.zeros(3))

    def test_single_element_target_only(self, rng):
        ch = random_channels(rng, 3, 1)
        w = random_w(rng, 3)
        y = echo_signal(ch, [1, 0, 0, 0, 0], w, np.array([1.0 + 0j]))
        a = ch.g_rt[0].conj() * ch.H_br[0]  # 1 x M row
        np.testing.assert_allclose(y, a.conj() * (a @ w), rtol=1e-13)

    def test_target_only_reduction(self, rng):
        ch = random_channels(rng, 3, 5)
        w, xi = random_w(rng, 3), random_xi(rng, 5)
        B = np.diag(ch.g_rt.conj()) @ ch.H_br
        expected = 0.7j * B.conj().T @ xi.conj() * (xi @ B @ w)
        np.testing.assert_allclose(echo_signal(ch, [0.7j, 0, 0, 0, 0], w, xi), expected, rtol=1e-12)

    def test_matches_term_by_term(self, rng):
        ch = random_channels(rng, 2, 2)
        rho = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        w, xi = random_w(rng, 2), random_xi(rng, 2)
        noise = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        y = echo_signal(ch, rho, w, xi, noise=noise)
        np.testing.assert_allclose(y, echo_reference(ch, rho, w, xi, noise), rtol=1e-12)

    def test_power_precondition(self, rng):
        ch = random_channels(rng, 2, 2)
        with pytest.raises(InvalidInputError):
            echo_signal(ch, np.ones(5), np.zeros(2), random_xi(rng, 2), P=1.0)

    def test_dimension_mismatch(self, rng):
        ch = random_channels(rng, 2, 2)
        with pytest.raises(InvalidInputError):
            echo_signal(ch, np.ones(5), np.ones(3), random_xi(rng, 2))

    @settings(max_examples=50)
    @given(
        st.integers(0, 2**32 - 1),
        st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False),
    )
    def test_linear_in_w(self, seed, alpha):
        r = np.random.default_rng(seed)
        ch = random_channels(r, 3, 4)
        rho = r.standard_normal(5) + 1j * r.standard_normal(5)
        w, xi = random_w(r, 3), random_xi(r, 4)
        y1 = echo_signal(ch, rho, alpha * w, xi)
        y2 = alpha * echo_signal(ch, rho, w, xi)
        assert np.linalg.norm(y1 - y2) <= 1e-12 * np.linalg.norm(y2)
