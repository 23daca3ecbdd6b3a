import math

import numpy as np
import pytest

from involution.delay_model import (
    DomainViolation,
    ExpChannelParams,
    InvalidParams,
    check_involution,
    custom_channel,
    delta_min,
    derivative_down,
    derivative_up,
    exp_channel,
    read_delay_samples,
    tabulated_channel,
    write_delay_samples,
)
from involution.rootfind import NoBracket, bisect_root

import oracles


def random_params(rng):
    tau = float(np.exp(rng.uniform(np.log(0.05), np.log(20.0))))
    t_p = tau * float(np.exp(rng.uniform(np.log(0.05), np.log(5.0))))
    vth = float(rng.uniform(0.1, 0.9))
    return ExpChannelParams(tau, t_p, vth)


def log_grid(df, n=200, safe=1e-10):
    """Log-spaced T grid from just inside the domain edge up to where 64-bit
    floats can still carry the identity.

    The composed residual grows like ulp(delta_inf) * exp((T + delta_inf)/tau)
    because the distance to the asymptote is squeezed out of the mantissa, so
    the grid is capped where that amplification reaches ``safe``; far beyond
    it the delay saturates exactly (see test_large_T_saturates).
    """
    tau = df.params.tau
    dinf = max(df.delta_inf_up, df.delta_inf_down)
    edge = -0.9 * min(df.delta_inf_up, df.delta_inf_down)
    ulp = float(np.spacing(dinf))
    t_max = min(100.0 * tau, tau * math.log(safe / ulp) - dinf)
    t_max = max(t_max, 2.0 * tau)
    offsets = np.logspace(-6, np.log10(t_max - edge), n)
    return edge + offsets


class TestExpChannel:
    def test_ref_asymptote(self, ref):
        assert ref.delta_inf_up == pytest.approx(0.5 + math.log(2), abs=1e-12)
        assert ref.delta_inf_down == ref.delta_inf_up  # symmetric threshold

    def test_ref_delta_min_point(self, ref):
        assert ref.up(-0.5) == pytest.approx(0.5, abs=1e-12)

    def test_ref_at_zero(self, ref):
        assert ref.up(0.0) == pytest.approx(oracles.REF_D_UP_AT_0, abs=1e-12)
        assert ref.up(0.0) == pytest.approx(oracles.ref_delay(0.0), abs=1e-15)

    def test_domain_guard_returns_neg_inf(self, ref):
        assert ref.up(-ref.delta_inf_down) == -math.inf
        assert ref.up(-ref.delta_inf_down - 1.0) == -math.inf

    def test_asymptote_at_infinite_T(self, ref):
        assert ref.up(math.inf) == ref.delta_inf_up

    def test_invalid_params(self):
        with pytest.raises(InvalidParams):
            ExpChannelParams(0.0, 0.5, 0.5)
        with pytest.raises(InvalidParams):
            ExpChannelParams(1.0, -0.1, 0.5)
        with pytest.raises(InvalidParams):
            ExpChannelParams(1.0, 0.5, 1.0)


class TestInvolutionIdentity:
    def test_ref_grid(self, ref):
        res = check_involution(ref, [-0.4, 0.0, 1.0, 10.0], 1e-9)
        assert res.passed

    def test_pure_delay_pair_is_not_an_involution(self):
        d = 0.7
        df = custom_channel(lambda T: d, lambda T: d, d, d)
        res = check_involution(df, [1.0, 2.0], tol=1e-9)
        # -down(T) = -d sits exactly on the declared domain edge of up, so the
        # composition collapses; constants are not involutions
        assert not res.passed
        assert res.max_residual > 1.0

    def test_tabulated_inverse_samples_pass(self, ref):
        # samples clustered toward the domain edge, where the delay is steep
        dinf = ref.delta_inf_down
        ts = -dinf + np.logspace(-4, np.log10(15 + dinf), 3000)
        down_samples = [(float(t), ref.down(float(t))) for t in ts]
        # the involution maps (T, d_down(T)) samples to d_up samples at -d_down(T)
        up_samples = [(-d, -t) for t, d in down_samples]
        df = tabulated_channel(up_samples, down_samples, ref.delta_inf_up, ref.delta_inf_down)
        grid = np.linspace(-0.9, 6.0, 50)
        res = check_involution(df, grid, 1e-6)
        assert res.passed, res

    def test_random_exp_channels(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(50):
            df = exp_channel(random_params(rng))
            res = check_involution(df, log_grid(df), 1e-9)
            worst = max(worst, res.max_residual)
            assert res.passed, (df.params, res)
        assert worst <= 1e-9

    def test_large_T_saturates(self, ref):
        # at 100 RC constants the distance to the asymptote is below 1 ulp
        assert ref.down(100.0) == ref.delta_inf_down

    def test_domain_violation_raised(self, ref):
        with pytest.raises(DomainViolation):
            check_involution(ref, [-ref.delta_inf_up], 1e-9)


class TestDeltaMin:
    def test_ref(self, ref):
        assert delta_min(ref) == pytest.approx(0.5, abs=1e-9)

    def test_other_params(self):
        df = exp_channel(ExpChannelParams(2.0, 0.3, 0.7))
        assert delta_min(df) == pytest.approx(0.3, abs=1e-9)

    def test_equals_t_p_for_random_params(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            p = random_params(rng)
            assert delta_min(exp_channel(p)) == pytest.approx(p.t_p, abs=1e-9)

    def test_down_agrees_at_root(self, ref):
        d = delta_min(ref)
        assert ref.down(-d) == pytest.approx(d, abs=1e-9)

    def test_rescaled_tabulated(self):
        # time rescale by 2: exp(2, 1.0, 0.7) sampled into a table; delta_min
        # doubles from the tau=1 parametrization
        src = exp_channel(ExpChannelParams(2.0, 1.0, 0.7))
        tu = -0.98 * src.delta_inf_down + np.logspace(-4, np.log10(16 + 0.98 * src.delta_inf_down), 1500)
        td = -0.98 * src.delta_inf_up + np.logspace(-4, np.log10(16 + 0.98 * src.delta_inf_up), 1500)
        up = [(float(t), src.up(float(t))) for t in tu]
        down = [(float(t), src.down(float(t))) for t in td]
        df = tabulated_channel(up, down, src.delta_inf_up, src.delta_inf_down)
        assert delta_min(df) == pytest.approx(1.0, abs=1e-6)

    def test_exp_rescale_equivariance(self):
        p = ExpChannelParams(0.7, 0.4, 0.3)
        assert delta_min(exp_channel(p.scaled(2.0))) == pytest.approx(2 * 0.4, abs=1e-9)

    def test_no_bracket_for_acausal(self):
        df = custom_channel(lambda T: -1.0, lambda T: -1.0, 1.0, 1.0)
        with pytest.raises(NoBracket):
            delta_min(df)


class TestDerivatives:
    def test_ref_at_zero(self, ref):
        assert derivative_up(ref, 0.0) == pytest.approx(oracles.REF_DERIV_AT_0, abs=1e-12)

    def test_reciprocal_identity_spot(self, ref):
        lhs = derivative_up(ref, -ref.down(1.0)) * derivative_down(ref, 1.0)
        assert lhs == pytest.approx(1.0, abs=1e-6)

    def test_reciprocal_identity_random(self, ref):
        rng = np.random.default_rng(11)
        for T in rng.uniform(-0.9, 10.0, 100):
            lhs = derivative_up(ref, -ref.down(float(T))) * derivative_down(ref, float(T))
            assert lhs == pytest.approx(1.0, abs=1e-6)

    def test_concavity_decreasing_derivative(self, ref):
        assert derivative_up(ref, 0.0) > derivative_up(ref, 1.0)

    def test_finite_difference_fallback_matches_analytic(self, ref):
        tab = custom_channel(ref.up, ref.down, ref.delta_inf_up, ref.delta_inf_down)
        for T in (-0.4, 0.0, 1.0, 5.0):
            assert derivative_up(tab, T) == pytest.approx(derivative_up(ref, T), rel=1e-6)

    def test_domain_violation(self, ref):
        with pytest.raises(DomainViolation):
            derivative_up(ref, -ref.delta_inf_down)


class TestShapeInvariants:
    def test_monotone_and_concave_on_grid(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            df = exp_channel(random_params(rng))
            ts = np.linspace(-0.9 * min(df.delta_inf_up, df.delta_inf_down), 8 * df.params.tau, 300)
            for f in (df.up, df.down):
                vals = np.array([f(float(t)) for t in ts])
                diffs = np.diff(vals)
                assert np.all(diffs > 0), "delay must be strictly increasing"
                assert np.all(np.diff(diffs) <= 1e-9), "delay must be concave"


def test_delay_sample_csv_roundtrip(tmp_path):
    rows = [(0.0, 0.8, None), (1.0, None, 1.1), (2.0, 1.15, 1.18)]
    path = tmp_path / "samples.csv"
    write_delay_samples(path, rows)
    assert read_delay_samples(path) == rows


def test_bisect_root_tolerance():
    root = bisect_root(lambda x: x * x - 2.0, 0.0, 2.0)
    assert root == pytest.approx(math.sqrt(2), abs=1e-11)
    with pytest.raises(NoBracket):
        bisect_root(lambda x: 1.0 + x * x, -1.0, 1.0)
