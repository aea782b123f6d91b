import math

import pytest

import fbqos
from fbqos import specfun


def rayleigh_service(frame_slots=1, blocklength=500):
    return fbqos.Service(
        fbqos.ChannelModel.rayleigh(1.0, frame_slots),
        fbqos.PowerPolicy.fixed(10.0),
        fbqos.CodeParams(blocklength, 1e-3, 10.0),
    )


def test_special_functions():
    assert specfun.gaussian_q(0.0) == 0.5
    for p in (1e-300, 1e-12, 1e-3, 0.3, 0.9):
        assert specfun.gaussian_q(specfun.gaussian_q_inv(p)) == pytest.approx(p, rel=1e-10)
    assert specfun.upper_incomplete_gamma(2.5, 1.0) == pytest.approx(1.1288027918891, rel=1e-10)
    assert specfun.lambert_w0(math.e) == pytest.approx(1.0, rel=1e-14)


def test_code_and_rate():
    code = fbqos.CodeParams(500, 1e-3)
    assert fbqos.optimal_received_snr(code) == pytest.approx(0.0093302724806826506, rel=1e-12)
    assert fbqos.dispersion(0.0) == 0.0
    assert fbqos.dispersion(1e300) == pytest.approx(math.log2(math.e) ** 2)


def test_ec_matches_cli_golden_row():
    # First quadrature row of tests/golden/ec_rayleigh/ec.csv.
    est = fbqos.effective_capacity(rayleigh_service(frame_slots=5), 1e-3)
    assert est.method == "quadrature"
    assert est.value == pytest.approx(606.614474806, rel=1e-9)
    assert est.normalized == pytest.approx(est.value / 500, rel=1e-15)


def test_monte_carlo_agrees_with_quadrature():
    svc = rayleigh_service()
    exact = fbqos.effective_capacity(svc, 1e-3)
    mc = fbqos.effective_capacity(svc, 1e-3, method="mc", mc_frames=200000, seed=3)
    assert abs(mc.value - exact.value) < 4 * mc.error
    again = fbqos.effective_capacity(svc, 1e-3, method="mc", mc_frames=200000, seed=3)
    assert again.value == mc.value


def test_qos_exponent_oracle():
    arrival = fbqos.ArrivalProcess.poisson(0.95 * 1362.7126568591119)
    sol = fbqos.solve_qos_exponent(arrival, rayleigh_service())
    assert sol.bounded
    assert sol.theta == pytest.approx(3.1942841787843303e-4, rel=1e-8)


def test_error_classes():
    with pytest.raises(fbqos.DomainError):
        specfun.gaussian_q_inv(0.0)
    with pytest.raises(ValueError):
        fbqos.CodeParams(500, 0.7)
    awgn = fbqos.Service(
        fbqos.ChannelModel.awgn(), fbqos.PowerPolicy.fixed(10.0), fbqos.CodeParams(500, 1e-3)
    )
    with pytest.raises(fbqos.PreconditionError):
        fbqos.effective_capacity(awgn, 0.01, method="laplace")
    with pytest.raises(fbqos.PreconditionError):
        fbqos.solve_qos_exponent(fbqos.ArrivalProcess.poisson(1e6), awgn)


def test_custom_policy_calls_back_into_python():
    flat = fbqos.PowerPolicy.custom(lambda x: 10.0)
    channel = fbqos.ChannelModel.rayleigh()
    code = fbqos.CodeParams(500, 1e-3)
    a = fbqos.effective_capacity(fbqos.Service(channel, flat, code), 0.01)
    b = fbqos.effective_capacity(fbqos.Service(channel, fbqos.PowerPolicy.fixed(10.0), code), 0.01)
    assert a.value == pytest.approx(b.value, rel=1e-9)


def test_simulate_runs_threads_with_python_policy():
    svc = fbqos.Service(
        fbqos.ChannelModel.rayleigh(), fbqos.PowerPolicy.custom(lambda x: 10.0),
        fbqos.CodeParams(500, 1e-3),
    )
    arrival = fbqos.ArrivalProcess.poisson(0.5 * svc.mean_service_bits)
    res = fbqos.simulate(svc, arrival, slots=20000, warmup=1000, replications=2, jobs=2,
                         seed=9, queue_thresholds_bits=[0.0, 1000.0],
                         delay_thresholds_slots=[1.0, 2.0])
    assert not res.unstable
    assert [r.threshold for r in res.queue.rows] == [0.0, 1000.0]
    assert res.queue.rows[0].probability == 1.0
    for row in res.delay.rows:
        assert row.ci_lo <= row.probability <= row.ci_hi


def test_slopes():
    rayleigh = fbqos.ChannelModel.rayleigh()
    assert fbqos.theoretical_slope(fbqos.ChannelModel.awgn(), 5.0) == 1.0
    rho = 0.5
    expected = min(1.0, 1.0 / (rho * math.log2(math.e)))
    assert fbqos.theoretical_slope(rayleigh, rho) == pytest.approx(expected)
    fit = fbqos.empirical_slope(rayleigh, fbqos.CodeParams(512, 1e-5), 0.004,
                                [10 ** (d / 10) for d in range(40, 61, 5)])
    assert len(fit.normalized_ec) == 5
    assert 0.0 < fit.slope < 1.0
