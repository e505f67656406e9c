import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tqet_lab import kernel
from tqet_lab.errors import NumericalConsistencyError, UndefinedEfficiencyError
from tqet_lab.model import Chain, ChainSpec
from tqet_lab.protocol import (
    compute_mn,
    delta_e_analytic,
    delta_e_direct,
    e_input,
    e_nte,
    e_tqet,
    ece,
    optimal_theta,
    prepare_branches,
    run_trace,
)

from oracles import DensityOracle

# frozen from oracles.DensityOracle(6) (full density matrices + scipy expm)
E_INPUT_N6 = 0.8034815205980532
E_NTE_N6_T1 = 0.01345833656803866
MN_N6 = {0.0: (-3.6090955702049907, -0.05885180073301867), 1.0: (-3.582178897068914, -0.14517253507891195)}

FINE_T = np.arange(41) * 0.25
THETAS = np.linspace(-np.pi / 2, np.pi / 2, 33)[1:]


@pytest.fixture(scope="module")
def default():
    spec = ChainSpec(6)
    chain = Chain.build(spec)
    return spec, chain, prepare_branches(chain.ground, spec)


@pytest.fixture(scope="module")
def classical():
    spec = ChainSpec(6, g=0.0, h=0.0, t_max=4.0, dt=0.1)
    chain = Chain.build(spec)
    return spec, chain, prepare_branches(chain.ground, spec)


@pytest.fixture(scope="module")
def oracle():
    return DensityOracle(6)


# --- branches and input energy ---------------------------------------------------

def test_branch_weights(default, oracle):
    _, _, ens = default
    assert abs(ens.weights.sum() - 1) < 1e-12
    assert abs(np.vdot(ens.vectors[0], ens.vectors[1])) < 1e-12
    assert np.allclose(ens.weights, oracle.weights(), atol=1e-12)
    assert not ens.degenerate


def test_branch_weights_classical(classical):
    _, chain, ens = classical
    assert chain.ground.degenerate
    assert sorted(np.round(ens.weights, 12)) == [0.0, 1.0]
    assert ens.degenerate


def test_e_input_zero_field():
    spec = ChainSpec(6, g=0.0, h=0.3)
    chain = Chain.build(spec)
    assert e_input(prepare_branches(chain.ground, spec), chain.h_a, chain.ground) == 0.0


def test_e_input_equals_erased_transverse_energy(default):
    spec, chain, ens = default
    x_a = chain.h_a / -spec.g
    direct = e_input(ens, chain.h_a, chain.ground)
    erased = spec.g * kernel.expectation(chain.ground.vector, x_a).real
    assert direct == pytest.approx(erased, abs=1e-12)


def test_e_input_oracle(default, oracle):
    _, chain, ens = default
    val = e_input(ens, chain.h_a, chain.ground)
    assert val > 0
    assert val == pytest.approx(E_INPUT_N6, abs=1e-12)
    assert oracle.e_input() == pytest.approx(E_INPUT_N6, abs=1e-12)


# --- natural time evolution -------------------------------------------------------

def test_e_nte_zero_at_t0(default):
    _, chain, ens = default
    assert abs(e_nte(ens, chain.spectrum, chain.h_b, chain.ground, 0.0)) < 1e-12


def test_e_nte_classical_is_zero(classical):
    _, chain, ens = classical
    vals = e_nte(ens, chain.spectrum, chain.h_b, chain.ground, np.linspace(0, 5, 11))
    assert np.max(np.abs(vals)) < 1e-12


def test_e_nte_oracle(default, oracle):
    _, chain, ens = default
    val = e_nte(ens, chain.spectrum, chain.h_b, chain.ground, 1.0)
    assert val == pytest.approx(E_NTE_N6_T1, abs=1e-10)
    assert oracle.e_nte(1.0) == pytest.approx(E_NTE_N6_T1, abs=1e-10)


def test_nte_energy_conservation(default):
    _, chain, ens = default
    total = e_nte(ens, chain.spectrum, chain.h, chain.ground, FINE_T)
    assert np.ptp(total) < 1e-10


# --- M and N ---------------------------------------------------------------------

def test_double_commutator_identity(default):
    _, chain, _ = default
    sb, hb = chain.sigma_b, chain.h_b
    dbl = 0.5 * kernel.commutator(sb, kernel.commutator(sb, hb))
    assert np.max(np.abs(dbl - 2 * hb)) < 1e-13


def test_m_equals_twice_bob_energy(default):
    _, chain, ens = default
    m, _ = compute_mn(ens, chain, FINE_T)
    bob = e_nte(ens, chain.spectrum, chain.h_b, chain.ground, FINE_T)
    bob = bob + kernel.expectation(chain.ground.vector, chain.h_b).real
    assert np.max(np.abs(m - 2 * bob)) < 1e-12


def test_mn_classical(classical):
    _, chain, ens = classical
    m, n = compute_mn(ens, chain, np.linspace(0, 4, 9))
    assert np.max(np.abs(n)) < 1e-12
    assert m[0] == pytest.approx(-4.0, abs=1e-12)
    assert np.allclose(m, -4.0, atol=1e-12)


@pytest.mark.parametrize("t", [0.0, 1.0])
def test_mn_density_matrix_oracle(default, oracle, t):
    _, chain, ens = default
    m, n = compute_mn(ens, chain, t)
    m_ref, n_ref = MN_N6[t]
    assert m == pytest.approx(m_ref, abs=1e-10)
    assert n == pytest.approx(n_ref, abs=1e-10)
    om, on = oracle.mn(t)
    assert abs(om.imag) < 1e-10 and abs(on.imag) < 1e-10
    assert om.real == pytest.approx(m_ref, abs=1e-10)
    assert on.real == pytest.approx(n_ref, abs=1e-10)


def test_n_pure_state_form(default):
    _, chain, ens = default
    comm = kernel.commutator(chain.sigma_b, chain.h_b)
    g = chain.ground.vector
    _, n = compute_mn(ens, chain, FINE_T)
    for k, t in enumerate(FINE_T[::8]):
        kt = kernel.heisenberg(chain.spectrum, comm, t)
        assert n[8 * k] == pytest.approx(-np.imag(np.vdot(g, chain.sigma_a @ kt @ g)), abs=1e-12)


def test_mn_rejects_imaginary_residue(default, monkeypatch):
    _, chain, ens = default
    from tqet_lab import protocol

    real_fn = protocol._mn_complex
    monkeypatch.setattr(protocol, "_mn_complex", lambda *a: (real_fn(*a)[0] + 1e-6j, real_fn(*a)[1]))
    with pytest.raises(NumericalConsistencyError, match="imaginary residue"):
        compute_mn(ens, chain, 0.5)


# --- closed-form optimum -----------------------------------------------------------

@pytest.mark.parametrize(
    "m,n,theta,de",
    [(1.0, 0.0, np.pi / 2, -1.0), (0.0, 1.0, -np.pi / 4, -0.5), (0.0, 0.0, 0.0, 0.0)],
)
def test_optimal_theta_examples(m, n, theta, de):
    th, d = optimal_theta(m, n)
    assert th == pytest.approx(theta, abs=1e-15)
    assert d == pytest.approx(de, abs=1e-15)


finite = st.floats(-10, 10, allow_nan=False)


@given(m=finite, n=finite)
def test_optimal_theta_is_the_minimum(m, n):
    th, d = optimal_theta(m, n)
    assert -np.pi / 2 < th <= np.pi / 2
    assert d <= 1e-12
    assert delta_e_analytic(m, n, th) == pytest.approx(d, abs=1e-12)
    scan = delta_e_analytic(m, n, np.linspace(-np.pi / 2, np.pi / 2, 721))
    assert d <= scan.min() + 1e-12


@given(m=finite, n=finite, theta=st.floats(-4, 4))
def test_delta_e_analytic_periodic(m, n, theta):
    assert delta_e_analytic(m, n, theta) == pytest.approx(delta_e_analytic(m, n, theta + np.pi), abs=1e-11)
    assert delta_e_analytic(m, n, 0.0) == 0.0


# --- direct evaluation and decomposition ------------------------------------------

def test_analytic_equals_direct(default):
    _, chain, ens = default
    m, n = compute_mn(ens, chain, FINE_T)
    worst = max(
        np.max(np.abs(delta_e_analytic(m, n, th) - delta_e_direct(ens, chain, FINE_T, th))) for th in THETAS
    )
    assert worst < 1e-9


@pytest.mark.parametrize("t,theta", [(0.0, 0.4), (1.0, -0.9), (3.7, 1.2)])
def test_direct_matches_density_oracle(default, oracle, t, theta):
    _, chain, ens = default
    assert delta_e_direct(ens, chain, t, theta) == pytest.approx(oracle.delta_e(t, theta), abs=1e-10)
    assert e_tqet(ens, chain, t, theta) == pytest.approx(oracle.e_tqet(t, theta), abs=1e-10)


def test_do_nothing(default):
    _, chain, ens = default
    assert np.max(np.abs(delta_e_direct(ens, chain, FINE_T, 0.0))) < 1e-12
    nte = e_nte(ens, chain.spectrum, chain.h_b, chain.ground, FINE_T)
    assert np.max(np.abs(e_tqet(ens, chain, FINE_T, 0.0) - nte)) < 1e-12


def test_decomposition(default):
    _, chain, ens = default
    nte = e_nte(ens, chain.spectrum, chain.h_b, chain.ground, FINE_T)
    for th in THETAS[::5]:
        diff = e_tqet(ens, chain, FINE_T, th) - nte - delta_e_direct(ens, chain, FINE_T, th)
        assert np.max(np.abs(diff)) < 1e-10


def test_classical_rotation_only_costs(classical):
    _, chain, ens = classical
    t = np.linspace(0, 4, 9)
    for th in (-1.0, 0.3, 1.4):
        cost = 2 * (1 - np.cos(2 * th))
        assert np.max(np.abs(delta_e_direct(ens, chain, t, th) - cost)) < 1e-12
        assert np.max(np.abs(e_tqet(ens, chain, t, th) - cost)) < 1e-12


def test_qet_point(default):
    spec, chain, ens = default
    m, n = compute_mn(ens, chain, 0.0)
    th, de = optimal_theta(m, n)
    val = e_tqet(ens, chain, 0.0, th)
    assert val < 0
    assert val == pytest.approx(de, abs=1e-12)


# --- full trace -----------------------------------------------------------------

@pytest.fixture(scope="module")
def trace():
    return run_trace(ChainSpec(6))


def test_trace_grid_and_consistency(trace):
    assert len(trace) == 501
    pts = trace.points
    assert pts[0].e_nte == pytest.approx(0, abs=1e-12)
    assert trace.e_qet == pts[0].de_min
    for p in pts[::25]:
        assert p.de_min == pytest.approx((-p.m - np.hypot(p.m, p.n_corr)) / 2, abs=1e-12)
        assert p.e_tqet_opt == pytest.approx(p.e_nte + p.de_min, abs=1e-10)
        assert -np.pi / 2 < p.theta_star <= np.pi / 2


def test_trace_sign_law(trace):
    assert np.max(trace.de_min) <= 1e-12
    strict = np.abs(trace.n_corr) > 1e-6
    assert np.all(trace.de_min[strict] < -1e-10)
    assert trace.imag_residue < 1e-10


def test_trace_dominance(trace):
    assert trace.e_qet < 0
    assert np.min(trace.e_tqet_opt) <= trace.e_qet


def test_trace_matches_pointwise(trace):
    spec = ChainSpec(6)
    chain = Chain.build(spec)
    ens = prepare_branches(chain.ground, spec)
    for k in (0, 77, 350):
        t = trace.t[k]
        assert e_tqet(ens, chain, t, trace.theta_star[k]) == pytest.approx(trace.e_tqet_opt[k], abs=1e-10)


def test_trace_classical_nullity():
    tr = run_trace(ChainSpec(6, g=0.0, h=0.0, t_max=5.0, dt=0.05))
    for col in (tr.e_nte, tr.n_corr, tr.de_min, tr.e_tqet_opt, tr.theta_star):
        assert np.max(np.abs(col)) < 1e-10


def test_ece(trace):
    eta_t, eta_q = ece(trace)
    assert eta_t >= eta_q > 0


def test_ece_undefined_without_field():
    with pytest.raises(UndefinedEfficiencyError):
        ece(run_trace(ChainSpec(6, g=0.0, t_max=1.0)))
