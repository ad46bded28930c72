"""Bell functional: transforms, evaluation, decomposition, two-mode bound."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvbell import (ModeSpec, QuadratureSettings, SettingsError,
                    cfrd_evaluate, cfrd_minor_determinant, make_basis_state,
                    make_coherent_product, make_fock_pair, make_ghz_like,
                    make_two_mode_squeezed, mode_transform, quadrature_matrices,
                    random_state, two_mode_bound, verify_implication)


def _settings(thetas, deltas, signs):
    return QuadratureSettings(tuple(thetas), tuple(deltas), tuple(signs))


def test_mode_transform_delta_zero():
    tr = mode_transform(_settings([0.7], [0.0], [1]))
    u, v = tr[0]
    assert u == pytest.approx(1.0)
    assert v == pytest.approx(0.0)


def test_mode_transform_symplectic_invariant():
    tr = mode_transform(_settings([0.0], [math.pi / 4], [-1]))
    u, v = tr[0]
    assert abs(u) ** 2 - abs(v) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_delta_at_endpoint_rejected():
    with pytest.raises(SettingsError):
        _settings([0.0], [math.pi / 2], [1])


def test_bad_sign_rejected():
    with pytest.raises(SettingsError):
        _settings([0.0], [0.0], [2])


@given(theta=st.floats(0, 2 * math.pi), delta=st.floats(-1.4, 1.4),
       s=st.sampled_from([1, -1]))
@settings(max_examples=60, deadline=None)
def test_commutator_law(theta, delta, s):
    d = 12
    x, y = quadrature_matrices(d, theta, delta, s)
    comm = x @ y - y @ x
    want = 2j * s * math.cos(delta) * np.eye(d)
    # rows near the cutoff edge are corrupted by truncation; stay below
    crop = d - 2
    np.testing.assert_allclose(comm[:crop, :crop], want[:crop, :crop],
                               atol=1e-10)


def test_vacuum_two_modes():
    vac = make_basis_state(ModeSpec(2, 5), [0, 0])
    rep = cfrd_evaluate(vac, _settings([0, 0], [0, 0], [1, -1]))
    assert rep.lhs == pytest.approx(0.0)
    assert rep.rhs == pytest.approx(0.25)
    assert not rep.violated
    assert rep.bipartition == frozenset({1})


def test_product_coherent_saturates_minor():
    coh = make_coherent_product(ModeSpec(2, 18), [0.7, 0.4], headroom=4)
    rep = cfrd_evaluate(coh, _settings([0, 0], [0, 0], [1, 1]))
    assert rep.minor_d == pytest.approx(0.0, abs=1e-9)
    assert rep.beta < 0
    assert rep.trivial_bipartition


def test_ghz3_all_plus():
    ghz = make_ghz_like(ModeSpec(3, 4))
    rep = cfrd_evaluate(ghz, _settings([0] * 3, [0] * 3, [1] * 3))
    assert rep.lhs == pytest.approx(0.25)
    assert rep.rhs == pytest.approx((0.5 ** 3 + 1.5 ** 3) / 2)
    assert not rep.violated


def test_two_mode_bound_coherent():
    coh = make_coherent_product(ModeSpec(2, 24), [1.0, 1.0], headroom=4)
    res = two_mode_bound(coh, _settings([0, 0], [0, 0], [1, 1]))
    assert res.beta2 == pytest.approx(-20.0, abs=1e-6)
    assert res.bound == pytest.approx(4.0)


def test_two_mode_bound_vacuum():
    vac = make_basis_state(ModeSpec(2, 6), [0, 0])
    res = two_mode_bound(vac, _settings([0.3, 1.1], [0.2, -0.4], [1, -1]))
    assert res.beta2 < 0
    assert res.beta2 <= res.bound + 1e-9


def test_two_mode_bound_wrong_mode_count():
    ghz = make_ghz_like(ModeSpec(3, 4))
    with pytest.raises(SettingsError):
        two_mode_bound(ghz, _settings([0] * 3, [0] * 3, [1, 1, -1]))


def test_verify_non_violation_vacuous():
    vac = make_basis_state(ModeSpec(2, 5), [0, 0])
    res = verify_implication(vac, _settings([0, 0], [0, 0], [1, -1]))
    assert not res.report.violated
    assert res.consistent


def test_fock_pair_ten_modes_violates_consistently():
    state = make_fock_pair(10, range(5))
    signs = [1] * 5 + [-1] * 5
    rep = cfrd_evaluate(state, _settings([0] * 10, [0] * 10, signs))
    assert rep.violated
    assert rep.lhs / rep.rhs == pytest.approx(0.25 / 0.75 ** 5, abs=1e-10)
    assert rep.minor_d < 0
    res = verify_implication(state, rep.settings)
    assert res.consistent
    assert res.pt_min_eig is None  # structured states skip the dense oracle


def _random_inputs(rng, n, d=6, headroom=3):
    kind = "pure" if rng.random() < 0.5 else "mixed"
    state = random_state(ModeSpec(n, d), kind, headroom=headroom,
                         seed=int(rng.integers(1 << 31)))
    thetas = rng.uniform(0, 2 * math.pi, n)
    deltas = rng.uniform(-1.2, 1.2, n)
    while True:
        signs = [int(s) for s in rng.choice([1, -1], n)]
        if len(set(signs)) > 1:
            break
    return state, _settings(thetas, deltas, signs)


@given(seed=st.integers(0, 10_000), n=st.sampled_from([2, 3]))
@settings(max_examples=40, deadline=None)
def test_decomposition_identity(seed, n):
    rng = np.random.default_rng(seed)
    state, stg = _random_inputs(rng, n)
    rep = cfrd_evaluate(state, stg)
    residue = abs(rep.rhs - rep.s_squared - rep.product_number_moment)
    assert residue <= 1e-9 * max(1.0, rep.rhs)
    assert rep.s_squared >= -1e-12


@given(seed=st.integers(0, 10_000), n=st.sampled_from([2, 3]))
@settings(max_examples=40, deadline=None)
def test_rewriting_equivalence(seed, n):
    # beta > 0 exactly when the minor drops below -S^2
    rng = np.random.default_rng(seed)
    state, stg = _random_inputs(rng, n)
    rep = cfrd_evaluate(state, stg)
    assert rep.beta == pytest.approx(-(rep.minor_d + rep.s_squared), abs=1e-9)


@given(seed=st.integers(0, 10_000), n=st.sampled_from([2, 3]))
@settings(max_examples=30, deadline=None)
def test_minor_matches_moments_module(seed, n):
    rng = np.random.default_rng(seed)
    state, stg = _random_inputs(rng, n)
    rep = cfrd_evaluate(state, stg)
    tr = mode_transform(stg)
    other = cfrd_minor_determinant(state, rep.bipartition,
                                   transforms=list(tr))
    assert rep.minor_d == pytest.approx(other, abs=1e-9)


@given(seed=st.integers(0, 10_000), n=st.sampled_from([2, 3]))
@settings(max_examples=40, deadline=None)
def test_theorem_on_random_inputs(seed, n):
    rng = np.random.default_rng(seed)
    state, stg = _random_inputs(rng, n)
    res = verify_implication(state, stg)
    assert res.consistent
    if res.report.violated:
        assert res.report.minor_d < 0
        assert res.pt_min_eig is not None and res.pt_min_eig < 0


@given(seed=st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_all_equal_signs_never_violate(seed):
    rng = np.random.default_rng(seed)
    n = 2
    state, stg = _random_inputs(rng, n)
    for sgn in (1, -1):
        trivial = _settings(stg.thetas, stg.deltas, [sgn] * n)
        rep = cfrd_evaluate(state, trivial)
        assert rep.trivial_bipartition
        assert rep.beta <= 1e-9


def test_tmsv_sweep_consistent():
    tmsv = make_two_mode_squeezed(ModeSpec(2, 14), 0.4)
    rng = np.random.default_rng(0)
    for _ in range(25):
        thetas = rng.uniform(0, 2 * math.pi, 2)
        deltas = rng.uniform(-1.2, 1.2, 2)
        signs = [1, -1] if rng.random() < 0.5 else [-1, 1]
        res = verify_implication(tmsv, _settings(thetas, deltas, signs))
        assert res.consistent


def test_report_is_phase_covariant():
    # a global phase on the state leaves every report field unchanged
    ghz = make_ghz_like(ModeSpec(3, 4), phase=1.0)
    spun = make_ghz_like(ModeSpec(3, 4), phase=cmath.exp(0.9j))
    stg = _settings([0.2, 1.1, 0.5], [0.3, -0.2, 0.1], [1, 1, -1])
    a = cfrd_evaluate(ghz, stg)
    b = cfrd_evaluate(spun, stg)
    assert a.rhs == pytest.approx(b.rhs, abs=1e-10)
    assert a.s_squared == pytest.approx(b.s_squared, abs=1e-10)


@given(seed=st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_moment_table_matches_scalar_beta(seed):
    from cvbell import beta_from_table, cfrd_beta, two_mode_moment_table

    rng = np.random.default_rng(seed)
    kind = "pure" if seed % 2 else "mixed"
    state = random_state(ModeSpec(2, 6), kind, headroom=3, seed=seed)
    table = two_mode_moment_table(state)
    thetas = rng.uniform(0, 2 * math.pi, 2)
    deltas = rng.uniform(-1.2, 1.2, 2)
    for signs in ((1, -1), (-1, 1), (1, 1), (-1, -1)):
        scalar = cfrd_beta(state, thetas, deltas, signs)
        fast = float(beta_from_table(table, thetas, deltas, signs))
        assert fast == pytest.approx(scalar, abs=1e-10)


def test_moment_table_batch_axis():
    from cvbell import beta_from_table, two_mode_moment_table

    state = random_state(ModeSpec(2, 6), "pure", headroom=3, seed=8)
    table = two_mode_moment_table(state)
    thetas = np.random.default_rng(1).uniform(0, 2 * math.pi, (5, 2))
    deltas = np.zeros((5, 2))
    batch = beta_from_table(table, thetas, deltas, (1, -1))
    singles = [float(beta_from_table(table, t, d, (1, -1)))
               for t, d in zip(thetas, deltas)]
    np.testing.assert_allclose(batch, singles, atol=1e-12)
