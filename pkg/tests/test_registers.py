"""Multi-site registers: entangling gate, entropy, cat decomposition."""

import cmath
import math

import numpy as np
import pytest

from becsim.errors import CapacityError, NumericalIntegrityError
from becsim.registers import (
    BecRegister,
    DensityMatrix,
    apply_zz,
    cat_decomposition,
    cat_decomposition_check,
    entangled_state_analytic,
    entanglement_entropy,
    entropy,
    number_fluctuation_error,
    partial_trace,
    plus_x_state,
    register_fidelity,
    schmidt_weights,
    tensor,
)
from becsim.spin import CoherentParams, make_coherent, make_fock


def two_site_plus_x(n1, n2):
    return tensor([plus_x_state(n1), plus_x_state(n2)])


def test_plus_x_state_uniform_binomial():
    n = 6
    s = plus_x_state(n)
    expected = np.array([math.sqrt(math.comb(n, k)) for k in range(n + 1)])
    expected /= math.sqrt(2.0 ** n)
    assert np.max(np.abs(s.amps - expected)) < 1e-12


def test_tensor_ordering_site0_slowest():
    a = make_fock(1, 1)          # |k=1> on a 2-dim site
    b = make_fock(0, 2)          # |k=0> on a 3-dim site
    reg = tensor([a, b])
    assert reg.dims == (2, 3)
    idx = np.flatnonzero(np.abs(reg.amps) > 0)
    assert list(idx) == [1 * 3 + 0]


def test_register_capacity_guard():
    with pytest.raises(CapacityError):
        BecRegister((4000, 4000), np.zeros(2))


def test_apply_zz_phases_by_hand():
    # exp(-i wt Sz Sz) on |k1 k2>: phase (2k1-N1)(2k2-N2) wt
    reg = two_site_plus_x(2, 1)
    wt = 0.37
    out = apply_zz(reg, 0, 1, wt)
    tens_in = reg.as_tensor()
    tens_out = out.as_tensor()
    for k1 in range(3):
        for k2 in range(2):
            phase = cmath.exp(-1j * wt * (2 * k1 - 2) * (2 * k2 - 1))
            assert abs(tens_out[k1, k2] - phase * tens_in[k1, k2]) < 1e-12


@pytest.mark.parametrize("n1,n2", [(1, 1), (3, 3), (4, 7), (12, 5)])
def test_entangled_state_analytic_matches_gate(n1, n2):
    for wt in (0.1, math.pi / 8, math.pi / 4):
        gate = apply_zz(two_site_plus_x(n1, n2), 0, 1, wt)
        closed = entangled_state_analytic(n1, n2, wt)
        assert register_fidelity(gate, closed) == pytest.approx(1.0, abs=1e-12)


def test_entangler_single_atom_quarter_period():
    # N=1 at wt=pi/4: amplitudes e^{-i pi/4 m1 m2}/2 with m = +-1
    reg = entangled_state_analytic(1, 1, math.pi / 4)
    expected = np.array(
        [cmath.exp(-1j * math.pi / 4), cmath.exp(1j * math.pi / 4),
         cmath.exp(1j * math.pi / 4), cmath.exp(-1j * math.pi / 4)]) / 2.0
    phase = expected[0] / reg.amps.reshape(-1)[0]
    assert np.max(np.abs(reg.amps * phase - expected)) < 1e-12


def test_entropy_one_bit_single_atoms():
    reg = entangled_state_analytic(1, 1, math.pi / 4)
    res = entanglement_entropy(reg)
    assert res.bits == pytest.approx(1.0, abs=1e-12)
    assert res.max_bits == pytest.approx(1.0)


def test_entropy_zero_for_product_state():
    res = entanglement_entropy(two_site_plus_x(4, 4))
    assert res.bits == pytest.approx(0.0, abs=1e-10)


def test_entropy_symmetric_between_sites():
    reg = entangled_state_analytic(3, 5, 0.3)
    assert entanglement_entropy(reg, 0).bits == pytest.approx(
        entanglement_entropy(reg, 1).bits, abs=1e-10)


def test_partial_trace_properties():
    reg = entangled_state_analytic(4, 4, 0.2)
    rho = partial_trace(reg, 0)
    assert rho.dim == 5
    w = rho.eigenvalues()
    assert np.all(w >= -1e-10)
    assert np.sum(w) == pytest.approx(1.0, abs=1e-10)


def test_schmidt_weights_sum_to_one():
    reg = entangled_state_analytic(6, 2, 0.7)
    w = schmidt_weights(reg)
    assert np.sum(w) == pytest.approx(1.0, abs=1e-10)
    assert entropy(partial_trace(reg, 0)).bits == pytest.approx(
        float(-(w[w > 1e-15] * np.log2(w[w > 1e-15])).sum()), abs=1e-9)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_cat_decomposition_fidelity(n):
    assert cat_decomposition_check(n) >= 1.0 - 1e-9


def test_cat_decomposition_two_branches():
    reg = cat_decomposition(4)
    # site-1 reduced state of the pi/4 entangled state has two dominant
    # Schmidt branches (the +-y coherent pair)
    w = np.sort(schmidt_weights(entangled_state_analytic(4, 4, math.pi / 4)))
    assert w[-1] + w[-2] == pytest.approx(1.0, abs=1e-9)
    assert reg.site_n == (4, 4)


def test_density_matrix_validation():
    with pytest.raises(NumericalIntegrityError):
        DensityMatrix(2, np.diag([0.7, 0.7]))
    bad = np.array([[0.5, 0.3], [0.1, 0.5]], dtype=complex)
    with pytest.raises(NumericalIntegrityError):
        DensityMatrix(2, bad)


def test_register_fidelity_phase_invariant():
    reg = two_site_plus_x(2, 2)
    shifted = BecRegister(reg.site_n, reg.amps * cmath.exp(0.4j))
    assert register_fidelity(reg, shifted) == pytest.approx(1.0, abs=1e-12)


def test_number_fluctuation_error_decreases_with_n():
    vals = [number_fluctuation_error(n, 1) for n in (4, 16, 64)]
    assert vals[0] > vals[1] > vals[2] > 0
