"""Gate schedules, qubit-to-BEC mapping, and Deutsch's algorithm."""

import math

import numpy as np
import pytest

from becsim.registers import plus_x_state, register_fidelity, tensor, apply_zz
from becsim.schedules import (
    ORACLE_IDS,
    DeutschOracle,
    GateStep,
    SpinProductTerm,
    format_schedule,
    map_qubit_schedule,
    parse_schedule,
    run_deutsch,
    run_schedule,
    step_hamiltonian,
    teleportation_gate_time,
)


def test_term_rejects_duplicate_site():
    with pytest.raises(ValueError):
        SpinProductTerm(1.0, ((0, "z"), (0, "x")))


def test_term_rejects_unknown_axis():
    with pytest.raises(ValueError):
        SpinProductTerm(1.0, ((0, "q"),))


def test_gate_step_rejects_negative_time():
    with pytest.raises(ValueError):
        GateStep((), -0.1)


def test_step_hamiltonian_rejects_noncommuting_terms():
    step = GateStep(
        (SpinProductTerm(1.0, ((0, "x"),)), SpinProductTerm(1.0, ((0, "z"),))),
        0.1)
    with pytest.raises(ValueError):
        step_hamiltonian(step, (2,))


def test_run_schedule_matches_diagonal_gate():
    n = 3
    wt = 0.4
    reg = tensor([plus_x_state(n), plus_x_state(n)])
    step = GateStep((SpinProductTerm(1.0, ((0, "z"), (1, "z"))),), wt)
    out = run_schedule(reg, [step])
    assert register_fidelity(out, apply_zz(reg, 0, 1, wt)) == pytest.approx(
        1.0, abs=1e-12)


def test_map_qubit_schedule_scaling():
    steps = [GateStep(
        (SpinProductTerm(0.5, ((0, "z"),)),
         SpinProductTerm(2.0, ((0, "z"), (1, "z")))), 1.2)]
    mapped = map_qubit_schedule(steps, 10)
    assert mapped[0].time == pytest.approx(0.12)
    assert mapped[0].terms[0].coeff == pytest.approx(5.0)    # single-site x N
    assert mapped[0].terms[1].coeff == pytest.approx(2.0)    # two-site kept


def test_map_qubit_schedule_rejects_high_order():
    steps = [GateStep(
        (SpinProductTerm(1.0, ((0, "z"), (1, "z"), (2, "z"))),), 0.1)]
    with pytest.raises(ValueError):
        map_qubit_schedule(steps, 4)


def test_schedule_text_round_trip():
    steps = [
        GateStep((SpinProductTerm(0.25, ((0, "z"), (1, "z"))),), 0.7),
        GateStep((SpinProductTerm(-1.5, ((1, "x"),)),), 0.3),
    ]
    parsed = parse_schedule(format_schedule(steps))
    assert parsed == steps


def test_parse_schedule_rejects_malformed():
    with pytest.raises(ValueError):
        parse_schedule("step 1.0 1:z ; 0.5\n")
    with pytest.raises(ValueError):
        parse_schedule("term 1.0 1:z 0.5\n")


def test_parse_schedule_ignores_comments_and_blanks():
    steps = parse_schedule("# header\n\nterm 1.0 1:z 2:z ; 0.5  # inline\n")
    assert len(steps) == 1
    assert steps[0].time == pytest.approx(0.5)


@pytest.mark.parametrize("oracle_id", ORACLE_IDS)
@pytest.mark.parametrize("n", [1, 2, 7])
def test_deutsch_classification(oracle_id, n):
    oracle = DeutschOracle(oracle_id, n)
    classification, readout = run_deutsch(oracle)
    expected = "constant" if oracle.is_constant else "balanced"
    assert classification == expected
    assert abs(readout) >= 1.0 - 1e-9


def test_deutsch_single_query():
    # the whole oracle is one schedule step: one Hamiltonian application
    assert len(DeutschOracle("bal01", 5).steps()) == 1


def test_deutsch_rejects_unknown_oracle():
    with pytest.raises(ValueError):
        DeutschOracle("bal11", 3)


def test_teleportation_gate_time_scaling():
    assert teleportation_gate_time(8) == pytest.approx(1 / 4.0)
    assert teleportation_gate_time(2) == pytest.approx(0.5)
