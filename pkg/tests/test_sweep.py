import numpy as np
import pytest

from entflow.dynamics import EvolutionConfig, evolve
from entflow.entanglement import EntanglementReport, PairSelector
from entflow.gellmann import generate
from entflow.hilbert import LocalOperator, embed
from entflow.io import read_csv_columns, write_sweep_csv
from entflow.statelib import parse_state_expr
from entflow.sweep import (
    BASIN_UNRESOLVED,
    GridSpec,
    SweepCell,
    SweepSpec,
    classify_basin,
    initial_state,
    run_cell,
    run_sweep,
)


def fake_report(k):
    return EntanglementReport(
        time=50.0,
        taus={(1, 2): 0.0, (1, 3): 0.0, (2, 3): 0.0},
        bloch_vectors=tuple(np.array([0.0, 0.0, kn]) for kn in k),
    )


def test_classify_basin_cases(pair12):
    assert classify_basin(fake_report((1.0, 0.4, 0.4)), 1e-3, pair12) == "B1"
    assert classify_basin(fake_report((0.4, 1.0, 0.4)), 1e-3, pair12) == "B2"
    # the damped pair is (1,2); a separable third subsystem resolves nothing
    assert classify_basin(fake_report((0.62, 0.62, 1.0)), 1e-3, pair12) == BASIN_UNRESOLVED
    assert classify_basin(fake_report((1.0, 1.0, 1.0)), 1e-3, pair12) == BASIN_UNRESOLVED
    swapped = PairSelector.for_dims((2, 2, 2), 3, 1)
    assert classify_basin(fake_report((0.2, 0.2, 1.0)), 1e-3, swapped) == "B3"


def ghz_spec(duration=50.0, count=3, step=1e-3):
    return SweepSpec(
        base=parse_state_expr("ghz"),
        direction1=parse_state_expr("bell1(pi)"),
        direction2=parse_state_expr("bell2(pi)"),
        grid1=GridSpec(-1e-3, 1e-3, count),
        grid2=GridSpec(-1e-3, 1e-3, count),
        evolution=EvolutionConfig(
            pair=PairSelector.for_dims((2, 2, 2), 1, 2), duration=duration, step=step
        ),
    )


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(0.0, 1.0, 1)
    with pytest.raises(ValueError):
        GridSpec(1.0, -1.0, 5)
    with pytest.raises(ValueError):
        SweepSpec(
            base=parse_state_expr("ghz"),
            direction1=parse_state_expr("bell1(pi)"),
            direction2=parse_state_expr("bell2(pi)"),
            grid1=GridSpec(-1e-3, 1e-3, 3),
            grid2=GridSpec(-1e-3, 1e-3, 3),
            evolution=EvolutionConfig(pair=PairSelector.for_dims((2, 2, 2), 1, 2)),
            basin_tol=0.5,
        )


def test_initial_state_matches_caption_composition():
    spec = ghz_spec()
    psi = initial_state(spec, -1e-5, -5.2e-4)
    from entflow.statelib import state_from_text

    want = state_from_text("ghz - 1e-5*i*bell1(pi) - 5.2e-4*i*bell2(pi)")
    assert np.abs(psi.amplitudes - want.amplitudes).max() <= 1e-15


def test_caption_cell_lands_in_b2():
    spec = ghz_spec()
    cell = run_cell(spec, -1e-5, -5.2e-4)
    assert cell.status == "ok"
    assert cell.basin == "B2"
    assert cell.report.tau_of(3, 1) >= 0.99
    assert cell.report.tau_of(1, 2) <= 1e-3
    assert cell.report.tau_of(2, 3) <= 1e-3


def test_center_cell_unresolved_on_separatrix():
    spec = ghz_spec()
    cell = run_cell(spec, 0.0, 0.0)
    assert cell.basin == BASIN_UNRESOLVED


def test_cells_match_direct_evolve_bit_for_bit():
    spec = ghz_spec(duration=5.0)
    result = run_sweep(spec, workers=1)
    idx = 1 * 3 + 2  # eps1 = 0, eps2 = +1e-3
    cell = result.cells[idx]
    direct = evolve(
        initial_state(spec, 0.0, 1e-3),
        EvolutionConfig(pair=spec.evolution.pair, duration=5.0),
    ).final_report
    assert cell.report.bloch_lengths == direct.bloch_lengths
    assert all(cell.report.taus[k] == direct.taus[k] for k in direct.taus)


def test_sweep_structure_and_determinism(tmp_path):
    spec = ghz_spec(duration=50.0)
    one = run_sweep(spec, workers=1)
    two = run_sweep(spec, workers=4)
    p1, p2 = tmp_path / "w1.csv", tmp_path / "w4.csv"
    write_sweep_csv(p1, one)
    write_sweep_csv(p2, two)
    assert p1.read_bytes() == p2.read_bytes()

    basins = {cell.basin for cell in one.cells}
    assert "B1" in basins and "B2" in basins
    assert one.cell(1, 1).basin == BASIN_UNRESOLVED  # exact base state
    for cell in one.cells:
        assert cell.status == "ok"
        if cell.basin != BASIN_UNRESOLVED:
            assert cell.report.tau_of(1, 2) <= 1e-3
    # row-major ordering: eps1 varies slowest
    eps1 = [cell.eps1 for cell in one.cells]
    assert eps1 == sorted(eps1)


def test_sweep_records_failed_cells(tmp_path):
    wild = embed(LocalOperator(1, 1e9 * generate(2)[0]), (2, 2, 2))
    spec = SweepSpec(
        base=parse_state_expr("ghz"),
        direction1=parse_state_expr("bell1(pi)"),
        direction2=parse_state_expr("bell2(pi)"),
        grid1=GridSpec(-1e-3, 1e-3, 2),
        grid2=GridSpec(-1e-3, 1e-3, 2),
        evolution=EvolutionConfig(
            pair=PairSelector.for_dims((2, 2, 2), 1, 2), duration=1.0, hamiltonian=wild
        ),
    )
    result = run_sweep(spec, workers=1)
    assert all(cell.status == "numerical_failure" for cell in result.cells)
    assert all(cell.basin == BASIN_UNRESOLVED for cell in result.cells)
    path = tmp_path / "failed.csv"
    write_sweep_csv(path, result)
    columns = read_csv_columns(path)
    assert columns["status"] == ["numerical_failure"] * 4
    assert columns["k1"] == ["nan"] * 4
