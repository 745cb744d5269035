"""Self-contained invariant suite behind the ``verify`` CLI subcommand.

Each check states its tolerance and reports pass/fail; the CLI turns any
failure into exit code 4.  The random ensembles are reproducible from the
seed, and the dynamical checks honor a step-size override so a coarse
integrator is *supposed* to trip the monotonicity check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import entanglement, gellmann, sampling, statelib
from .dynamics import DEFAULT_STEP, EvolutionConfig, evolve
from .entanglement import PairSelector, apply_Q, bloch_vector, dense_Q, tau
from .hilbert import (
    LocalOperator,
    StateVector,
    apply_local,
    as_dims,
    basis_index,
    embed,
    expectation,
    fidelity,
    index_digits,
)
from .statelib import build_state, ghz, parse_state_expr, render_state_expr

DEFAULT_SEED = 20250809

QUBITS = as_dims((2, 2, 2))


@dataclass
class CheckResult:
    name: str
    passed: bool
    tolerance: str
    detail: str


def _result(name, passed, tolerance, detail) -> CheckResult:
    return CheckResult(name, bool(passed), tolerance, detail)


def check_index_bijection(rng) -> CheckResult:
    worst = True
    for _ in range(200):
        n_subs = int(rng.integers(2, 5))
        dims = as_dims(tuple(int(rng.integers(2, 5)) for _ in range(n_subs)))
        digits = tuple(int(rng.integers(0, dims.dim(n))) for n in range(len(dims), 0, -1))
        idx = basis_index(digits, dims)
        worst = worst and index_digits(idx, dims) == digits and 0 <= idx < dims.total_dim
    # exhaustive bijection on the workhorse three-qubit system
    seen = {basis_index(d, QUBITS) for d in itertools.product((0, 1), repeat=3)}
    worst = worst and seen == set(range(8))
    return _result("hilbert.index_bijection", worst, "exact", "200 random tuples + exhaustive (2,2,2)")


def check_apply_local(rng) -> CheckResult:
    worst = 0.0
    for _ in range(100):
        n_subs = int(rng.integers(2, 4))
        dims = as_dims(tuple(int(rng.integers(2, 4)) for _ in range(n_subs)))
        psi = sampling.haar_state(rng, dims)
        n = int(rng.integers(1, len(dims) + 1))
        d = dims.dim(n)
        mat = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        op = LocalOperator(n, mat)
        fast = apply_local(psi, op).amplitudes
        dense = embed(op, dims).matrix @ psi.amplitudes
        scale = max(np.linalg.norm(dense), 1e-300)
        worst = max(worst, np.linalg.norm(fast - dense) / scale)
    return _result("hilbert.apply_local_matches_embed", worst <= 1e-13, "1e-13 rel", "worst %.3e" % worst)


def check_hermitian_expectation(rng) -> CheckResult:
    worst = 0.0
    for _ in range(100):
        psi = sampling.haar_state(rng, QUBITS)
        n = int(rng.integers(1, 4))
        z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        op = LocalOperator(n, z + z.conj().T, observable=True)
        worst = max(worst, abs(expectation(psi, op).imag))
    return _result("hilbert.hermitian_expectation_real", worst <= 1e-12, "1e-12", "worst imag %.3e" % worst)


def check_gellmann_suite() -> CheckResult:
    worst = 0.0
    counts_ok = True
    for d in (2, 3, 4, 5):
        basis = gellmann.generate(d)
        counts_ok = counts_ok and basis.count == d * d - 1
        for m in basis:
            worst = max(worst, np.abs(m - m.conj().T).max())
            worst = max(worst, abs(np.trace(m)))
        gram = np.einsum("aij,bji->ab", basis.matrices, basis.matrices)
        worst = max(worst, np.abs(gram - 2.0 * np.eye(basis.count)).max())
    pauli = gellmann.generate(2).matrices
    exact = (
        np.array_equal(pauli[0], [[0, 1], [1, 0]])
        and np.array_equal(pauli[1], [[0, -1j], [1j, 0]])
        and np.array_equal(pauli[2], [[1, 0], [0, -1]])
    )
    return _result(
        "gellmann.basis_properties",
        worst <= 1e-12 and counts_ok and exact,
        "1e-12; d=2 exact",
        "d in {2..5}, worst deviation %.3e" % worst,
    )


def check_gellmann_completeness() -> CheckResult:
    d = 2
    basis = gellmann.generate(d).matrices
    lhs = np.einsum("aij,akl->ijkl", basis, basis)
    eye = np.eye(d)
    rhs = 2.0 * np.einsum("il,jk->ijkl", eye, eye) - (2.0 / d) * np.einsum("ij,kl->ijkl", eye, eye)
    worst = np.abs(lhs - rhs).max()
    return _result("gellmann.completeness_d2", worst <= 1e-12, "1e-12", "worst entry %.3e" % worst)


def check_tau_symmetry(rng) -> CheckResult:
    worst = 0.0
    for _ in range(50):
        psi = sampling.haar_state(rng, QUBITS)
        for first, second in ((1, 2), (2, 3), (3, 1)):
            a = tau(psi, PairSelector.for_dims(QUBITS, first, second))
            b = tau(psi, PairSelector.for_dims(QUBITS, second, first))
            worst = max(worst, abs(a - b))
    return _result("entanglement.tau_symmetry", worst <= 1e-12, "1e-12", "worst %.3e" % worst)


def check_local_unitary_invariance(rng) -> CheckResult:
    worst = 0.0
    pairs = [PairSelector.for_dims(QUBITS, a, b) for a, b in ((1, 2), (2, 3), (3, 1))]
    for _ in range(100):
        psi = sampling.haar_state(rng, QUBITS)
        before = [tau(psi, p) for p in pairs]
        rotated = psi.amplitudes
        for n in (1, 2, 3):
            u = sampling.haar_unitary(rng, 2)
            from .hilbert import _apply_local_array

            rotated = _apply_local_array(rotated, u, n, QUBITS)
        rotated_state = StateVector(rotated / np.linalg.norm(rotated), QUBITS, normalized=True)
        after = [tau(rotated_state, p) for p in pairs]
        worst = max(worst, max(abs(a - b) for a, b in zip(before, after)))
    return _result("entanglement.local_unitary_invariance", worst <= 1e-10, "1e-10", "worst %.3e" % worst)


def check_tau_and_k_range(rng) -> CheckResult:
    lo, hi, k_hi = 0.0, 0.0, 0.0
    pairs = [PairSelector.for_dims(QUBITS, a, b) for a, b in ((1, 2), (2, 3), (3, 1))]
    for _ in range(1000):
        psi = sampling.haar_state(rng, QUBITS)
        for p in pairs:
            t = tau(psi, p)
            lo = min(lo, t)
            hi = max(hi, t)
        for n in (1, 2, 3):
            k_hi = max(k_hi, float(np.linalg.norm(bloch_vector(psi, n))))
    ok = lo >= -1e-12 and hi <= 1.0 + 1e-9 and k_hi <= 1.0 + 1e-9
    return _result(
        "entanglement.tau_k_range",
        ok,
        "[0, 1+1e-9]",
        "tau in [%.3e, %.9f], max k %.9f over 1000 Haar states" % (lo, hi, k_hi),
    )


def check_oracle_equivalence(rng) -> CheckResult:
    worst = 0.0
    for first, second in itertools.permutations((1, 2, 3), 2):
        pair = PairSelector.for_dims(QUBITS, first, second)
        for _ in range(50):
            psi = sampling.haar_state(rng, QUBITS)
            fast = apply_Q(psi, pair)
            dense = dense_Q(psi, pair).matrix @ psi.amplitudes
            scale = max(np.linalg.norm(dense), np.linalg.norm(fast), 1e-30)
            worst = max(worst, np.linalg.norm(fast - dense) / scale)
    return _result("entanglement.oracle_equivalence", worst <= 1e-12, "1e-12 rel", "6 ordered pairs x 50 states, worst %.3e" % worst)


def check_product_annihilated(rng) -> CheckResult:
    worst = 0.0
    pair = PairSelector.for_dims(QUBITS, 1, 2)
    for _ in range(100):
        psi = sampling.product_state(rng, QUBITS)
        worst = max(worst, float(np.linalg.norm(apply_Q(psi, pair))))
    return _result("entanglement.product_states_annihilated", worst <= 1e-10, "1e-10", "worst ||Q psi|| %.3e" % worst)


def check_pairwise_separability(rng) -> CheckResult:
    worst = 1.0
    for _ in range(100):
        psi = sampling.product_state(rng, QUBITS)
        k3 = float(np.linalg.norm(bloch_vector(psi, 3)))
        worst = min(worst, k3)
    return _result(
        "entanglement.pairwise_separability",
        worst >= 1.0 - 1e-10,
        "1e-10",
        "fully product states: min k3 = %.12f" % worst,
    )


def check_statelib_roundtrip(rng) -> CheckResult:
    ok = True
    atoms = ["ghz", "|000>", "|101>", "bell1", "bell2", "bell3"]
    for _ in range(100):
        terms = []
        for _ in range(int(rng.integers(1, 5))):
            coef = float(np.round(rng.uniform(-2, 2), 6)) or 1.0
            imag = bool(rng.integers(0, 2))
            atom = atoms[int(rng.integers(0, len(atoms)))]
            if atom.startswith("bell"):
                atom = "%s(%r)" % (atom, float(np.round(rng.uniform(-np.pi, np.pi), 6)))
            term = "%r*%s%s" % (coef, "i*" if imag else "", atom)
            terms.append(term)
        text = " + ".join(terms)
        expr = parse_state_expr(text)
        ok = ok and parse_state_expr(render_state_expr(expr)) == expr
    return _result("statelib.roundtrip", ok, "exact", "100 random expressions")


def check_statelib_ghz() -> CheckResult:
    built = build_state(parse_state_expr("(|000> - |111>)"), QUBITS)
    delta = float(np.abs(built.amplitudes - ghz().amplitudes).max())
    return _result("statelib.ghz_equivalence", delta <= 1e-15, "1e-15", "max amplitude delta %.3e" % delta)


def fig1_initial() -> StateVector:
    return statelib.state_from_text("ghz - 1e-5*i*bell1(pi) - 5.2e-4*i*bell2(pi)")


def fig2_initial() -> StateVector:
    return statelib.state_from_text("bell3(pi) + 9e-5*i*bell2(pi)")


def _config(step: float, **kwargs) -> EvolutionConfig:
    return EvolutionConfig(pair=PairSelector.for_dims(QUBITS, 1, 2), step=step, **kwargs)


def check_norm_conservation(step: float) -> CheckResult:
    config = _config(step, renormalize_each_step=False)
    trajectory = evolve(fig1_initial(), config)
    drift = trajectory.max_norm_deviation
    return _result("dynamics.norm_conservation", drift <= 1e-6, "1e-6", "max | ||psi||-1 | = %.3e with renormalization off" % drift)


#: window for the V1/V2 endpoint-structure check at s=50.  The dichotomy is
#: asymptotic; at s=50 generic Haar states have stragglers still converging,
#: so a 1e-3 window only closes around s~200 (the long-horizon test in
#: tests/test_dynamics.py checks that form).
STRUCTURE_WINDOW = 1e-2


def check_monotonic_disentanglement(rng, step: float) -> CheckResult:
    config = _config(step)
    worst_rise = 0.0
    worst_final = 0.0
    structured = 0
    for _ in range(50):
        trajectory = evolve(sampling.haar_state(rng, QUBITS), config)
        series = trajectory.tau_series(1, 2)
        rises = np.diff(series)
        if rises.size:
            worst_rise = max(worst_rise, float(rises.max()))
        worst_final = max(worst_final, float(series[-1]))
        k = trajectory.final_report.bloch_lengths
        w = STRUCTURE_WINDOW
        if (k[0] >= 1 - w and abs(k[1] - k[2]) <= w) or (
            k[1] >= 1 - w and abs(k[2] - k[0]) <= w
        ):
            structured += 1
    mono = _result(
        "dynamics.monotonic_tau",
        worst_rise <= 1e-8,
        "1e-8",
        "50 Haar states: max single-sample rise %.3e" % worst_rise,
    )
    terminal = _result(
        "dynamics.terminal_disentanglement",
        worst_final <= 1e-3,
        "1e-3",
        "max tau12 at s=%g is %.3e" % (config.duration, worst_final),
    )
    structure = _result(
        "dynamics.terminal_structure",
        structured >= 45,
        ">= 90%",
        "%d/50 endpoints match the V1/V2 pattern within %g at s=%g"
        % (structured, STRUCTURE_WINDOW, config.duration),
    )
    return mono, terminal, structure


def check_product_fixed_point(rng, step: float) -> CheckResult:
    config = _config(step)
    worst = 0.0
    for _ in range(100):
        psi = sampling.product_state(rng, QUBITS)
        trajectory = evolve(psi, config)
        worst = max(worst, 1.0 - fidelity(trajectory.final_state, psi))
    return _result("dynamics.product_fixed_point", worst <= 1e-10, "1e-10", "100 product states, worst fidelity drift %.3e" % worst)


def check_self_convergence(step: float) -> CheckResult:
    worst = 0.0
    for initial in (fig1_initial(), fig2_initial()):
        coarse = evolve(initial, _config(step)).final_state.amplitudes
        fine = evolve(initial, _config(step / 2)).final_state.amplitudes
        worst = max(worst, float(np.linalg.norm(coarse - fine)))
    return _result("dynamics.self_convergence", worst <= 1e-5, "1e-5", "step halving moves both figure endpoints by at most %.3e" % worst)


def check_cell_matches_evolve() -> CheckResult:
    from .sweep import GridSpec, SweepSpec, run_cell

    spec = SweepSpec(
        base=parse_state_expr("ghz"),
        direction1=parse_state_expr("bell1(pi)"),
        direction2=parse_state_expr("bell2(pi)"),
        grid1=GridSpec(-1e-3, 1e-3, 3),
        grid2=GridSpec(-1e-3, 1e-3, 3),
        evolution=_config(DEFAULT_STEP, duration=5.0),
    )
    from .sweep import initial_state

    cell = run_cell(spec, 3e-4, -7e-4)
    direct = evolve(initial_state(spec, 3e-4, -7e-4), _config(DEFAULT_STEP, duration=5.0))
    same = cell.report.bloch_lengths == direct.final_report.bloch_lengths and all(
        cell.report.taus[k] == direct.final_report.taus[k] for k in cell.report.taus
    )
    return _result("sweep.cell_matches_evolve", same, "bit-exact", "one off-grid cell vs a direct evolve")


def _child_rng(seed: int, tag: int) -> np.random.Generator:
    # each check draws from its own stream so ensembles do not shift when
    # unrelated checks are added or reordered
    return np.random.default_rng([seed, tag])


def run_checks(seed: int = DEFAULT_SEED, step: Optional[float] = None) -> list:
    """Run every check; ``step`` overrides the integrator step used by the
    dynamical checks (the static ones ignore it)."""
    step = DEFAULT_STEP if step is None else float(step)
    results = [
        check_index_bijection(_child_rng(seed, 1)),
        check_apply_local(_child_rng(seed, 2)),
        check_hermitian_expectation(_child_rng(seed, 3)),
        check_gellmann_suite(),
        check_gellmann_completeness(),
        check_tau_symmetry(_child_rng(seed, 6)),
        check_local_unitary_invariance(_child_rng(seed, 7)),
        check_tau_and_k_range(_child_rng(seed, 8)),
        check_oracle_equivalence(_child_rng(seed, 9)),
        check_product_annihilated(_child_rng(seed, 10)),
        check_pairwise_separability(_child_rng(seed, 11)),
        check_statelib_roundtrip(_child_rng(seed, 12)),
        check_statelib_ghz(),
        check_norm_conservation(step),
    ]
    results.extend(check_monotonic_disentanglement(_child_rng(seed, 16), step))
    results.append(check_product_fixed_point(_child_rng(seed, 19), step))
    results.append(check_self_convergence(step))
    results.append(check_cell_matches_evolve())
    return results


def format_table(results) -> str:
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        lines.append(
            "%-*s  %s  tol %-12s %s" % (width, r.name, "PASS" if r.passed else "FAIL", r.tolerance, r.detail)
        )
    failed = sum(not r.passed for r in results)
    lines.append("%d/%d checks passed" % (len(results) - failed, len(results)))
    return "\n".join(lines)
