import json
import math

import numpy as np
import pytest

from gaborcs import BPConfig, DomainError, SparseCoeffs, SupportSet, tf_shift
from gaborcs.harness import (CONDITIONING_FIELDS, PHASE_FIELDS, TRIAL_FIELDS, ChannelOperator,
                             ConditioningRow, ExperimentSpec, PhaseRow, TrialRecord,
                             draw_coefficients, format_value, identify_channel, read_csv,
                             run_conditioning, run_phase_transition, run_random_phase, run_trial,
                             tabulate_bounds, write_manifest, write_rows)
from gaborcs.montecarlo import trial_rng


def _round12(v):
    return float(f"{v:.12g}") if isinstance(v, float) else v


def test_spec_validation():
    with pytest.raises(DomainError):
        ExperimentSpec("random_phase", 63, sparsity_grid=(1,))
    with pytest.raises(DomainError):
        ExperimentSpec("phase_transition", 4, sparsity_grid=(17,))
    with pytest.raises(DomainError):
        ExperimentSpec("phase_transition", 4, trials=0)
    with pytest.raises(DomainError):
        ExperimentSpec("nonsense", 4)
    p = ExperimentSpec("phase_transition", 8, sparsity_grid=(1, 2)).params()
    assert p["sparsity_grid"] == [1, 2] and p["solver_config"]["recovery_tol"] == 1e-5


def test_draw_coefficients_models():
    c = draw_coefficients(8, 5, trial_rng(0, 0, "s"), trial_rng(0, 0, "p"))
    assert c.nnz == 5 and np.allclose(np.abs(c.values), 1)
    g = draw_coefficients(8, 5, trial_rng(0, 0, "s"), trial_rng(0, 0, "p"),
                          trial_rng(0, 0, "m"), "gaussian")
    assert g.support == c.support and not np.allclose(np.abs(g.values), 1)


def test_run_trial_success_matches_error():
    rec = run_trial(16, 2, master_seed=5, trial_index=0)
    assert rec.success == (rec.relative_error <= 1e-5)
    assert rec.certificate_max is not None


def test_zero_sparsity_row_succeeds():
    rows = run_phase_transition(ExperimentSpec("phase_transition", 8, sparsity_grid=(0,),
                                               trials=3))
    assert rows[0].rate == 1.0


def test_phase_rate_is_mean_of_trials():
    spec = ExperimentSpec("phase_transition", 16, sparsity_grid=(6,), trials=12, master_seed=3)
    row = run_phase_transition(spec)[0]
    from gaborcs.harness import _level_seed
    trials = [run_trial(16, 6, _level_seed(3, 6), t) for t in range(12)]
    assert row.successes == sum(t.success for t in trials)
    assert row.rate == np.mean([t.success for t in trials])


def test_phase_transition_thread_independent():
    spec = ExperimentSpec("phase_transition", 16, sparsity_grid=(2, 8), trials=6, master_seed=1)
    assert run_phase_transition(spec, threads=1) == run_phase_transition(spec, threads=3)


def test_adding_trials_keeps_earlier_records():
    small = ExperimentSpec("random_phase", 16, sparsity_grid=(3,), trials=3, master_seed=9)
    big = ExperimentSpec("random_phase", 16, sparsity_grid=(3,), trials=5, master_seed=9)
    assert run_random_phase(small).records == run_random_phase(big).records[:3]


def test_random_phase_fixed_support():
    sup = SupportSet([(0, 0), (3, 4), (7, 1)], 16)
    spec = ExperimentSpec("random_phase", 16, sparsity_grid=(3,), trials=4, support=tuple(sup))
    res = run_random_phase(spec)
    assert all(r.S == 3 for r in res.records)
    assert res.thm21_bound[3].value > 1


def test_conditioning_rows():
    spec = ExperimentSpec("conditioning", 32, sparsity_grid=(1, 4), trials=20, delta=0.5)
    rows = run_conditioning(spec)
    assert rows[0].failures == 0
    assert all(0 <= r.wilson_lo <= r.rate <= r.wilson_hi <= 1 for r in rows)


# ---------------------------------------------------------------- channels

def test_channel_operator_matches_dense():
    rng = np.random.default_rng(0)
    for n in (5, 16, 32):
        c = draw_coefficients(n, 4, rng, rng)
        gamma = ChannelOperator(c)
        dense = sum(v * np.column_stack([tf_shift(e, lam) for e in np.eye(n)])
                    for lam, v in zip(c.support, c.values))
        assert np.allclose(gamma.matrix(), dense, atol=1e-10)
        h = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        assert np.allclose(gamma(h), dense @ h, atol=1e-10)


@pytest.mark.parametrize("lam", [(0, 0), (3, 5)])
def test_identify_single_shift(lam):
    gamma = ChannelOperator(SparseCoeffs(SupportSet([lam], 16), [1.0]))
    out = identify_channel(gamma, "steinhaus", seed=4)
    assert list(out.coeffs.support) == [lam]
    assert np.allclose(out.coeffs.values, [1.0], atol=1e-6)


def test_identify_random_channel():
    rng = np.random.default_rng(1)
    truth = draw_coefficients(32, 3, rng, rng)
    out = identify_channel(ChannelOperator(truth), "steinhaus", seed=11)
    assert out.converged
    assert np.linalg.norm(out.dense - truth.to_dense()) <= 1e-5 * np.linalg.norm(truth.values)


def test_identify_flags_nonconvergence():
    rng = np.random.default_rng(2)
    truth = draw_coefficients(16, 3, rng, rng)
    out = identify_channel(ChannelOperator(truth), seed=0,
                           solver_config=BPConfig(max_iterations=10))
    assert not out.converged


# ---------------------------------------------------------------- bounds table

def test_bounds_table():
    rows = tabulate_bounds(ExperimentSpec("bounds_table", 1024, sparsity_grid=(1, 4, 8),
                                          trials=1))
    assert len(rows) == 3
    r4 = rows[1]
    assert abs(r4["C1"] - 273.5) <= 0.5 and abs(r4["C2"] - 64.1) <= 0.5
    assert abs(r4["C3"] - 8.35) <= 0.1
    assert abs(r4["thm31_bound"] - 0.0119) < 5e-5
    assert r4["alltop_guarantee"] is None  # 1024 is not prime
    for row in rows:
        for k in ("thm31_bound", "thm31_markov", "thm21_bound", "lemma51_bound",
                  "coherence_tail"):
            assert row[k] >= 0


# ---------------------------------------------------------------- persistence

def test_format_value():
    assert format_value(True) == "true" and format_value(None) == ""
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(7) == "7"


def test_csv_round_trip(tmp_path):
    rows = [PhaseRow(64, "steinhaus", 7, 100, 97, 0.97, 0.915, 0.9938393, 42),
            PhaseRow(64, "steinhaus", 8, 100, 90, 0.9, 1 / 3, math.pi / 4, 42)]
    path = write_rows(rows, tmp_path / "pt.csv", "csv", PHASE_FIELDS)
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.splitlines()[0] == b"n,window,S,trials,successes,rate,wilson_lo,wilson_hi,seed"
    back = read_csv(path, PhaseRow)
    expected = [PhaseRow(**{k: _round12(v) for k, v in vars(r).items()}) for r in rows]
    assert back == expected
    # re-serialising the parsed records reproduces the file byte for byte
    again = write_rows(back, tmp_path / "again.csv", "csv", PHASE_FIELDS)
    assert again.read_bytes() == raw


def test_trial_record_round_trip(tmp_path):
    recs = [TrialRecord(0, 123, 3, True, 1e-9, 2e-10, 400, 0.5),
            TrialRecord(1, 456, 3, False, 0.7, 1e-3, 20000, None)]
    path = write_rows(recs, tmp_path / "t.csv", "csv", TRIAL_FIELDS)
    assert read_csv(path, TrialRecord) == recs


def test_json_output(tmp_path):
    rows = [ConditioningRow(64, 4, 0.5, 10, 0, 0.0, 0.0, 0.27, math.inf, 1)]
    path = write_rows(rows, tmp_path / "c.json", "json", CONDITIONING_FIELDS)
    data = json.loads(path.read_text())
    assert data[0]["thm31_bound"] == "inf" and data[0]["S"] == 4


def test_unknown_format(tmp_path):
    with pytest.raises(DomainError):
        write_rows([{"a": 1}], tmp_path / "x", "xml")


def test_write_errors_carry_path(tmp_path):
    bad = tmp_path / "missing" / "x.csv"
    with pytest.raises(OSError, match="missing"):
        write_rows([{"a": 1}], bad)


def test_manifest(tmp_path):
    out = tmp_path / "r.csv"
    path = write_manifest(out, "phase", {"n": 8}, 42, started=0.0)
    m = json.loads(path.read_text())
    assert path.name == "r.csv.manifest.json"
    assert set(m) == {"command", "params", "seed", "version", "started_at", "duration_s"}
    assert m["seed"] == 42 and m["version"] == "0.1.0"
