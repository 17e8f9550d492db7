"""Seeded experiments, channel identification and result persistence.

Trial ``t`` of an experiment with master seed ``s`` draws its window,
support, phases and magnitudes from independent generators seeded by
:func:`~gaborcs.montecarlo.derive_seed`. Experiments that sweep a sparsity
grid first derive one master seed per sparsity level, so adding trials or
grid points never changes existing rows.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (coherence_tail_bound, minimize_lemma51, thm11_coherence_guarantee,
                     thm12b_sparsity_threshold, thm21_failure_probability, thm22_condition,
                     thm22_constants, thm31_probability)
from .bp import BPConfig, basis_pursuit, dual_certificate, relative_error
from .exceptions import DomainError, GaborCSError
from .gram import conditioning_failure_rate, random_support
from .montecarlo import RateEstimate, derive_seed, parallel_map, trial_rng
from .tfcore import (GaborOperator, SparseCoeffs, SupportSet, alltop_window, is_prime,
                     steinhaus_window, tf_shift)

__all__ = [
    "EXPERIMENT_KINDS",
    "ExperimentSpec",
    "TrialRecord",
    "PhaseRow",
    "ConditioningRow",
    "RandomPhaseResult",
    "ChannelOperator",
    "IdentificationResult",
    "make_window",
    "draw_coefficients",
    "run_trial",
    "run_phase_transition",
    "run_random_phase",
    "run_conditioning",
    "identify_channel",
    "tabulate_bounds",
    "write_rows",
    "read_csv",
    "write_manifest",
    "format_value",
]

EXPERIMENT_KINDS = ("phase_transition", "random_phase", "conditioning", "bounds_table",
                    "identify", "coherence")

PHASE_FIELDS = ("n", "window", "S", "trials", "successes", "rate", "wilson_lo", "wilson_hi",
                "seed")
TRIAL_FIELDS = ("trial_index", "seed_used", "S", "success", "relative_error", "residual",
                "iterations", "certificate_max")
CONDITIONING_FIELDS = ("n", "S", "delta", "trials", "failures", "rate", "wilson_lo",
                       "wilson_hi", "thm31_bound", "seed")


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    n: int
    window_kind: str = "steinhaus"
    sparsity_grid: tuple = ()
    trials: int = 100
    master_seed: int = 0
    solver_config: BPConfig = field(default_factory=BPConfig)
    output_path: str | None = None
    output_format: str = "csv"
    magnitudes: str = "unit"
    support: tuple | None = None
    delta: float = 0.5
    sigma: float = 9.0
    epsilon: float = 0.1
    t: float = 1.0
    certificate: bool = True

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise DomainError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise DomainError("trials must be at least 1")
        grid = tuple(int(s) for s in self.sparsity_grid)
        object.__setattr__(self, "sparsity_grid", grid)
        for s in grid:
            if not 0 <= s <= self.n * self.n:
                raise DomainError(f"sparsity {s} outside [0, {self.n * self.n}]")
        if self.kind == "random_phase" and self.n % 2:
            raise DomainError(f"the random-phase model needs n even, got {self.n}")
        if self.window_kind not in ("alltop", "steinhaus"):
            raise DomainError(f"unknown window kind {self.window_kind!r}")
        if self.magnitudes not in ("unit", "gaussian"):
            raise DomainError(f"unknown magnitude model {self.magnitudes!r}")
        if self.output_format not in ("csv", "json"):
            raise DomainError(f"unknown output format {self.output_format!r}")

    def params(self) -> dict:
        d = asdict(self)
        d["solver_config"] = asdict(self.solver_config)
        d["sparsity_grid"] = list(self.sparsity_grid)
        return d


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    seed_used: int
    S: int
    success: bool
    relative_error: float
    residual: float
    iterations: int
    certificate_max: float | None = None


@dataclass(frozen=True)
class PhaseRow:
    n: int
    window: str
    S: int
    trials: int
    successes: int
    rate: float
    wilson_lo: float
    wilson_hi: float
    seed: int


@dataclass(frozen=True)
class ConditioningRow:
    n: int
    S: int
    delta: float
    trials: int
    failures: int
    rate: float
    wilson_lo: float
    wilson_hi: float
    thm31_bound: float
    seed: int


@dataclass(frozen=True)
class RandomPhaseResult:
    records: list
    failure_rate: dict
    thm21_bound: dict


def make_window(kind: str, n: int, seed: int | None = None):
    if kind == "alltop":
        return alltop_window(n)
    if kind == "steinhaus":
        if seed is None:
            raise DomainError("a Steinhaus window needs a seed")
        return steinhaus_window(n, seed)
    raise DomainError(f"unknown window kind {kind!r}")


def draw_coefficients(n: int, S: int, rng_support, rng_phase, rng_mag=None,
                      magnitudes: str = "unit", support=None) -> SparseCoeffs:
    """Random coefficients: uniform support (unless given) and uniform phases.

    With ``magnitudes="unit"`` every nonzero has modulus 1; ``"gaussian"``
    draws complex standard normal values instead.
    """
    if support is None:
        support = random_support(n, S, rng_support)
    elif not isinstance(support, SupportSet):
        support = SupportSet(support, n)
    S = len(support)
    phases = np.exp(2j * np.pi * rng_phase.random(S))
    if magnitudes == "gaussian":
        mags = np.abs(rng_mag.standard_normal(S) + 1j * rng_mag.standard_normal(S)) / math.sqrt(2)
        values = mags * phases
    else:
        values = phases
    return SparseCoeffs(support, values)


def run_trial(n: int, S: int, master_seed: int, trial_index: int, window_kind: str = "steinhaus",
              config: BPConfig | None = None, magnitudes: str = "unit", support=None,
              certificate: bool = True) -> TrialRecord:
    """Draw one instance, solve Basis Pursuit and score the recovery."""
    config = config or BPConfig()
    window_seed = derive_seed(master_seed, trial_index, "window")
    window = make_window(window_kind, n, window_seed)
    op = GaborOperator(window)
    truth = draw_coefficients(
        n, S,
        trial_rng(master_seed, trial_index, "support"),
        trial_rng(master_seed, trial_index, "phases"),
        trial_rng(master_seed, trial_index, "magnitudes"),
        magnitudes, support)
    result = basis_pursuit(op, op.synthesize(truth), config)
    err = relative_error(truth, result)
    cert = None
    if certificate and truth.nnz > 0:
        try:
            cert = dual_certificate(op, truth.support, truth.signs()).max_offsupport_magnitude
        except GaborCSError:
            cert = math.inf
    return TrialRecord(
        trial_index=trial_index,
        seed_used=window_seed if window_kind == "steinhaus" else master_seed,
        S=truth.nnz,
        success=bool(err <= config.recovery_tol),
        relative_error=err,
        residual=result.residual,
        iterations=result.iterations,
        certificate_max=cert,
    )


def _level_seed(master_seed: int, S: int) -> int:
    return derive_seed(master_seed, S, "sparsity")


def _trials_at(spec: ExperimentSpec, S: int, threads, support=None) -> list:
    seed = _level_seed(spec.master_seed, S)
    return parallel_map(
        lambda t: run_trial(spec.n, S, seed, t, spec.window_kind, spec.solver_config,
                            spec.magnitudes, support, spec.certificate),
        range(spec.trials), threads)


def run_phase_transition(spec: ExperimentSpec, threads: int | None = None) -> list:
    """Success rate of Basis Pursuit for every sparsity in ``spec.sparsity_grid``."""
    if spec.kind != "phase_transition":
        raise DomainError(f"expected a phase_transition spec, got {spec.kind!r}")
    rows = []
    for S in spec.sparsity_grid:
        records = _trials_at(spec, S, threads)
        wins = sum(r.success for r in records)
        est = RateEstimate.from_counts(wins, spec.trials)
        rows.append(PhaseRow(spec.n, spec.window_kind, S, spec.trials, wins, est.rate,
                             est.wilson_lo, est.wilson_hi, spec.master_seed))
    return rows


def run_random_phase(spec: ExperimentSpec, threads: int | None = None) -> RandomPhaseResult:
    """Per-trial records under the random-phase model, with the closed-form bound.

    Each trial uses a fresh Steinhaus window and fresh uniform phases; the
    support is ``spec.support`` when given, otherwise sampled per trial.
    """
    if spec.kind != "random_phase":
        raise DomainError(f"expected a random_phase spec, got {spec.kind!r}")
    if spec.n % 2:
        raise DomainError(f"the random-phase model needs n even, got {spec.n}")
    if spec.window_kind != "steinhaus":
        raise DomainError("the random-phase model uses a Steinhaus window")
    grid = spec.sparsity_grid
    if spec.support is not None:
        grid = (len(spec.support),)
    records, rates, bounds = [], {}, {}
    for S in grid:
        recs = _trials_at(spec, S, threads, spec.support)
        recs.sort(key=lambda r: r.trial_index)
        records.extend(recs)
        rates[S] = RateEstimate.from_counts(sum(not r.success for r in recs), spec.trials)
        if S >= 1:
            bounds[S] = thm21_failure_probability(spec.n, S, spec.sigma)
    return RandomPhaseResult(records, rates, bounds)


def run_conditioning(spec: ExperimentSpec, threads: int | None = None) -> list:
    """Monte-Carlo rate of ``||H|| > delta`` next to the closed-form bound."""
    if spec.kind != "conditioning":
        raise DomainError(f"expected a conditioning spec, got {spec.kind!r}")
    rows = []
    for S in spec.sparsity_grid:
        est = conditioning_failure_rate(spec.n, S, spec.delta, spec.trials,
                                        _level_seed(spec.master_seed, S), threads=threads)
        bound = thm31_probability(spec.n, S, spec.delta).value
        rows.append(ConditioningRow(spec.n, S, spec.delta, spec.trials, est.events, est.rate,
                                    est.wilson_lo, est.wilson_hi, bound, spec.master_seed))
    return rows


@dataclass(frozen=True, eq=False)
class ChannelOperator:
    """Operator ``Gamma = sum_lam x_lam pi(lam)`` with sparse spreading coefficients."""

    coeffs: SparseCoeffs

    @property
    def n(self) -> int:
        return self.coeffs.n

    def apply(self, h) -> np.ndarray:
        h = np.asarray(h, dtype=complex)
        out = np.zeros(self.n, dtype=complex)
        for lam, c in zip(self.coeffs.support, self.coeffs.values):
            out += c * tf_shift(h, lam)
        return out

    def __call__(self, h) -> np.ndarray:
        return self.apply(h)

    def matrix(self) -> np.ndarray:
        """Dense ``n x n`` matrix of ``Gamma``."""
        n = self.n
        q = np.arange(n)
        mat = np.zeros((n, n), dtype=complex)
        for (k, l), c in zip(self.coeffs.support, self.coeffs.values):
            # (M_l T_k)[q, (q + k) % n] = exp(2 pi i l q / n)
            mat[q, (q + k) % n] += c * np.exp(2j * np.pi * (l * q % n) / n)
        return mat


@dataclass(frozen=True, eq=False)
class IdentificationResult:
    coeffs: SparseCoeffs
    dense: np.ndarray
    residual: float
    iterations: int
    converged: bool


def identify_channel(gamma: ChannelOperator, window_kind: str = "steinhaus", seed: int = 0,
                     solver_config: BPConfig | None = None) -> IdentificationResult:
    """Recover the spreading coefficients of ``gamma`` from one probe ``(g, Gamma g)``.

    The probe output is ``Gamma g = Psi_g x``, so Basis Pursuit on it returns
    ``x``. A non-converged solve is returned with ``converged=False``.
    """
    config = solver_config or BPConfig()
    op = GaborOperator(make_window(window_kind, gamma.n, seed))
    y = gamma.apply(op.window.values)
    result = basis_pursuit(op, y, config)
    x = result.coefficients
    top = float(np.abs(x).max(initial=0.0))
    coeffs = SparseCoeffs.from_dense(x, gamma.n, threshold=config.recovery_tol * top)
    return IdentificationResult(coeffs, x, result.residual, result.iterations, result.converged)


def tabulate_bounds(spec: ExperimentSpec) -> list:
    """One row of bound evaluations per sparsity in ``spec.sparsity_grid``."""
    if spec.kind != "bounds_table":
        raise DomainError(f"expected a bounds_table spec, got {spec.kind!r}")
    n = spec.n
    c1, c2, c3 = thm22_constants()
    rows = []
    for S in spec.sparsity_grid:
        if S < 1:
            continue
        row = {"n": n, "S": S, "C1": c1, "C2": c2, "C3": c3}
        # the Alltop window (coherence 1/sqrt(n)) only exists for prime n >= 5
        row["alltop_guarantee"] = (thm11_coherence_guarantee(n, S, 1.0 / math.sqrt(n))
                                   if n >= 5 and is_prime(n) else None)
        row["steinhaus_threshold"] = (thm12b_sparsity_threshold(n, spec.t) if n % 2 == 0
                                      else math.nan)
        th31 = thm31_probability(n, S, spec.delta)
        row["thm31_bound"] = th31.value
        row["thm31_markov"] = th31.terms["markov_min"]
        row["thm31_feasible"] = th31.feasible
        if n % 2 == 0 and S < n * n:
            th21 = thm21_failure_probability(n, S, spec.sigma)
            row["thm21_bound"] = th21.value
            row["thm21_feasible"] = th21.feasible
        else:
            row["thm21_bound"] = math.nan
            row["thm21_feasible"] = False
        th22 = thm22_condition(n, S, spec.epsilon)
        row["thm22_required_n"] = th22.value
        row["thm22_feasible"] = th22.feasible
        l51 = minimize_lemma51(n, S)
        row["lemma51_bound"] = l51.value
        row["lemma51_m"] = l51.params_used.m
        row["lemma51_feasible"] = l51.feasible
        row["coherence_tail"] = coherence_tail_bound(
            n, math.sqrt(spec.sigma * math.log(n)), 0.5)
        rows.append(row)
    return rows


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def _as_dicts(rows) -> list:
    out = []
    for r in rows:
        if hasattr(r, "__dataclass_fields__"):
            r = {f.name: getattr(r, f.name) for f in fields(r)}
        out.append(dict(r))
    return out


def write_rows(rows, path, fmt: str = "csv", fieldnames=None) -> Path:
    """Write records as CSV (12 significant digits, LF endings) or JSON."""
    path = Path(path)
    dicts = _as_dicts(rows)
    if fieldnames is None:
        fieldnames = list(dicts[0]) if dicts else []
    if fmt == "csv":
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(fieldnames)
            for d in dicts:
                w.writerow([format_value(d.get(k)) for k in fieldnames])
    elif fmt == "json":
        def clean(v):
            if isinstance(v, (np.floating, float)):
                v = float(v)
                return v if math.isfinite(v) else str(v)
            if isinstance(v, np.integer):
                return int(v)
            if isinstance(v, np.bool_):
                return bool(v)
            return v
        payload = [{k: clean(d.get(k)) for k in fieldnames} for d in dicts]
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    else:
        raise DomainError(f"unknown output format {fmt!r}")
    return path


def read_csv(path, record_type=None) -> list:
    """Parse a CSV written by :func:`write_rows`; optionally rebuild dataclasses."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        raw = list(csv.DictReader(fh))
    if record_type is None:
        return raw
    types = {f.name: f.type for f in fields(record_type)}
    out = []
    for d in raw:
        kw = {}
        for k, v in d.items():
            t = str(types[k])
            if v == "":
                kw[k] = None
            elif "bool" in t:
                kw[k] = v == "true"
            elif "float" in t:
                kw[k] = float(v)
            elif "int" in t:
                kw[k] = int(v)
            else:
                kw[k] = v
        out.append(record_type(**kw))
    return out


def write_manifest(output_path, command: str, params: dict, seed, started: float) -> Path:
    """Write ``<output>.manifest.json`` describing the run."""
    output_path = Path(output_path)
    manifest = {
        "command": command,
        "params": params,
        "seed": seed,
        "version": __version__,
        "started_at": datetime.fromtimestamp(started, tz=timezone.utc).isoformat(),
        "duration_s": time.time() - started,
    }
    path = output_path.with_name(output_path.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, default=str) + "\n", encoding="utf-8")
    return path
