"""
Desk-scale acceptance suite.

Each ``criterion_*`` function runs one seeded experiment and returns a
:class:`CriterionResult` holding a pass flag and the worst observed
deviations. :func:`run_all` runs the suite and then re-runs it to check that
the result hash is reproducible.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .catalog import MIXTURE_2A, MIXTURE_2B, SYMMETRIC_SELECTORS, parse_mean
from .errors import KuboAndoError
from .loewner import arithmetic_measure, harmonic_measure, measure_eval_fn, split_h
from .matcore import apply_fn, below, loewner_leq, operator_norm, spectral_projection
from .means import STANDARD_GRID, connection_eval, extension_sequence
from .experiments import e1_instance, generate_pair, prop3_instance, random_projection, random_spd, trial_rng
from .orderdet import case2a_limit_scan, order_determination_check, prop2_criteria, prop3_limit_scan, prop4_norm

AXIOM_RTOL = 1e-8
IDENTITY_TOL = 1e-10
DUAL_EXACT_TOL = 1e-12
DUAL_MIXTURE_TOL = 1e-9
MEASURE_IDENTITY_TOL = 1e-14
NORM_LIMIT_TOL = 1e-6
CLOSED_FORM_TOL = 1e-8
E1_TOL = 1e-5
PROJECTION_EPS_GRID = tuple(np.geomspace(1e-3, 10.0, 9))


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        detail = ", ".join(f"{k}={_fmt(v)}" for k, v in sorted(self.summary.items()))
        return f"[{status}] criterion {self.number}: {self.title} ({detail})"

    def to_json(self):
        return {"number": self.number, "title": self.title, "passed": self.passed, "summary": self.summary}


def _fmt(v):
    return f"{v:.3e}" if isinstance(v, float) else str(v)


def _dim(rng):
    return int(rng.integers(2, 9))


def _rel_leq(X, Y, rtol):
    return bool(loewner_leq(X, Y, rtol * (1.0 + float(operator_norm(Y)))))


def criterion_axioms(master_seed, trials=200):
    failures = 0
    worst_conv = 0.0
    catalog = [parse_mean(s) for s in SYMMETRIC_SELECTORS]
    for trial in range(trials):
        rng = trial_rng(master_seed, 1, trial)
        n = _dim(rng)
        A, B = random_spd(n, rng), random_spd(n, rng)
        E, F = rng.uniform(-1, 1, (n, n)), rng.uniform(-1, 1, (n, n))
        C, D = A + E @ E.T, B + F @ F.T
        G = rng.normal(size=(n, n))
        G = 0.5 * (G + G.T)
        G = G + (0.1 - np.linalg.eigvalsh(G)[0]) * np.eye(n)
        for sigma in catalog:
            ab = sigma(A, B)
            if not _rel_leq(ab, sigma(C, D), AXIOM_RTOL):
                failures += 1
            if not _rel_leq(G @ ab @ G, sigma(G @ A @ G, G @ B @ G), AXIOM_RTOL):
                failures += 1
            prev = None
            for _, cur in extension_sequence(sigma.f, A, B):
                if prev is not None:
                    if not _rel_leq(cur, prev, AXIOM_RTOL):
                        failures += 1
                    if operator_norm(cur - prev) <= 1e-9:
                        break
                prev = cur
            else:
                failures += 1
            conv = float(operator_norm(cur - ab)) / (1.0 + float(operator_norm(ab)))
            worst_conv = max(worst_conv, conv)
            if conv > AXIOM_RTOL:
                failures += 1
    return CriterionResult(
        1, "Kubo-Ando axioms", failures == 0, {"failures": failures, "worst_limit_rel": worst_conv}
    )


def criterion_identity(master_seed, trials=50):
    worst = 0.0
    for k, sel in enumerate(SYMMETRIC_SELECTORS):
        sigma = parse_mean(sel)
        for trial in range(trials):
            rng = trial_rng(master_seed, 2, k, trial)
            n = _dim(rng)
            B = random_spd(n, rng)
            dev = np.max(np.abs(connection_eval(sigma.f, np.eye(n), B) - apply_fn(B, sigma.f.func)))
            worst = max(worst, float(dev))
    return CriterionResult(2, "I sigma B = f(B)", worst <= IDENTITY_TOL, {"max_dev": worst})


def criterion_dual_path(master_seed, trials=100):
    exact = [parse_mean("arithmetic"), parse_mean("harmonic")]
    mixed = [parse_mean(MIXTURE_2A), parse_mean(MIXTURE_2B), parse_mean("mix:0.3:arithmetic:harmonic")]
    worst_exact = worst_mixed = 0.0
    for trial in range(trials):
        rng = trial_rng(master_seed, 3, trial)
        n = _dim(rng)
        A, B = random_spd(n, rng), random_spd(n, rng)
        for sigma in exact:
            worst_exact = max(worst_exact, float(np.max(np.abs(sigma(A, B) - sigma.via_measure(A, B)))))
        for sigma in mixed:
            worst_mixed = max(worst_mixed, float(np.max(np.abs(sigma(A, B) - sigma.via_measure(A, B)))))
    ok = worst_exact <= DUAL_EXACT_TOL and worst_mixed <= DUAL_MIXTURE_TOL
    return CriterionResult(
        3, "dual-path agreement", ok, {"max_abs_exact": worst_exact, "max_abs_mixture": worst_mixed}
    )


def criterion_measure_identities(master_seed=None):
    x = STANDARD_GRID
    dev_h = float(np.max(np.abs(measure_eval_fn(harmonic_measure(), x) - 2 * x / (1 + x))))
    dev_a = float(np.max(np.abs(measure_eval_fn(arithmetic_measure(), x) - (1 + x) / 2)))
    ok = dev_h <= MEASURE_IDENTITY_TOL and dev_a <= MEASURE_IDENTITY_TOL
    return CriterionResult(4, "measure identities", ok, {"harmonic_dev": dev_h, "arithmetic_dev": dev_a})


def criterion_projections(master_seed, trials=200):
    mismatches = 0
    ordered = 0
    for trial in range(trials):
        rng = trial_rng(master_seed, 5, trial)
        n = _dim(rng)
        kind = "ordered" if trial % 2 == 0 else "unordered"
        A, B = generate_pair(n, rng.integers(2**63), kind)
        report = prop2_criteria(A, B, PROJECTION_EPS_GRID)
        ordered += report.loewner
        if not report.consistent:
            mismatches += 1
    return CriterionResult(
        5, "spectral-projection order criteria agree", mismatches == 0,
        {"mismatches": mismatches, "ordered_pairs": ordered},
    )


def criterion_norm_limit(master_seed, trials=50):
    worst = 0.0
    grid = 2.0 ** np.arange(21)
    for trial in range(trials):
        rng = trial_rng(master_seed, 6, trial)
        family, P, X = prop3_instance(_dim(rng), rng)
        scan = prop3_limit_scan(family, P, grid, X)
        worst = max(worst, abs(float(scan.values[-1]) - scan.target))
    return CriterionResult(6, "norm limit ||X_s + sP|| - s", worst <= NORM_LIMIT_TOL, {"max_err": worst})


def criterion_closed_form(master_seed, trials=50):
    fns = {
        "geometric": parse_mean("geometric").f,
        "harmonic": parse_mean("harmonic").f,
        "power:-0.5": parse_mean("power:-0.5").f,
    }
    half = parse_mean("power:0.5")
    # f(0+) > 0 for p = 0.5, so the closed form applies to its atom-free part
    fns["h(power:0.5)"] = split_h(half.f, half.measure).h
    worst = 0.0
    for k, (name, f) in enumerate(sorted(fns.items())):
        for trial in range(trials):
            rng = trial_rng(master_seed, 7, k, trial)
            n = _dim(rng)
            A = random_spd(n, rng)
            P = random_projection(n, rng)
            direct = float(operator_norm(connection_eval(f, A, P)))
            worst = max(worst, abs(prop4_norm(f, A, P) - direct))
    return CriterionResult(7, "closed-form ||A sigma P||", worst <= CLOSED_FORM_TOL, {"max_err": worst})


def criterion_e1(master_seed, trials=20):
    worst = 0.0
    unconverged = 0
    for k, sel in enumerate(("arithmetic", MIXTURE_2A, "mix:0.3:arithmetic:harmonic")):
        sigma = parse_mean(sel)
        for trial in range(trials):
            rng = trial_rng(master_seed, 8, k, trial)
            A, P, delta = e1_instance(_dim(rng), rng)
            scan = case2a_limit_scan(sigma, A, P, delta)
            unconverged += not scan.converged
            worst = max(worst, scan.error)
    return CriterionResult(
        8, "large-s limit (alpha + gamma)||PAP||", worst <= E1_TOL and unconverged == 0,
        {"max_err": worst, "unconverged": unconverged},
    )


def _witness_valid(w, A, B, sigma):
    P = spectral_projection(B - A, below(-w.eps))
    if np.max(np.abs(P - w.P)) > 1e-10:
        return False
    X = w.X()
    margin = float(operator_norm(sigma(A, X)) - operator_norm(sigma(B, X)))
    return margin > 10.0 * w.tol and abs(margin - w.margin) <= w.tol


def criterion_theorem(master_seed, trials=100, samples=1000):
    witnesses = invalid = violations = errors = 0
    catalog = [parse_mean(s) for s in SYMMETRIC_SELECTORS]
    for trial in range(trials):
        for kind in ("ordered", "unordered"):
            rng = trial_rng(master_seed, 9, trial, kind == "unordered")
            n = _dim(rng)
            A, B = generate_pair(n, rng.integers(2**63), kind)
            for k, sigma in enumerate(catalog):
                seed = [master_seed, 9, trial, k]
                try:
                    verdict = order_determination_check(
                        sigma, A, B, samples if kind == "ordered" else 100, seed
                    )
                except KuboAndoError:
                    errors += 1
                    continue
                if kind == "ordered":
                    violations += not verdict.norm_dominated or not verdict.loewner
                elif verdict.witness is None or verdict.loewner:
                    invalid += 1
                elif _witness_valid(verdict.witness, A, B, sigma):
                    witnesses += 1
                else:
                    invalid += 1
    expected = trials * len(catalog)
    ok = witnesses == expected and invalid == 0 and violations == 0 and errors == 0
    return CriterionResult(
        9, "order determination round trip", ok,
        {"witnesses": witnesses, "expected": expected, "invalid": invalid,
         "ordered_violations": violations, "errors": errors},
    )


CRITERIA = (
    criterion_axioms,
    criterion_identity,
    criterion_dual_path,
    criterion_measure_identities,
    criterion_projections,
    criterion_norm_limit,
    criterion_closed_form,
    criterion_e1,
    criterion_theorem,
)


def run_criteria(master_seed=0):
    return [c(master_seed) for c in CRITERIA]


def result_hash(results):
    payload = json.dumps([r.to_json() for r in results if r.number != 10], sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def criterion_determinism(first, master_seed=0):
    again = run_criteria(master_seed)
    h1, h2 = result_hash(first), result_hash(again)
    return CriterionResult(10, "selftest determinism", h1 == h2, {"hash": h1[:16], "rerun_hash": h2[:16]})


def run_all(master_seed=0):
    results = run_criteria(master_seed)
    return results + [criterion_determinism(results, master_seed)]
