"""
Seeded experiment driver behind the command line.

Every trial draws from its own generator seeded by ``(master_seed,
trial_index)``, so results do not depend on execution order. Outputs are
byte-stable: JSON with sorted keys, CSV with a fixed column order, and
timings only when explicitly requested.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .catalog import parse_mean
from .errors import InputError, TheoremViolationError
from .loewner import BorelMeasure, measure_connection_eval
from .matcore import (
    MAX_DIM,
    below,
    loewner_leq,
    matrix_from_json,
    matrix_to_json,
    operator_norm,
    spectral_projection,
    sym_eig,
)
from .orderdet import S_GRID, case2a_limit_scan, order_determination_check, prop3_limit_scan, witness_search

COMMANDS = ("eval", "check-order", "witness", "scan-prop3", "scan-e1", "selftest")
PAIR_KINDS = ("ordered", "unordered", "congruent-diagonal")


def trial_rng(master_seed, *stream):
    return np.random.default_rng([int(master_seed), *map(int, stream)])


def random_spd(n, rng):
    """``M M^T + 0.1 I`` with ``M`` uniform on ``[-1, 1]``."""
    M = rng.uniform(-1.0, 1.0, size=(n, n))
    return 0.5 * (M @ M.T + (M @ M.T).T) + 0.1 * np.eye(n)


def random_orthogonal(n, rng):
    if n == 2:
        theta = rng.uniform(0.0, np.pi)
        c, s = np.cos(theta), np.sin(theta)
        return np.array([[c, -s], [s, c]])
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    return Q * np.sign(np.diag(R))


def random_projection(n, rng, rank=None):
    """Spectral projection of a random symmetric matrix, rank in ``[1, n - 1]``."""
    G = rng.normal(size=(n, n))
    D = 0.5 * (G + G.T)
    dec = sym_eig(D)
    w = dec.eigenvalues
    if rank is None:
        rank = int(rng.integers(1, n)) if n > 1 else 1
    cut = (w[rank - 1] + w[rank]) / 2 if rank < n else w[-1] + 1.0
    return spectral_projection(D, below(cut), dec)


def generate_pair(n, rng_seed, kind="ordered"):
    """
    Random positive definite pair.

    ``ordered``: ``B = A + C C^T``. ``unordered``: ``B - A`` has eigenvalues
    below ``-0.1`` and above ``0.1``. ``congruent-diagonal``:
    ``A = G diag(2, 1, 2, ...) G^T`` and ``B = G diag(1, 2, 1, ...) G^T``
    for a random rotation ``G``.
    """
    if n < 2:
        raise InputError("pairs need n >= 2")
    rng = np.random.default_rng(rng_seed)
    if kind == "ordered":
        A = random_spd(n, rng)
        C = rng.uniform(-1.0, 1.0, size=(n, n))
        return A, A + 0.5 * (C @ C.T + (C @ C.T).T)
    if kind == "unordered":
        for _ in range(10_000):
            A, B = random_spd(n, rng), random_spd(n, rng)
            w = np.linalg.eigvalsh(B - A)
            if w[0] < -0.1 and w[-1] > 0.1:
                return A, B
        raise RuntimeError("rejection sampling for an unordered pair did not terminate")
    if kind == "congruent-diagonal":
        G = random_orthogonal(n, rng)
        a = np.where(np.arange(n) % 2 == 0, 2.0, 1.0)
        A = (G * a) @ G.T
        B = (G * (3.0 - a)) @ G.T
        return 0.5 * (A + A.T), 0.5 * (B + B.T)
    raise InputError(f"unknown pair kind {kind!r}")


def prop3_instance(n, rng):
    """``(X_s = X + R/s, P, X)`` with ``||X|| = 1`` and ``||R|| = 0.1``."""
    X = random_spd(n, rng)
    X = X / operator_norm(X)
    R = random_spd(n, rng)
    R = 0.1 * R / operator_norm(R)
    P = random_projection(n, rng)
    return (lambda s: X + R / s), P, X


def e1_instance(n, rng):
    A = random_spd(n, rng)
    P = random_projection(n, rng)
    delta = float(rng.uniform(0.25, 1.0))
    return A, P, delta


@dataclass
class ExperimentConfig:
    command: str
    mean: str = "geometric"
    n: int = 3
    trials: int = 1
    master_seed: int = 0
    kind: str = "mixed"
    samples: int = 1000
    delta: Optional[float] = None
    a_path: Optional[str] = None
    b_path: Optional[str] = None
    measure_path: Optional[str] = None
    output: Optional[str] = None
    tol_limit: float = 1e-6
    timings: bool = False

    def validate(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.trials < 1:
            raise InputError("trials must be >= 1")
        if not 2 <= self.n <= MAX_DIM:
            raise InputError(f"n must lie in [2, {MAX_DIM}]")
        if self.kind not in PAIR_KINDS + ("mixed",):
            raise InputError(f"unknown pair kind {self.kind!r}")
        if self.samples < 1:
            raise InputError("samples must be >= 1")
        if self.command != "selftest":
            parse_mean(self.mean)


@dataclass
class TrialRecord:
    trial_index: int
    seed: list
    kind: str
    n: int
    loewner: bool
    norm_dominated: bool
    witness_found: bool
    witness_s: Optional[float] = None
    witness_delta: Optional[float] = None
    witness_eps: Optional[float] = None
    witness_margin: Optional[float] = None
    witness_rank: Optional[int] = None
    samples_used: int = 0
    timing_ms: Optional[float] = field(default=None)

    def to_json(self, timings=False):
        out = asdict(self)
        if not timings:
            out.pop("timing_ms")
        return out


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _pair_from_config(cfg, trial_index=0, kind="unordered"):
    if cfg.a_path and cfg.b_path:
        return matrix_from_json(_load_json(cfg.a_path)), matrix_from_json(_load_json(cfg.b_path))
    if cfg.a_path or cfg.b_path:
        raise InputError("give both --A and --B, or neither")
    return generate_pair(cfg.n, [cfg.master_seed, trial_index], kind)


def _trial_kind(cfg, trial_index):
    if cfg.kind == "mixed":
        return PAIR_KINDS[trial_index % len(PAIR_KINDS)]
    return cfg.kind


def _run_eval(cfg):
    A, B = _pair_from_config(cfg)
    sigma = parse_mean(cfg.mean)
    if cfg.measure_path:
        m = BorelMeasure.from_json(_load_json(cfg.measure_path))
        result = measure_connection_eval(m, A, B)
        path = "measure"
    else:
        result = sigma(A, B)
        path = "function"
    return dumps({"mean": sigma.label, "path": path, "result": matrix_to_json(result)})


def _run_check_order(cfg):
    sigma = parse_mean(cfg.mean)
    records = []
    for i in range(cfg.trials):
        kind = _trial_kind(cfg, i)
        seed = [cfg.master_seed, i]
        A, B = generate_pair(cfg.n, seed, kind)
        start = time.perf_counter()
        verdict = order_determination_check(sigma, A, B, cfg.samples, seed)
        elapsed = 1000.0 * (time.perf_counter() - start)
        w = verdict.witness
        verdict.validate()
        records.append(
            TrialRecord(
                i,
                seed,
                kind,
                cfg.n,
                verdict.loewner,
                verdict.norm_dominated,
                w is not None,
                None if w is None else w.s,
                None if w is None else w.delta,
                None if w is None else w.eps,
                None if w is None else w.margin,
                None if w is None else w.rank,
                verdict.samples_used,
                elapsed,
            ).to_json(cfg.timings)
        )
    return dumps({"mean": sigma.label, "master_seed": cfg.master_seed, "records": records})


def _run_witness(cfg):
    sigma = parse_mean(cfg.mean)
    kind = "unordered" if cfg.kind == "mixed" else cfg.kind
    A, B = _pair_from_config(cfg, kind=kind)
    report = witness_search(sigma, A, B)
    return dumps(
        {
            "mean": sigma.label,
            "loewner": bool(loewner_leq(A, B, 1e-9 * (1 + operator_norm(B - A)))),
            "witness": None if report is None else report.to_json(),
        }
    )


def _scan_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trial", "s", "value", "target"])
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _run_scan_prop3(cfg):
    rows = []
    grid = np.asarray(S_GRID)
    for i in range(cfg.trials):
        family, P, X = prop3_instance(cfg.n, trial_rng(cfg.master_seed, i))
        scan = prop3_limit_scan(family, P, grid, X, cfg.tol_limit)
        rows.extend((i, float(s), float(v), scan.target) for s, v in zip(scan.s_values, scan.values))
    return _scan_csv(rows)


def _run_scan_e1(cfg):
    sigma = parse_mean(cfg.mean)
    rows = []
    for i in range(cfg.trials):
        A, P, delta = e1_instance(cfg.n, trial_rng(cfg.master_seed, i))
        if cfg.delta is not None:
            delta = cfg.delta
        scan = case2a_limit_scan(sigma, A, P, delta, S_GRID, cfg.tol_limit)
        rows.extend((i, float(s), float(v), scan.target) for s, v in zip(scan.s_values, scan.values))
    return _scan_csv(rows)


def _run_selftest(cfg):
    from .acceptance import result_hash, run_all

    results = run_all(cfg.master_seed)
    lines = [r.line() for r in results]
    payload = {
        "master_seed": cfg.master_seed,
        "hash": result_hash(results),
        "criteria": [r.to_json() for r in results],
    }
    ok = all(r.passed for r in results)
    return dumps(payload), lines, ok


def run(cfg: ExperimentConfig):
    """
    Execute one command. Returns ``(exit_status, text, messages)`` where
    ``text`` is the artifact (JSON or CSV) and ``messages`` are status lines
    for stderr. Usage errors surface as :class:`InputError`.
    """
    cfg.validate()
    messages = []
    try:
        if cfg.command == "eval":
            text = _run_eval(cfg)
        elif cfg.command == "check-order":
            text = _run_check_order(cfg)
        elif cfg.command == "witness":
            text = _run_witness(cfg)
        elif cfg.command == "scan-prop3":
            text = _run_scan_prop3(cfg)
        elif cfg.command == "scan-e1":
            text = _run_scan_e1(cfg)
        else:
            text, messages, ok = _run_selftest(cfg)
            return (0 if ok else 1), text, messages
    except TheoremViolationError as exc:
        dump = dumps({"error": str(exc), "diagnostics": _jsonable(exc.diagnostics)})
        return 1, dump, [f"theorem violation: {exc}"]
    return 0, text, messages


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj
