"""ADAPT-VQE outer loop: gradient screening, TETRIS multi-selection,
inner BFGS with strong-Wolfe line search and inverse-Hessian recycling,
termination rules, and per-iteration trace records.

Selected operators enter the ansatz with parameters at exactly 0, so the
previous optimum is reproduced before re-optimization and the recorded
energy can never increase between iterations.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.optimize import line_search

from . import simulator
from .pools import cnot_cost as pool_cnot_cost
from .simulator import AnsatzState, CompiledOperator


class OptimizationStall(RuntimeError):
    """Inner optimizer could not reduce the energy even after a
    steepest-descent restart.  Carries the best point found."""

    def __init__(self, message, parameters=None, inv_hessian=None, energy=None,
                 iterations=0):
        super().__init__(message)
        self.parameters = parameters
        self.inv_hessian = inv_hessian
        self.energy = energy
        self.iterations = iterations


EPSILON_CHEM = 1.6e-3  # Hartree, ~1 kcal/mol


@dataclass
class AdaptConfig:
    target_error: float
    max_iterations: int = 200
    gradient_threshold: float = 1e-12
    tetris: bool = False
    inner_gradient_tolerance: float = 1e-6
    reference_energy: float = 0.0
    epsilon_chem: float = EPSILON_CHEM
    target_spin: float | None = None
    max_inner_iterations: int = 3000

    def __post_init__(self):
        if self.target_error <= 0:
            raise ValueError("target_error must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class IterationRecord:
    iteration_index: int
    energy: float
    energy_error: float
    max_gradient: float
    spin_sq: float
    spin_deviation: float
    operators_added: int
    cumulative_parameters: int
    cumulative_cnots: int
    inner_iterations: int


@dataclass
class AdaptTrace:
    molecule_label: str
    pool_label: str
    config: dict
    records: list
    stop_reason: str  # target_error | gradient_threshold | max_iterations
    selections: list = field(default_factory=list)  # pool indices per iteration
    stalled_iterations: list = field(default_factory=list)
    cost_table: dict = field(default_factory=dict)

    def n_adapt_at(self, epsilon, last_crossing=False):
        """First (default) or last-stable iteration with error <= epsilon."""
        below = [r.iteration_index for r in self.records if r.energy_error <= epsilon]
        if not below:
            return None
        if not last_crossing:
            return below[0]
        # start of the trailing run that stays below epsilon
        last = self.records[-1].iteration_index
        if below[-1] != last:
            return None
        start = last
        indices = set(below)
        while start - 1 in indices:
            start -= 1
        return start


def select_operators(gradients, pool, tetris, gradient_threshold=1e-12):
    """Indices to append this iteration; empty list signals convergence.

    Non-TETRIS: the single argmax.  TETRIS: greedy scan in descending
    gradient order, accepting supports disjoint from everything accepted.
    Ties break toward the lower pool index (stable sort).
    """
    gradients = np.asarray(gradients)
    if len(gradients) != pool.size:
        raise ValueError("gradient vector does not match pool size")
    if gradients.size == 0:
        return []
    order = np.argsort(-gradients, kind="stable")
    if gradients[order[0]] <= gradient_threshold:
        return []
    if not tetris:
        return [int(order[0])]
    chosen = []
    occupied = 0
    for j in order:
        if gradients[j] <= gradient_threshold:
            break
        support = pool[int(j)].support
        if support & occupied:
            continue
        chosen.append(int(j))
        occupied |= support
    return chosen


def expand_inverse_hessian(prev, new_params: int):
    """Block-diagonal [[prev, 0], [0, I]] for newly appended parameters."""
    k = 0 if prev is None else prev.shape[0]
    out = np.eye(k + new_params)
    if k:
        out[:k, :k] = prev
    return out


# ---------------------------------------------------------------------------
# BFGS with strong-Wolfe line search
# ---------------------------------------------------------------------------

def _is_spd(matrix):
    try:
        np.linalg.cholesky(matrix)
        return True
    except np.linalg.LinAlgError:
        return False


def bfgs_minimize(fun_grad, x0, inv_hessian=None, gtol=1e-6, max_iterations=3000):
    """Quasi-Newton BFGS warm-started from a supplied inverse Hessian.

    Returns (x, inv_hessian, fun, n_iterations).  The line search enforces
    the strong Wolfe conditions; on failure one steepest-descent restart is
    attempted, and if that cannot reduce the energy an OptimizationStall is
    raised carrying the best point.
    """
    x = np.asarray(x0, dtype=float).copy()
    n = x.size
    if inv_hessian is None:
        hk = np.eye(n)
    else:
        hk = np.array(inv_hessian, dtype=float)
        if hk.shape != (n, n) or not np.allclose(hk, hk.T, atol=1e-10) or not _is_spd(hk):
            hk = np.eye(n)
    f, g = fun_grad(x)
    if n == 0:
        return x, hk, f, 0

    cache = {}

    def f_only(xv):
        key = xv.tobytes()
        if key not in cache:
            cache[key] = fun_grad(xv)
        return cache[key][0]

    def g_only(xv):
        key = xv.tobytes()
        if key not in cache:
            cache[key] = fun_grad(xv)
        return cache[key][1]

    f_prev = f + np.linalg.norm(g) / 2 + 1.0
    iterations = 0
    while np.max(np.abs(g)) > gtol and iterations < max_iterations:
        cache.clear()
        p = -hk @ g
        if float(p @ g) >= 0.0:  # curvature information unusable
            hk = np.eye(n)
            p = -g
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            alpha, *_ = line_search(
                f_only, g_only, x, p, gfk=g, old_fval=f, old_old_fval=f_prev,
                maxiter=40,
            )
        if alpha is None:
            # steepest-descent restart with simple backtracking
            hk = np.eye(n)
            p = -g
            alpha = _backtrack(f_only, x, p, f, g)
            if alpha is None:
                raise OptimizationStall(
                    "line search failed along gradient direction",
                    parameters=x, inv_hessian=hk, energy=f, iterations=iterations,
                )
        x_new = x + alpha * p
        key = x_new.tobytes()
        f_new, g_new = cache[key] if key in cache else fun_grad(x_new)
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            rho = 1.0 / sy
            v = np.eye(n) - rho * np.outer(s, y)
            hk = v @ hk @ v.T + rho * np.outer(s, s)
        f_prev, f, g, x = f, f_new, g_new, x_new
        iterations += 1
    return x, hk, f, iterations


def _backtrack(f_only, x, p, f0, g, shrink=0.5, c1=1e-4, tries=40):
    slope = float(g @ p)
    alpha = 1.0
    for _ in range(tries):
        if f_only(x + alpha * p) <= f0 + c1 * alpha * slope:
            return alpha
        alpha *= shrink
    return None


def inner_vqe(h, ansatz: AnsatzState, warm_inverse_hessian, tolerance,
              max_iterations=3000):
    """Full VQE over all ansatz parameters, warm-started.

    Returns (optimized ansatz, final inverse Hessian, energy, iterations).
    """
    hc = h if isinstance(h, CompiledOperator) else CompiledOperator(h)

    def fun_grad(theta):
        trial = ansatz.copy()
        trial.parameters = np.asarray(theta, dtype=float)
        return simulator.ansatz_energy_gradient(hc, trial)

    x, hk, f, iters = bfgs_minimize(
        fun_grad, ansatz.parameters, warm_inverse_hessian,
        gtol=tolerance, max_iterations=max_iterations,
    )
    out = ansatz.copy()
    out.parameters = x
    return out, hk, f, iters


# ---------------------------------------------------------------------------
# Outer loop
# ---------------------------------------------------------------------------

def run_adapt(h, pool, reference: int, cfg: AdaptConfig,
              molecule_label="", cost_table=None) -> AdaptTrace:
    """Grow the ansatz until the energy error, gradient, or iteration cap
    stops the loop; every outer iteration appends one IterationRecord."""
    from .pools import DEFAULT_COST_TABLE

    cost_table = cost_table or DEFAULT_COST_TABLE
    hc = CompiledOperator(h)
    n_orbitals = h.n_qubits // 2
    ansatz = AnsatzState([], np.zeros(0), reference, h.n_qubits)
    inv_hessian = np.zeros((0, 0))
    energy = hc.expectation(simulator.prepare_reference(reference, h.n_qubits).amplitudes)

    if cfg.target_spin is not None:
        spin = cfg.target_spin
    else:
        n_a = sum(1 for q in range(0, h.n_qubits, 2) if (reference >> q) & 1)
        n_b = sum(1 for q in range(1, h.n_qubits, 2) if (reference >> q) & 1)
        spin = 0.5 * abs(n_a - n_b)
    spin_target = spin * (spin + 1.0)

    records, selections, stalled = [], [], []
    cum_params = 0
    cum_cnots = 0
    stop_reason = "max_iterations"

    for iteration in range(1, cfg.max_iterations + 1):
        state = simulator.prepare_ansatz_state(ansatz)
        gradients = simulator.pool_gradients(state, hc, pool.operators)
        g_star = float(np.max(gradients)) if len(gradients) else 0.0

        chosen = select_operators(gradients, pool, cfg.tetris, cfg.gradient_threshold)

        def record(inner_iters, added):
            s2 = simulator.spin_squared(state, n_orbitals)
            records.append(IterationRecord(
                iteration_index=iteration,
                energy=energy,
                energy_error=energy - cfg.reference_energy,
                max_gradient=g_star,
                spin_sq=s2,
                spin_deviation=abs(s2 - spin_target),
                operators_added=added,
                cumulative_parameters=cum_params,
                cumulative_cnots=cum_cnots,
                inner_iterations=inner_iters,
            ))

        if not chosen:
            selections.append([])
            record(0, 0)
            stop_reason = "gradient_threshold"
            break

        if cfg.tetris:
            occupied = 0
            for j in chosen:
                assert pool[j].support & occupied == 0, "TETRIS selected overlapping supports"
                occupied |= pool[j].support

        selections.append(list(chosen))
        new_params = 0
        for j in chosen:
            op = pool[j]
            slots = list(range(cum_params + new_params,
                               cum_params + new_params + op.slot_count))
            ansatz.structure.append((op, np.array(slots)))
            new_params += op.slot_count
            cum_cnots += pool_cnot_cost(op, cost_table)
        ansatz.parameters = np.concatenate([ansatz.parameters, np.zeros(new_params)])
        cum_params += new_params
        inv_hessian = expand_inverse_hessian(inv_hessian, new_params)

        tolerance = cfg.inner_gradient_tolerance
        if energy - cfg.reference_energy < 100 * cfg.target_error:
            tolerance = min(tolerance, 0.1 * cfg.target_error)

        try:
            ansatz, inv_hessian, energy, inner_iters = inner_vqe(
                hc, ansatz, inv_hessian, tolerance, cfg.max_inner_iterations,
            )
        except OptimizationStall as stall:
            stalled.append(iteration)
            if stall.parameters is not None and stall.parameters.size == cum_params:
                ansatz.parameters = np.asarray(stall.parameters)
                energy = stall.energy
                inv_hessian = stall.inv_hessian
            inner_iters = stall.iterations

        state = simulator.prepare_ansatz_state(ansatz)
        record(inner_iters, len(chosen))
        if energy - cfg.reference_energy <= cfg.target_error:
            stop_reason = "target_error"
            break

    return AdaptTrace(
        molecule_label=molecule_label,
        pool_label=pool.kind_label,
        config=asdict(cfg),
        records=records,
        stop_reason=stop_reason,
        selections=selections,
        stalled_iterations=stalled,
        cost_table=cost_table.as_dict(),
    )


# ---------------------------------------------------------------------------
# Trace serialization: CSV rows plus a JSON sidecar
# ---------------------------------------------------------------------------

TRACE_COLUMNS = [
    "iteration_index", "energy", "energy_error", "max_gradient",
    "spin_sq", "spin_deviation", "operators_added",
    "cumulative_parameters", "cumulative_cnots", "inner_iterations",
]


def _fmt(value):
    return repr(value) if isinstance(value, float) else str(value)


def write_trace_csv(trace: AdaptTrace, path, entry_hash=None):
    lines = [
        f"# molecule={trace.molecule_label}",
        f"# pool={trace.pool_label}",
        f"# stop_reason={trace.stop_reason}",
        f"# cost_table={json.dumps(trace.cost_table, sort_keys=True)}",
    ]
    if entry_hash:
        lines.append(f"# entry_hash={entry_hash}")
    lines.append(",".join(TRACE_COLUMNS))
    for r in trace.records:
        lines.append(",".join(_fmt(getattr(r, c)) for c in TRACE_COLUMNS))
    text = "\n".join(lines) + "\n"
    with open(path, "w") as f:
        f.write(text)


def write_trace_sidecar(trace: AdaptTrace, path, entry_hash=None, extra=None):
    payload = {
        "molecule_label": trace.molecule_label,
        "pool_label": trace.pool_label,
        "config": trace.config,
        "cost_table": trace.cost_table,
        "stop_reason": trace.stop_reason,
        "selections": trace.selections,
        "stalled_iterations": trace.stalled_iterations,
        "final_energy": trace.records[-1].energy if trace.records else None,
        "final_error": trace.records[-1].energy_error if trace.records else None,
        "n_iterations": len(trace.records),
    }
    if entry_hash:
        payload["entry_hash"] = entry_hash
    if extra:
        payload.update(extra)
    with open(path, "w") as f:
        json.dump(payload, f, indent=1, sort_keys=True)
        f.write("\n")


def read_trace_csv(path):
    """Returns (metadata dict, list of IterationRecord)."""
    meta = {}
    records = []
    header = None
    with open(path) as f:
        for raw in f:
            line = raw.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value.strip()
            elif header is None:
                header = line.split(",")
            elif line:
                values = line.split(",")
                kwargs = {}
                for name, text in zip(header, values):
                    kwargs[name] = (
                        int(text)
                        if name in ("iteration_index", "operators_added",
                                    "cumulative_parameters", "cumulative_cnots",
                                    "inner_iterations")
                        else float(text)
                    )
                records.append(IterationRecord(**kwargs))
    return meta, records
