"""Command-line orchestration: single-run subcommands plus the manifest
sweep driver.

Subcommands: fci, adapt, renyi, fit, surface, extrapolate, budget, sweep,
count-dets, dump-hamiltonian, version.  A key=value config file (via
--config or the ADAPTSCALE_CONFIG environment variable) supplies defaults
for the cost table and probability floor.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__, adapt, analysis, complexity, exact, hamio, pools, simulator
from .pauli import jordan_wigner


class ManifestError(ValueError):
    """Manifest missing, empty, or inconsistent."""


EPSILON_CHEM = adapt.EPSILON_CHEM


# ---------------------------------------------------------------------------
# Config file: plain key=value lines
# ---------------------------------------------------------------------------

def load_config(path=None):
    path = path or os.environ.get("ADAPTSCALE_CONFIG")
    config = {}
    if not path:
        return config
    with open(path) as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if line:
                key, _, value = line.partition("=")
                config[key.strip()] = value.strip()
    return config


def _cost_table_from(args, config):
    path = getattr(args, "cost_table", None) or config.get("cost_table")
    return pools.load_cost_table(path) if path else pools.DEFAULT_COST_TABLE


def version_banner(cost_table=None):
    table = (cost_table or pools.DEFAULT_COST_TABLE).as_dict()
    digest = hashlib.sha256(
        json.dumps(table, sort_keys=True).encode()
    ).hexdigest()[:16]
    return (
        f"adaptscale {__version__} cost_table_hash={digest} "
        f"epsilon_chem=1.6e-3 alpha_star={complexity.ALPHA_STAR}"
    )


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def _load_problem(path, label=None):
    with open(path) as f:
        return hamio.parse_fcidump(f.read(), label or os.path.basename(path))


def _reference_energy(value):
    """Literal float, or path to a ref.json carrying an 'energy' field."""
    try:
        return float(value)
    except ValueError:
        with open(value) as f:
            return float(json.load(f)["energy"])


def _write_ref_json(ci, problem, path, floor=1e-16):
    dist = exact.ci_distribution(ci)
    p = dist.probabilities
    kept = p[p > floor]
    payload = {
        "label": problem.label,
        "energy": ci.energy,
        "spin_squared": exact.spin_squared_ci(ci),
        "n_determinants": exact.determinant_count(ci.sector),
        "sector": {
            "n_orbitals": ci.sector.n_orbitals,
            "n_alpha": ci.sector.n_alpha,
            "n_beta": ci.sector.n_beta,
            "target_spin": ci.sector.target_spin,
        },
        "floor": floor,
        "truncated_mass": float(np.sum(p[p <= floor])),
        "probabilities": [float(x) for x in kept],
    }
    with open(path, "w") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")
    return payload


def _load_ref_json(path):
    with open(path) as f:
        payload = json.load(f)
    return payload


def _distribution_from_ref(payload):
    p = np.asarray(payload["probabilities"], dtype=float)
    # renormalize the truncated tail away so downstream sums hit 1.0
    return exact.CiDistribution(p / p.sum())


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------

def cmd_fci(args, config):
    problem = _load_problem(args.fcidump)
    spin = 0.5 * (args.spin - 1) if args.spin else None
    ci = exact.fci_ground_state(problem, target_spin=spin)
    floor = float(config.get("probability_floor", args.floor))
    payload = _write_ref_json(ci, problem, args.out, floor)
    print(f"E = {payload['energy']:.12f}  <S^2> = {payload['spin_squared']:.6f}  "
          f"N_det = {payload['n_determinants']}  -> {args.out}")
    return 0


def cmd_adapt(args, config):
    problem = _load_problem(args.fcidump)
    cost_table = _cost_table_from(args, config)
    pool = pools.build_pool(args.pool, problem.n_orbitals, problem.n_alpha,
                            problem.n_beta, cost_table)
    if args.pool_fraction is not None:
        pool = pools.random_subpool(pool, args.pool_fraction, args.pool_seed)
    h = jordan_wigner(problem)
    if args.dump_hamiltonian:
        with open(args.dump_hamiltonian, "w") as f:
            f.write(h.to_text())
    spin = 0.5 * (args.spin - 1) if args.spin else None
    cfg = adapt.AdaptConfig(
        target_error=args.target_error,
        max_iterations=args.max_iters,
        gradient_threshold=float(
            config.get("gradient_threshold", args.gradient_threshold)
        ),
        tetris=args.tetris,
        reference_energy=_reference_energy(args.reference_energy),
        target_spin=spin,
    )
    trace = adapt.run_adapt(h, pool, exact.reference_occupation(problem), cfg,
                            molecule_label=problem.label, cost_table=cost_table)
    adapt.write_trace_csv(trace, args.trace)
    adapt.write_trace_sidecar(trace, _sidecar_path(args.trace))
    if args.dump_state:
        ansatz = _replay_final_state(trace, pool, problem, h, cfg)
        simulator.dump_statevector(ansatz, args.dump_state)
    last = trace.records[-1]
    print(f"{problem.label}: {len(trace.records)} iterations, "
          f"error {last.energy_error:.3e}, stop={trace.stop_reason} -> {args.trace}")
    return 0


def _sidecar_path(trace_path):
    base, _ = os.path.splitext(trace_path)
    return base + ".json"


def _replay_final_state(trace, pool, problem, h, cfg):
    """Re-run the recorded selections to rebuild the final statevector."""
    ansatz = simulator.AnsatzState([], np.zeros(0),
                                   exact.reference_occupation(problem),
                                   h.n_qubits)
    hc = simulator.CompiledOperator(h)
    inv_h = np.zeros((0, 0))
    for chosen in trace.selections:
        new = 0
        for j in chosen:
            op = pool[j]
            slots = list(range(ansatz.parameters.size + new,
                               ansatz.parameters.size + new + op.slot_count))
            ansatz.structure.append((op, np.array(slots)))
            new += op.slot_count
        if new == 0:
            continue
        ansatz.parameters = np.concatenate([ansatz.parameters, np.zeros(new)])
        inv_h = adapt.expand_inverse_hessian(inv_h, new)
        ansatz, inv_h, _, _ = adapt.inner_vqe(
            hc, ansatz, inv_h, cfg.inner_gradient_tolerance)
    return simulator.prepare_ansatz_state(ansatz)


def cmd_renyi(args, config):
    payload = _load_ref_json(args.ref)
    dist = _distribution_from_ref(payload)
    floor = float(config.get("probability_floor", payload.get("floor", 1e-16)))
    if args.limits:
        limits = complexity.renyi_limits(dist, floor)
        out = {
            "limits": limits.as_map(),
            "hartley_by_floor": {repr(k): v for k, v in limits.hartley_by_floor.items()},
            "floor": floor,
            "n_nonzero": int(np.sum(dist.probabilities > floor)),
        }
    else:
        result = complexity.renyi_entropy(dist, args.alpha)
        out = {
            "alpha": result.order,
            "value": result.value,
            "n_nonzero": int(np.sum(dist.probabilities > floor)),
            "floor": floor,
        }
    print(json.dumps(out, indent=1))
    if args.out:
        with open(args.out, "w") as f:
            json.dump(out, f, indent=1)
            f.write("\n")
    return 0


def _parse_window(text):
    lo, _, hi = text.partition(":")
    return int(lo), int(hi)


def cmd_fit(args, config):
    _, records = adapt.read_trace_csv(args.trace)
    pairs = [(r.iteration_index, r.energy_error) for r in records
             if r.energy_error > 0]
    if args.window:
        lo, hi = _parse_window(args.window)
        pairs = [(n, e) for n, e in pairs if lo <= n <= hi]
    if len(pairs) < 2:
        raise SystemExit("not enough trace points in the fit window")
    n_vals = np.array([p[0] for p in pairs], dtype=float)
    e_vals = np.array([p[1] for p in pairs], dtype=float)
    fit = analysis.fit_loglinear(n_vals, e_vals, "log10")
    out = _fit_payload(fit, window=args.window)
    if args.solve_epsilon is not None:
        solved = analysis.solve_for_threshold(fit, args.solve_epsilon)
        out["solved"] = {
            "epsilon": args.solve_epsilon,
            "n_adapt": solved.point,
            "ci95": [solved.lower, solved.upper],
        }
    print(json.dumps(out, indent=1))
    if args.out:
        with open(args.out, "w") as f:
            json.dump(out, f, indent=1)
            f.write("\n")
    return 0


def _fit_payload(fit, **extra):
    payload = {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "residual_variance": fit.residual_variance,
        "n_points": fit.n_points,
        "covariance": [list(map(float, row)) for row in fit.covariance],
        "log_base": fit.log_base,
        "x_range": list(fit.x_range),
    }
    payload.update(extra)
    return payload


def _grid(text):
    """Comma list '0.1,0.2' or range spec 'start:stop:count'."""
    if ":" in text:
        start, stop, count = text.split(":")
        return np.linspace(float(start), float(stop), int(count))
    return np.array([float(x) for x in text.split(",")])


def _collect_sources(directory):
    sources = []
    for name in sorted(os.listdir(directory)):
        if not name.endswith(".ref.json"):
            continue
        label = name[: -len(".ref.json")]
        trace_path = os.path.join(directory, label + ".trace.csv")
        if not os.path.exists(trace_path):
            continue
        payload = _load_ref_json(os.path.join(directory, name))
        _, records = adapt.read_trace_csv(trace_path)
        sources.append(analysis.SurfaceSource(
            label, _distribution_from_ref(payload), records))
    return sources


def cmd_surface(args, config):
    sources = _collect_sources(args.directory)
    if not sources:
        raise SystemExit(f"no trace/ref pairs found in {args.directory}")
    surface = analysis.r2_surface(sources, _grid(args.alphas),
                                  _grid(args.epsilons),
                                  last_crossing=args.last_crossing)
    text = surface.to_csv()
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
        print(f"wrote {args.out} ({len(sources)} molecules, "
              f"{len(surface.excluded)} exclusions)")
    else:
        print(text, end="")
    return 0


def cmd_extrapolate(args, config):
    sources = _collect_sources(args.directory)
    if len(sources) < 3:
        raise SystemExit("extrapolation needs at least 3 trace/ref pairs")
    h_vals, n_vals, used = [], [], []
    for s in sources:
        n = s.n_adapt_at(args.epsilon, last_crossing=args.last_crossing)
        if n is None:
            continue
        h_vals.append(complexity.renyi_entropy(s.distribution, args.alpha).value)
        n_vals.append(n)
        used.append(s.label)
    fit = analysis.fit_loglinear(np.array(h_vals), np.array(n_vals, dtype=float), "ln")
    result = analysis.predict_n_adapt(fit, args.h_star)
    out = {
        "fit": _fit_payload(fit, alpha=args.alpha, epsilon=args.epsilon,
                            molecules=used),
        "h_star": args.h_star,
        "n_adapt": result.point,
        "confidence95": [result.confidence.lower, result.confidence.upper],
        "prediction95": [result.prediction.lower, result.prediction.upper],
        "extrapolated": result.extrapolated,
    }
    if args.bootstrap:
        boot = analysis.bootstrap_prediction(
            np.array(h_vals), np.array(n_vals, dtype=float), args.h_star,
            seed=args.seed or 0)
        out["bootstrap95"] = [boot.lower, boot.upper]
    print(json.dumps(out, indent=1))
    if args.out:
        with open(args.out, "w") as f:
            json.dump(out, f, indent=1)
            f.write("\n")
    return 0


def _interval(text):
    point, lo, hi = (float(x) for x in text.split(","))
    return analysis.Interval(point, lo, hi)


def _rate_fit(text):
    """size:rate comma pairs, e.g. '4:6.2,5:7.9,6:10.1'."""
    sizes, rates = [], []
    for chunk in text.split(","):
        size, _, rate = chunk.partition(":")
        sizes.append(float(size))
        rates.append(float(rate))
    return analysis.linear_rate_fit(sizes, rates)


def cmd_budget(args, config):
    estimate = analysis.resource_budget(
        _interval(args.n_adapt),
        _rate_fit(args.rates_params),
        _rate_fit(args.rates_cnots),
        args.system_size,
    )
    def dump(iv):
        return {"point": iv.point, "ci95": [iv.lower, iv.upper]}
    out = {
        "system_size": args.system_size,
        "n_adapt": dump(estimate.n_adapt),
        "params_per_iteration": dump(estimate.params_per_iter),
        "cnots_per_iteration": dump(estimate.cnots_per_iter),
        "total_parameters": dump(estimate.total_parameters),
        "total_cnots": dump(estimate.total_cnots),
    }
    print(json.dumps(out, indent=1))
    if args.out:
        with open(args.out, "w") as f:
            json.dump(out, f, indent=1)
            f.write("\n")
    return 0


def cmd_count_dets(args, config):
    spec = exact.SectorSpec(args.n_orbitals, args.n_alpha, args.n_beta)
    print(exact.determinant_count(spec))
    return 0


def cmd_dump_hamiltonian(args, config):
    problem = _load_problem(args.fcidump)
    h = jordan_wigner(problem)
    text = h.to_text()
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
        print(f"{len(h.terms)} terms -> {args.out}")
    else:
        print(text, end="")
    return 0


def cmd_version(args, config):
    print(version_banner())
    return 0


# ---------------------------------------------------------------------------
# Manifest sweeps
# ---------------------------------------------------------------------------

def parse_manifest(path):
    if not os.path.exists(path):
        raise ManifestError(f"manifest {path} does not exist")
    parser = configparser.ConfigParser()
    parser.read(path)
    sweep = dict(parser["sweep"]) if parser.has_section("sweep") else {}
    entries = []
    for section in parser.sections():
        if not section.startswith("entry:"):
            continue
        label = section.split(":", 1)[1]
        raw = dict(parser[section])
        entry = {
            "label": label,
            "fcidump": raw["fcidump"],
            "spin_multiplicity": int(raw.get("spin_multiplicity", 0)) or None,
            "pool": raw.get("pool", "ceo"),
            "tetris": raw.get("tetris", "false").lower() in ("1", "true", "yes"),
            "target_error": float(raw.get("target_error", 1e-4)),
            "max_iterations": int(raw.get("max_iterations", 200)),
            "pool_fraction": float(raw["pool_fraction"]) if "pool_fraction" in raw else None,
            "pool_seed": int(raw.get("pool_seed", 0)),
        }
        entries.append(entry)
    if not entries:
        raise ManifestError(f"manifest {path} defines no entries")
    labels = [e["label"] for e in entries]
    if len(set(labels)) != len(labels):
        raise ManifestError("duplicate entry labels")
    for e in entries:
        if not os.path.exists(e["fcidump"]):
            raise ManifestError(f"{e['label']}: fcidump {e['fcidump']} not found")
    return sweep, entries


def entry_hash(entry):
    return hashlib.sha256(
        json.dumps(entry, sort_keys=True).encode()
    ).hexdigest()[:16]


def run_entry(entry, outdir, cost_table_path=None):
    """Parse -> FCI reference -> ADAPT -> trace CSV + sidecar + ref JSON."""
    cost_table = (pools.load_cost_table(cost_table_path)
                  if cost_table_path else pools.DEFAULT_COST_TABLE)
    problem = _load_problem(entry["fcidump"], entry["label"])
    spin = None
    if entry["spin_multiplicity"]:
        spin = 0.5 * (entry["spin_multiplicity"] - 1)
    ci = exact.fci_ground_state(problem, target_spin=spin)
    ref_path = os.path.join(outdir, f"{entry['label']}.ref.json")
    _write_ref_json(ci, problem, ref_path)

    pool = pools.build_pool(entry["pool"], problem.n_orbitals,
                            problem.n_alpha, problem.n_beta, cost_table)
    if entry["pool_fraction"] is not None:
        pool = pools.random_subpool(pool, entry["pool_fraction"], entry["pool_seed"])
    h = jordan_wigner(problem)
    cfg = adapt.AdaptConfig(
        target_error=entry["target_error"],
        max_iterations=entry["max_iterations"],
        tetris=entry["tetris"],
        reference_energy=ci.energy,
        target_spin=spin,
    )
    trace = adapt.run_adapt(h, pool, exact.reference_occupation(problem), cfg,
                            molecule_label=entry["label"], cost_table=cost_table)
    digest = entry_hash(entry)
    trace_path = os.path.join(outdir, f"{entry['label']}.trace.csv")
    adapt.write_trace_csv(trace, trace_path, entry_hash=digest)
    adapt.write_trace_sidecar(trace, os.path.join(outdir, f"{entry['label']}.trace.json"),
                              entry_hash=digest,
                              extra={"pool_size": pool.size,
                                     "n_qubits": pool.n_qubits})
    last = trace.records[-1]
    return {
        "label": entry["label"],
        "entry_hash": digest,
        "status": "ok",
        "n_iterations": len(trace.records),
        "final_error": last.energy_error,
        "stop_reason": trace.stop_reason,
        "fci_energy": ci.energy,
    }


def _entry_done(entry, outdir):
    digest = entry_hash(entry)
    trace_path = os.path.join(outdir, f"{entry['label']}.trace.csv")
    ref_path = os.path.join(outdir, f"{entry['label']}.ref.json")
    if not (os.path.exists(trace_path) and os.path.exists(ref_path)):
        return False
    meta, _ = adapt.read_trace_csv(trace_path)
    return meta.get("entry_hash") == digest


def _entry_memory_estimate(entry):
    with open(entry["fcidump"]) as f:
        for line in f:
            if "NORB" in line.upper():
                import re

                m = re.search(r"NORB\s*=\s*(\d+)", line.upper())
                if m:
                    n_qubits = 2 * int(m.group(1))
                    # statevector plus compiled-Hamiltonian working set
                    return (1 << n_qubits) * 16 * 64
    return 1 << 30


def run_manifest(manifest_path, outdir=None, jobs=1, force=False,
                 memory_budget=4 * (1 << 30)):
    sweep, entries = parse_manifest(manifest_path)
    outdir = outdir or sweep.get("output_dir", "sweep_out")
    os.makedirs(outdir, exist_ok=True)
    cost_table_path = sweep.get("cost_table")

    results = {}
    pending = []
    for entry in entries:
        if not force and _entry_done(entry, outdir):
            # reconstruct the summary row from existing outputs
            meta, records = adapt.read_trace_csv(
                os.path.join(outdir, f"{entry['label']}.trace.csv"))
            ref = _load_ref_json(os.path.join(outdir, f"{entry['label']}.ref.json"))
            results[entry["label"]] = {
                "label": entry["label"],
                "entry_hash": entry_hash(entry),
                "status": "cached",
                "n_iterations": len(records),
                "final_error": records[-1].energy_error,
                "stop_reason": meta.get("stop_reason", ""),
                "fci_energy": ref["energy"],
            }
        else:
            pending.append(entry)

    if jobs <= 1 or len(pending) <= 1:
        for entry in pending:
            results[entry["label"]] = _safe_run(entry, outdir, cost_table_path)
    else:
        results.update(_run_parallel(pending, outdir, cost_table_path, jobs,
                                     memory_budget))

    summary = _summarize(sweep, entries, results, outdir)
    failures = [r for r in summary["entries"] if r["status"] == "failed"]
    return summary, (1 if failures else 0)


def _safe_run(entry, outdir, cost_table_path):
    try:
        return run_entry(entry, outdir, cost_table_path)
    except Exception as err:  # per-entry failures must not abort the sweep
        return {
            "label": entry["label"],
            "entry_hash": entry_hash(entry),
            "status": "failed",
            "error": f"{type(err).__name__}: {err}",
        }


def _run_parallel(pending, outdir, cost_table_path, jobs, memory_budget):
    from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait

    results = {}
    queue = list(pending)
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        running = {}
        in_flight_bytes = 0
        while queue or running:
            while queue:
                estimate = _entry_memory_estimate(queue[0])
                if running and in_flight_bytes + estimate > memory_budget:
                    break
                entry = queue.pop(0)
                future = executor.submit(_safe_run, entry, outdir, cost_table_path)
                running[future] = (entry, estimate)
                in_flight_bytes += estimate
            done, _ = wait(running, return_when=FIRST_COMPLETED)
            for future in done:
                entry, estimate = running.pop(future)
                in_flight_bytes -= estimate
                results[entry["label"]] = future.result()
    return results


def _summarize(sweep, entries, results, outdir):
    alpha_grid = [float(x) for x in sweep.get("alpha_grid", "0.25").split(",")]
    epsilon_grid = [float(x) for x in
                    sweep.get("epsilon_grid", f"{EPSILON_CHEM}").split(",")]
    rows = []
    for entry in entries:  # summary in manifest order
        row = dict(results[entry["label"]])
        if row["status"] != "failed":
            ref = _load_ref_json(os.path.join(outdir, f"{entry['label']}.ref.json"))
            dist = _distribution_from_ref(ref)
            _, records = adapt.read_trace_csv(
                os.path.join(outdir, f"{entry['label']}.trace.csv"))
            src = analysis.SurfaceSource(entry["label"], dist, records)
            row["h"] = {repr(a): complexity.renyi_entropy(dist, a).value
                        for a in alpha_grid}
            row["n_adapt"] = {repr(e): src.n_adapt_at(e) for e in epsilon_grid}
        rows.append(row)
    summary = {
        "banner": version_banner(),
        "alpha_grid": alpha_grid,
        "epsilon_grid": epsilon_grid,
        "entries": rows,
    }
    with open(os.path.join(outdir, "summary.json"), "w") as f:
        json.dump(summary, f, indent=1, sort_keys=True)
        f.write("\n")
    _write_summary_csv(summary, os.path.join(outdir, "summary.csv"))
    return summary


def _write_summary_csv(summary, path):
    alphas = summary["alpha_grid"]
    epsilons = summary["epsilon_grid"]
    header = (["label", "status", "stop_reason", "final_error", "entry_hash"]
              + [f"h_alpha={a!r}" for a in alphas]
              + [f"n_adapt@eps={e!r}" for e in epsilons])
    lines = [",".join(header)]
    for row in summary["entries"]:
        cells = [row["label"], row["status"], row.get("stop_reason", ""),
                 repr(row["final_error"]) if "final_error" in row else "",
                 row["entry_hash"]]
        for a in alphas:
            cells.append(repr(row["h"][repr(a)]) if "h" in row else "")
        for e in epsilons:
            value = row.get("n_adapt", {}).get(repr(e))
            cells.append("" if value is None else str(value))
        lines.append(",".join(cells))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def cmd_sweep(args, config):
    summary, code = run_manifest(args.manifest, outdir=args.out, jobs=args.jobs,
                                 force=args.force,
                                 memory_budget=args.memory_budget)
    for row in summary["entries"]:
        status = row["status"]
        extra = (f"error={row.get('error')}" if status == "failed"
                 else f"stop={row.get('stop_reason')} "
                      f"final={row.get('final_error'):.3e}")
        print(f"{row['label']}: {status} {extra}")
    if code:
        failed = [r["label"] for r in summary["entries"] if r["status"] == "failed"]
        print(json.dumps({"failed": failed}))
    return code


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="adaptscale",
        description="ADAPT-VQE iteration-scaling toolkit",
    )
    parser.add_argument("--config", help="key=value defaults file "
                        "(or set ADAPTSCALE_CONFIG)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel manifest entries")
    parser.add_argument("--seed", type=int, default=None, help="global seed")
    parser.add_argument("--version", action="version", version=version_banner())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fci", help="exact reference energy and CI spectrum")
    p.add_argument("fcidump")
    p.add_argument("--spin", type=int, default=None, help="target 2S+1")
    p.add_argument("--out", default="ref.json")
    p.add_argument("--floor", type=float, default=1e-16)
    p.set_defaults(func=cmd_fci)

    p = sub.add_parser("adapt", help="run one ADAPT-VQE calculation")
    p.add_argument("fcidump")
    p.add_argument("--pool", choices=["qubit", "qeb", "ceo"], default="ceo")
    p.add_argument("--tetris", action="store_true")
    p.add_argument("--target-error", type=float, default=1e-4)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--gradient-threshold", type=float, default=1e-12)
    p.add_argument("--reference-energy", required=True,
                   help="float or path to a ref.json")
    p.add_argument("--trace", default="trace.csv")
    p.add_argument("--spin", type=int, default=None, help="target 2S+1")
    p.add_argument("--pool-fraction", type=float, default=None)
    p.add_argument("--pool-seed", type=int, default=0)
    p.add_argument("--cost-table", default=None)
    p.add_argument("--dump-state", default=None)
    p.add_argument("--dump-hamiltonian", default=None)
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("renyi", help="Renyi entropy of a CI spectrum")
    p.add_argument("ref")
    p.add_argument("--alpha", type=float, default=complexity.ALPHA_STAR)
    p.add_argument("--limits", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_renyi)

    p = sub.add_parser("fit", help="log10(error) vs iteration fit on a trace")
    p.add_argument("trace")
    p.add_argument("--window", default=None, help="lo:hi iteration window")
    p.add_argument("--solve-epsilon", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("surface", help="R^2(alpha, epsilon) over trace/ref pairs")
    p.add_argument("directory")
    p.add_argument("--alphas", default="0.05:1.5:30")
    p.add_argument("--epsilons", default="1e-5,1e-4,1.6e-3,1e-2")
    p.add_argument("--last-crossing", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("extrapolate", help="predict n_ADAPT from the entropy fit")
    p.add_argument("directory")
    p.add_argument("--alpha", type=float, default=complexity.ALPHA_STAR)
    p.add_argument("--epsilon", type=float, default=EPSILON_CHEM)
    p.add_argument("--h-star", type=float, required=True)
    p.add_argument("--last-crossing", action="store_true")
    p.add_argument("--bootstrap", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_extrapolate)

    p = sub.add_parser("budget", help="circuit-resource budget from rate fits")
    p.add_argument("--n-adapt", required=True, help="point,lo,hi")
    p.add_argument("--rates-params", required=True, help="size:rate,...")
    p.add_argument("--rates-cnots", required=True, help="size:rate,...")
    p.add_argument("--system-size", type=float, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("sweep", help="run a manifest of benchmark entries")
    p.add_argument("manifest")
    p.add_argument("--out", default=None)
    p.add_argument("--force", action="store_true")
    p.add_argument("--memory-budget", type=int, default=4 * (1 << 30))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("count-dets", help="sector determinant count")
    p.add_argument("n_orbitals", type=int)
    p.add_argument("n_alpha", type=int)
    p.add_argument("n_beta", type=int)
    p.set_defaults(func=cmd_count_dets)

    p = sub.add_parser("dump-hamiltonian", help="textual Pauli-sum dump")
    p.add_argument("fcidump")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_dump_hamiltonian)

    p = sub.add_parser("version", help="version and provenance banner")
    p.set_defaults(func=cmd_version)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    config = load_config(args.config)
    try:
        return args.func(args, config)
    except (hamio.ParseError, hamio.InconsistentSector, ManifestError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
