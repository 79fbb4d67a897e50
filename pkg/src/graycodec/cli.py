"""Command-line front end: ``graycodec <subcommand> [options]``.

Every run prints (or writes to ``--output``) one document carrying
``schema_version`` and the fully resolved configuration. JSON output is
key-sorted; CSV output starts with ``#`` comment lines holding the same
metadata. Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import __version__
from .circuit import ansatz_resources, table3_formula
from .encoder import ENCODINGS, basis_index, codewords, deuteron_hamiltonian, encode, encode_binary, qubits_for
from .evolve import STEP_GRID, TrotterPlan, exact_evolution, prepare_uniform, trotter_circuit, trotter_resources, trotter_sweep
from .graycode import brgc
from .pauli import partition_commuting
from .sim import NoiseModel, default_noise_path, find_layout, interaction_pairs, make_rng, run_statevector
from .vqe import (
    Backend,
    EnergyObjective,
    SpsaConfig,
    ansatz_for,
    build_calibration,
    default_iterations,
    vqe_run,
)

__all__ = ["ConfigError", "main", "resolve_config"]

SCHEMA_VERSION = 1
DEFAULT_SEED = 0
SEED_ENV = "GRAYCODEC_SEED"


class ConfigError(ValueError):
    """Invalid user configuration (exit code 2)."""


class NumericalError(RuntimeError):
    """Non-finite or otherwise unusable numerical result (exit code 3)."""


# -- option parsing helpers -------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def parse_steps(spec: Any) -> list[int]:
    """``"a..b"`` selects the standard Trotter grid inside ``[a, b]``; otherwise a comma list."""
    if isinstance(spec, list):
        steps = [int(x) for x in spec]
    elif ".." in str(spec):
        lo, hi = (int(x) for x in str(spec).split(".."))
        steps = [s for s in STEP_GRID if lo <= s <= hi]
    else:
        steps = _int_list(spec)
    if not steps or any(s < 1 for s in steps):
        raise ConfigError(f"invalid Trotter steps {spec!r}")
    return sorted(set(steps))


DEFAULTS: dict[str, dict[str, Any]] = {
    "graycode": {"bits": 3, "format": "json", "output": None},
    "encode": {"model": "deuteron", "n": 4, "encoding": "gray", "ladder": "exact", "format": "json", "output": None},
    "resources": {
        "n": [2, 4, 8, 16],
        "steps": [1, 2, 5, 10, 20, 50, 100],
        "trotter_n": 4,
        "t": 1.0,
        "format": "json",
        "output": None,
    },
    "vqe": {
        "encoding": "gray",
        "n": 4,
        "backend": "statevector",
        "shots": 10000,
        "trials": 1,
        "iterations": None,
        "seed": None,
        "noise_config": None,
        "layout": None,
        "mitigate": False,
        "zne": None,
        "calibration_shots": 10000,
        "a": 0.628,
        "c": 0.1,
        "alpha": 0.602,
        "gamma": 0.101,
        "stability": 0.0,
        "calibrate_gain": False,
        "history": False,
        "jobs": None,
        "format": "json",
        "output": None,
    },
    "evolve": {
        "encoding": "gray",
        "n": 4,
        "t": 1.0,
        "steps": "1..100",
        "backend": "qasm",
        "shots": 10000,
        "seed": None,
        "noise_config": None,
        "layout": None,
        "mitigate": False,
        "calibration_shots": 10000,
        "format": "json",
        "output": None,
    },
    "zne": {
        "encoding": "gray",
        "n": 4,
        "levels": [1, 3, 5, 7],
        "shots": 10000,
        "seed": None,
        "noise_config": None,
        "layout": None,
        "mitigate": False,
        "calibration_shots": 10000,
        "format": "json",
        "output": None,
    },
}

#: Keys that never reach the emitted configuration.
_NOT_RECORDED = {"output", "jobs", "config"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graycodec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"graycodec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(p: argparse.ArgumentParser, formats: Sequence[str] = ("json", "csv")) -> None:
        p.add_argument("--config", default=S, help="JSON file with option values (unknown keys are rejected)")
        p.add_argument("--format", choices=formats, default=S)
        p.add_argument("--output", "-o", default=S, help="write here instead of stdout")

    p = sub.add_parser("graycode", help="binary-reflected Gray code and its transition sequence")
    p.add_argument("--bits", type=int, default=S)
    common(p)

    p = sub.add_parser("encode", help="encode the deuteron Hamiltonian as a Pauli sum")
    p.add_argument("--model", choices=["deuteron"], default=S)
    p.add_argument("--n", type=int, default=S, help="number of oscillator states N")
    p.add_argument("--encoding", choices=ENCODINGS, default=S)
    p.add_argument("--ladder", choices=["exact", "x_string"], default=S, help="binary encoding only")
    common(p, ("json", "text"))

    p = sub.add_parser("resources", help="ansatz and Trotter gate counts")
    p.add_argument("--n", type=_int_list, default=S, help="comma-separated N values")
    p.add_argument("--steps", type=parse_steps, default=S, help="Trotter numbers: list or a..b")
    p.add_argument("--trotter-n", dest="trotter_n", type=int, default=S)
    p.add_argument("--t", type=float, default=S)
    common(p)

    def noisy_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("--noise-config", dest="noise_config", default=S, help="noise file; 'default' for the shipped one")
        p.add_argument("--layout", type=_int_list, default=S, help="physical qubit per logical qubit")
        p.add_argument("--mitigate", action="store_true", default=S)
        p.add_argument("--calibration-shots", dest="calibration_shots", type=int, default=S)
        p.add_argument("--seed", type=int, default=S)

    p = sub.add_parser("vqe", help="VQE trials with SPSA")
    p.add_argument("--encoding", choices=ENCODINGS, default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--backend", choices=["statevector", "sampled", "noisy"], default=S)
    p.add_argument("--shots", type=int, default=S)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--iterations", type=int, default=S)
    p.add_argument("--zne", type=_int_list, default=S, help="noise levels 2n+1, e.g. 1,3,5,7")
    for name in ("a", "c", "alpha", "gamma", "stability"):
        p.add_argument(f"--{name}", type=float, default=S)
    p.add_argument(
        "--calibrate-gain", dest="calibrate_gain", action="store_true", default=S, help="rescale a from the initial gradient"
    )
    p.add_argument("--history", action="store_true", default=S, help="include each trial's energy history")
    p.add_argument("--jobs", type=int, default=S, help="parallel trial workers (default: CPU count)")
    noisy_options(p)
    common(p)

    p = sub.add_parser("evolve", help="Trotter sweep against exact evolution")
    p.add_argument("--encoding", choices=["gray", "onehot"], default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--t", type=float, default=S)
    p.add_argument("--steps", default=S, help="Trotter numbers: list or a..b on the standard grid")
    p.add_argument("--backend", choices=["statevector", "qasm", "noisy"], default=S)
    p.add_argument("--shots", type=int, default=S)
    noisy_options(p)
    common(p)

    p = sub.add_parser("zne", help="zero-noise extrapolation at the optimal angles")
    p.add_argument("--encoding", choices=ENCODINGS, default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--levels", type=_int_list, default=S)
    p.add_argument("--shots", type=int, default=S)
    noisy_options(p)
    common(p)
    return parser


def resolve_config(command: str, cli: dict[str, Any], env: Optional[dict[str, str]] = None) -> dict[str, Any]:
    """Defaults, then ``--config`` file values, then explicit flags; validated."""
    env = os.environ if env is None else env
    cfg = dict(DEFAULTS[command])
    path = cli.pop("config", None)
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        unknown = sorted(set(loaded) - set(cfg))
        if unknown:
            raise ConfigError(f"unknown config keys for '{command}': {', '.join(unknown)}")
        cfg.update(loaded)
    cfg.update(cli)
    if "seed" in cfg and cfg["seed"] is None:
        raw = env.get(SEED_ENV)
        try:
            cfg["seed"] = int(raw) if raw not in (None, "") else DEFAULT_SEED
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None
    _validate(command, cfg)
    return cfg


def _validate(command: str, cfg: dict[str, Any]) -> None:
    def need(cond: bool, message: str) -> None:
        if not cond:
            raise ConfigError(message)

    fmt = ("json", "text") if command == "encode" else ("json", "csv")
    need(cfg["format"] in fmt, f"format must be one of {fmt}")
    if command == "graycode":
        need(1 <= int(cfg["bits"]) <= 20, "bits must be in [1, 20]")
        return
    if command == "resources":
        cfg["n"] = [int(x) for x in (cfg["n"] if isinstance(cfg["n"], list) else _int_list(cfg["n"]))]
        cfg["steps"] = parse_steps(cfg["steps"])
        need(all(2 <= n <= 64 for n in cfg["n"]), "resources: N must be in [2, 64]")
        need(cfg["trotter_n"] >= 2, "trotter_n must be >= 2")
        return
    need(cfg.get("encoding") in ENCODINGS, f"encoding must be one of {ENCODINGS}")
    n = cfg["n"]
    need(isinstance(n, int) and n >= 2, "n must be an integer >= 2")
    if command == "encode":
        need(cfg["model"] == "deuteron", "only the deuteron model is available")
        need(cfg["ladder"] in ("exact", "x_string"), "ladder must be 'exact' or 'x_string'")
        need(n <= 1 << 12, "n too large")
        return
    need(qubits_for(cfg["encoding"], n) <= 12, "register too large for dense simulation")
    if "shots" in cfg and cfg["shots"] is not None:
        need(int(cfg["shots"]) >= 1, "shots must be >= 1")
    if cfg.get("layout") is not None and not isinstance(cfg["layout"], list):
        cfg["layout"] = _int_list(cfg["layout"])
    if command == "vqe":
        need(cfg["backend"] in ("statevector", "sampled", "noisy"), "unknown backend")
        need(int(cfg["trials"]) >= 1, "trials must be >= 1")
        if cfg["iterations"] is None:
            cfg["iterations"] = default_iterations(n)
        need(int(cfg["iterations"]) >= 0, "iterations must be >= 0")
        if cfg["zne"] is not None and not isinstance(cfg["zne"], list):
            cfg["zne"] = _int_list(cfg["zne"])
        if cfg["backend"] != "noisy":
            need(not cfg["mitigate"] and not cfg["zne"], "--mitigate and --zne need the noisy backend")
        if cfg["backend"] == "noisy" and cfg["noise_config"] is None:
            cfg["noise_config"] = "default"
        SpsaConfig(cfg["a"], cfg["c"], cfg["alpha"], cfg["gamma"], int(cfg["iterations"]), stability=cfg["stability"])
        if cfg["zne"]:
            need(all(lv >= 1 and lv % 2 == 1 for lv in cfg["zne"]), "ZNE levels must be odd")
            need(len(set(cfg["zne"])) >= 2, "ZNE needs two distinct levels")
    if command == "evolve":
        need(cfg["encoding"] in ("gray", "onehot"), "evolve supports gray and onehot")
        need(cfg["backend"] in ("statevector", "qasm", "noisy"), "unknown backend")
        cfg["steps"] = parse_steps(cfg["steps"])
        need(qubits_for(cfg["encoding"], n) <= 4, "evolve uses tomography and supports at most 4 qubits")
        if cfg["backend"] == "noisy" and cfg["noise_config"] is None:
            cfg["noise_config"] = "default"
        need(not cfg["mitigate"] or cfg["backend"] == "noisy", "--mitigate needs the noisy backend")
    if command == "zne":
        if not isinstance(cfg["levels"], list):
            cfg["levels"] = _int_list(cfg["levels"])
        need(all(lv >= 1 and lv % 2 == 1 for lv in cfg["levels"]), "ZNE levels must be odd")
        need(len(set(cfg["levels"])) >= 2, "ZNE needs two distinct levels")
        if cfg["noise_config"] is None:
            cfg["noise_config"] = "default"


def _load_noise(cfg: dict[str, Any], qubit_count: int, circuits) -> tuple[NoiseModel, list[int]]:
    path = cfg["noise_config"]
    try:
        model = NoiseModel.from_file(default_noise_path() if path == "default" else path)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"cannot load noise config {path}: {exc}") from None
    layout = cfg.get("layout")
    if layout is None:
        try:
            layout = list(find_layout(model, qubit_count, interaction_pairs(circuits)))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if len(layout) != qubit_count or len(set(layout)) != qubit_count:
        raise ConfigError(f"layout must list {qubit_count} distinct physical qubits")
    try:
        logical = model.remap(layout)
        for c in circuits:
            for g in c.gates:
                logical.gate_error(g)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"layout {layout} does not fit the noise config: {exc}") from None
    return logical, layout


# -- subcommands ---------------------------------------------------------------------------


def cmd_graycode(cfg: dict[str, Any]) -> dict[str, Any]:
    code = brgc(int(cfg["bits"]))
    rows = [
        {"index": i, "codeword": w, "value": v, "flip_to_next": code.transitions[i]}
        for i, (w, v) in enumerate(zip(code.strings(), code.as_integers()))
    ]
    return {"rows": rows, "transitions": list(code.transitions)}


def cmd_encode(cfg: dict[str, Any]) -> dict[str, Any]:
    h_tri = deuteron_hamiltonian(cfg["n"])
    if cfg["encoding"] == "binary":
        h = encode_binary(h_tri, cfg["ladder"])
    else:
        h = encode(h_tri, cfg["encoding"])
    groups = partition_commuting(h)
    return {
        "qubits": h.qubit_count,
        "terms": [[label, coeff] for label, coeff in h.to_labels()],
        "term_count": h.term_count,
        "group_count": len(groups),
        "max_weight": h.max_weight,
        "groups": [{"basis": "".join(g.measurement_basis), "terms": [t.label(h.qubit_count) for t in g.terms]} for g in groups],
    }


def cmd_resources(cfg: dict[str, Any]) -> dict[str, Any]:
    ansatz = []
    for enc in ("onehot", "gray"):
        for n in cfg["n"]:
            built, formula = ansatz_resources(enc, n), table3_formula(enc, n)
            ansatz.append(
                {
                    "encoding": enc,
                    "n": n,
                    "qubits": qubits_for(enc, n),
                    "single_qubit_gates": built.single_qubit_gates,
                    "two_qubit_gates": built.two_qubit_gates,
                    "basis_rotations": built.basis_rotations,
                    "total_gates": built.total_gates,
                    "depth": built.depth,
                    "formula_depth": formula.depth,
                    "formula_total_gates": formula.total_gates,
                }
            )
    trotter = []
    for enc in ("onehot", "gray"):
        for steps in cfg["steps"]:
            r = trotter_resources(enc, cfg["trotter_n"], steps, cfg["t"])
            trotter.append(
                {
                    "encoding": enc,
                    "n": cfg["trotter_n"],
                    "steps": steps,
                    "single_qubit_gates": r.single_qubit_gates,
                    "two_qubit_gates": r.two_qubit_gates,
                    "depth": r.depth,
                }
            )
    return {"ansatz": ansatz, "trotter": trotter}


def _trial_seed(master: int, trial: int) -> int:
    return int(np.random.SeedSequence([master, trial]).generate_state(1)[0])


def _vqe_trial(args: tuple[dict[str, Any], int]) -> dict[str, Any]:
    cfg, trial = args
    h = encode(deuteron_hamiltonian(cfg["n"]), cfg["encoding"])
    builder, n_params = ansatz_for(cfg["encoding"], cfg["n"])
    backend = _vqe_backend(cfg, h.qubit_count, builder, n_params)
    seed = _trial_seed(cfg["seed"], trial)
    spsa = SpsaConfig(
        cfg["a"], cfg["c"], cfg["alpha"], cfg["gamma"], int(cfg["iterations"]), seed, stability=cfg["stability"]
    )
    result = vqe_run(h, builder, n_params, backend, spsa, calibrate=bool(cfg["calibrate_gain"]))
    record = {"trial": trial, **result.to_record(history=bool(cfg["history"]))}
    return record


def _vqe_backend(cfg: dict[str, Any], qubit_count: int, builder, n_params: int) -> Backend:
    if cfg["backend"] == "statevector":
        return Backend("statevector")
    if cfg["backend"] == "sampled":
        return Backend("sampled", shots=int(cfg["shots"]))
    noise, _ = _load_noise(cfg, qubit_count, [builder([0.1] * n_params)])
    return Backend(
        "noisy",
        shots=int(cfg["shots"]),
        noise=noise,
        mitigate=bool(cfg["mitigate"]),
        zne_levels=tuple(cfg["zne"] or ()),
        calibration_shots=int(cfg["calibration_shots"]),
    )


def cmd_vqe(cfg: dict[str, Any], jobs: int = 1) -> dict[str, Any]:
    h = encode(deuteron_hamiltonian(cfg["n"]), cfg["encoding"])
    builder, n_params = ansatz_for(cfg["encoding"], cfg["n"])
    if cfg["backend"] == "noisy":
        _, layout = _load_noise(cfg, h.qubit_count, [builder([0.1] * n_params)])
        cfg["layout"] = layout
    tasks = [(cfg, k) for k in range(int(cfg["trials"]))]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_vqe_trial, tasks))
    else:
        records = [_vqe_trial(t) for t in tasks]
    energies = np.array([r["energy"] for r in records])
    if not np.all(np.isfinite(energies)):
        raise NumericalError("VQE produced non-finite energies")
    exact = deuteron_hamiltonian(cfg["n"]).ground_energy()
    summary = {
        "trials": len(records),
        "mean": float(energies.mean()),
        "std": float(energies.std(ddof=1)) if len(records) > 1 else 0.0,
        "min": float(energies.min()),
        "max": float(energies.max()),
        "exact": exact,
    }
    return {"records": records, "summary": summary}


def _state_probabilities(encoding: str, n: int, probs: Sequence[float]) -> list[float]:
    return [float(probs[basis_index(w)]) for w in codewords(encoding, n)]


def cmd_evolve(cfg: dict[str, Any]) -> dict[str, Any]:
    enc, n, t = cfg["encoding"], cfg["n"], float(cfg["t"])
    h = encode(deuteron_hamiltonian(n), enc)
    q = h.qubit_count
    prep = prepare_uniform(enc, n)
    noise = None
    mitigator = None
    if cfg["backend"] == "noisy":
        noise, layout = _load_noise(cfg, q, [prep, trotter_circuit(TrotterPlan(h, t, 1))])
        cfg["layout"] = layout
        if cfg["mitigate"]:
            mitigator = build_calibration(q, noise, int(cfg["calibration_shots"]), [cfg["seed"], 1])
    shots = None if cfg["backend"] == "statevector" else int(cfg["shots"])
    records = trotter_sweep(h, prep, t, cfg["steps"], noise=noise, shots=shots, rng=[cfg["seed"], 0], mitigator=mitigator)
    exact_probs = exact_evolution(h, t, run_statevector(prep)).probabilities()
    rows = [
        {
            "steps": r.steps,
            "trace_distance": r.trace_distance,
            "cnot_count": r.cnot_count,
            "depth": r.depth,
            "state_probabilities": _state_probabilities(enc, n, r.probabilities),
            "probabilities": list(r.probabilities),
        }
        for r in records
    ]
    return {"rows": rows, "exact_state_probabilities": _state_probabilities(enc, n, exact_probs)}


def _optimal_angles(h, builder, n_params: int, seed: int) -> np.ndarray:
    from scipy.optimize import minimize

    objective = EnergyObjective(h, builder, Backend("statevector"))
    rng = make_rng([seed, 2])
    best = None
    for _ in range(4):
        res = minimize(objective, rng.uniform(-math.pi / 2, math.pi / 2, n_params), method="BFGS")
        if best is None or res.fun < best.fun:
            best = res
    return best.x


def cmd_zne(cfg: dict[str, Any]) -> dict[str, Any]:
    h = encode(deuteron_hamiltonian(cfg["n"]), cfg["encoding"])
    builder, n_params = ansatz_for(cfg["encoding"], cfg["n"])
    noise, layout = _load_noise(cfg, h.qubit_count, [builder([0.1] * n_params)])
    cfg["layout"] = layout
    theta = _optimal_angles(h, builder, n_params, cfg["seed"])
    backend = Backend(
        "noisy",
        shots=int(cfg["shots"]),
        noise=noise,
        mitigate=bool(cfg["mitigate"]),
        calibration_shots=int(cfg["calibration_shots"]),
    )
    fit = EnergyObjective(h, builder, backend, rng=[cfg["seed"], 1]).zne(theta, cfg["levels"])
    if not math.isfinite(fit.intercept):
        raise NumericalError("extrapolation produced a non-finite intercept")
    return {
        "angles": [float(x) for x in theta],
        "points": [{"level": lv, "energy": e, "sigma": s} for lv, e, s in zip(fit.levels, fit.energies, fit.sigmas)],
        "intercept": fit.intercept,
        "slope": fit.slope,
        "error": fit.error,
        "statistical_error": fit.statistical_error,
        "fit_error": fit.fit_error,
        "exact": deuteron_hamiltonian(cfg["n"]).ground_energy(),
    }


# -- rendering ------------------------------------------------------------------------------

_TABLES = {"graycode": ["rows"], "resources": ["ansatz", "trotter"], "vqe": ["records"], "evolve": ["rows"], "zne": ["points"]}


def _csv_cell(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return " ".join(_csv_cell(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render(command: str, cfg: dict[str, Any], result: dict[str, Any]) -> str:
    recorded = {k: v for k, v in cfg.items() if k not in _NOT_RECORDED}
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "config": recorded, **result}
    fmt = cfg["format"]
    if fmt == "json":
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if fmt == "text":
        lines = [f"# schema_version={SCHEMA_VERSION} command={command}", f"# config={json.dumps(recorded, sort_keys=True)}"]
        lines += [f"{label} {coeff!r}" for label, coeff in result["terms"]]
        lines.append(f"term_count {result['term_count']}")
        lines.append(f"group_count {result['group_count']}")
        lines.append(f"max_weight {result['max_weight']}")
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION} command={command}\n")
    buf.write(f"# config={json.dumps(recorded, sort_keys=True)}\n")
    extras = {k: v for k, v in result.items() if k not in _TABLES[command]}
    if extras:
        buf.write(f"# extra={json.dumps(extras, sort_keys=True)}\n")
    for table in _TABLES[command]:
        rows = result[table]
        buf.write(f"# table={table}\n")
        if not rows:
            continue
        writer = csv.writer(buf, lineterminator="\n")
        header = list(rows[0])
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(row[k]) for k in header])
    return buf.getvalue()


COMMANDS: dict[str, Callable[..., dict[str, Any]]] = {
    "graycode": cmd_graycode,
    "encode": cmd_encode,
    "resources": cmd_resources,
    "vqe": cmd_vqe,
    "evolve": cmd_evolve,
    "zne": cmd_zne,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    cli = {k: v for k, v in vars(ns).items() if k != "command"}
    command = ns.command
    jobs = cli.pop("jobs", None)
    try:
        cfg = resolve_config(command, cli)
        if jobs is None:
            jobs = cfg.pop("jobs", None) or os.cpu_count() or 1
        if command == "vqe":
            result = cmd_vqe(cfg, jobs=int(jobs))
        else:
            result = COMMANDS[command](cfg)
        text = render(command, cfg, result)
    except ValueError as exc:
        print(f"graycodec {command}: error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"graycodec {command}: numerical failure: {exc}", file=sys.stderr)
        return 3
    output = cfg.get("output")
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
