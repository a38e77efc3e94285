"""Command-line interface: heli trim|linearize|synthesize|gamma-search|simulate|compare."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ToolkitConfig, load_scenario_file, load_toolkit_config
from .errors import HeliError
from .hinf import build_output_map, hinf_norm, synthesize
from .observer import design_reduced_observer
from .scenarios import builtin_names, builtin_scenario
from .sim import SimArtifacts, compare_controllers, run_scenario
from .trim import (
    MODEL_INPUT_LABELS,
    MODEL_STATE_LABELS,
    WIND_LABELS,
    find_trim,
    linearize,
    verify_linearization,
)
from .state import INPUT_LABELS, STATE_LABELS


def _write_matrix_csv(path: Path, matrix: np.ndarray, col_labels, row_labels=None):
    with open(path, "w", encoding="utf-8") as fh:
        if row_labels is None:
            fh.write(",".join(col_labels) + "\n")
            for row in np.atleast_2d(matrix):
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        else:
            fh.write("," + ",".join(col_labels) + "\n")
            for label, row in zip(row_labels, np.atleast_2d(matrix)):
                fh.write(label + "," + ",".join(repr(float(v)) for v in row) + "\n")


def _load_config(args) -> ToolkitConfig:
    if getattr(args, "config", None):
        return load_toolkit_config(args.config)
    return ToolkitConfig()


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _trim_report(trim, path: Path):
    x = trim.state.as_vector()
    u = trim.inputs.as_vector()
    lines = ["hover trim", f"residual = {trim.residual:.3e}", ""]
    for label, value in zip(STATE_LABELS, x):
        lines.append(f"{label:8s} = {value: .6e}")
    lines.append("")
    for label, value in zip(INPUT_LABELS, u):
        lines.append(f"{label:8s} = {value: .6e}")
    lines.append(f"{'dped_out':8s} = {trim.dped_prime: .6e}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_trim(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    trim = find_trim(cfg.params)
    _trim_report(trim, out / "trim_report.txt")
    _write_matrix_csv(out / "trim_state.csv", trim.state.as_vector()[None, :],
                      STATE_LABELS)
    _write_matrix_csv(out / "trim_inputs.csv", trim.inputs.as_vector()[None, :],
                      INPUT_LABELS)
    print(f"trim residual {trim.residual:.3e}; report in {out}")
    return 0


def cmd_linearize(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    trim = find_trim(cfg.params)
    plant = linearize(cfg.params, trim)
    _write_matrix_csv(out / "A.csv", plant.a, MODEL_STATE_LABELS,
                      MODEL_STATE_LABELS)
    _write_matrix_csv(out / "B.csv", plant.b, MODEL_INPUT_LABELS,
                      MODEL_STATE_LABELS)
    _write_matrix_csv(out / "E.csv", plant.e, WIND_LABELS, MODEL_STATE_LABELS)
    _write_matrix_csv(out / "trim_state.csv", trim.state.as_vector()[None, :],
                      STATE_LABELS)
    _write_matrix_csv(out / "trim_inputs.csv", trim.inputs.as_vector()[None, :],
                      INPUT_LABELS)
    _trim_report(trim, out / "trim_report.txt")
    err = verify_linearization(cfg.params, plant, 1e-4)
    print(f"linear model written to {out}; verification error {err:.3e}")
    return 0


def _read_matrix_csv(path: Path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        labeled = header.startswith(",")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if labeled:
                cells = cells[1:]
            rows.append([float(v) for v in cells])
    return np.array(rows)


def _load_plant_dir(path: Path, cfg: ToolkitConfig):
    """Rebuild a LinearPlant from the CSV files written by `heli linearize`."""
    from .dynamics import yaw_gyro_output
    from .state import ControlInputs, FullState
    from .trim import LinearPlant, TrimPoint
    from .state import N_STATES

    a = _read_matrix_csv(path / "A.csv")
    b = _read_matrix_csv(path / "B.csv")
    e = _read_matrix_csv(path / "E.csv")
    x = _read_matrix_csv(path / "trim_state.csv").reshape(N_STATES)
    u = _read_matrix_csv(path / "trim_inputs.csv").reshape(4)
    state = FullState.from_vector(x)
    inputs = ControlInputs.from_vector(u)
    dped_prime, _ = yaw_gyro_output(state.gyro, inputs.delta_ped,
                                    state.rates.r, cfg.params)
    trim = TrimPoint(
        state=state, inputs=inputs,
        y_trim=np.array([x[6], x[7], x[9], x[10], x[11], x[8]]),
        h_out_trim=np.array([x[6], x[7], x[8]]),
        residual=0.0, dped_prime=dped_prime)
    return LinearPlant(a=a, b=b, e=e, trim=trim)


def _synthesis_bundle(cfg: ToolkitConfig, plant_dir=None):
    if plant_dir is not None:
        plant = _load_plant_dir(Path(plant_dir), cfg)
    else:
        trim = find_trim(cfg.params)
        plant = linearize(cfg.params, trim)
    result, search, report = synthesize(plant, cfg.weights,
                                        tol=cfg.gamma_tol,
                                        margin=cfg.gamma_margin)
    observer = design_reduced_observer(plant, cfg.observer_poles)
    return plant, result, search, report, observer


def cmd_synthesize(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    plant, result, search, report, observer = _synthesis_bundle(
        cfg, plant_dir=getattr(args, "plant", None))

    _write_matrix_csv(out / "F.csv", result.f, MODEL_STATE_LABELS)
    _write_matrix_csv(out / "G.csv", result.g, ("phi_ref", "theta_ref", "psi_ref"))
    _write_matrix_csv(out / "P.csv", result.riccati.p, MODEL_STATE_LABELS,
                      MODEL_STATE_LABELS)
    _write_matrix_csv(out / "observer_A.csv", observer.a_obs,
                      ("a_s", "b_s", "dped"))
    _write_matrix_csv(out / "observer_B.csv", observer.b_obs,
                      ("phi", "theta", "p", "q", "r", "psi"))
    _write_matrix_csv(out / "observer_H.csv", observer.h_obs, MODEL_INPUT_LABELS)
    _write_matrix_csv(out / "observer_K.csv", observer.k_obs,
                      ("phi", "theta", "p", "q", "r", "psi"))

    out_map = build_output_map(cfg.weights)
    a_cl = plant.a + plant.b @ result.f
    c_cl = out_map.c + out_map.d @ result.f
    norm = hinf_norm(a_cl, plant.e, c_cl)
    eigs = np.linalg.eigvals(a_cl)
    lines = [
        "inner-loop synthesis report",
        f"gamma_star ~= {search.gamma_star:.6g}",
        f"gamma used  = {result.gamma:.6g}",
        f"riccati residual = {result.riccati.residual_norm:.3e}",
        f"closed-loop norm (wind -> weighted output) = {norm:.6g}",
        f"norm / gamma = {norm / result.gamma:.4f}",
        "closed-loop eigenvalues:",
    ]
    for lam in sorted(eigs, key=lambda z: z.real):
        lines.append(f"  {lam.real: .4f} {lam.imag:+.4f}j")
    lines.append("invariant zeros: " + ("none" if report.ok else
                                        str(report.invariant_zeros)))
    (out / "synthesis_report.txt").write_text("\n".join(lines) + "\n",
                                              encoding="utf-8")
    print(f"gamma = {result.gamma:.6g} (boundary {search.gamma_star:.6g}), "
          f"norm check {norm:.6g}; files in {out}")
    return 0


def cmd_gamma_search(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    plant_dir = getattr(args, "plant", None)
    if plant_dir is not None:
        plant = _load_plant_dir(Path(plant_dir), cfg)
    else:
        trim = find_trim(cfg.params)
        plant = linearize(cfg.params, trim)
    out_map = build_output_map(cfg.weights)
    from .hinf import gamma_star
    search = gamma_star(plant.a, plant.b, out_map.c, out_map.d, plant.e,
                        tol=cfg.gamma_tol, margin=cfg.gamma_margin)
    with open(out / "gamma_trace.csv", "w", encoding="utf-8") as fh:
        fh.write("gamma,feasible,reason\n")
        for g, ok, reason in search.trace:
            fh.write(f"{g!r},{int(ok)},{reason}\n")
    print(f"gamma_star ~= {search.gamma_star:.6g} "
          f"({len(search.trace)} evaluations); trace in {out}")
    return 0


def _scenario_from_args(args):
    name = args.scenario
    if Path(name).exists():
        scenario = load_scenario_file(name)
    else:
        scenario = builtin_scenario(name, seed=args.seed or 0)
    if args.seed is not None:
        scenario.seed = args.seed
    return scenario


def _artifacts(cfg: ToolkitConfig) -> SimArtifacts:
    trim = find_trim(cfg.params)
    plant = linearize(cfg.params, trim)
    result, search, report = synthesize(plant, cfg.weights,
                                        tol=cfg.gamma_tol,
                                        margin=cfg.gamma_margin)
    observer = design_reduced_observer(plant, cfg.observer_poles)
    return SimArtifacts(trim=trim, synthesis=result, observer=observer,
                        pid_gains=cfg.pid, outer_gains=cfg.outer)


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    scenario = _scenario_from_args(args)
    if args.controller:
        scenario.controller = args.controller
    artifacts = _artifacts(cfg)
    log, metrics = run_scenario(scenario, cfg.params, artifacts)
    log_path = out / f"{scenario.name}_{scenario.controller}.csv"
    log.to_csv(log_path)
    lines = [f"scenario {scenario.name} ({scenario.controller}), "
             f"seed {scenario.seed}"]
    for key, value in metrics.as_dict().items():
        lines.append(f"{key:24s} = {value:.6f}")
    (out / f"{scenario.name}_{scenario.controller}_metrics.txt").write_text(
        "\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    print(f"log written to {log_path}")
    return 0


def cmd_compare(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    scenario = _scenario_from_args(args)
    artifacts = _artifacts(cfg)
    report, log_a, log_b = compare_controllers(scenario, cfg.params, artifacts)
    log_a.to_csv(out / f"{scenario.name}_hinf.csv")
    log_b.to_csv(out / f"{scenario.name}_pid.csv")
    table = report.table()
    (out / f"{scenario.name}_comparison.txt").write_text(table + "\n",
                                                         encoding="utf-8")
    print(table)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heli",
        description="Small-helicopter flight control toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=False):
        p.add_argument("--config", help="toolkit configuration file")
        p.add_argument("--out", help="output directory (default: current)")
        if scenario:
            p.add_argument("--scenario", required=True,
                           help="built-in name (%s) or a scenario file"
                           % ", ".join(builtin_names()))
            p.add_argument("--seed", type=int, default=None,
                           help="override the scenario seed")

    common(sub.add_parser("trim", help="solve the hover equilibrium"))
    common(sub.add_parser("linearize", help="write the linear attitude model"))
    p_syn = sub.add_parser("synthesize", help="design the inner loop and observer")
    common(p_syn)
    p_syn.add_argument("--plant", help="directory of CSVs from `heli linearize` "
                       "(default: recompute from the configuration)")
    p_gs = sub.add_parser("gamma-search", help="trace the attenuation bisection")
    common(p_gs)
    p_gs.add_argument("--plant", help="directory of CSVs from `heli linearize`")
    p_sim = sub.add_parser("simulate", help="run a closed-loop scenario")
    common(p_sim, scenario=True)
    p_sim.add_argument("--controller", choices=("hinf", "pid", "open_loop"),
                       help="override the scenario controller")
    p_cmp = sub.add_parser("compare", help="run a scenario under hinf and pid")
    common(p_cmp, scenario=True)
    return parser


_COMMANDS = {
    "trim": cmd_trim,
    "linearize": cmd_linearize,
    "synthesize": cmd_synthesize,
    "gamma-search": cmd_gamma_search,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except HeliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
