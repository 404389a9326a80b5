"""Command-line batch runner: ``mqite run|presets|problems gen|decompose-check|run-qse``."""
from __future__ import annotations

import argparse
import copy
import dataclasses
import datetime
import hashlib
import json
import logging
import os
import platform
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .evolution import ConfigError, MQITEConfig, RunRecord, rows_to_csv, run_mqite
from .ite import NumericalError
from .problems import ProblemError, ProblemSpec, build_problem, save_hamiltonian, write_edges_csv
from .simulator import SimulatorError

log = logging.getLogger("mqite")

OUTPUT_ROOT_ENV = "MQITE_OUTPUT_ROOT"
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

PRESETS: dict[str, dict] = {
    "validation-6q": {
        "problem": {"kind": "validation"},
        "mqite": {"delta": 0.3, "T": 3.0, "chi": 100, "epsilon": 2, "eta_cap": 36, "mode": "hybrid"},
    },
    "maxcut-10": {
        "problem": {"kind": "maxcut", "n": 10, "params": {"k": 3, "J": 1.0, "seed": 0}},
        "mqite": {"delta": 0.1, "T": 3.0, "chi": 1000, "epsilon": 2, "eta_cap": 100, "mode": "hybrid",
                  "qse_enabled": True},
    },
    "tfim-10": {
        "problem": {"kind": "tfim", "n": 10, "params": {"J": 1.0, "h_x": 1.0}},
        "mqite": {"delta": 0.1, "T": 3.0, "chi": 1000, "epsilon": 2, "eta_cap": 100, "mode": "hybrid",
                  "qse_enabled": True},
    },
    "nuclear-pshell": {
        "problem": {"kind": "nuclear-pshell", "params": {"preset": "M0"}},
        "mqite": {"delta": 0.05, "T": 2.0, "epsilon": 3, "eta_cap": 36, "mode": "exact"},
    },
    "nuclear-pshell-m2": {
        "problem": {"kind": "nuclear-pshell", "params": {"preset": "M2"}},
        "mqite": {"delta": 0.05, "T": 2.0, "epsilon": 3, "eta_cap": 36, "mode": "exact"},
    },
}


@dataclasses.dataclass
class ExperimentConfig:
    problem: ProblemSpec
    mqite: MQITEConfig
    outputs: str | None = None
    compare_ite: bool = True
    name: str = "run"

    @classmethod
    def from_dict(cls, d: dict, text: str | None = None) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError(_locate(text, unknown[0], f"unknown config key {unknown[0]!r}"))
        if "problem" not in d:
            raise ConfigError("config needs a 'problem' section")
        try:
            problem = ProblemSpec.from_dict(d["problem"])
        except ProblemError as exc:
            raise ConfigError(_locate(text, _first_key(str(exc)), f"problem: {exc}")) from None
        try:
            mq = MQITEConfig.from_dict(d.get("mqite", {}))
        except (ConfigError, TypeError) as exc:
            raise ConfigError(_locate(text, _first_key(str(exc)), f"mqite: {exc}")) from None
        return cls(problem, mq, d.get("outputs"), bool(d.get("compare_ite", True)), d.get("name", "run"))

    def to_dict(self) -> dict:
        return {"name": self.name, "problem": self.problem.to_dict(), "mqite": self.mqite.to_dict(),
                "outputs": self.outputs, "compare_ite": self.compare_ite}


def _first_key(msg: str) -> str | None:
    m = re.search(r":\s*([A-Za-z_][\w-]*)", msg)
    return m.group(1) if m else None


def _locate(text: str | None, key: str | None, msg: str) -> str:
    """Prefix ``msg`` with the line on which ``"key"`` first appears in ``text``."""
    if text and key:
        for i, line in enumerate(text.splitlines(), start=1):
            if f'"{key}"' in line:
                return f"line {i}: {msg}"
    return msg


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    return ExperimentConfig.from_dict(d, text)


def preset_config(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; try 'mqite presets'")
    d = copy.deepcopy(PRESETS[name])
    d["name"] = name
    return ExperimentConfig.from_dict(d)


def output_dir(cfg: ExperimentConfig, override: str | None = None) -> Path:
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))
    if override:
        return Path(override)
    if cfg.outputs:
        p = Path(cfg.outputs)
        return p if p.is_absolute() else root / p
    return root / f"{cfg.name}-seed{cfg.mqite.seed}"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def execute(cfg: ExperimentConfig, out: Path) -> RunRecord:
    """Run one experiment and write every output file into ``out``."""
    from .qse import build_subspace, solve_gev

    problem = build_problem(cfg.problem)
    mq = cfg.mqite
    if mq.prep == "zero" and problem.prep != "zero":
        mq = dataclasses.replace(mq, prep=problem.prep)
    rec = run_mqite(problem.hamiltonian, mq, compare_ite=cfg.compare_ite)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    (out / "run.json").write_text(rec.to_json())
    (out / "trajectory.csv").write_text(rec.trajectory_csv())
    (out / "terms.csv").write_text(rec.term_csv())
    files.update({"run.json": None, "trajectory.csv": None, "terms.csv": None})
    if cfg.compare_ite:
        rows = []
        for s, e in zip(rec.sweeps, rec.ite_energies):
            rel = (e - rec.exact_energy) / abs(rec.exact_energy) if rec.exact_energy else e
            rows.append({"tau": s.tau, "energy": e, "rel_error": rel, "fidelity": s.fidelity})
        (out / "ite_trajectory.csv").write_text(rows_to_csv(rows, ["tau", "energy", "rel_error", "fidelity"]))
        files["ite_trajectory.csv"] = None
    if problem.edges is not None:
        write_edges_csv(problem.edges, out / "edges.csv")
        files["edges.csv"] = None
    if mq.qse_enabled:
        sub = build_subspace(rec, problem.hamiltonian, mq.qse_stride)
        e, coef, rank = solve_gev(sub, mq.qse_svd_cut)
        (out / "qse.json").write_text(json.dumps({
            "energy": e, "rank": rank, "stride": mq.qse_stride, "svd_cut": mq.qse_svd_cut,
            "taus": sub.labels, "mqite_final_energy": rec.final_energy, "exact_energy": rec.exact_energy,
        }, indent=1))
        files["qse.json"] = None
    manifest = {
        "name": cfg.name,
        "seed": mq.seed,
        "config": cfg.to_dict(),
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "wall_time_s": rec.wall_time,
        "versions": {"mqite": __version__, "python": platform.python_version(), "numpy": np.__version__},
        "problem_info": problem.info,
        "checksums": {name: _sha256(out / name) for name in files},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return rec


def _run_one(job: tuple[dict, str]) -> tuple[str, int, str]:
    cfg_dict, out = job
    try:
        cfg = ExperimentConfig.from_dict(cfg_dict)
        rec = execute(cfg, Path(out))
        return out, 0, f"E={rec.final_energy:.6f} exact={rec.exact_energy:.6f} eta_max={rec.eta_max}"
    except (NumericalError, SimulatorError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return out, EXIT_NUMERICAL, f"numerical failure: {exc}"


def cmd_run(args) -> int:
    jobs = []
    try:
        sources = [("config", c) for c in args.config] + [("preset", p) for p in args.preset or []]
        if not sources:
            raise ConfigError("give at least one config file or --preset")
        for kind, src in sources:
            cfg = load_config(src) if kind == "config" else preset_config(src)
            seeds = args.seeds or [cfg.mqite.seed]
            for seed in seeds:
                c = copy.deepcopy(cfg)
                c.mqite.seed = seed
                multi = len(seeds) > 1 or len(sources) > 1
                out = output_dir(c, None if multi else args.out)
                if multi and args.out:
                    out = Path(args.out) / f"{c.name}-seed{seed}"
                jobs.append((c.to_dict(), str(out)))
    except (ConfigError, ProblemError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    status = 0
    for out, code, msg in results:
        print(f"{out}: {msg}", file=sys.stderr if code else sys.stdout)
        status = max(status, code)
    return status


def cmd_presets(args) -> int:
    if args.show:
        if args.show not in PRESETS:
            print(f"unknown preset {args.show!r}", file=sys.stderr)
            return EXIT_CONFIG
        print(json.dumps(preset_config(args.show).to_dict(), indent=1))
        return 0
    for name in sorted(PRESETS):
        m = PRESETS[name]["mqite"]
        print(f"{name}\tdelta={m['delta']} T={m['T']} epsilon={m['epsilon']} eta_cap={m['eta_cap']}"
              f" chi={m.get('chi', '-')} mode={m['mode']}")
    return 0


def cmd_problems_gen(args) -> int:
    params = {}
    for key in ("k", "J", "h_x", "seed", "n_terms", "op_set", "preset"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    try:
        spec = ProblemSpec(args.kind, args.n, params).validate()
        problem = build_problem(spec)
    except ProblemError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    save_hamiltonian(problem.hamiltonian, args.out)
    if problem.edges is not None and args.edges:
        write_edges_csv(problem.edges, args.edges)
    print(f"wrote {len(problem.hamiltonian)} terms on {problem.hamiltonian.n} qubits to {args.out}")
    return 0


def cmd_decompose_check(args) -> int:
    from .decomposition import decompose_check
    from .simulator import make_rng

    rows = decompose_check(args.n_max, args.random, tuple(args.random_n), make_rng(args.seed))
    sys.stdout.write(rows_to_csv(rows, ["n", "weight", "strings", "gates_1q", "gates_2q", "max_deviation"]))
    worst = max(r["max_deviation"] for r in rows)
    return 0 if worst <= 1e-9 else EXIT_NUMERICAL


def cmd_run_qse(args) -> int:
    from .pauli import parse_hamiltonian
    from .qse import SubspaceError, build_subspace, solve_gev

    try:
        d = json.loads(Path(args.record).read_text())
        rec = RunRecord.from_dict(d)
        h = parse_hamiltonian(rec.hamiltonian)
    except (OSError, KeyError, ValueError) as exc:
        print(f"config error: cannot read record: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        e, _, rank = solve_gev(build_subspace(rec, h, args.stride), args.svd_cut)
    except SubspaceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"E_QSE={e!r} rank={rank} E_MQITE={rec.final_energy!r} E_exact={rec.exact_energy!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mqite", description="MQITE experiments on a statevector simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run experiments from JSON configs or presets")
    p.add_argument("config", nargs="*", help="experiment config JSON file(s)")
    p.add_argument("--preset", action="append", help="run a built-in preset (repeatable)")
    p.add_argument("--out", help=f"output directory (default: ${OUTPUT_ROOT_ENV} or ./runs)")
    p.add_argument("--seeds", type=int, nargs="+", help="override the seed; several seeds fan out")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("presets", help="list built-in experiment presets")
    p.add_argument("--show", help="print one preset as a full JSON config")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("problems", help="problem generators")
    psub = p.add_subparsers(dest="problems_command", required=True)
    g = psub.add_parser("gen", help="write a Hamiltonian file")
    g.add_argument("--kind", required=True,
                   choices=["maxcut", "tfim", "validation", "random-klocal", "nuclear-pshell"])
    g.add_argument("--n", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--J", type=float)
    g.add_argument("--h-x", dest="h_x", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--n-terms", dest="n_terms", type=int)
    g.add_argument("--op-set", dest="op_set")
    g.add_argument("--preset", help=argparse.SUPPRESS)
    g.add_argument("--out", required=True)
    g.add_argument("--edges", help="Max-Cut edge list CSV")
    g.set_defaults(func=cmd_problems_gen)

    p = sub.add_parser("decompose-check", help="gate counts and oracle deviation as CSV")
    p.add_argument("--n-max", type=int, default=5)
    p.add_argument("--random", type=int, default=0, help="random strings, sizes drawn from --random-n")
    p.add_argument("--random-n", type=int, nargs="*", default=[6, 7, 8])
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_decompose_check)

    p = sub.add_parser("run-qse", help="subspace expansion over a saved run.json")
    p.add_argument("--record", required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--svd-cut", type=float, default=1e-8)
    p.set_defaults(func=cmd_run_qse)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
