"""Command-line pipeline: build, verify, stability, plot, all."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .construct import VectorFieldSpec, build, calibrate_epsilon
from .errors import HeteronetError, InvalidArgumentError, UnsupportedError
from .graph import build_graph
from .integrate import integrate
from .nullclines import EPS_ZERO, curves_to_csv, curves_to_svg, sample_nullclines
from .serialize import atomic_write, dumps
from .stability import analyze_network_cycles
from .verify import VerifyParams, summarize, verify_realization

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("heteronet")


@dataclass
class RunConfig:
    n: int = 3
    mode: str = "auto"
    epsilon: str = "auto"
    kappa: float = 0.01
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    delta: float = 1e-3
    eta: float = 1e-2
    t_max: float = 1e4
    out: str = "heteronet-out"
    seed: int = 0
    plane: int | None = None
    overlay: bool = False

    def validate(self) -> "RunConfig":
        if self.mode not in ("auto", "explicit", "general"):
            raise InvalidArgumentError(f"mode must be auto, explicit or general, got {self.mode!r}")
        for name in ("kappa", "rel_tol", "abs_tol", "delta", "eta", "t_max"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive, got {getattr(self, name)}")
        if self.epsilon != "auto":
            try:
                value = float(self.epsilon)
            except ValueError:
                raise InvalidArgumentError(f"epsilon must be a number or 'auto', got {self.epsilon!r}") from None
            if not value > 0:
                raise InvalidArgumentError(f"epsilon must be positive, got {value}")
        return self

    def verify_params(self) -> VerifyParams:
        return VerifyParams(
            delta=self.delta, eta=self.eta, t_max=self.t_max, rel_tol=self.rel_tol,
            abs_tol=self.abs_tol, seed=self.seed, kappa=self.kappa,
        )

    @property
    def outdir(self) -> Path:
        return Path(self.out)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, raw: str):
    if name in ("mode", "epsilon", "out"):
        return raw
    if name == "overlay":
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if name in ("n", "seed", "plane"):
        return int(raw)
    return float(raw)


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, ``[sections]`` are ignored."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise InvalidArgumentError(f"{path}:{lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        raw = raw.strip('"').strip("'")
        if key not in _FIELD_TYPES:
            raise InvalidArgumentError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _coerce(key, raw)
        except ValueError:
            raise InvalidArgumentError(f"{path}:{lineno}: bad value for {key}: {raw!r}") from None
    return values


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--n", type=int, help="number of nodes (>= 3)")
    common.add_argument("--mode", choices=["auto", "explicit", "general"])
    common.add_argument("--epsilon", help="positive number or 'auto'")
    common.add_argument("--kappa", type=float)
    common.add_argument("--rel-tol", dest="rel_tol", type=float)
    common.add_argument("--abs-tol", dest="abs_tol", type=float)
    common.add_argument("--delta", type=float)
    common.add_argument("--eta", type=float)
    common.add_argument("--t-max", dest="t_max", type=float)
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--plane", type=int)
    common.add_argument("--overlay", action="store_const", const=True,
                        help="draw verified connection trajectories on the plots")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(
        prog="heteronet",
        description="Build and verify polynomial fields realising DNN heteroclinic networks.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="write the field as JSON and as equations")
    sub.add_parser("verify", parents=[common], help="check equilibria, connections and absences")
    sub.add_parser("stability", parents=[common], help="classify the two-node cycles")
    sub.add_parser("plot", parents=[common], help="export nullclines as SVG and CSV")
    sub.add_parser("all", parents=[common], help="run the full pipeline")
    return p


def make_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for name in _FIELD_TYPES:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return RunConfig(**values).validate()


def make_spec(cfg: RunConfig) -> VectorFieldSpec:
    if cfg.epsilon == "auto":
        draft = build(cfg.n, 1.0, cfg.mode)
        return draft.with_epsilon(calibrate_epsilon(draft, cfg.kappa))
    return build(cfg.n, float(cfg.epsilon), cfg.mode)


def _name(cfg: RunConfig, stem: str, suffix: str) -> Path:
    return cfg.outdir / f"{stem}_n{cfg.n}{suffix}"


def cmd_build(cfg: RunConfig) -> int:
    spec = make_spec(cfg)
    graph = build_graph(cfg.n)
    atomic_write(_name(cfg, "spec", ".json"), dumps(spec.to_dict()))
    atomic_write(_name(cfg, "equations", ".txt"), spec.equations())
    atomic_write(_name(cfg, "graph", ".json"), dumps(graph.to_dict()))
    print(f"built n={spec.n} dim={spec.dim} mode={spec.mode} epsilon={spec.epsilon!r} "
          f"axis roots={len(spec.axis.axis_roots)}")
    return EXIT_OK


def _report_payload(cfg: RunConfig, report) -> dict:
    out = report.to_dict()
    # the output location is not part of the result
    out["config"] = {k: v for k, v in asdict(cfg).items() if k != "out"}
    return out


def cmd_verify(cfg: RunConfig) -> int:
    spec = make_spec(cfg)
    graph = build_graph(cfg.n)
    report = verify_realization(spec, graph, cfg.verify_params())
    atomic_write(_name(cfg, "report", ".json"), dumps(_report_payload(cfg, report)))
    print("\n".join(summarize(report)))
    return EXIT_OK if report.verified else EXIT_VERIFY_FAILED


def cmd_stability(cfg: RunConfig) -> int:
    spec = make_spec(cfg)
    graph = build_graph(cfg.n)
    cycles = [c.to_dict() for c in analyze_network_cycles(spec, graph)]
    path = _name(cfg, "report", ".json")
    payload = json.loads(path.read_text()) if path.exists() else {"n": cfg.n, "epsilon": spec.epsilon}
    payload["cycles"] = cycles
    atomic_write(path, dumps(payload))
    if not cycles:
        print(f"n={cfg.n}: no two-node cycles")
    for c in cycles:
        i, k = c["nodes"]
        ineq = "; ".join(
            f"{sec}: " + ", ".join(f"{v:.6g}" for v in vals) for sec, vals in c["inequalities"].items()
        )
        print(f"C{i}{k}: {c['classification']['verdict']} (branch {c['branch']}; "
              f"alpha={c['return_alpha']:.6g}; {ineq})")
    return EXIT_OK


def _overlay_paths(spec: VectorFieldSpec, cfg: RunConfig, plane: int) -> list[np.ndarray]:
    graph = build_graph(cfg.n)
    slot = spec.plane_indices.index(plane) + 1
    paths = []
    for s, t in graph.edges_in_plane(plane):
        start = spec.node_point(s)
        start[slot] = cfg.delta
        balls = [(spec.node_point(k), cfg.eta) for k in range(1, spec.n + 1)]
        traj = integrate(spec, start, cfg.t_max, cfg.rel_tol, cfg.abs_tol, balls, method="auto",
                         stiffness_probes=[spec.node_point(t)])
        if traj.event_index is not None and traj.event_index + 1 == t:
            paths.append(traj.points[:, [0, slot]])
    return paths


def cmd_plot(cfg: RunConfig) -> int:
    spec = make_spec(cfg)
    planes = [cfg.plane] if cfg.plane is not None else list(spec.plane_indices)
    for j in planes:
        if j not in spec.plane_indices:
            raise InvalidArgumentError(f"plane {j} does not exist for n={cfg.n} (planes {spec.plane_indices})")
    for j in planes:
        curves = sample_nullclines(spec, j, mode=EPS_ZERO)
        overlays = _overlay_paths(spec, cfg, j) if cfg.overlay else []
        stem = cfg.outdir / f"nullclines_n{cfg.n}_p{j}"
        atomic_write(stem.with_suffix(".csv"), curves_to_csv(curves))
        atomic_write(stem.with_suffix(".svg"), curves_to_svg(spec, j, curves, overlays))
        nx = sum(c.which == "x" for c in curves)
        ny = sum(c.which == "y" for c in curves)
        print(f"plane {j}: {nx} x-nullclines, {ny} y-nullclines -> {stem}.svg")
    return EXIT_OK


def cmd_all(cfg: RunConfig) -> int:
    cmd_build(cfg)
    code = cmd_verify(cfg)
    cmd_stability(cfg)
    cmd_plot(cfg)
    return code


COMMANDS = {
    "build": cmd_build,
    "verify": cmd_verify,
    "stability": cmd_stability,
    "plot": cmd_plot,
    "all": cmd_all,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
        return COMMANDS[args.command](cfg)
    except (InvalidArgumentError, UnsupportedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except HeteronetError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
