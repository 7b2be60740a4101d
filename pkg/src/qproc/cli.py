"""Command-line front end.

One self-describing JSON config drives every run; flags only override
the seed, shot count, output path, and format, so any result can be
reproduced from a file checked into a test fixture.

Exit codes: 0 success, 1 verification failure (a bound or saturation
check did not hold), 2 usage or schema error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .errors import QprocError, SchemaError, UnboundedVarianceError
from .families import (
    BlochFamily,
    EpsilonPairFamily,
    PauliZFamily,
    ProcessFamily,
    dual_norm,
    minimize_norm,
    unit_ball_mesh,
)
from .operators import HermitianOperator, matrix_from_pairs
from .protocols import (
    Protocol,
    ZooAmplitudes,
    bloch_protocol,
    corner_protocol,
    hyperedge_protocol,
    hyperface_protocol,
    kissing_residual,
    optimal_protocol,
    protocol_fisher,
    zoo_protocol,
)
from .simulate import EstimatorReport, report, sample_estimates
from .tangent import OneForm, canonicalize, fisher_dual

KISSING_TOL = 1e-8
SCHEMA_VERSION = 1

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "family", "q"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "family": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["pauli-z", "bloch", "epsilon-pair", "custom-unitary"]},
                "N": {"type": "integer", "minimum": 1},
                "epsilon": {"type": "number", "minimum": 0},
                "generators": {"type": "array"},
                "generators_path": {"type": "string"},
            },
        },
        "q": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "protocol": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["hyperface", "hyperedge", "corner", "zoo", "bloch", "optimal"]},
                "z": {"type": ["array", "string"]},
                "w": {"type": ["array", "string"]},
                "a": {"type": "array", "items": {"type": "number"}},
                "p": {"type": ["array", "object"]},
                "variant": {"enum": ["branched", "pure", "mixed"]},
                "expect_optimal": {"type": "boolean"},
            },
        },
        "simulate": {
            "type": "object",
            "required": ["shots", "repetitions", "seed"],
            "properties": {
                "theta_true": {"type": "array", "items": {"type": "number"}},
                "shots": {"type": "integer", "minimum": 1},
                "repetitions": {"type": "integer", "minimum": 2},
                "seed": {"type": "integer"},
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "geometry": {
            "type": "object",
            "properties": {"resolution": {"type": "integer", "minimum": 1}},
        },
        "output": {
            "type": "object",
            "properties": {
                "path": {"type": "string"},
                "format": {"enum": ["json", "csv"]},
            },
        },
    },
}


def load_config(path: str) -> dict:
    config_path = Path(path)
    if not config_path.exists():
        raise SchemaError(f"config file {path!r} does not exist")
    try:
        config = json.loads(config_path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"config violates the schema: {exc.message}") from exc
    generators_path = config["family"].get("generators_path")
    if generators_path is not None and not Path(generators_path).exists():
        raise SchemaError(f"referenced generators file {generators_path!r} does not exist")
    return config


def family_from_config(config: dict) -> ProcessFamily:
    section = config["family"]
    kind = section["kind"]
    n_q = len(config["q"])
    if kind == "pauli-z":
        n = section.get("N", n_q)
        family = PauliZFamily(n)
    elif kind == "bloch":
        family = BlochFamily()
    elif kind == "epsilon-pair":
        family = EpsilonPairFamily(section.get("epsilon", 0.0))
    else:
        if "generators_path" in section:
            nested = json.loads(Path(section["generators_path"]).read_text())
        elif "generators" in section:
            nested = section["generators"]
        else:
            raise SchemaError("custom-unitary families need generators or generators_path")
        try:
            gens = [HermitianOperator(matrix_from_pairs(g)) for g in nested]
        except QprocError as exc:
            raise SchemaError(f"bad generator matrices: {exc}") from exc
        family = ProcessFamily(gens)
    if family.n_params != n_q:
        raise SchemaError(f"q has {n_q} components but the family has {family.n_params} parameters")
    return family


def protocol_from_config(config: dict, family: ProcessFamily) -> Protocol:
    section = config.get("protocol")
    if section is None:
        raise SchemaError("this command needs a protocol block in the config")
    kind = section["kind"]
    dq = OneForm(config["q"])
    if kind == "hyperface":
        return hyperface_protocol(section["z"])
    if kind == "hyperedge":
        return hyperedge_protocol(section["w"])
    if kind == "corner":
        if isinstance(family, EpsilonPairFamily) and family.epsilon > 0:
            return optimal_protocol(family, dq)
        return corner_protocol(dq)
    if kind == "zoo":
        if "a" in section:
            return zoo_protocol(ZooAmplitudes(np.array(section["a"])), variant=section.get("variant", "branched"))
        if "p" in section:
            return zoo_protocol(section["p"], n_params=family.n_params, variant=section.get("variant", "branched"))
        raise SchemaError("zoo protocols need marginals 'a' or a distribution 'p'")
    if kind == "bloch":
        return bloch_protocol(dq)
    return optimal_protocol(family, dq)


def _claims_optimality(section: dict | None) -> bool:
    if section is None:
        return False
    if "expect_optimal" in section:
        return bool(section["expect_optimal"])
    return section["kind"] in ("corner", "bloch", "optimal")


def _format_float(x: float) -> str:
    return f"{x:.17g}"


def _bound_payload(config: dict, family: ProcessFamily) -> dict:
    dq = OneForm(config["q"])
    result = minimize_norm(family, dq)
    canonical = canonicalize(dq)
    return {
        "family": family.describe(),
        "q": [float(x) for x in dq.components],
        "norm": result.norm,
        "b_min": [float(x) for x in result.vector.components],
        "dual_norm": result.dual_norm,
        "variance_bound": result.dual_norm**2,
        "at_corner": result.at_corner,
        "adjacent_faces": None
        if result.adjacent_faces is None
        else [list(f) for f in result.adjacent_faces],
        "canonicalization": {
            "permutation": list(canonical.permutation),
            "scale": canonical.scale,
            "sign": canonical.sign,
            "dropped": sorted(canonical.dropped),
            "canonical": [float(x) for x in canonical.canonical.components],
        },
    }


def cmd_bound(config: dict) -> tuple[int, dict]:
    family = family_from_config(config)
    payload = _bound_payload(config, family)
    return 0, payload


def cmd_protocol(config: dict) -> tuple[int, dict]:
    family = family_from_config(config)
    dq = OneForm(config["q"])
    protocol = protocol_from_config(config, family)
    fisher = protocol_fisher(protocol, family)
    minimizer = minimize_norm(family, dq)
    residual = kissing_residual(fisher, minimizer.vector, family, dq)
    payload = {
        "family": family.describe(),
        "q": [float(x) for x in dq.components],
        "protocol": protocol.to_dict(),
        "fisher": [[float(x) for x in row] for row in fisher.entries],
        "kissing_residual": residual,
        "variance_bound": minimizer.dual_norm**2,
        "weights": [branch.weight for branch in protocol.branches],
    }
    code = 1 if (_claims_optimality(config.get("protocol")) and residual > KISSING_TOL) else 0
    return code, payload


def cmd_simulate(config: dict) -> tuple[int, dict | EstimatorReport]:
    family = family_from_config(config)
    sim = config.get("simulate")
    if sim is None:
        raise SchemaError("simulate runs need a simulate block")
    protocol = protocol_from_config(config, family)
    dq = OneForm(config["q"])
    bound = dual_norm(family, dq) ** 2
    theta = np.asarray(sim.get("theta_true", [0.0] * family.n_params), dtype=float)
    if theta.size != family.n_params:
        raise SchemaError("theta_true length does not match the family")
    samples = sample_estimates(
        protocol, family, theta, sim["shots"], sim["repetitions"], sim["seed"]
    )
    fisher = protocol_fisher(protocol, family)
    summary = report(
        samples,
        bound_per_shot=bound,
        shots=sim["shots"],
        fisher=fisher,
        dq=dq,
        tolerance=sim.get("tolerance", 0.05),
    )
    payload = {
        "family": family.describe(),
        "q": [float(x) for x in dq.components],
        "protocol_kind": protocol.kind,
        "theta_true": [float(x) for x in theta],
        "seed": sim["seed"],
        "report": summary.to_dict(),
    }
    return (0 if summary.within_tolerance else 1), payload


def cmd_geometry(config: dict) -> tuple[int, dict]:
    family = family_from_config(config)
    resolution = config.get("geometry", {}).get("resolution", 256)
    mesh = unit_ball_mesh(family, resolution)
    dq = OneForm(config["q"])
    payload = mesh.to_dict()
    payload["level_normal"] = [float(x) for x in dq.components]
    if config.get("protocol") is not None:
        protocol = protocol_from_config(config, family)
        fisher = protocol_fisher(protocol, family)
        payload["fisher_ellipsoid"] = [[float(x) for x in row] for row in fisher.entries]
    return 0, payload


def cmd_verify(config: dict) -> tuple[int, dict]:
    family = family_from_config(config)
    dq = OneForm(config["q"])
    minimizer = minimize_norm(family, dq)
    checks = {
        "duality": abs(minimizer.dual_norm * minimizer.norm - 1.0) <= 1e-10,
    }
    payload = {
        "family": family.describe(),
        "q": [float(x) for x in dq.components],
        "variance_bound": minimizer.dual_norm**2,
    }
    if config.get("protocol") is not None:
        protocol = protocol_from_config(config, family)
        fisher = protocol_fisher(protocol, family)
        residual = kissing_residual(fisher, minimizer.vector, family, dq)
        try:
            attained = fisher_dual(fisher, dq)
        except UnboundedVarianceError:
            # the protocol is blind to part of the target; it attains nothing
            attained = float("inf")
        checks["kissing"] = residual <= KISSING_TOL
        checks["bound_attained"] = abs(attained - minimizer.dual_norm**2) <= KISSING_TOL * max(
            1.0, minimizer.dual_norm**2
        )
        payload["kissing_residual"] = residual
        payload["attained_variance"] = attained
    payload["checks"] = checks
    return (0 if all(checks.values()) else 1), payload


COMMANDS = {
    "bound": cmd_bound,
    "protocol": cmd_protocol,
    "simulate": cmd_simulate,
    "geometry": cmd_geometry,
    "verify": cmd_verify,
}


def _emit(payload, command: str, config: dict, args) -> None:
    fmt = args.format or config.get("output", {}).get("format", "json")
    path = args.output or config.get("output", {}).get("path")
    if fmt == "csv":
        if command != "simulate":
            raise SchemaError("csv output is only defined for simulate reports")
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(EstimatorReport.CSV_HEADER)
        rep = payload["report"]
        writer.writerow(
            [
                payload["protocol_kind"],
                " ".join(_format_float(x) for x in payload["q"]),
                rep["shots"],
                rep["repetitions"],
                _format_float(rep["empirical_variance"]),
                _format_float(rep["bound_per_shot"]),
                _format_float(rep["z_score"]),
                payload["seed"],
            ]
        )
        text = buffer.getvalue()
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qproc",
        description="Precision bounds and optimal protocols for estimating one "
        "scalar function of many process parameters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("bound", "compute the attainable variance bound and its minimizer"),
        ("protocol", "construct a protocol, its information matrix, and the saturation residual"),
        ("simulate", "Monte-Carlo estimator runs against the bound"),
        ("geometry", "export unit-ball geometry for external plotting"),
        ("verify", "run all bound/saturation consistency checks"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("config", help="path to the JSON problem description")
        cmd.add_argument("--seed", type=int, default=None, help="override the simulation seed")
        cmd.add_argument("--shots", type=int, default=None, help="override the per-run shot count")
        cmd.add_argument("--output", default=None, help="override the output path")
        cmd.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config.setdefault("simulate", {})["seed"] = args.seed
        if args.shots is not None:
            config.setdefault("simulate", {})["shots"] = args.shots
        code, payload = COMMANDS[args.command](config)
        _emit(payload, args.command, config, args)
        return code
    except SchemaError as exc:
        sys.stdout.write(json.dumps({"error": "schema", "message": str(exc)}, sort_keys=True) + "\n")
        return 2
    except QprocError as exc:
        sys.stdout.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True) + "\n"
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
