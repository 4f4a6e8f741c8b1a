"""Command-line front end: state builders, protocol runs, GM and control-power reports.

Exit codes: 0 success with all checks passing, 1 I/O failure, 2 when a
verification fails (or on malformed arguments).  Reports embed the
package version and a hash of the resolved configuration; identical
configurations produce byte-identical files.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import re
import sys

import numpy as np

from . import __version__
from . import gm as gm_mod
from . import graphstate as gs
from . import povm as povm_mod
from . import protocol as proto
from .qcore import PauliAxis, X_AXIS, Y_AXIS, Z_AXIS, random_axis

_PI_FRACTION = re.compile(r"^(-?)(\d*)pi(?:/(\d+))?$")


def parse_angle(text: str) -> float:
    """Decimal radians or exact pi fractions such as 'pi', '3pi/4', '-pi/2'."""
    s = str(text).strip().lower().replace(" ", "")
    m = _PI_FRACTION.match(s)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        return sign * num * math.pi / den
    try:
        return float(s)
    except ValueError:
        raise ValueError(f"cannot parse angle {text!r}") from None


def format_angle(value: float) -> str:
    """Render exact multiples of pi/4 symbolically, decimals otherwise."""
    v = value % (2 * math.pi)
    for m in range(8):
        if abs(v - m * math.pi / 4) < 1e-9:
            if m == 0:
                return "0"
            if m % 4 == 0:
                return f"{m // 4}pi" if m > 4 else "pi"
            num, den = m, 4
            if m % 2 == 0:
                num, den = m // 2, 2
            return f"{num}pi/{den}" if num > 1 else f"pi/{den}"
    return f"{v:.12g}"


def parse_axis(text: str) -> PauliAxis:
    named = {"x": X_AXIS, "y": Y_AXIS, "z": Z_AXIS}
    s = str(text).strip().lower()
    if s in named:
        return named[s]
    parts = [float(p) for p in s.split(",")]
    if len(parts) != 3:
        raise ValueError(f"axis must be x, y, z or three comma-separated components, got {text!r}")
    return PauliAxis.unit(*parts)


def _config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _report(payload: dict, config: dict) -> dict:
    return {"artifact_version": __version__, "config_hash": _config_hash(config), **payload}


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _provenance_line(config: dict) -> str:
    return f"# artifact_version={__version__} config_hash={_config_hash(config)}"


def _render_text(payload: dict, indent: str = "") -> str:
    lines = []
    for key in sorted(payload):
        value = payload[key]
        if isinstance(value, dict):
            lines.append(f"{indent}{key}:")
            lines.append(_render_text(value, indent + "  "))
        elif isinstance(value, list):
            lines.append(f"{indent}{key}: [{len(value)} entries]")
        else:
            lines.append(f"{indent}{key}: {value}")
    return "\n".join(lines)


def _write_json(path: str | None, payload: dict) -> None:
    _write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_report(path: str | None, payload: dict, fmt: str) -> None:
    if fmt == "text":
        _write_text(path, _render_text(payload) + "\n")
    else:
        _write_json(path, payload)


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.12g}{z.imag:+.12g}j"


# ----------------------------------------------------------------------
# subcommands

def cmd_build_state(args) -> int:
    config = {"command": "build-state", "family": args.family, "n": args.n,
              "groups": args.groups, "edge_list": args.edge_list, "format": args.format}
    if args.edge_list:
        graph = gs.read_edge_list(args.edge_list)
        state = gs.build_graph_state(graph)
        meta = {"family": "edge-list", "num_vertices": graph.num_vertices,
                "edges": [list(e) for e in graph.sorted_edges()]}
    else:
        fam = (args.family or "").lower()
        if fam == "h3":
            state = gs.crio_channel_state(gs.CrioTopology(1))
            meta = {"family": "h3", "n_systems": 1}
        elif fam == "h5":
            state = gs.crio_channel_state(gs.CrioTopology(2))
            meta = {"family": "h5", "n_systems": 2}
        elif fam == "h2n1":
            if args.n is None:
                raise ValueError("h2n1 requires --n")
            groups = frozenset(int(g) for g in args.groups.split(",")) if args.groups else None
            topo = gs.CrioTopology(args.n, groups)
            state = gs.crio_channel_state(topo)
            meta = {"family": "h2n1", "n_systems": args.n,
                    "controlled_groups": sorted(topo.controlled_groups),
                    "roles": {str(k): v for k, v in gs.role_names(topo).items()}}
        elif fam == "phi":
            if args.n is None:
                raise ValueError("phi requires --n")
            state = gs.phi_state(args.n)
            meta = {"family": "phi", "n_systems": args.n}
        else:
            raise ValueError(f"unknown state family {args.family!r}")
    if args.format == "csv":
        _write_text(args.out, _provenance_line(config) + "\n" + gs.state_to_csv(state))
    else:
        _write_report(args.out, _report({"metadata": meta, "state": gs.state_to_json_dict(state)}, config), args.format)
    return 0


def cmd_run_protocol(args) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        kwargs = proto.run_config_from_dict(raw)
    else:
        if args.n is None:
            raise ValueError("run-protocol needs --config or --n")
        rng = np.random.default_rng(args.seed)
        axes = [parse_axis(args.axis)] * args.n if args.axis else [random_axis(rng) for _ in range(args.n)]
        betas = [parse_angle(args.alpha)] * args.n if args.alpha else list(rng.uniform(0, 2 * math.pi, args.n))
        targets = []
        for _ in range(args.n):
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            targets.append(v / np.linalg.norm(v))
        groups = frozenset(int(g) for g in args.groups.split(",")) if args.groups else None
        kwargs = {
            "n_systems": args.n, "axes": axes, "betas": betas, "targets": targets,
            "mode": args.mode, "seed": args.seed, "permitted": args.permitted == "true",
            "controlled_groups": groups,
        }
    config = proto.run_config_to_dict(
        kwargs["n_systems"], kwargs["axes"], kwargs["betas"], kwargs["targets"],
        kwargs["mode"], kwargs["seed"], kwargs["permitted"], kwargs["controlled_groups"],
    )
    result = proto.run_crio(**kwargs)
    payload = result.to_json_dict()
    payload["min_fidelity"] = result.min_fidelity()
    payload["total_probability"] = result.total_probability()
    _write_report(args.out, _report(payload, config), args.format)
    if result.permitted and result.min_fidelity() < 1 - 1e-10:
        print("verification failed: a permitted branch missed unit fidelity", file=sys.stderr)
        return 2
    if abs(result.total_probability() - 1.0) > 1e-10 and kwargs["mode"] == "enumerate":
        print("verification failed: branch probabilities do not sum to 1", file=sys.stderr)
        return 2
    return 0


def cmd_gm(args) -> int:
    config = {"command": "gm", "family": args.family, "n": args.n, "state": args.state,
              "restarts": args.restarts, "seed": args.seed, "mode": args.mode}
    if args.state:
        with open(args.state, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        state = gs.state_from_json_dict(data.get("state", data))
        result = gm_mod.gm_optimize(state, mode=args.mode, restarts=args.restarts, seed=args.seed)
        payload = gm_mod.gm_report_dict(args.state, args.n or 0, result)
        _write_report(args.out, _report(payload, config), args.format)
        return 0
    fam = (args.family or "h2n1").lower()
    if fam in ("h2n1", "h3", "h5"):
        n = {"h3": 1, "h5": 2}.get(fam, args.n)
        if n is None:
            raise ValueError("gm for the channel family requires --n")
        result = gm_mod.gm_channel_family(n, restarts=args.restarts, seed=args.seed)
        payload = gm_mod.gm_report_dict(f"h{2 * n + 1}", n, result)
        expected = float(n)
    elif fam == "phi":
        if args.n is None:
            raise ValueError("gm for the phi family requires --n")
        result = gm_mod.gm_phi(args.n, restarts=args.restarts, seed=args.seed)
        payload = gm_mod.gm_report_dict(f"phi{2 * args.n}", args.n, result)
        expected = float(args.n)
    else:
        raise ValueError(f"unknown gm family {args.family!r}")
    _write_report(args.out, _report(payload, config), args.format)
    if abs(result.G - expected) > 1e-6:
        print(f"verification failed: GM {result.G} differs from expected {expected}", file=sys.stderr)
        return 2
    return 0


def cmd_control_power(args) -> int:
    config = {"command": "control-power", "alpha": args.alpha, "sweep": args.sweep}
    if args.sweep:
        reports = []
        for m in range(args.sweep):
            alpha = 2 * math.pi * m / args.sweep
            reports.append(povm_mod.control_power_report(alpha))
        payload = {"sweep": reports}
        rates_ok = all(r["success_rate"] in (0.25, 0.5) for r in reports)
    else:
        alpha = parse_angle(args.alpha if args.alpha is not None else "0")
        report = povm_mod.control_power_report(alpha)
        payload = report
        rates_ok = report["success_rate"] in (0.25, 0.5)
    _write_report(args.out, _report(payload, config), args.format)
    if not rates_ok:
        print("verification failed: success rate outside {0.25, 0.5}", file=sys.stderr)
        return 2
    return 0


def _table1_csv(seed: int) -> str:
    lines = ["n_systems,channel_state,channel_gm,reference_state,reference_gm"]
    for n, h_id, h_gm, p_id, p_gm in gm_mod.entanglement_table_rows(3, seed=seed):
        lines.append(f"{n},{h_id},{h_gm:.9f},{p_id},{p_gm:.9f}")
    return "\n".join(lines) + "\n"


def _table2_csv() -> str:
    lines = ["block,theta1,theta2,phi1,phi2,lambda1,lambda2,omega1,omega2,pair,c00,c01,c10,c11,alphas"]
    theta1, phi1 = math.pi / 4, 0.0
    for block, choice in ((1, "lambda1_zero"), (2, "lambda1_half_pi")):
        for row in povm_mod.enumerate_case1(theta1, phi1, choice):
            p = row.params
            c = row.coefficients
            alphas = "|".join(format_angle(a) for a in row.alphas)
            lines.append(
                f"{block},{format_angle(p.theta1)},{format_angle(p.theta2)},{format_angle(p.phi1)},"
                f"{format_angle(p.phi2)},{format_angle(p.lambda1)},{format_angle(p.lambda2)},"
                f"{format_angle(p.omega1)},{format_angle(p.omega2)},M{row.pair[0]}N{row.pair[1]},"
                f"{_fmt_complex(c.c00)},{_fmt_complex(c.c01)},{_fmt_complex(c.c10)},{_fmt_complex(c.c11)},{alphas}"
            )
    return "\n".join(lines) + "\n"


def _table3_csv(lambda1_generic: float = 0.6) -> str:
    lines = ["block,theta1,theta2,phi1,phi2,lambda1,lambda2,omega1,omega2,success_rate,pair,K,c01,c10,alphas"]
    for block, lam1, rate in ((1, math.pi / 4, 0.5), (2, lambda1_generic, 0.25)):
        for row in povm_mod.enumerate_case2(lam1):
            p = row.params
            c = row.coefficients
            alphas = "|".join(format_angle(a) for a in row.alphas)
            k_str = _fmt_complex(row.K) if row.K is not None else ""
            lines.append(
                f"{block},{format_angle(p.theta1)},{format_angle(p.theta2)},{format_angle(p.phi1)},"
                f"{format_angle(p.phi2)},{format_angle(p.lambda1)},{format_angle(p.lambda2)},"
                f"{format_angle(p.omega1)},{format_angle(p.omega2)},{rate},M{row.pair[0]}N{row.pair[1]},"
                f"{k_str},{_fmt_complex(c.c01)},{_fmt_complex(c.c10)},{alphas}"
            )
    return "\n".join(lines) + "\n"


def cmd_reproduce_tables(args) -> int:
    which = {"I": "I", "1": "I", "II": "II", "2": "II", "III": "III", "3": "III"}.get(args.table.upper())
    if which is None:
        raise ValueError("table must be one of I, II, III")
    config = {"command": "reproduce-tables", "table": which, "seed": args.seed}
    if which == "I":
        text = _table1_csv(args.seed)
    elif which == "II":
        text = _table2_csv()
    else:
        text = _table3_csv()
    _write_text(args.out, _provenance_line(config) + "\n" + text)
    return 0


def cmd_verify_all(args) -> int:
    checks = []
    rng = np.random.default_rng(args.seed)

    for n in (1, 2):
        axes = [random_axis(rng) for _ in range(n)]
        betas = list(rng.uniform(0, 2 * math.pi, n))
        targets = []
        for _ in range(n):
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            targets.append(v / np.linalg.norm(v))
        res = proto.run_crio(n, axes, betas, targets)
        checks.append((f"protocol n_systems={n} all-branch fidelity", res.min_fidelity() >= 1 - 1e-10))
        checks.append((f"protocol n_systems={n} probabilities sum to 1", abs(res.total_probability() - 1) < 1e-10))

    ok = True
    for n in (1, 2, 3):
        state = gs.crio_channel_state(gs.CrioTopology(n))
        for i, bits in enumerate(gs.all_bitstrings(2 * n + 1)):
            if abs(state.amplitudes[i] - gs.amplitude_oracle(n, bits)) > 1e-12:
                ok = False
    checks.append(("channel amplitudes match the sign oracle", ok))

    g = gm_mod.gm_channel_family(2, restarts=24, seed=args.seed)
    checks.append(("GM of the 5-qubit channel state equals 2", abs(g.G - 2) < 1e-6))

    flat = all(
        abs(povm_mod.outcome_probability(povm_mod.PovmParams.random_valid(rng), j, k) - 0.25) < 1e-10
        for _ in range(50) for j in (1, 2) for k in (1, 2)
    )
    checks.append(("POVM outcome probabilities are flat at 1/4", flat))
    checks.append(("success rate dichotomy",
                   povm_mod.success_rate(3 * math.pi / 4) == 0.5 and povm_mod.success_rate(0.7) == 0.25))

    denial = proto.control_denial_report(
        1, [random_axis(rng)], [0.8], [np.array([1.0, 0.0], dtype=complex)]
    )
    checks.append(("control denial leaves a mixed reduced state",
                   denial.purity_without_controller < 1 - 1e-6))
    checks.append(("control denial defeats every guess",
                   denial.best_guess_min_fidelity < 1 - 1e-6))

    failures = 0
    for name, passed in checks:
        print(f"[{'PASS' if passed else 'FAIL'}] {name}")
        if not passed:
            failures += 1
    payload = {"checks": [{"name": n, "passed": bool(p)} for n, p in checks], "failures": failures}
    if args.out:
        _write_json(args.out, _report(payload, {"command": "verify-all", "seed": args.seed}))
    return 0 if failures == 0 else 2


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crio", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-state", help="write a named state family or an edge-list graph state")
    p.add_argument("family", nargs="?", help="h3 | h5 | h2n1 | phi")
    p.add_argument("--edge-list", help="build from an edge-list file instead")
    p.add_argument("--n", type=int, help="number of remote systems")
    p.add_argument("--groups", help="comma-separated controlled group indices (h2n1)")
    p.set_defaults(func=cmd_build_state)

    p = sub.add_parser("run-protocol", help="run the controlled remote-operation protocol")
    p.add_argument("--config", help="JSON run configuration file")
    p.add_argument("--n", type=int, help="number of remote systems (random draw mode)")
    p.add_argument("--alpha", help="rotation angle for every system (default: random)")
    p.add_argument("--axis", help="axis x|y|z or 'x,y,z' components for every system")
    p.add_argument("--groups", help="comma-separated controlled group indices")
    p.add_argument("--mode", choices=("enumerate", "sample"), default="enumerate")
    p.add_argument("--permitted", choices=("true", "false"), default="true")
    p.set_defaults(func=cmd_run_protocol)

    p = sub.add_parser("gm", help="geometric measure of entanglement reports")
    p.add_argument("--family", default="h2n1", help="h2n1 | h3 | h5 | phi")
    p.add_argument("--n", type=int)
    p.add_argument("--state", help="optimize a state from a JSON amplitude file instead")
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--mode", choices=("nonneg", "general"), default="nonneg")
    p.set_defaults(func=cmd_gm)

    p = sub.add_parser("control-power", help="controller-free success rate for a rotation angle")
    p.add_argument("--alpha", help="target angle (radians or pi fraction)")
    p.add_argument("--sweep", type=int, help="evaluate a grid of this many angles instead")
    p.set_defaults(func=cmd_control_power)

    p = sub.add_parser("reproduce-tables", help="regenerate the quantitative tables as CSV")
    p.add_argument("table", help="I, II or III")
    p.set_defaults(func=cmd_reproduce_tables)

    p = sub.add_parser("verify-all", help="run the condensed verification battery")
    p.set_defaults(func=cmd_verify_all)

    for sp in sub.choices.values():
        sp.add_argument("--seed", type=int, default=7)
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=("json", "csv", "text"), default="json")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
