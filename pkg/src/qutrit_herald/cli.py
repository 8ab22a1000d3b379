"""Command-line front end: ``qutrit-herald <command> [options]``.

Every command prints (or writes to ``--out``) a deterministic JSON document or
CSV table. Floats are written with 17 significant digits. The exit status is
0 when all internal self-checks pass, 1 when one fails, and 2 on bad usage.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, cglmp, circuits
from . import detection as det
from .elements import apply_bs
from .fock import (
    PureState,
    QutritAmplitudes,
    bell_pair,
    fidelity,
    max_entangled,
    qutrit_matrix,
    tensor,
    to_json,
)

# serialization


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"non-finite value {x} in output")
    return format(x, ".17g")


def _plain(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, PureState):
        return to_json(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    return obj


def dumps(obj, indent: int = 0) -> str:
    """JSON with fixed 17-significant-digit floats and stable key order."""
    obj = _plain(obj)
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(x, (dict, list)) for x in obj):
            return "[" + ", ".join(dumps(x) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(x, indent + 1) for x in obj) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt_float(float(v)) if not isinstance(v, str) else v for v in row) + "\n")
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _scalar_rows(doc: dict, prefix: str = ""):
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _scalar_rows(v, key + ".")
        elif isinstance(v, (bool, int, float, str)):
            yield key, v


def _finish(args, doc: dict) -> int:
    doc = {
        "command": args.command,
        "version": __version__,
        "seed": args.seed,
        "params": _params(args),
        **doc,
    }
    if args.format == "csv":
        rows = [(k, v if isinstance(v, str) else _fmt_float(float(v)) if not isinstance(v, bool) else str(v).lower())
                for k, v in _scalar_rows(doc)]
        _emit(csv_text(["key", "value"], rows), args.out)
    else:
        _emit(dumps(doc) + "\n", args.out)
    return 0 if all(doc.get("checks", {}).values()) else 1


_GLOBAL_KEYS = {"command", "out", "seed", "format", "func"}


def _params(args) -> dict:
    return {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in _GLOBAL_KEYS and not k.startswith("_")
    }


# commands


def _normalized(state: PureState) -> bool:
    return state.is_normalized() if not state.is_zero() else True


def cmd_herald(args) -> int:
    if args.unbalanced:
        p = circuits.UnbalancedParams(args.theta, args.phi)
        ab = circuits.unbalanced_bell(p)
        target = circuits.unbalanced_closed_form(p)
    else:
        ab = bell_pair()
        target = max_entangled(3)
    record = circuits.herald_qutrit(ab, bell_pair())
    amps = (
        circuits.unbalanced_amplitudes(p)
        if args.unbalanced
        else QutritAmplitudes.from_array(np.diag(qutrit_matrix(record.state)))
    )
    doc = {
        "probability": record.probability,
        "fidelity_vs_psi3": fidelity(record.state, max_entangled(3)),
        "fidelity_vs_target": fidelity(record.state, target),
        "amplitudes": {
            "a0": amps.a0, "a1": amps.a1, "a2": amps.a2,
            "abs": [abs(amps.a0), abs(amps.a1), abs(amps.a2)],
        },
        "branch_amplitude": circuits.herald_branch_amplitude(ab, bell_pair()),
        "state": record.state,
        "checks": {
            "normalized": _normalized(record.state),
            "povm_complete": _povm_complete(ab),
        },
    }
    return _finish(args, doc)


def _povm_complete(ab: PureState) -> bool:
    """Null and click probabilities add to one on both heralding detectors."""
    s = apply_bs(apply_bs(tensor(ab, bell_pair()), 0, 2), 1, 3)
    ok = True
    for mode in (2, 3):
        null, click = det.threshold_null(s, mode), det.threshold_click(s, mode)
        ok &= abs(null.probability + click.probability - 1) < 1e-12
        if null.probability == 0:
            break
        s = null.state
    return ok


def cmd_fig2(args) -> int:
    if args.theta_steps < 2:
        raise SystemExit(_usage_error(args, "--theta-steps must be >= 2"))
    thetas = np.linspace(args.theta_min, args.theta_max, args.theta_steps)
    rows = []
    ok = True
    for th in thetas:
        a = circuits.unbalanced_amplitudes(circuits.UnbalancedParams(float(th), args.phi)).as_array()
        ok &= abs(np.sum(np.abs(a) ** 2) - 1) < 1e-12
        vals = a.real if np.all(np.abs(a.imag) < 1e-12) else np.abs(a)
        rows.append((float(th), *vals))
    if args.format == "json":
        doc = {
            "rows": [dict(zip(("theta", "a0", "a1", "a2"), r)) for r in rows],
            "checks": {"rows_normalized": bool(ok)},
        }
        return _finish(args, doc)
    _emit(csv_text(["theta", "a0", "a1", "a2"], rows), args.out)
    return 0 if ok else 1


def cmd_fig4(args) -> int:
    if args.steps < 2:
        raise SystemExit(_usage_error(args, "--steps must be >= 2"))
    res = cglmp.sweep_fig4((args.x_min, args.x_max), (args.y_min, args.y_max), args.steps)
    summary = {
        "command": "fig4",
        "version": __version__,
        "seed": args.seed,
        "params": _params(args),
        "max": res.max_value,
        "argmax": {"x": res.argmax[0], "y": res.argmax[1]},
        "rows": args.steps**2,
        "checks": {"finite": bool(np.all(np.isfinite(res.values)))},
    }
    if args.format == "json":
        summary["grid"] = [{"x": x, "y": y, "I3": v} for x, y, v in res.rows()]
        _emit(dumps(summary) + "\n", args.out)
    else:
        _emit(csv_text(["x", "y", "I3"], res.rows()), args.out)
        text = dumps(summary) + "\n"
        if args.out:
            Path(args.out).with_suffix(".summary.json").write_text(text, encoding="utf-8")
        else:
            sys.stderr.write(text)
    return 0 if all(summary["checks"].values()) else 1


def cmd_pdc(args) -> int:
    p = circuits.PdcParams(args.tau, args.d_max)
    rotated = circuits.pdc_rotated(p)
    n = circuits.pdc_norm(p)
    alphas = {str(d): circuits.pdc_alpha(d, p.tau) for d in range(1, p.d_max + 1)}
    doc = {
        "alpha": alphas,
        "N": n,
        "qutrit_weight": circuits.pdc_qutrit_prob(p),
        "qutrit_weight_closed_form": 3 * circuits.pdc_alpha(3, p.tau) ** 2 / n if p.d_max >= 3 else 0.0,
        "fidelity_vs_closed_form": fidelity(rotated, circuits.pdc_rotated_closed_form(p)),
        "state": rotated,
        "checks": {"normalized": rotated.is_normalized()},
    }
    return _finish(args, doc)


def cmd_nest(args) -> int:
    res = circuits.nest_qudit(args.d)
    doc = {
        "d": args.d,
        "step_probability": res.step_probabilities[-1],
        "step_probabilities": res.step_probabilities,
        "step_probability_closed_form": circuits.nest_step_probability(args.d),
        "cumulative_probability": res.cumulative_probability,
        "fidelity_vs_psi_d": fidelity(res.record.state, max_entangled(args.d)),
        "state": res.record.state,
        "checks": {"normalized": res.record.state.is_normalized()},
    }
    return _finish(args, doc)


def _teleport_input(args) -> QutritAmplitudes:
    spec = args.input
    if spec in ("0", "1", "2"):
        return QutritAmplitudes.from_array(np.eye(3)[int(spec)])
    if spec == "uniform":
        return QutritAmplitudes.from_array(np.ones(3) / math.sqrt(3))
    if spec == "random":
        rng = np.random.default_rng(args.seed)
        v = rng.normal(size=3) + 1j * rng.normal(size=3)
        return QutritAmplitudes.from_array(v / np.linalg.norm(v))
    raise SystemExit(_usage_error(args, f"unknown --input {spec!r}"))


def cmd_teleport(args) -> int:
    inp = _teleport_input(args)
    res = circuits.teleport(inp)
    doc = {
        "input": {"a0": inp.a0, "a1": inp.a1, "a2": inp.a2},
        "conclusive_probability": res.conclusive_probability,
        "branches": [
            {
                "pattern": {"B": list(b.pattern[0]), "C": list(b.pattern[1])},
                "probability": b.probability,
                "fidelity": b.fidelity,
            }
            for b in res.branches
        ],
        "checks": {"outcomes_complete": abs(res.total_probability - 1) < 1e-12},
    }
    return _finish(args, doc)


def cmd_hbpg(args) -> int:
    res = circuits.hbpg()
    doc = {
        "probability": res.probability,
        "branches": [
            {
                "pattern": {"A1": list(b.pattern[0]), "B1p": list(b.pattern[1])},
                "probability": b.probability,
                "bell_fidelity": b.bell_fidelity,
                "state": b.state,
            }
            for b in res.branches
        ],
        "checks": {"normalized": all(b.state.is_normalized() for b in res.branches)},
    }
    return _finish(args, doc)


def cmd_optimize(args) -> int:
    res = cglmp.optimize12(args.multistart, args.seed)
    doc = {
        "settings": res.quartet.to_dict(),
        "i3": res.i3,
        "evaluations": res.evaluations,
        "checks": {"finite": math.isfinite(res.i3)},
    }
    return _finish(args, doc)


# parser


def _usage_error(args, msg: str) -> int:
    args._parser.print_usage(sys.stderr)
    sys.stderr.write(f"error: {msg}\n")
    return 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"))

    parser = argparse.ArgumentParser(
        prog="qutrit-herald",
        description="Exact linear-optics simulation of heralded two-qutrit states and CGLMP tests.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, default_format="json"):
        p = sub.add_parser(name, help=help_, parents=[common])
        p.set_defaults(func=func, _format_default=default_format)
        return p

    p = add("herald", cmd_herald, "heralded two-qutrit state from two Bell pairs")
    p.add_argument("--unbalanced", action="store_true", help="use the unbalanced Bell pair on AB")
    p.add_argument("--theta", type=float, default=math.pi / 4, help="radians")
    p.add_argument("--phi", type=float, default=0.0, help="radians")

    p = add("fig2", cmd_fig2, "normalized amplitudes of the unbalanced family vs theta", "csv")
    p.add_argument("--phi", type=float, default=0.0, help="radians")
    p.add_argument("--theta-steps", type=int, default=181)
    p.add_argument("--theta-min", type=float, default=0.0)
    p.add_argument("--theta-max", type=float, default=math.pi)

    p = add("fig4", cmd_fig4, "I3 over the two-parameter restricted family", "csv")
    p.add_argument("--steps", type=int, default=400)
    p.add_argument("--x-min", type=float, default=0.0)
    p.add_argument("--x-max", type=float, default=math.pi)
    p.add_argument("--y-min", type=float, default=0.0)
    p.add_argument("--y-max", type=float, default=math.pi)

    p = add("pdc", cmd_pdc, "truncated PDC state and its qutrit weight")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--d-max", type=int, default=3)

    p = add("nest", cmd_nest, "heralded two-qudit state by nesting")
    p.add_argument("--d", type=int, default=4)

    p = add("teleport", cmd_teleport, "conclusive qutrit teleportation")
    p.add_argument("--input", default="0", help="0, 1, 2, uniform or random (uses --seed)")

    add("hbpg", cmd_hbpg, "heralded Bell-pair generator from four single photons")

    p = add("optimize", cmd_optimize, "12-parameter restricted CGLMP optimization")
    p.add_argument("--multistart", type=int, default=50)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._parser = parser
    if args.format is None:
        args.format = args._format_default
    del args._format_default
    try:
        return args.func(args)
    except ValueError as exc:
        return _usage_error(args, str(exc))


if __name__ == "__main__":
    sys.exit(main())
