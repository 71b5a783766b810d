"""Command-line front end.

Every subcommand reads an optional flat JSON config (``--config``), then
applies command-line flags on top. Config keys are the option names
below (parameter names follow the ReducedParams / PhysicalParams fields);
unknown keys are rejected. Rates and frequencies are in units of kappa_c
and ``--kappa-c`` rescales them, except for ``steady`` whose physical
inputs are taken as given.

Exit codes: 0 success, 2 invalid input, 3 infeasible constraints,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, replace
from typing import Any, Callable, Optional

import numpy as np

from .com_model import PhysicalParams, ReducedParams, reduce, rwa_validity, steady_state
from .ep_locator import Tolerances, ep3_criticals, lambda_ep3, line_family
from .errors import (
    BlueEPError,
    Ep3InfeasibleEtaError,
    InfeasibleError,
    InvalidInputError,
    NumericFailureError,
)
from .pseudo_hermitian import enforce_ph, enforce_ph_balanced
from .stability import stability_report
from .sweep import AxisSpec, BranchSet, broken_ph_sweep, eigen_sweep, phase_diagram

__all__ = ["main", "build_parser", "SWEEP_COLUMNS", "PHASE_COLUMNS", "CONTOUR_COLUMNS"]

SWEEP_COLUMNS = ["axis", "re_x1", "im_x1", "re_x2", "im_x2", "re_x3", "im_x3", "D", "A", "B", "class"]
PHASE_COLUMNS = ["p1", "p2", "D", "A", "B", "sign_D", "class"]
CONTOUR_COLUMNS = ["level_name", "segment_id", "p1", "p2"]
STABILITY_KEYS = ["c0", "c1", "c2", "c3", "c4", "c5", "rh_stable", "eigen_stable", "max_real_part"]

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4


class ConfigError(InvalidInputError):
    pass


@dataclass(frozen=True)
class Opt:
    dest: str
    flags: tuple[str, ...]
    type: Callable[[Any], Any]
    default: Any = None
    choices: Optional[tuple] = None
    help: str = ""


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return complex(v)


def _sign(v) -> int:
    s = int(v)
    if s not in (1, -1):
        raise ValueError("must be +1 or -1")
    return s


_COMMON = [
    Opt("kappa_c", ("--kappa-c",), float, 1.0, help="kappa_c; scales every rate and frequency"),
    Opt("omega_b", ("--omega-b",), float, 50.0, help="mechanical frequency in kappa_c units"),
    Opt("output", ("--output", "-o"), str, "-", help="output path, '-' for stdout"),
    Opt("format", ("--format",), str, "csv", ("csv", "json")),
]

_LINE = [
    Opt("mode", ("--mode",), str, "balanced", ("balanced", "unbalanced")),
    Opt("axis", ("--axis",), str, "G_a", ("G_a", "Delta_a")),
    Opt("lo", ("--from", "--ga-from", "--delta-from"), float, -6.0),
    Opt("hi", ("--to", "--ga-to", "--delta-to"), float, 6.0),
    Opt("n", ("--n",), int, 1024),
    Opt("eta", ("--eta",), float, None, help="unbalanced mode only"),
    Opt("lam", ("--lam",), float, None, help="G_c / G_a (unbalanced mode)"),
    Opt("lam_factor", ("--lam-factor",), float, None, help="lam as a multiple of lambda_EP3"),
    Opt("Delta_a", ("--delta-a",), float, None, help="fixed Delta_a for a G_a sweep (balanced)"),
    Opt("G_a", ("--ga",), float, None, help="fixed G_a for a Delta_a sweep (balanced)"),
    Opt("sign_of_Delta", ("--sign-of-delta",), _sign, 1),
    Opt("gap_threshold", ("--gap-threshold",), float, 1e-3),
    Opt("coalescences", ("--coalescences",), str, None, help="also write coalescences as JSON here"),
]

COMMANDS: dict[str, list[Opt]] = {
    "ep3": [
        Opt("eta", ("--eta",), float, None),
        Opt("kappa_c", ("--kappa-c",), float, 1.0),
        Opt("output", ("--output", "-o"), str, "-"),
        Opt("format", ("--format",), str, "json", ("csv", "json")),
    ],
    "sweep": _LINE + _COMMON,
    "broken": _LINE + [Opt("offset", ("--offset",), float, 0.1,
                           help="added to kappa_a + gamma_b + kappa_c, via gamma_b")] + _COMMON,
    "phase": [
        Opt("mode", ("--mode",), str, "balanced", ("balanced", "unbalanced")),
        Opt("eta", ("--eta",), float, None),
        Opt("x_lo", ("--x-from",), float, -6.0),
        Opt("x_hi", ("--x-to",), float, 6.0),
        Opt("nx", ("--nx",), int, 256),
        Opt("y_lo", ("--y-from",), float, None, help="default -20 (balanced) or -6"),
        Opt("y_hi", ("--y-to",), float, None, help="default 20 (balanced) or 6"),
        Opt("ny", ("--ny",), int, 256),
        Opt("Delta_a", ("--delta-a",), float, None, help="hold Delta_a fixed (unbalanced)"),
        Opt("sign_of_Delta", ("--sign-of-delta",), _sign, 1),
        Opt("contours", ("--contours",), str, None, help="contour CSV path"),
    ] + [o for o in _COMMON if o.dest != "omega_b"],
    "stability": [
        Opt("mode", ("--mode",), str, "explicit", ("explicit", "ph", "balanced")),
        Opt("eta", ("--eta",), float, None),
        Opt("lam", ("--lam",), float, None),
        Opt("lam_factor", ("--lam-factor",), float, None),
        Opt("Delta_a", ("--delta-a",), float, None),
        Opt("Delta_c", ("--delta-c",), float, None),
        Opt("G_a", ("--ga",), float, None),
        Opt("G_c", ("--gc",), float, None),
        Opt("gamma_b", ("--gamma-b",), float, None),
        Opt("sign_of_Delta", ("--sign-of-delta",), _sign, 1),
        Opt("offset", ("--offset",), float, 0.0),
    ] + _COMMON[:3] + [Opt("format", ("--format",), str, "json", ("csv", "json"))],
    "steady": [
        Opt("omega_a", ("--omega-a",), float, None),
        Opt("omega_c", ("--omega-c",), float, None),
        Opt("omega_b", ("--omega-b",), float, None),
        Opt("nu_a", ("--nu-a",), float, None),
        Opt("nu_c", ("--nu-c",), float, None),
        Opt("g_a", ("--g-a",), float, None),
        Opt("g_c", ("--g-c",), float, None),
        Opt("drive_a", ("--drive-a",), _complex, None),
        Opt("drive_c", ("--drive-c",), _complex, None),
        Opt("kappa_a", ("--kappa-a",), float, None),
        Opt("kappa_c", ("--kappa-c",), float, None),
        Opt("gamma_b", ("--gamma-b",), float, None),
        Opt("phase_convention", ("--phase-convention",), str, "modulus", ("modulus", "strict")),
        Opt("rwa_threshold", ("--rwa-threshold",), float, 0.1),
        Opt("output", ("--output", "-o"), str, "-"),
        Opt("format", ("--format",), str, "json", ("csv", "json")),
    ],
}

_TOL_KEYS = tuple(Tolerances.__dataclass_fields__)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blueep", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, opts in COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--dump-config", help="write the effective config as JSON here")
        if name != "ep3" and name != "steady":
            sp.add_argument("--tol", action="append", default=None, metavar="KEY=VALUE",
                            help=f"tolerance override, KEY in {', '.join(_TOL_KEYS)}")
        for o in opts:
            # defaults are applied after the config merge
            text = o.help
            if o.choices:
                text = f"{text}; " if text else ""
                text += "one of " + ", ".join(map(str, o.choices))
            if o.default is not None:
                text = f"{text} (default {o.default})" if text else f"default {o.default}"
            sp.add_argument(*o.flags, dest=o.dest, type=o.type, default=None,
                            help=text or None)
    return p


def _coerce(opt: Opt, value):
    if value is None:
        return None
    try:
        v = opt.type(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {opt.dest}: {value!r} ({exc})") from None
    if isinstance(v, float) and not math.isfinite(v):
        raise ConfigError(f"{opt.dest} must be finite")
    if opt.choices and v not in opt.choices:
        raise ConfigError(f"{opt.dest} must be one of {opt.choices}, got {v!r}")
    return v


def _parse_tol(items) -> dict:
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects KEY=VALUE, got {item!r}")
        out[key.strip()] = val
    return out


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    opts = {o.dest: o for o in COMMANDS[command]}
    allowed = set(opts) | ({"tolerances"} if command not in ("ep3", "steady") else set())
    cfg: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(raw) - allowed)
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")
        cfg.update(raw)
    for dest in opts:
        v = getattr(args, dest, None)
        if v is not None:
            cfg[dest] = v
    out = {dest: _coerce(o, cfg.get(dest)) for dest, o in opts.items()}
    for dest, o in opts.items():
        if out[dest] is None:
            out[dest] = o.default
    if "tolerances" in allowed:
        tol = dict(cfg.get("tolerances") or {})
        if not isinstance(tol, dict):
            raise ConfigError("tolerances must be an object")
        tol.update(_parse_tol(getattr(args, "tol", None) or []))
        bad = sorted(set(tol) - set(_TOL_KEYS))
        if bad:
            raise ConfigError(f"unknown tolerance keys: {', '.join(bad)}")
        try:
            out["tolerances"] = {k: float(tol[k]) for k in sorted(tol)}
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad tolerance value: {exc}") from None
    return out


def _jsonable(v):
    if isinstance(v, complex):
        return [_num(v.real), _num(v.imag)]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        return _num(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def _num(v) -> Optional[float]:
    v = float(v)
    if not math.isfinite(v):
        return None
    return v + 0.0  # folds -0.0


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v + 0.0)
    return str(v)


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def _csv_text(columns: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _write(path: Optional[str], text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _tolerances(cfg) -> Tolerances:
    return Tolerances(**cfg.get("tolerances", {}))


def _records(columns, rows) -> list[dict]:
    return [dict(zip(columns, (_jsonable(v) for v in row))) for row in rows]


def _emit_table(cfg, columns, rows, extra: Optional[dict] = None) -> None:
    if cfg["format"] == "csv":
        _write(cfg["output"], _csv_text(columns, rows))
    else:
        payload = {"columns": columns, "rows": _records(columns, rows)}
        payload.update(extra or {})
        _write(cfg["output"], _dumps(payload))


def _emit_record(cfg, record: dict) -> None:
    if cfg["format"] == "json":
        _write(cfg["output"], _dumps(record))
    else:
        flat = {}
        for k, v in record.items():
            if isinstance(v, complex):
                flat[f"re_{k}"], flat[f"im_{k}"] = v.real, v.imag
            elif isinstance(v, dict):
                flat.update({f"{k}.{kk}": vv for kk, vv in v.items()})
            else:
                flat[k] = v
        _write(cfg["output"], _csv_text(list(flat), [list(flat.values())]))


# -- commands -----------------------------------------------------------------


def cmd_ep3(cfg) -> None:
    eta = cfg["eta"]
    if eta is None:
        raise ConfigError("ep3 needs --eta")
    c = ep3_criticals(eta, cfg["kappa_c"])
    _emit_record(cfg, asdict(c))


def _resolve_lam(cfg, eta: float) -> float:
    if cfg["lam_factor"] is not None:
        if cfg["lam"] is not None:
            raise ConfigError("give lam or lam_factor, not both")
        return cfg["lam_factor"] * lambda_ep3(eta)
    if cfg["lam"] is None:
        raise ConfigError("unbalanced mode needs lam or lam_factor")
    return cfg["lam"]


def _line(cfg):
    """(family, lo, hi) for sweep and broken, in absolute units."""
    k = cfg["kappa_c"]
    if not k > 0:
        raise ConfigError("kappa_c must be positive")
    wb = cfg["omega_b"] * k
    axis = cfg["axis"]
    lo, hi = cfg["lo"] * k, cfg["hi"] * k
    if cfg["mode"] == "balanced":
        if cfg["eta"] not in (None, -1.0):
            raise ConfigError("balanced mode fixes eta = -1")
        if axis == "G_a":
            if cfg["Delta_a"] is None:
                raise ConfigError("a balanced G_a sweep needs --delta-a")
            fixed = enforce_ph_balanced(cfg["Delta_a"] * k, 0.0, k, wb)
        else:
            if cfg["G_a"] is None:
                raise ConfigError("a balanced Delta_a sweep needs --ga")
            fixed = enforce_ph_balanced(0.0, cfg["G_a"] * k, k, wb)
        return line_family(axis, fixed), lo, hi
    eta = cfg["eta"]
    if eta is None:
        raise ConfigError("unbalanced mode needs --eta")
    if axis != "G_a":
        raise ConfigError("unbalanced sweeps run along G_a (Delta_a follows from the constraints)")
    lam = _resolve_lam(cfg, eta)
    sign = cfg["sign_of_Delta"]
    enforce_ph(eta, lam, hi if abs(hi) >= abs(lo) else lo, k, sign, wb)  # fail early if hopeless
    return (lambda g: enforce_ph(eta, lam, g, k, sign, wb)), lo, hi


def _sweep_rows(bs: BranchSet):
    for k in range(len(bs.axis)):
        xs = bs.branches[k]
        row = [bs.axis[k]]
        for x in xs:
            row += [x.real, x.imag]
        row += [bs.D[k], bs.A[k], bs.B[k], bs.classes[k]]
        yield row


def _coalescence_records(bs: BranchSet) -> list[dict]:
    return [
        {"axis": c.axis, "re_x": c.x.real, "im_x": c.x.imag, "kind": c.kind, "gap": c.gap}
        for c in bs.coalescences
    ]


def _emit_sweep(cfg, bs: BranchSet) -> None:
    coal = _coalescence_records(bs)
    if bs.errors and len(bs.errors) == len(bs.axis):
        first = next(iter(bs.errors.values()))
        raise InfeasibleError(f"no feasible sweep point ({first})")
    _emit_table(cfg, SWEEP_COLUMNS, list(_sweep_rows(bs)), {"coalescences": coal})
    if cfg["coalescences"]:
        _write(cfg["coalescences"], _dumps(coal))


def cmd_sweep(cfg) -> None:
    family, lo, hi = _line(cfg)
    bs = eigen_sweep(family, lo, hi, cfg["n"], axis_name=cfg["axis"],
                     gap_threshold=cfg["gap_threshold"], tolerances=_tolerances(cfg))
    _emit_sweep(cfg, bs)


def cmd_broken(cfg) -> None:
    family, lo, hi = _line(cfg)
    bs = broken_ph_sweep(family, lo, hi, cfg["n"], cfg["offset"] * cfg["kappa_c"],
                         axis_name=cfg["axis"], gap_threshold=cfg["gap_threshold"],
                         tolerances=_tolerances(cfg))
    _emit_sweep(cfg, bs)


def cmd_phase(cfg) -> None:
    k = cfg["kappa_c"]
    if not k > 0:
        raise ConfigError("kappa_c must be positive")
    balanced = cfg["mode"] == "balanced"
    y_lo = cfg["y_lo"] if cfg["y_lo"] is not None else (-20.0 if balanced else -6.0)
    y_hi = cfg["y_hi"] if cfg["y_hi"] is not None else (20.0 if balanced else 6.0)
    ax1 = AxisSpec("G_a", cfg["x_lo"] * k, cfg["x_hi"] * k, cfg["nx"])
    ax2 = AxisSpec("Delta_a" if balanced else "G_c", y_lo * k, y_hi * k, cfg["ny"])
    if balanced:
        if cfg["eta"] not in (None, -1.0):
            raise ConfigError("balanced mode fixes eta = -1")
        eta = -1.0
    else:
        if cfg["eta"] is None:
            raise ConfigError("unbalanced mode needs --eta")
        eta = cfg["eta"]
    delta = cfg["Delta_a"] * k if cfg["Delta_a"] is not None else None
    pd = phase_diagram(cfg["mode"], ax1, ax2, eta=eta, kappa_c=k,
                       sign_of_Delta=cfg["sign_of_Delta"], Delta_a=delta,
                       tolerances=_tolerances(cfg))
    x, y = ax1.values(), ax2.values()
    sign = pd.sign_D
    rows = [
        [x[i], y[j], pd.D[i, j], pd.A[i, j], pd.B[i, j],
         int(sign[i, j]) if np.isfinite(sign[i, j]) else math.nan, pd.classes[i, j]]
        for i in range(len(x)) for j in range(len(y))
    ]
    crows = []
    for name in ("D", "A", "B"):
        for sid, line in enumerate(pd.contours[name]):
            crows += [[name, sid, float(px), float(py)] for px, py in line]
    for sid, (px, py) in enumerate(pd.ep3_points):
        crows.append(["EP3", sid, px, py])
    extra = {"contours": _records(CONTOUR_COLUMNS, crows)}
    _emit_table(cfg, PHASE_COLUMNS, rows, extra)
    target = cfg["contours"]
    if target is None and cfg["output"] not in (None, "-") and cfg["format"] == "csv":
        stem = cfg["output"][:-4] if cfg["output"].endswith(".csv") else cfg["output"]
        target = stem + "_contours.csv"
    if target is not None:
        _write(target, _csv_text(CONTOUR_COLUMNS, crows))


def _stability_params(cfg) -> ReducedParams:
    k = cfg["kappa_c"]
    if not k > 0:
        raise ConfigError("kappa_c must be positive")
    wb = cfg["omega_b"] * k
    mode = cfg["mode"]

    def need(*names):
        missing = [n for n in names if cfg[n] is None]
        if missing:
            raise ConfigError(f"stability mode {mode} needs {', '.join(missing)}")

    if mode == "balanced":
        need("Delta_a", "G_a")
        r = enforce_ph_balanced(cfg["Delta_a"] * k, cfg["G_a"] * k, k, wb)
    elif mode == "ph":
        need("eta", "G_a")
        r = enforce_ph(cfg["eta"], _resolve_lam(cfg, cfg["eta"]), cfg["G_a"] * k, k,
                       cfg["sign_of_Delta"], wb)
    else:
        need("eta", "Delta_a", "Delta_c", "G_a", "G_c", "gamma_b")
        G_a, G_c = cfg["G_a"] * k, cfg["G_c"] * k
        r = ReducedParams(
            eta=cfg["eta"],
            lam=G_c / G_a if G_a != 0 else 0.0,
            Delta_a=cfg["Delta_a"] * k,
            Delta_c=cfg["Delta_c"] * k,
            G_a=G_a,
            G_c=G_c,
            kappa_c=k,
            gamma_b=cfg["gamma_b"] * k,
            omega_b=wb,
        )
    if cfg["offset"]:
        r = replace(r, gamma_b=r.gamma_b + cfg["offset"] * k)
    return r


def cmd_stability(cfg) -> None:
    rep = stability_report(_stability_params(cfg))
    rec = {f"c{i}": float(rep.char_coeffs[i]) for i in range(6)}
    rec.update(rh_stable=rep.rh_stable, eigen_stable=rep.eigen_stable,
               max_real_part=rep.max_real_part)
    _emit_record(cfg, rec)


def cmd_steady(cfg) -> None:
    fields = list(PhysicalParams.__dataclass_fields__)
    missing = [f for f in fields if cfg[f] is None]
    if missing:
        raise ConfigError(f"steady needs {', '.join(missing)}")
    p = PhysicalParams(**{f: cfg[f] for f in fields})
    s = steady_state(p)
    r = reduce(p, s, cfg["phase_convention"])
    rwa = rwa_validity(r, cfg["rwa_threshold"])
    rec = {
        "a_s": s.a_s, "b_s": s.b_s, "c_s": s.c_s,
        "delta_a_eff": s.delta_a_eff, "delta_c_eff": s.delta_c_eff,
        "G_a": s.G_a, "G_c": s.G_c,
        "residual": s.residual, "iterations": s.iterations,
        "reduced": asdict(r),
        "rwa": asdict(rwa),
    }
    _emit_record(cfg, rec)


_HANDLERS = {
    "ep3": cmd_ep3,
    "sweep": cmd_sweep,
    "broken": cmd_broken,
    "phase": cmd_phase,
    "stability": cmd_stability,
    "steady": cmd_steady,
}


def _dump(cfg: dict, path: str) -> None:
    _write(path, _dumps(dict(sorted(cfg.items()))))


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        cfg = resolve_config(command, args)
        if args.dump_config:
            _dump(cfg, args.dump_config)
        _HANDLERS[command](cfg)
    except Ep3InfeasibleEtaError as exc:
        # an out-of-range eta is an input error for ep3, a constraint failure elsewhere
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID if command == "ep3" else EXIT_INFEASIBLE
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (BlueEPError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
