"""Command-line front end: ``qes2d <command> [options]``.

Options may also come from a ``key = value`` config file (``--config``); flags
win over file values. Data goes to ``--output`` (or stdout when absent) as
JSON with sorted keys and 17 significant digits, or CSV for ``wavefn``.
Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O failure.
"""
import argparse
import json
import math
import sys

import numpy as np

from .errors import NumericalError, ParameterDomainError
from .potentials import ModelV1, ModelV2, Sign, degeneracy, energy_level
from .recurrence import (Basis, build_elliptic_recurrence, build_parabolic_recurrence, coefficient_vector,
                         refined_lambda, row_residuals, separation_eigenvalues, tail_asymptotics_probe)

COMMANDS = ("spectrum", "sepconst", "eigvec", "wavefn", "gram", "interbasis", "niven", "limits", "oracle",
            "asymptotics")
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _sign(token):
    try:
        return Sign.parse(token)
    except ParameterDomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _float_list(token):
    try:
        return [float(v) for v in str(token).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {token}") from exc


# key -> (type, default, help)
OPTIONS = {
    "model": (str, "v1", "v1 (singular anisotropic) or v2 (singular circular)"),
    "omega": (float, 1.0, "frequency"),
    "k1": (float, 0.0, "first coupling"),
    "k2": (float, 1.5, "second coupling"),
    "sign1": (_sign, Sign.PLUS, "branch of k1 (V2): + or -"),
    "sign2": (_sign, Sign.PLUS, "branch of k2: + or -"),
    "n": (int, 1, "energy level"),
    "d2": (float, None, "squared interfocal distance (elliptic basis)"),
    "q": (int, 0, "state index in ascending separation constant"),
    "q1": (int, None, "node count on the first axis"),
    "q2": (int, None, "node count on the second axis"),
    "basis": (str, None, "cartesian, polar, parabolic or elliptic"),
    "grid": (int, 41, "grid points per axis (wavefn)"),
    "extent": (float, 4.0, "grid extent of the unbounded native coordinates (wavefn)"),
    "normalize": (int, 1, "normalize the sampled state (1) or not (0)"),
    "method": (str, "projection", "projection or closed-sum (interbasis)"),
    "seeds": (str, "independent", "independent or from-recurrence (niven)"),
    "kind": (str, None, "limits: polar-d0 | cartesian-dinf; oracle: energy2d | lambda1d | sextic"),
    "d2_list": (_float_list, None, "comma-separated D^2 values (limits)"),
    "axis": (str, "real", "real or imaginary (oracle lambda1d)"),
    "count": (int, 6, "number of eigenvalues (oracle)"),
    "energy": (float, None, "off-spectrum energy (asymptotics)"),
    "smax": (int, 400, "largest s (asymptotics)"),
    "printed": (int, 0, "use the published elliptic diagonal instead of the re-derived one (sepconst)"),
    "tol": (float, 1e-10, "quadrature tolerance"),
    "format": (str, "json", "json or csv"),
    "output": (str, None, "output file (default stdout)"),
}


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise OSError(f"cannot read config file {path}: {exc}") from exc
    out = {}
    for i, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{i}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in OPTIONS and key != "command":
            raise UsageError(f"{path}:{i}: unknown key '{key}'; valid keys: {', '.join(sorted(OPTIONS))}")
        out[key] = value
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="qes2d", description="Spectra and eigenstates of the singular oscillators V1 and V2.")
    parser.add_argument("command", nargs="?", choices=COMMANDS)
    parser.add_argument("--config", help="key = value config file")
    for key, (typ, _, text) in OPTIONS.items():
        parser.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None, help=text)
    return parser


def parse(argv):
    """RunConfig as a dict: defaults, then config file, then flags."""
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = {key: default for key, (_, default, _) in OPTIONS.items()}
    command = args.command
    if args.config:
        for key, raw in read_config(args.config).items():
            if key == "command":
                command = command or raw
                continue
            try:
                cfg[key] = OPTIONS[key][0](raw)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config value for '{key}' is malformed: {raw}") from exc
    for key in OPTIONS:
        value = getattr(args, key)
        if value is not None:
            cfg[key] = value
    if command not in COMMANDS:
        raise UsageError(f"a command is required; choose from {', '.join(COMMANDS)}")
    cfg["command"] = command
    if cfg["model"] not in ("v1", "v2"):
        raise UsageError("model must be v1 or v2")
    if cfg["format"] not in ("json", "csv"):
        raise UsageError("format must be json or csv")
    return cfg


def make_model(cfg):
    if cfg["model"] == "v1":
        return ModelV1(cfg["omega"], cfg["k1"], cfg["k2"], cfg["sign2"])
    return ModelV2(cfg["omega"], cfg["k1"], cfg["k2"], cfg["sign1"], cfg["sign2"])


def dumps(obj):
    """Deterministic JSON: sorted keys, floats with 17 significant digits, non-finite as null."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{dumps(str(k))}: {dumps(v)}" for k, v in sorted(obj.items())) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj) + 0.0, ".17g") if math.isfinite(obj) else "null"
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _params(cfg, model):
    p = {"omega": model.omega, "k1": model.k1, "k2": model.k2, "sign2": str(model.sign2)}
    if isinstance(model, ModelV2):
        p["sign1"] = str(model.sign1)
    return p


def _require_d2(cfg):
    if cfg["d2"] is None:
        raise ParameterDomainError("the elliptic basis of V2 needs --d2")
    return cfg["d2"]


def _solutions(cfg, model):
    from .qes import solve_elliptic, solve_parabolic
    if isinstance(model, ModelV1):
        return solve_parabolic(model, cfg["n"])
    return solve_elliptic(model, cfg["n"], _require_d2(cfg))


def _recurrence(cfg, model):
    if isinstance(model, ModelV1):
        return build_parabolic_recurrence(model, cfg["n"])
    return build_elliptic_recurrence(model, cfg["n"], _require_d2(cfg), printed=bool(cfg["printed"]))


def cmd_spectrum(cfg, model):
    states = [{"q": s.q, "lambda": s.lam, "q1": s.node_split[0], "q2": s.node_split[1],
               "coefficients": s.coeffs, "zeros": s.zeros} for s in _solutions(cfg, model)]
    data = {"model": cfg["model"], "params": _params(cfg, model), "n": cfg["n"],
            "energy": energy_level(model, cfg["n"]), "degeneracy": degeneracy(cfg["n"]), "states": states}
    if isinstance(model, ModelV2):
        data["d2"] = cfg["d2"]
    summary = f"level n={cfg['n']}: E={data['energy']:.12g}, lambdas " + ", ".join(f"{s['lambda']:.10g}" for s in states)
    return data, summary


def cmd_sepconst(cfg, model):
    spec = separation_eigenvalues(_recurrence(cfg, model))
    data = {"model": cfg["model"], "params": _params(cfg, model), "n": cfg["n"], "lambdas": spec.lambdas,
            "max_imag_residual": spec.max_imag_residual, "d2": cfg["d2"], "printed": bool(cfg["printed"])}
    return data, "lambdas " + ", ".join(f"{v:.10g}" for v in spec.lambdas)


def cmd_eigvec(cfg, model):
    rec = _recurrence(cfg, model)
    lams = separation_eigenvalues(rec).lambdas
    q = cfg["q"]
    if not 0 <= q < len(lams):
        raise ParameterDomainError(f"q must lie in 0..{len(lams) - 1}")
    lam = refined_lambda(rec, lams[q])
    coeffs = coefficient_vector(rec, lam)
    res = row_residuals(rec, lam, coeffs)
    data = {"n": cfg["n"], "q": q, "lambda": lam, "coefficients": coeffs,
            "max_row_residual": float(np.max(np.abs(res)) / np.max(np.abs(coeffs)))}
    return data, f"q={q}: lambda={lam:.12g}, A=" + ", ".join(f"{c:.8g}" for c in coeffs)


def _native_ranges(basis, model, extent):
    half = math.pi / 2
    if basis == "cartesian":
        return ((-extent, extent) if isinstance(model, ModelV1) else (0.0, extent)), (0.0, extent)
    if basis == "polar":
        return (0.0, extent), (0.0, half)
    if basis == "parabolic":
        return (0.0, extent), (0.0, extent)
    return (0.0, extent), (0.0, half)


def _state(cfg, model):
    from .analysis.projections import normalize
    from .analysis.quadrature import QuadratureSpec
    from .qes import assemble_wavefunction_2d, cartesian_state, polar_state
    basis = cfg["basis"] or ("parabolic" if isinstance(model, ModelV1) else "elliptic")
    n = cfg["n"]
    if basis in ("cartesian", "polar"):
        a = cfg["q1"] if cfg["q1"] is not None else 0
        b = n - a
        if basis == "polar":
            if isinstance(model, ModelV1):
                raise ParameterDomainError("the polar basis belongs to V2")
            return polar_state(model, b, a)
        return cartesian_state(model, a, b)
    if basis not in ("parabolic", "elliptic"):
        raise ParameterDomainError(f"unknown basis '{basis}'")
    q1 = cfg["q1"] if cfg["q1"] is not None else 0
    q2 = cfg["q2"] if cfg["q2"] is not None else n - q1
    state = assemble_wavefunction_2d(model, basis, n, q1, q2, d2=cfg["d2"])
    if cfg["normalize"]:
        state = normalize(state, QuadratureSpec(target_tol=cfg["tol"]))
    return state


def cmd_wavefn(cfg, model):
    state = _state(cfg, model)
    (a, b), (c, d) = _native_ranges(state.basis.value, model, cfg["extent"])
    m = cfg["grid"]
    u1 = a + (np.arange(m) + 0.5) * (b - a) / m
    u2 = c + (np.arange(m) + 0.5) * (d - c) / m
    U1, U2 = np.meshgrid(u1, u2, indexing="ij")
    x, y, _ = state.to_cartesian(U1, U2)
    vals = state(U1, U2)
    rows = np.column_stack([U1.ravel(), U2.ravel(), np.ravel(x), np.ravel(y), np.ravel(vals)])
    data = {"basis": state.basis.value, "labels": list(state.labels), "energy": state.energy,
            "normalization": state.normalization, "columns": ["u1", "u2", "x", "y", "value"], "rows": rows}
    return data, f"{state.basis.value} state {state.labels}: {len(rows)} samples, E={state.energy:.12g}"


def _level_states(cfg, model, n):
    from .analysis.quadrature import QuadratureSpec
    from .qes import assemble_wavefunction_2d, cartesian_state, polar_state, solve_elliptic, solve_parabolic
    basis = cfg["basis"] or ("parabolic" if isinstance(model, ModelV1) else "elliptic")
    spec = QuadratureSpec(target_tol=cfg["tol"])
    if basis == "cartesian":
        return [cartesian_state(model, a, n - a) for a in range(n + 1)]
    if basis == "polar":
        return [polar_state(model, n - m, m) for m in range(n + 1)]
    sols = solve_parabolic(model, n) if basis == "parabolic" else solve_elliptic(model, n, _require_d2(cfg))
    return [assemble_wavefunction_2d(model, basis, n, *s.node_split, d2=cfg["d2"], normalize=True, spec=spec)
            for s in sols]


def cmd_gram(cfg, model):
    from .analysis.projections import gram_matrix
    from .analysis.quadrature import QuadratureSpec
    states = [s for k in range(cfg["n"] + 1) for s in _level_states(cfg, model, k)]
    g = gram_matrix(states, QuadratureSpec(target_tol=cfg["tol"]))
    defect = float(np.max(np.abs(g - np.eye(len(g)))))
    data = {"basis": states[0].basis.value, "labels": [list(s.labels) for s in states], "gram": g,
            "max_defect": defect}
    return data, f"{len(states)} states, max |G - I| = {defect:.3g}"


def cmd_interbasis(cfg, model):
    from .analysis.projections import interbasis_matrix
    from .analysis.quadrature import QuadratureSpec
    w = interbasis_matrix(model, cfg["n"], cfg["method"], QuadratureSpec(target_tol=cfg["tol"]))
    data = {"n": w.n, "method": w.method.value, "columns": [list(l) for l in w.labels], "W": w.entries,
            "orthonormality_defect": w.orthonormality_defect(), "report": w.report}
    return data, f"W ({w.method.value}) defect {w.orthonormality_defect():.3g}, report {w.report}"


def cmd_niven(cfg, model):
    from .niven import lambda_from_zeros, solve_zero_system
    if not isinstance(model, ModelV1):
        raise ParameterDomainError("the zero system is implemented for V1")
    cfgs = solve_zero_system(model, cfg["n"], cfg["seeds"])
    items = [{"zeros": c.zeros, "lambda": lambda_from_zeros(model, c), "residual": c.residual,
              "positive": c.n_positive} for c in cfgs]
    return {"n": cfg["n"], "configurations": items}, f"{len(items)} configurations, lambdas " + ", ".join(
        f"{i['lambda']:.10g}" for i in items)


def cmd_limits(cfg, model):
    from .qes import limit_check
    if not isinstance(model, ModelV2):
        raise ParameterDomainError("the elliptic limits belong to V2")
    kind = cfg["kind"] or "polar-d0"
    d2 = cfg["d2_list"] or ([1e-3, 2e-3, 4e-3] if kind == "polar-d0" else [100.0, 200.0, 400.0])
    rep = limit_check(model, cfg["n"], cfg["q"], kind, d2)
    data = {"kind": rep.kind.value, "n": rep.n, "q": rep.q, "d2": rep.d2, "lambdas": rep.lambdas, "fit": rep.fit,
            "predicted": rep.predicted, "error": rep.error, "converged": rep.converged}
    return data, f"{rep.kind.value}: error {rep.error:.3g}, converged {rep.converged}"


def cmd_oracle(cfg, model):
    from .analysis.oracles import OracleSpec, oracle_energy_2d, oracle_lambda_1d, oracle_sextic
    from .qes import sextic_qes_parameters
    kind = cfg["kind"] or "lambda1d"
    if kind == "energy2d":
        vals = oracle_energy_2d(model, count=cfg["count"])
        exact = [energy_level(model, k) for k in range(4) for _ in range(k + 1)][:cfg["count"]]
        data = {"kind": kind, "energies": vals, "closed_form": exact}
    elif kind == "sextic":
        if not isinstance(model, ModelV1):
            raise ParameterDomainError("the sextic correspondence uses V1")
        p = sextic_qes_parameters(model, cfg["n"])
        vals = oracle_sextic(p, OracleSpec(count=cfg["count"]))
        data = {"kind": kind, "beta": p.beta, "delta": p.delta, "mu2_coefficient": p.mu2_coefficient, "lambdas": vals}
    elif kind == "lambda1d":
        basis = "parabolic" if isinstance(model, ModelV1) else "elliptic"
        e = energy_level(model, cfg["n"])
        vals = oracle_lambda_1d(model, basis, e, cfg["axis"], OracleSpec(count=cfg["count"]), d2=cfg["d2"])
        data = {"kind": kind, "axis": cfg["axis"], "energy": e, "lambdas": vals}
    else:
        raise ParameterDomainError("oracle kind must be energy2d, lambda1d or sextic")
    key = "energies" if kind == "energy2d" else "lambdas"
    return data, f"{kind}: " + ", ".join(f"{v:.8g}" for v in data[key])


def cmd_asymptotics(cfg, model):
    basis = Basis.PARABOLIC if isinstance(model, ModelV1) else Basis.ELLIPTIC
    if cfg["energy"] is None:
        raise ParameterDomainError("asymptotics needs an off-spectrum --energy")
    d2 = cfg["d2"] if basis is Basis.ELLIPTIC else None
    if basis is Basis.ELLIPTIC:
        _require_d2(cfg)
    r = tail_asymptotics_probe(model, basis, cfg["energy"], cfg["smax"], d2=d2)
    s = np.arange(1, len(r))
    scaled = np.abs(r[1:]) * (np.sqrt(s) if basis is Basis.PARABOLIC else s)
    limit = math.sqrt(model.omega) if basis is Basis.PARABOLIC else d2 * model.omega / 4
    data = {"basis": basis.value, "energy": cfg["energy"], "ratios": r, "scaled_last": float(scaled[-1]),
            "predicted_limit": limit}
    return data, f"scaled ratio at s={len(r) - 1}: {scaled[-1]:.6g} (limit {limit:.6g})"


HANDLERS = {name: globals()["cmd_" + name] for name in COMMANDS}


def _csv(data):
    lines = [",".join(data["columns"])]
    lines += [",".join(format(float(v), ".17g") for v in row) for row in data["rows"]]
    return "\n".join(lines) + "\n"


def dispatch(cfg, stdout=None):
    stdout = stdout or sys.stdout
    model = make_model(cfg)
    data, summary = HANDLERS[cfg["command"]](cfg, model)
    if cfg["format"] == "csv":
        if "rows" not in data:
            raise UsageError("csv output is available for wavefn only")
        text = _csv(data)
    else:
        text = dumps(data) + "\n"
    if cfg["output"]:
        with open(cfg["output"], "w", encoding="utf-8") as fh:
            fh.write(text)
        stdout.write(summary + "\n")
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse(argv)
        return dispatch(cfg)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_USAGE if exc.code else EXIT_OK
    except (UsageError, ParameterDomainError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except OSError as exc:
        sys.stderr.write(f"I/O failure: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
