"""``dgldpc``: batch command-line front end.

Every command builds a report envelope ``{tool, version, command, config_hash,
parameters, results, timing}``.  JSON output is the envelope itself; CSV output
is a ``#``-prefixed provenance header followed by the command's table.  Errors
go to stderr as a JSON object and set the exit code: 0 success, 1 input error,
2 hypothesis or feasibility error, 3 capacity error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from . import __version__
from .asymptotics import (
    check_side_max_ratio,
    check_side_solution,
    coeff_growth_1d,
    coeff_growth_2d,
    finite_growth_1d,
    finite_growth_2d,
    small_xi_expansion_1d,
    solve_growth_general,
)
from .codes import LinearCode
from .ensemble import Ensemble, build_ensemble, design_rate, instance_dims
from .errors import (
    ConfigParseError,
    DGLDPCError,
    InputError,
    InvalidCodeError,
    TheoremHypothesisError,
)
from .oracle import BRUTE_FORCE_MAX_E, brute_force_spectrum, expected_spectrum, sample_spectrum
from .spectral import check_hypothesis, growth_rate_slope, p_inverse, spectral_params

TOOL = "dgldpc"
LOG_BASES = {"e": math.e, "2": 2.0}


# ---------------------------------------------------------------------------
# config parsing


def _field_error(path: str, message: str) -> ConfigParseError:
    err = ConfigParseError(f"{path}: {message}")
    err.field = path
    return err


def _parse_fraction(obj: Any, path: str) -> Fraction:
    if not isinstance(obj, dict) or set(obj) != {"num", "den"}:
        raise _field_error(path, 'expected an object {"num": int, "den": int}')
    num, den = obj["num"], obj["den"]
    for key, val in (("num", num), ("den", den)):
        if not isinstance(val, int) or isinstance(val, bool):
            raise _field_error(f"{path}.{key}", f"expected an integer, got {val!r}")
    if den <= 0:
        raise _field_error(f"{path}.den", "denominator must be positive")
    return Fraction(num, den)


def _parse_types(raw: Any, path: str, frac_key: str) -> list[tuple[LinearCode, Fraction]]:
    if not isinstance(raw, list) or not raw:
        raise _field_error(path, "expected a non-empty list")
    out = []
    for i, entry in enumerate(raw):
        here = f"{path}[{i}]"
        if not isinstance(entry, dict):
            raise _field_error(here, "expected an object")
        extra = set(entry) - {"generator", frac_key}
        if extra:
            raise _field_error(here, f"unknown keys {sorted(extra)}")
        gen = entry.get("generator")
        if not isinstance(gen, list) or not gen or not all(isinstance(r, str) for r in gen):
            raise _field_error(f"{here}.generator", "expected a non-empty list of bit-strings")
        try:
            code = LinearCode.from_bitstrings(gen)
        except InvalidCodeError as exc:
            raise _field_error(f"{here}.generator", str(exc)) from exc
        if frac_key not in entry:
            raise _field_error(here, f'missing "{frac_key}"')
        out.append((code, _parse_fraction(entry[frac_key], f"{here}.{frac_key}")))
    return out


def parse_config(text: str, source: str = "<config>") -> tuple[dict, Ensemble]:
    """Parse a JSON ensemble config; returns (raw object, ensemble)."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        err = ConfigParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}")
        err.line, err.column = exc.lineno, exc.colno
        raise err from exc
    if not isinstance(raw, dict):
        raise _field_error("<root>", "expected a JSON object")
    unknown = set(raw) - {"cn_types", "vn_types", "name"}
    if unknown:
        raise _field_error("<root>", f"unknown keys {sorted(unknown)}")
    cn = _parse_types(raw.get("cn_types"), "cn_types", "rho")
    vn = _parse_types(raw.get("vn_types"), "vn_types", "lambda")
    name = raw.get("name", "")
    if not isinstance(name, str):
        raise _field_error("name", "expected a string")
    return raw, build_ensemble(cn, vn, name=name)


def load_config(path: str) -> tuple[dict, Ensemble]:
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read config {path!r}: {exc.strerror}") from exc
    return parse_config(text, path)


def config_hash(obj: Any) -> str:
    canon = json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# value formatting


def frac_json(x: Fraction) -> dict:
    return {"num": x.numerator, "den": x.denominator, "decimal": _decimal(x)}


def _decimal(x: Fraction, digits: int = 17) -> str:
    return f"{float(x):.{digits}g}"


def _finite(x: float | None) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return float(x)


def _parse_number(text: str, what: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"{what}: cannot parse {text!r} as a number") from exc


def _parse_list(text: str | None, what: str) -> list[Fraction]:
    if text is None or not text.strip():
        return []
    return [_parse_number(tok, what) for tok in text.split(",")]


def _parse_int_list(text: str | None, what: str) -> list[int]:
    vals = _parse_list(text, what)
    if any(v.denominator != 1 or v < 1 for v in vals):
        raise InputError(f"{what}: expected positive integers")
    return [int(v) for v in vals]


def _parse_poly(text: str) -> list[int]:
    try:
        coeffs = [int(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise InputError(f"--poly: expected comma-separated integers, got {text!r}") from exc
    if not coeffs or coeffs[0] != 1 or any(c < 0 for c in coeffs):
        raise InputError("--poly: coefficients must be nonnegative with constant term 1")
    return coeffs


def _parse_bipoly(text: str) -> dict[tuple[int, int], int]:
    out: dict[tuple[int, int], int] = {}
    for tok in text.split(","):
        parts = tok.strip().split(":")
        try:
            i, j, c = (int(p) for p in parts)
        except ValueError as exc:
            raise InputError(f"--bipoly: expected terms i:j:c, got {tok!r}") from exc
        if i < 0 or j < 0 or c < 0:
            raise InputError(f"--bipoly: negative entry in {tok!r}")
        out[(i, j)] = out.get((i, j), 0) + c
    if out.get((0, 0)) != 1:
        raise InputError("--bipoly: the constant term 0:0 must be 1")
    return out


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    command: str
    config_hash: str
    parameters: dict
    summary: dict = field(default_factory=dict)
    columns: list[str] = field(default_factory=list)
    rows: list[list] = field(default_factory=list)
    seconds: float = 0.0

    def envelope(self) -> dict:
        results = dict(self.summary)
        if self.columns:
            results["table"] = [dict(zip(self.columns, r)) for r in self.rows]
        return {
            "tool": TOOL,
            "version": __version__,
            "command": self.command,
            "config_hash": self.config_hash,
            "parameters": self.parameters,
            "results": results,
            "timing": {"seconds": round(self.seconds, 6)},
        }


def render_json(report: Report) -> str:
    return json.dumps(report.envelope(), sort_keys=True, indent=2) + "\n"


def _csv_cell(val: Any) -> str:
    if val is None:
        return ""
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return repr(float(val))
    if isinstance(val, Fraction):
        return str(val)
    if isinstance(val, dict):
        if set(val) == {"num", "den", "decimal"}:
            return f"{val['num']}/{val['den']}"
        return ";".join(f"{k}:{_csv_cell(v)}" for k, v in val.items())
    if isinstance(val, (list, tuple)):
        return ";".join(_csv_cell(v) for v in val)
    return str(val)


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"# {TOOL} {report.command} version={__version__} config={report.config_hash}"])
    if not report.columns:
        # key/value reports become a two-column table
        writer.writerow(["field", "value"])
        for key in sorted(report.summary):
            writer.writerow([key, _csv_cell(report.summary[key])])
        return buf.getvalue()
    for key in sorted(report.summary):
        writer.writerow([f"# {key}={_csv_cell(report.summary[key])}"])
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def _reduction_targets(ens: Ensemble) -> dict:
    """lambda'(0), rho'(1) and the LDPC/GLDPC shape flags of an ensemble."""
    reps = all(t.k == 1 and t.code.rows == ((1 << t.q) - 1,) for t in ens.vn_types)
    spcs = all(t.h == t.s - 1 and t.r_t == 2 and t.enumerator[2] == t.s * (t.s - 1) // 2 for t in ens.cn_types)
    lam2 = sum((t.lam for t in ens.vn_types if t.q == 2 and t.k == 1), Fraction(0))
    rho1 = sum((t.rho * (t.s - 1) for t in ens.cn_types), Fraction(0))
    return {"all_repetition_vns": reps, "all_spc_cns": spcs, "lambda_prime_0": lam2, "rho_prime_1": rho1}


def cmd_analyze(args, ens: Ensemble, base: float) -> tuple[Report, int]:
    params = spectral_params(ens)
    summary: dict[str, Any] = {
        "name": ens.name,
        "r": params.r,
        "p": params.p,
        "X_c": list(params.X_c),
        "X_v": list(params.X_v),
        "C": frac_json(params.C),
        "C_t": {str(k): frac_json(v) for k, v in params.C_t.items()},
        "P_coeffs": None if params.P_coeffs is None else {str(i): frac_json(c) for i, c in params.P_coeffs.items()},
        "design_rate": frac_json(design_rate(ens)),
        "int_rho": frac_json(ens.int_rho),
        "int_lambda": frac_json(ens.int_lambda),
        "gamma": [frac_json(g) for g in ens.gamma],
        "delta": [frac_json(d) for d in ens.delta],
        "period": ens.period,
    }
    code = 0
    try:
        check_hypothesis(params)
        x = p_inverse(params, 1 / float(params.C))
        nats = math.log(1.0 / x)
        summary.update(
            stability_bound=x,
            slope=nats / math.log(base),
            slope_nats=nats,
            slope_bits=nats / math.log(2.0),
            error=None,
        )
    except TheoremHypothesisError as exc:
        summary.update(stability_bound=None, slope=None, slope_nats=None, slope_bits=None)
        summary["error"] = {"type": type(exc).__name__, "message": str(exc), "failing": list(exc.failing)}
        code = exc.exit_code
    return Report("analyze", "", {}, summary), code


def cmd_growth(args, ens: Ensemble, base: float) -> tuple[Report, int]:
    alphas = _parse_list(args.alpha_list, "--alpha-list")
    want_slope = args.method in ("slope", "both")
    want_general = args.method in ("general", "both")
    slope = None
    slope_note = None
    if want_slope:
        try:
            slope = growth_rate_slope(ens)
        except TheoremHypothesisError as exc:
            if args.method == "slope":
                raise
            slope_note = str(exc)
    lb = math.log(base)
    rows = []
    for a in alphas:
        g_slope = None if slope is None else float(a) * slope / lb
        g_gen, beta, gap, status = None, None, None, "ok"
        if want_general:
            try:
                sol = solve_growth_general(ens, a)
                g_gen, beta, gap = sol.value / lb, sol.beta, sol.dual_gap
            except DGLDPCError as exc:
                if exc.exit_code != 2:
                    raise
                status = "infeasible" if type(exc).__name__ == "InfeasibleRatioError" else "no-convergence"
        rows.append([str(a), float(a), g_slope, g_gen, beta, gap, status])
    summary = {"slope": None if slope is None else slope / lb, "slope_note": slope_note}
    cols = ["alpha", "alpha_decimal", "g_slope", "g_general", "beta", "dual_gap", "status"]
    return Report("growth", "", {"alpha_list": [str(a) for a in alphas], "method": args.method}, summary, cols, rows), 0


def _log_value(x, base: float) -> float | None:
    if x is None or x <= 0:
        return None
    if isinstance(x, Fraction):
        return (math.log(x.numerator) - math.log(x.denominator)) / math.log(base)
    return math.log(x) / math.log(base)


def _sample_report(args, ens: Ensemble, base: float, command: str) -> Report:
    rep = sample_spectrum(ens, args.n, args.trials, args.seed, args.wmax)
    rows = [[w, m, se, _finite(_log_value(m, base))] for w, m, se in zip(rep.weights, rep.values, rep.stderr)]
    params = {"n": args.n, "mode": "sample", "trials": args.trials, "seed": args.seed, "wmax": args.wmax}
    summary = {"method": rep.method, **rep.meta}
    return Report(command, "", params, summary, ["w", "mean", "stderr", "log_mean"], rows)


def cmd_spectrum(args, ens: Ensemble, base: float) -> tuple[Report, int]:
    if args.sample:
        return _sample_report(args, ens, base, "spectrum"), 0
    rep = expected_spectrum(ens, args.n, max_weight=args.wmax)
    rows = [[w, str(v), float(v), _finite(_log_value(v, base))] for w, v in zip(rep.weights, rep.values)]
    params = {"n": args.n, "mode": "exact", "wmax": args.wmax}
    summary = {"method": rep.method, **rep.meta}
    return Report("spectrum", "", params, summary, ["w", "value", "decimal", "log_value"], rows), 0


def cmd_sample(args, ens: Ensemble, base: float) -> tuple[Report, int]:
    return _sample_report(args, ens, base, "sample"), 0


def cmd_lemma(args, base: float) -> tuple[Report, int]:
    if (args.poly is None) == (args.bipoly is None):
        raise InputError("lemma needs exactly one of --poly or --bipoly")
    xi = _parse_number(args.xi, "--xi")
    ells = _parse_int_list(args.ell_list, "--ell-list")
    lb = math.log(base)
    params: dict[str, Any] = {"xi": str(xi), "ell_list": ells}
    summary: dict[str, Any] = {}
    if args.poly is not None:
        A = _parse_poly(args.poly)
        params["poly"] = A
        value, dist = coeff_growth_1d(A, xi)
        summary["argmax"] = {str(i): w for i, w in zip(dist.support, dist.weights)}
        c = next((i for i, a in enumerate(A) if i > 0 and a > 0), None)
        if c is not None:
            summary["expansion"] = small_xi_expansion_1d(A[c], c, xi) / lb
        finite: Callable[[int], float | None] = lambda ell: finite_growth_1d(A, xi, ell)
    else:
        if args.theta is None:
            raise InputError("--bipoly needs --theta")
        theta = _parse_number(args.theta, "--theta")
        B = _parse_bipoly(args.bipoly)
        params.update(bipoly=[[i, j, c] for (i, j), c in sorted(B.items())], theta=str(theta))
        value, dist = coeff_growth_2d(B, xi, theta)
        summary["argmax"] = {f"{i}:{j}": w for (i, j), w in dist.as_dict().items()}
        finite = lambda ell: finite_growth_2d(B, xi, theta, ell)
    summary["value"] = value / lb
    rows = []
    for ell in ells:
        f = finite(ell)
        if f is None:
            rows.append([ell, None, None, "no-coefficient"])
        else:
            rows.append([ell, f / lb, (value - f) / lb, "ok"])
    return Report("lemma", "", params, summary, ["ell", "finite", "gap", "status"], rows), 0


def _validate_checks(ens: Ensemble, n: int | None) -> list[tuple[str, bool, str]]:
    checks: list[tuple[str, bool, str]] = []
    n = ens.period if n is None else n
    dims = instance_dims(ens, n)
    vn_edges = sum(c * t.q for c, t in zip(dims.vn_counts, ens.vn_types))
    cn_edges = sum(c * t.s for c, t in zip(dims.cn_counts, ens.cn_types))
    checks.append(("edge-count consistency", vn_edges == cn_edges == dims.E, f"VN {vn_edges}, CN {cn_edges}, E {dims.E}"))
    checks.append(("gamma and delta sum to 1", sum(ens.gamma) == 1 and sum(ens.delta) == 1, "exact"))

    exact = expected_spectrum(ens, n)
    checks.append(("E[N_0] = 1", exact[0] == 1, f"E[N_0] = {exact[0]}"))
    if dims.E <= BRUTE_FORCE_MAX_E:
        brute = brute_force_spectrum(ens, n)
        same = brute.values == exact.values
        checks.append(("generating-function spectrum equals all-permutation average", same, f"n={n}, E={dims.E}"))
    else:
        checks.append(("generating-function spectrum equals all-permutation average", True, f"skipped: E={dims.E} > {BRUTE_FORCE_MAX_E}"))

    delta = check_side_max_ratio(ens) / 3
    try:
        sol = check_side_solution(ens, delta)
        ok = abs(sol.value - sol.value_by_types) <= 1e-9
        checks.append(("check-side routes agree", ok, f"|diff| = {abs(sol.value - sol.value_by_types):.3e}"))
    except DGLDPCError as exc:
        checks.append(("check-side routes agree", False, str(exc)))

    params = spectral_params(ens)
    red = _reduction_targets(ens)
    if params.r == 2 and params.p == 2 and red["all_repetition_vns"]:
        slope = growth_rate_slope(ens)
        if red["all_spc_cns"]:
            target = math.log(red["lambda_prime_0"] * red["rho_prime_1"])
            label = "slope = log lambda'(0) rho'(1)"
        else:
            target = math.log(red["lambda_prime_0"] * params.C)
            label = "slope = log lambda'(0) C"
        checks.append((label, abs(slope - target) <= 1e-10, f"|diff| = {abs(slope - target):.3e}"))

    try:
        sol = solve_growth_general(ens, Fraction(1, 100))
        checks.append(("growth-rate dual gap", sol.dual_gap <= 1e-9, f"alpha=1/100, gap = {sol.dual_gap:.3e}"))
    except DGLDPCError as exc:
        if exc.exit_code != 2:
            raise
        checks.append(("growth-rate dual gap", True, f"skipped: {exc}"))
    return checks


def cmd_validate(args, ens: Ensemble, base: float) -> tuple[Report, int]:
    checks = _validate_checks(ens, args.n)
    rows = [
        [name, "skipped" if detail.startswith("skipped") else ("pass" if ok else "fail"), detail]
        for name, ok, detail in checks
    ]
    failed = sum(not ok for _, ok, _ in checks)
    summary = {"checks": len(checks), "failed": failed}
    return Report("validate", "", {"n": args.n}, summary, ["check", "status", "detail"], rows), (1 if failed else 0)


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1), not argparse's default 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--log-base", choices=tuple(LOG_BASES), default="e")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")

    parser = _Parser(prog=TOOL, description="Weight-distribution analysis of D-GLDPC code ensembles.")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", parents=[common], help="spectral parameters, slope and design rate")
    p.add_argument("config")

    p = sub.add_parser("growth", parents=[common], help="growth-rate table over alpha")
    p.add_argument("config")
    p.add_argument("--alpha-list", default="", help="comma-separated, e.g. 0.001,1/6")
    p.add_argument("--method", choices=("slope", "general", "both"), default="both")

    p = sub.add_parser("spectrum", parents=[common], help="expected weight spectrum at length n")
    p.add_argument("config")
    p.add_argument("--n", type=int, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact generating-function spectrum (default)")
    mode.add_argument("--sample", action="store_true", help="Monte Carlo over sampled codes")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--wmax", type=int)

    p = sub.add_parser("sample", parents=[common], help="Monte Carlo spectrum of sampled codes")
    p.add_argument("config")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--wmax", type=int)

    p = sub.add_parser("lemma", parents=[common], aliases=["lemma1", "lemma2"], help="coefficient growth of a polynomial power")
    p.add_argument("--poly", help='univariate coefficients, e.g. "1,0,3"')
    p.add_argument("--bipoly", help='bivariate terms i:j:c, e.g. "0:0:1,1:2:2,2:2:1"')
    p.add_argument("--xi", required=True)
    p.add_argument("--theta")
    p.add_argument("--ell-list", default="")

    p = sub.add_parser("validate", parents=[common], help="run the cross-module checks on a config")
    p.add_argument("config")
    p.add_argument("--n", type=int, help="instance length (default: the ensemble period)")
    return parser


_COMMANDS = {
    "analyze": cmd_analyze,
    "growth": cmd_growth,
    "spectrum": cmd_spectrum,
    "sample": cmd_sample,
    "validate": cmd_validate,
}


def _error_payload(exc: DGLDPCError) -> dict:
    payload: dict[str, Any] = {"type": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
    for attr in ("field", "line", "column", "quantity", "suggested_n", "failing", "feasible_range", "diagnostics"):
        val = getattr(exc, attr, None)
        if val is not None:
            payload[attr] = list(val) if isinstance(val, tuple) else val
    return payload


def run(argv: Sequence[str] | None = None) -> tuple[int, str, str | None]:
    """Execute one command; returns (exit code, rendered report, output path)."""
    args = build_parser().parse_args(argv)
    base = LOG_BASES[args.log_base]
    start = time.perf_counter()
    if args.command in ("lemma", "lemma1", "lemma2"):
        report, code = cmd_lemma(args, base)
        report.config_hash = config_hash(report.parameters)
    else:
        raw, ens = load_config(args.config)
        report, code = _COMMANDS[args.command](args, ens, base)
        report.config_hash = config_hash(raw)
    report.parameters["log_base"] = args.log_base
    report.seconds = time.perf_counter() - start
    text = render_json(report) if args.format == "json" else render_csv(report)
    return code, text, args.out


def main(argv: Sequence[str] | None = None) -> int:
    try:
        code, text, out = run(argv)
    except DGLDPCError as exc:
        sys.stderr.write(json.dumps({"error": _error_payload(exc)}, sort_keys=True, default=str) + "\n")
        return exc.exit_code
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            sys.stderr.write(json.dumps({"error": {"type": "InputError", "message": str(exc), "exit_code": 1}}) + "\n")
            return 1
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
