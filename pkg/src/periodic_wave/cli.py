"""Command-line pipeline: ingest, eigensolve, spectrum, certify, solve, verify, report.

Every command reads one JSON config and writes its artifacts under
``out_dir``.  Exit codes: 0 success, 1 failed certification, 2 bad
configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .coefficient import make_coefficient, spectral_constants
from .errors import (
    CertificationFailure,
    ConfigError,
    InconclusiveGap,
    NonConvergence,
    NonPositivePotential,
    NumericError,
    PeriodicWaveError,
)
from .solver import (
    atomic_write,
    read_archive,
    read_summary,
    solution_sequence,
    verify_solution,
    write_archive,
)
from .space import WaveSpace
from .spectrum import admissible_mu, build_spectrum, certify_accumulation, make_period
from .sturm_liouville import boundary_transform, certify_asymptotics, eigensolve
from .variational import check_exponent, level_bounds

EXIT_OK, EXIT_CERT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("ingest-seismic", "eigs", "spectrum", "certify", "solve", "verify", "report")
VERIFY_TOL = 1e-7
VERIFY_TESTS = 100

DEFAULTS = {
    "boundary": {"a1": 1.0, "b1": 0.0, "a2": 1.0, "b2": 0.0},
    "period": {"a": 1, "b": 1},
    "mu": None,
    "p": None,
    "truncation": {"jmax": 16, "kmax": 16, "grid_n": 512, "time_n": None},
    "solver": {"tol": 1e-9, "max_iter": 400, "starts": 32, "seed": 0, "levels": [1, 2, 3, 4]},
    "out_dir": "out",
}


@dataclass
class RunConfig:
    coefficient: dict
    boundary: dict = field(default_factory=lambda: dict(DEFAULTS["boundary"]))
    period: dict = field(default_factory=lambda: dict(DEFAULTS["period"]))
    mu: float | None = None
    p: float | None = None
    truncation: dict = field(default_factory=lambda: dict(DEFAULTS["truncation"]))
    solver: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["solver"]))
    out_dir: str = "out"

    # parsing --------------------------------------------------------------
    @classmethod
    def from_dict(cls, raw) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - set(DEFAULTS) - {"coefficient"}
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "coefficient" not in raw or not isinstance(raw["coefficient"], dict):
            raise ConfigError("config needs a coefficient object")
        coef = dict(raw["coefficient"])
        model = coef.get("model")
        if model == "exponential":
            if "c" not in coef:
                raise ConfigError("exponential coefficient needs c")
            coef["c"] = _num(coef["c"], "coefficient.c")
        elif model in ("tabulated", "seismic"):
            if "file" not in coef:
                raise ConfigError(f"{model} coefficient needs a file")
        else:
            raise ConfigError(f"unknown coefficient model {model!r}")

        boundary = _section(raw, "boundary", float)
        period = _section(raw, "period", int)
        if period["a"] <= 0 or period["b"] <= 0:
            raise ConfigError("period a and b must be positive integers")
        trunc = _section(raw, "truncation", int)
        for k in ("jmax", "kmax", "grid_n"):
            if trunc[k] <= 0:
                raise ConfigError(f"truncation.{k} must be positive")
        if trunc["time_n"] is not None and trunc["time_n"] <= 0:
            raise ConfigError("truncation.time_n must be positive")
        solver = _section(raw, "solver", None)
        solver["tol"] = _num(solver["tol"], "solver.tol")
        for k in ("max_iter", "starts", "seed"):
            solver[k] = _int(solver[k], f"solver.{k}")
        if solver["tol"] <= 0 or solver["max_iter"] <= 0 or solver["starts"] <= 0:
            raise ConfigError("solver tol, max_iter and starts must be positive")
        levels = solver["levels"]
        if isinstance(levels, int):
            levels = list(range(1, levels + 1))
        solver["levels"] = [_int(v, "solver.levels") for v in levels]
        if any(v < 1 for v in solver["levels"]):
            raise ConfigError("levels start at 1")

        mu = raw.get("mu")
        mu = None if mu is None else _num(mu, "mu")
        p = raw.get("p")
        if p is not None:
            p = _num(p, "p")
            try:
                check_exponent(p)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        out_dir = raw.get("out_dir", DEFAULTS["out_dir"])
        if not isinstance(out_dir, str) or not out_dir:
            raise ConfigError("out_dir must be a non-empty string")
        return cls(coef, boundary, period, mu, p, trunc, solver, out_dir)

    @classmethod
    def from_json(cls, text) -> "RunConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(raw)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        cfg = cls.from_json(text)
        # relative data files resolve against the config's directory
        f = cfg.coefficient.get("file")
        if f and not os.path.isabs(f):
            cand = os.path.join(os.path.dirname(os.path.abspath(path)), f)
            if os.path.exists(cand):
                cfg.coefficient["file"] = cand
        return cfg

    def to_dict(self):
        return {
            "coefficient": dict(self.coefficient),
            "boundary": dict(self.boundary),
            "period": dict(self.period),
            "mu": self.mu,
            "p": self.p,
            "truncation": dict(self.truncation),
            "solver": copy.deepcopy(self.solver),
            "out_dir": self.out_dir,
        }

    def to_json(self):
        """Canonical form: sorted keys, two-space indent."""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    # requirements ----------------------------------------------------------
    def need_mu(self):
        if self.mu is None:
            raise ConfigError("this command needs mu")
        return self.mu

    def need_p(self):
        if self.p is None:
            raise ConfigError("this command needs p")
        return self.p


def _num(v, name):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{name} must be a finite number")
    return float(v)


def _int(v, name):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{name} must be an integer")
    return int(v)


def _section(raw, name, cast):
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"{name} must be an object")
    base = copy.deepcopy(DEFAULTS[name])
    unknown = set(sec) - set(base)
    if unknown:
        raise ConfigError(f"unknown {name} keys: {', '.join(sorted(unknown))}")
    base.update(sec)
    if cast is float:
        return {k: _num(v, f"{name}.{k}") for k, v in base.items()}
    if cast is int:
        return {k: (None if v is None else _int(v, f"{name}.{k}")) for k, v in base.items()}
    return base


# pipeline pieces -------------------------------------------------------------
class Pipeline:
    """Lazily built objects shared by the commands of one run."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self._cache = {}

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def coeff(self):
        return self._get("coeff", lambda: make_coefficient(self.cfg.coefficient))

    @property
    def bc(self):
        b = self.cfg.boundary
        return self._get("bc", lambda: boundary_transform(b["a1"], b["b1"], b["a2"], b["b2"],
                                                          self.coeff))

    @property
    def consts(self):
        return self._get("consts", lambda: spectral_constants(self.coeff, self.bc))

    @property
    def basis(self):
        t = self.cfg.truncation
        return self._get("basis", lambda: eigensolve(self.coeff, self.bc, t["kmax"], t["grid_n"]))

    @property
    def table(self):
        per = self.cfg.period
        return self._get("table", lambda: build_spectrum(
            self.basis, make_period(per["a"], per["b"]), self.cfg.need_mu(),
            self.cfg.truncation["jmax"], self.consts))

    @property
    def space(self):
        return self._get("space", lambda: WaveSpace(self.basis, self.table,
                                                    n_t=self.cfg.truncation["time_n"]))

    def path(self, *parts):
        return os.path.join(self.cfg.out_dir, *parts)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _compute_bounds(pl: Pipeline):
    p = pl.cfg.need_p()
    out = {}
    for l in pl.cfg.solver["levels"]:
        out[l] = level_bounds(l, pl.space, pl.table, p, pl.coeff.beta0,
                              seed=pl.cfg.solver["seed"])
    return out


# commands ---------------------------------------------------------------------
def cmd_ingest(pl: Pipeline, out):
    coeff = pl.coeff
    x = np.linspace(0.0, math.pi, 1025)
    atomic_write(pl.path("profile.csv"),
                 _csv_text(["x", "rho"], zip(map(float, x), map(float, coeff.rho(x)))))
    consts = spectral_constants(coeff)
    info = {"model": coeff.model, "beta0": coeff.beta0, "eta_inf": consts.eta_inf,
            "eta_mean2": consts.eta_mean2, "sqrt_shift": consts.sqrt_shift,
            "ratio": consts.ratio, "positive": consts.positive}
    for k in ("rescale", "travel_length", "depth"):
        if k in coeff.info:
            info[k] = coeff.info[k]
    atomic_write(pl.path("ingest.json"), _json_text(info))
    out(f"profile written: {pl.path('profile.csv')}")
    return EXIT_OK


def cmd_eigs(pl: Pipeline, out):
    b = pl.basis
    rows = [(int(k), float(l), float(t), float(e))
            for k, l, t, e in zip(b.labels, b.lam, b.theta, b.err)]
    atomic_write(pl.path("eigs.csv"), _csv_text(["k", "lambda", "theta", "err_estimate"], rows))
    vrows = [[float(xn)] + [float(v) for v in b.vectors[n]] for n, xn in enumerate(b.x)]
    atomic_write(pl.path("eigvecs.csv"),
                 _csv_text(["x"] + [f"z_{int(k)}" for k in b.labels], vrows))
    out(f"case {b.case}: {len(b.labels)} eigenvalues, max error estimate {np.max(b.err):.2e}")
    return EXIT_OK


def _spectrum_rows(t):
    return [(j, int(k), float(t.values[j, i]), int(t.resonant[j, i]), int(t.sign[j, i]))
            for j in range(t.j_max + 1) for i, k in enumerate(t.labels)]


def cmd_spectrum(pl: Pipeline, out):
    t = pl.table
    atomic_write(pl.path("spectrum.csv"),
                 _csv_text(["j", "k", "lambda_jk", "resonant", "sign_class"], _spectrum_rows(t)))
    atomic_write(pl.path("gap_certificate.json"), _json_text(t.certificate()))
    out(f"delta={t.delta:.12g} tail_floor={t.tail.floor:.6g} conclusive={t.tail.conclusive}")
    return EXIT_OK


def cmd_certify(pl: Pipeline, out):
    failures = []
    rep = certify_asymptotics(pl.basis, pl.consts)
    atomic_write(pl.path("asymptotics.csv"), _csv_text(
        ["k", "lambda", "theta", "lower", "upper", "pass"],
        [(r.k, r.lam, r.theta, r.lower, r.upper, int(r.passed)) for r in rep.records]))
    if not rep.verdict:
        bad = [r.k for r in rep.records if not r.passed]
        failures.append(f"asymptotics: theta window violated at k={bad[:5]}")

    t = pl.table
    try:
        acc = certify_accumulation(t)
        acc_rows, acc_ok = acc.rows, True
    except CertificationFailure as exc:
        acc_rows, acc_ok = [], False
        failures.append(f"accumulation: {exc}")
    atomic_write(pl.path("accumulation.csv"), _csv_text(
        ["j", "k", "value", "upper_with_slack", "excess", "pass"],
        [(j, k, v, u, e, int(ok)) for j, k, v, u, e, ok in acc_rows]))

    try:
        adm = admissible_mu(pl.consts, t)
        failures.extend(adm.reasons)
    except InconclusiveGap as exc:
        failures.append(f"inconclusive tail: {exc} (suggested truncation {exc.suggested})")
        adm = None

    cert = t.certificate()
    cert.update({
        "asymptotics_pass": rep.verdict,
        "accumulation_pass": acc_ok,
        "reasons": failures,
    })
    if adm is not None and adm.admissible and pl.cfg.p is not None:
        cert["levels"] = {str(l): b.as_dict() for l, b in _compute_bounds(pl).items()}
    atomic_write(pl.path("admissibility.json"), _json_text({
        "admissible": bool(adm and adm.admissible), "delta": t.delta,
        "tail_floor": t.tail.floor, "reasons": failures}))
    atomic_write(pl.path("certificate.json"), _json_text(cert))
    w = t.window
    out(f"delta={t.delta:.12g} window=[{w[0]:.4f}, {w[1]:.4f}]" if w else f"delta={t.delta:.12g}")
    if failures:
        for f in failures:
            out(f"FAILED {f}")
        return EXIT_CERT
    out("all certifications passed")
    return EXIT_OK


def _require_admissible(pl):
    adm = admissible_mu(pl.consts, pl.table)
    if not adm.admissible:
        raise CertificationFailure("; ".join(adm.reasons))


def cmd_solve(pl: Pipeline, out):
    cfg = pl.cfg
    p = cfg.need_p()
    _require_admissible(pl)
    bounds = _compute_bounds(pl)
    s = cfg.solver
    # Galerkin level: half the table truncation, so E^m sits well inside the space
    m = max(min(cfg.truncation["jmax"], cfg.truncation["kmax"]) // 2, 1)
    records, reports = solution_sequence(pl.space, p, s["levels"], m, bounds,
                                         starts=s["starts"], seed=s["seed"], tol=s["tol"],
                                         max_iter=s["max_iter"], log=out)
    write_archive(records, pl.path("solutions"))
    atomic_write(pl.path("levels.json"), _json_text({
        "m": m,
        "levels": [dict(r.__dict__) for r in reports],
        "bounds": {str(l): b.as_dict() for l, b in bounds.items()},
    }))
    out(f"{len(records)} distinct solutions archived in {pl.path('solutions')}")
    if not records:
        raise NonConvergence("no nonzero critical point found", None)
    return EXIT_OK


def cmd_verify(pl: Pipeline, out):
    p = pl.cfg.need_p()
    d = pl.path("solutions")
    if not os.path.isdir(d):
        raise ConfigError(f"no solution archive at {d}; run solve first")
    records = read_archive(d, pl.space)
    rows, failed = [], []
    for i, rec in enumerate(records):
        rep = verify_solution(rec, p, n_tests=VERIFY_TESTS, seed=pl.cfg.solver["seed"])
        ok = rep.max_residual <= VERIFY_TOL
        rows.append((i, rec.level, rep.max_residual, rep.identity_defect, rep.energy_balance,
                     int(ok)))
        if not ok:
            failed.append(i)
    atomic_write(pl.path("verify.csv"), _csv_text(
        ["index", "l", "max_residual", "identity_defect", "energy_balance", "pass"], rows))
    out(f"verified {len(records)} solutions, worst residual "
        f"{max((r[2] for r in rows), default=0.0):.3e}")
    if failed:
        out(f"FAILED weak-form residual above {VERIFY_TOL:g} for solutions {failed}")
        return EXIT_CERT
    return EXIT_OK


def cmd_report(pl: Pipeline, out):
    summ = pl.path("solutions", "summary.csv")
    if not os.path.exists(summ):
        raise ConfigError(f"missing {summ}; run solve first")
    rows = read_summary(summ)
    levels = {}
    lv_path = pl.path("levels.json")
    if os.path.exists(lv_path):
        with open(lv_path) as fh:
            levels = json.load(fh)
    p = pl.cfg.need_p()
    factor = 1.0 / (1.0 / (p + 1.0) - 0.5)
    bounds = levels.get("bounds", {})
    trend = []
    for l in sorted({int(r["l"]) for r in rows if r["l"] not in ("", "None")}):
        mine = [r for r in rows if r["l"] == str(l)]
        rho = bounds.get(str(l), {}).get("rho")
        trend.append((l, len(mine), max(float(r["phi"]) for r in mine),
                      min(float(r["mass"]) for r in mine),
                      float(rho) if rho is not None else float("nan"),
                      factor * float(rho) if rho is not None else float("nan")))
    atomic_write(pl.path("mass_trend.csv"), _csv_text(
        ["l", "count", "max_phi", "min_mass", "rho_l", "mass_bound"], trend))
    atomic_write(pl.path("solutions_by_phi.csv"), _csv_text(
        ["rank", "l", "phi", "mass", "residual"],
        [(i, r["l"], float(r["phi"]), float(r["mass"]), float(r["residual"]))
         for i, r in enumerate(rows)]))
    lines = [f"{len(rows)} archived solutions", "",
             f"{'l':>3} {'count':>5} {'max phi':>12} {'min mass':>12} {'rho_l':>12} {'mass bound':>12}"]
    for l, n, ph, ms, rho, mb in trend:
        lines.append(f"{l:>3} {n:>5} {ph:>12.6g} {ms:>12.6g} {rho:>12.6g} {mb:>12.6g}")
    vpath = pl.path("verify.csv")
    if os.path.exists(vpath):
        with open(vpath, newline="") as fh:
            vr = list(csv.DictReader(fh))
        worst = max((float(r["max_residual"]) for r in vr), default=0.0)
        lines += ["", f"weak-form check: {sum(r['pass'] == '1' for r in vr)}/{len(vr)} pass, "
                      f"worst residual {worst:.3e}"]
    text = "\n".join(lines) + "\n"
    atomic_write(pl.path("report.txt"), text)
    out(text.rstrip())
    return EXIT_OK


HANDLERS = {
    "ingest-seismic": cmd_ingest,
    "eigs": cmd_eigs,
    "spectrum": cmd_spectrum,
    "certify": cmd_certify,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "report": cmd_report,
}


def run(command: str, config: RunConfig, out=print, err=None) -> int:
    """Run one command; returns the exit status."""
    err = err or (lambda s: print(s, file=sys.stderr))
    if command not in HANDLERS:
        err(f"unknown command {command!r}")
        return EXIT_CONFIG
    try:
        os.makedirs(config.out_dir, exist_ok=True)
        return HANDLERS[command](Pipeline(config), out)
    except (CertificationFailure, InconclusiveGap, NonPositivePotential) as exc:
        err(f"certification failed: {exc}")
        return EXIT_CERT
    except (NumericError, NonConvergence, ArithmeticError, np.linalg.LinAlgError) as exc:
        err(f"numeric error: {exc}")
        return EXIT_NUMERIC
    except (ConfigError, PeriodicWaveError, ValueError, OSError) as exc:
        err(f"config error: {exc}")
        return EXIT_CONFIG


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="periodic-wave", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("config", help="JSON config file")
    parser.add_argument("--out-dir", help="override out_dir from the config")
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out_dir:
        cfg.out_dir = args.out_dir
    return run(args.command, cfg)


if __name__ == "__main__":
    sys.exit(main())
