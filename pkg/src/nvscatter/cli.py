"""Command-line experiment runner.

Usage::

    nvscatter list
    nvscatter run CONFIG [--key value ...]
    nvscatter run --experiment kdv-check --kappa 1

``CONFIG`` is a flat ``key = value`` text file (``#`` starts a comment).
Every key is also a flag; flags override the file. Output goes to
``output_dir`` or, when unset, ``$NVSCATTER_OUTPUT_ROOT/<experiment>``
(default root ``runs``).

Exit codes: 0 all checks passed, 1 a verification check failed,
2 invalid input, 3 numerical failure.

Output files (all carry ``schema_version``; CSV files start with a
``# schema_version=1`` line followed by a header row):

* ``manifest.json``: config echo, version, backend, wall clock, checks
  (name, value, tolerance, passed), artifact list, numeric summaries.
* ``amplitude.csv``: ``theta_k,theta_l,re_f,im_f``.
* ``amplitude_pairs.csv``: ``theta_k,theta_l,re_f,im_f,re_f2,im_f2``.
* ``diagnostics.csv``: ``t,mean,l2,sup``.
* ``field_*.csv``: field snapshots ``x1,x2,v`` (row order: x1 slow, x2
  fast); the same format is read by ``family = custom-grid`` through
  ``custom_file``.
* ``residuals.csv``: ``c1,c2,residual``.
* XY series for plotting: ``forward_row.csv`` (``theta_l,abs_f``),
  ``profile.csv`` (``x,u,residual``), ``phi.csv`` (``theta,phi``).
"""

from __future__ import annotations

import argparse
import csv
import difflib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidInputError, NumericalError, NVScatterError
from .grid import make_grid

SCHEMA_VERSION = 1

EXPERIMENTS = {
    "scatter": "scattering amplitude f on the M x M torus grid (outgoing solution and its far field)",
    "verify-translation": "Lemma 1: translation law f_y(k,l) = f(k,l) exp(i y.(k-l))",
    "verify-evolution": "Lemma 2: NV time-evolution law of f at positive energy",
    "soliton-test": "Theorem 1 / Proposition 2: localized traveling waves are transparent, hence zero",
    "kdv-check": "1D reduction: KdV line solitons and the NV-to-KdV variable change",
    "torus-check": "torus coordinates of the energy shell, phase-law equivalences, linear independence",
}

# key -> (type, default)
KEYS = {
    "experiment": (str, None),
    "family": (str, "gaussian"),
    "amplitude": ("floats", (1e-3,)),
    "width": ("floats", (1.0,)),
    "center": ("points", ((0.0, 0.0),)),
    "kappa": (float, 1.0),
    "phi": (float, 0.0),
    "custom_file": (str, None),
    "E": (float, 1.0),
    "L": (float, None),
    "N": (int, None),
    "M": (int, 64),
    "T": (float, 0.05),
    "dt": (float, None),
    "c": ("floats", None),
    "c_angles": (int, 8),
    "c_speeds": ("floats", (0.5, 1.0, 2.0)),
    "y": ("floats", (1.0, 0.0)),
    "tol": (float, 1e-10),
    "tol_r": (float, 1e-8),
    "tol_f": (float, None),
    "tol_check": (float, None),
    "method": (str, "auto"),
    "samples": (int, 1000),
    "seed": (int, 0),
    "output_dir": (str, None),
}

DEFAULT_GRID = {
    "scatter": (20.0, 128),
    "verify-translation": (20.0, 128),
    "verify-evolution": (80.0, 256),
    "soliton-test": (20.0, 128),
    "kdv-check": (40.0, 1024),
    "torus-check": (20.0, 64),
}

DEFAULT_CHECK_TOL = {
    "scatter": 0.0,
    "verify-translation": 1e-3,
    "verify-evolution": 5e-2,
    "soliton-test": 0.0,
    "kdv-check": 1e-6,
    "torus-check": 1e-12,
}


def _parse_value(key, kind, raw):
    raw = str(raw).strip()
    try:
        if kind == "floats":
            return tuple(float(s) for s in raw.replace(";", ",").split(",") if s.strip())
        if kind == "points":
            pts = []
            for chunk in raw.split(";"):
                a, b = (float(s) for s in chunk.split(","))
                pts.append((a, b))
            return tuple(pts)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise InvalidInputError(f"cannot parse {key}={raw!r}: {exc}") from None


def _suggest(name, choices):
    close = difflib.get_close_matches(name, list(choices), n=1)
    return f" (did you mean {close[0]!r}?)" if close else ""


def read_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInputError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key] = value
    return out


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    @classmethod
    def from_raw(cls, raw: dict) -> "RunConfig":
        vals = {k: d for k, (_, d) in KEYS.items()}
        for key, value in raw.items():
            if value is None:
                continue
            if key not in KEYS:
                raise InvalidInputError(f"unknown config key {key!r}{_suggest(key, KEYS)}")
            vals[key] = _parse_value(key, KEYS[key][0], value)
        exp = vals["experiment"]
        if exp is None:
            raise InvalidInputError("no experiment given")
        if exp not in EXPERIMENTS:
            raise InvalidInputError(f"unknown experiment {exp!r}{_suggest(exp, EXPERIMENTS)}")
        L, N = DEFAULT_GRID[exp]
        vals["L"] = vals["L"] if vals["L"] is not None else L
        vals["N"] = vals["N"] if vals["N"] is not None else N
        if vals["tol_check"] is None:
            vals["tol_check"] = DEFAULT_CHECK_TOL[exp]
        if vals["tol_f"] is None:
            vals["tol_f"] = 10.0 * vals["tol"]
        cfg = cls(vals)
        cfg.validate()
        return cfg

    def __getitem__(self, key):
        return self.values[key]

    def validate(self):
        v = self.values
        if v["experiment"] == "kdv-check":
            # the KdV reduction is meaningful at E = 0 as well
            if not (math.isfinite(v["E"]) and v["E"] >= 0):
                raise InvalidInputError(f"E must be non-negative, got {v['E']}")
        elif not (math.isfinite(v["E"]) and v["E"] > 0):
            raise InvalidInputError(f"E must be positive, got {v['E']}")
        if not v["L"] > 0:
            raise InvalidInputError(f"L must be positive, got {v['L']}")
        if v["N"] < 8 or v["N"] % 2:
            raise InvalidInputError(f"N must be an even integer >= 8, got {v['N']}")
        if v["M"] < 16:
            raise InvalidInputError(f"M must be at least 16, got {v['M']}")
        if v["T"] < 0:
            raise InvalidInputError(f"T must be non-negative, got {v['T']}")
        if v["method"] not in ("auto", "dense", "fft"):
            raise InvalidInputError(f"method must be auto, dense or fft, got {v['method']!r}")
        for key in ("tol", "tol_r", "tol_f", "tol_check"):
            if v[key] < 0:
                raise InvalidInputError(f"{key} must be non-negative")
        if v["c"] is not None and len(v["c"]) != 2:
            raise InvalidInputError("c needs two components")
        if len(v["y"]) != 2:
            raise InvalidInputError("y needs two components")

    def echo(self) -> dict:
        return {k: (list(x) if isinstance(x, tuple) else x) for k, x in self.values.items()}


# --- file formats -----------------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x))


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def write_field_csv(path: Path, grid, values):
    x = grid.x
    rows = ((x[i], x[j], values[i, j]) for i in range(grid.N) for j in range(grid.N))
    write_csv(path, ["x1", "x2", "v"], rows)


def read_field_csv(path):
    """Read a ``x1,x2,v`` field file; returns ``(grid, values)``."""
    rows = []
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["x1", "x2", "v"]:
        raise InvalidInputError(f"{path}: expected header x1,x2,v")
    for row in reader:
        if row:
            rows.append([float(s) for s in row])
    data = np.array(rows)
    n = int(round(math.sqrt(len(data))))
    if n * n != len(data):
        raise InvalidInputError(f"{path}: {len(data)} rows is not a square grid")
    h = data[1, 1] - data[0, 1] if n > 1 else 0.0
    grid = make_grid(n * h, n)
    if not (np.allclose(data[:, 0], np.repeat(grid.x, n), atol=1e-9 * grid.L)
            and np.allclose(data[:, 1], np.tile(grid.x, n), atol=1e-9 * grid.L)):
        raise InvalidInputError(f"{path}: coordinates do not match a centred uniform grid")
    return grid, data[:, 2].reshape(n, n)


def write_amplitude_csv(path: Path, amp):
    rows = ((amp.theta[i], amp.theta_l[j], amp.samples[i, j].real, amp.samples[i, j].imag)
            for i in range(len(amp.theta)) for j in range(len(amp.theta_l)))
    write_csv(path, ["theta_k", "theta_l", "re_f", "im_f"], rows)


# --- experiments ------------------------------------------------------------


class Run:
    def __init__(self, cfg: RunConfig, out: Path):
        self.cfg, self.out = cfg, out
        self.checks: list[dict] = []
        self.artifacts: list[str] = []
        self.summary: dict = {}

    def check(self, name, value, tol, passed=None, relation="<="):
        value = float(value)
        if passed is None:
            passed = value <= tol if relation == "<=" else value > tol
        self.checks.append({"name": name, "value": value, "tolerance": float(tol), "relation": relation,
                            "passed": bool(passed)})

    def csv(self, name, header, rows):
        write_csv(self.out / name, header, rows)
        self.artifacts.append(name)

    def field(self, name, grid, values):
        write_field_csv(self.out / name, grid, values)
        self.artifacts.append(name)

    def amplitude(self, name, amp):
        write_amplitude_csv(self.out / name, amp)
        self.artifacts.append(name)

    def json(self, name, obj):
        with open(self.out / name, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.artifacts.append(name)


def build_spec(cfg: RunConfig):
    from .potentials import PotentialSpec

    fam = cfg["family"]
    if fam == "custom-grid":
        if not cfg["custom_file"]:
            raise InvalidInputError("custom-grid needs custom_file")
        grid, values = read_field_csv(cfg["custom_file"])
        return PotentialSpec(fam, values=values, grid=grid)
    amps, widths, centers = cfg["amplitude"], cfg["width"], cfg["center"]
    if fam == "multi-gaussian":
        n = len(amps)
        widths = widths * n if len(widths) == 1 else widths
        centers = centers * n if len(centers) == 1 else centers
    return PotentialSpec(fam, amps, widths, centers, kappa=cfg["kappa"], phi=cfg["phi"])


def _grid_for(cfg, spec):
    if spec.family == "custom-grid":
        return spec.grid
    return make_grid(cfg["L"], cfg["N"])


def _solver_kw(cfg):
    return {"tol": cfg["tol"], "method": cfg["method"]}


def exp_scatter(run: Run):
    from .potentials import sample_potential
    from .scattering import amplitude_norm, gaussian_born_amplitude, scattering_amplitude

    cfg = run.cfg
    spec = build_spec(cfg)
    grid = _grid_for(cfg, spec)
    V = sample_potential(spec, grid)
    amp = scattering_amplitude(V, cfg["E"], M=cfg["M"], **_solver_kw(cfg))
    run.amplitude("amplitude.csv", amp)
    run.csv("forward_row.csv", ["theta_l", "abs_f"], zip(amp.theta_l, np.abs(amp.samples[0])))
    run.summary.update(sup_f=amplitude_norm(amp), continuity_proxy=amp.continuity_proxy(),
                       decay_estimate=V.decay_exponent_estimate, super_exponential=V.super_exponential)
    if spec.family == "gaussian":
        fb = gaussian_born_amplitude(spec.amplitudes[0], spec.widths[0], cfg["E"], amp.theta, amp.theta_l,
                                     spec.centers[0])
        run.summary["born_relative_error"] = float(np.max(np.abs(amp.samples - fb)) / np.max(np.abs(fb)))
    run.check("amplitude_finite", 0.0 if np.all(np.isfinite(amp.samples)) else 1.0, cfg["tol_check"])


def exp_translation(run: Run):
    from .identities import translation_phase
    from .potentials import sample_potential, translate_spec
    from .scattering import scattering_amplitude

    cfg = run.cfg
    spec = build_spec(cfg)
    grid = _grid_for(cfg, spec)
    y = cfg["y"]
    E = cfg["E"]
    f0 = scattering_amplitude(sample_potential(spec, grid), E, M=cfg["M"], **_solver_kw(cfg))
    fy = scattering_amplitude(sample_potential(translate_spec(spec, y), grid), E, M=cfg["M"], **_solver_kw(cfg))
    s = math.sqrt(E)
    k = s * np.stack([np.cos(f0.theta), np.sin(f0.theta)], -1)
    phase = translation_phase(y, k[:, None, :], k[None, :, :])
    pred = f0.samples * phase
    err = float(np.max(np.abs(fy.samples - pred)) / max(np.max(np.abs(pred)), 1e-300))
    rows = ((f0.theta[i], f0.theta[j], f0.samples[i, j].real, f0.samples[i, j].imag,
             fy.samples[i, j].real, fy.samples[i, j].imag) for i in range(f0.M) for j in range(f0.M))
    run.csv("amplitude_pairs.csv", ["theta_k", "theta_l", "re_f", "im_f", "re_f2", "im_f2"], rows)
    run.summary.update(phase_law_relative_error=err, y=list(y))
    run.check("translation_phase_law", err, cfg["tol_check"])


def exp_evolution(run: Run):
    from .identities import evolution_phase_torus
    from .nv import constraint_residual, evolve, nv_rhs
    from .potentials import sample_potential
    from .scattering import scattering_amplitude

    cfg = run.cfg
    spec = build_spec(cfg)
    grid = _grid_for(cfg, spec)
    E, T = cfg["E"], cfg["T"]
    V = sample_potential(spec, grid)
    state = evolve(V, E, T, cfg["dt"])
    f0 = scattering_amplitude(V, E, M=cfg["M"], **_solver_kw(cfg))
    fT = scattering_amplitude(state.v, E, M=cfg["M"], **_solver_kw(cfg))
    lam = f0.lam
    pred = f0.samples * evolution_phase_torus(T, lam[:, None], lam[None, :], E)
    err = float(np.max(np.abs(fT.samples - pred)) / max(np.max(np.abs(pred)), 1e-300))
    run.csv("diagnostics.csv", ["t", "mean", "l2", "sup"], state.diagnostics)
    run.amplitude("amplitude.csv", f0)
    run.amplitude("amplitude_final.csv", fT)
    run.field("field_final.csv", grid, state.v.values)
    means = np.array([d[1] for d in state.diagnostics])
    drift = float(np.max(np.abs(means - means[0])) / max(abs(means[0]), 1e-300))
    cres = constraint_residual(state.v, state.w) / (1.0 + state.v.l2_norm())
    run.summary.update(phase_law_relative_error=err, mean_drift=drift, steps=len(state.diagnostics),
                       final_time=state.t, rhs_mean=float(np.mean(nv_rhs(state).values)))
    run.check("evolution_phase_law", err, cfg["tol_check"])
    run.check("mean_conservation", drift, 1e-10)
    run.check("constraint_residual", cres, 1e-10)


def _velocities(cfg):
    if cfg["c"] is not None:
        return [tuple(cfg["c"])]
    out = []
    for s in cfg["c_speeds"]:
        for j in range(cfg["c_angles"]):
            th = 2 * math.pi * j / cfg["c_angles"]
            out.append((s * math.cos(th), s * math.sin(th)))
    return out


def exp_soliton(run: Run):
    from .identities import traveling_wave_pipeline
    from .potentials import sample_potential
    from .scattering import scattering_amplitude

    cfg = run.cfg
    spec = build_spec(cfg)
    if spec.family == "kdv-line":
        raise InvalidInputError("soliton-test needs a localized family (kdv-line is excluded)")
    grid = _grid_for(cfg, spec)
    E = cfg["E"]
    V = sample_potential(spec, grid)
    amp = scattering_amplitude(V, E, M=cfg["M"], **_solver_kw(cfg))
    run.amplitude("amplitude.csv", amp)
    reports = [traveling_wave_pipeline(spec, c, E, grid=grid, tol_r=cfg["tol_r"], tol_f=cfg["tol_f"],
                                       amplitude=amp)
               for c in _velocities(cfg)]
    run.csv("residuals.csv", ["c1", "c2", "residual"], ((r.c[0], r.c[1], r.residual) for r in reports))
    run.json("report.json", {"schema_version": SCHEMA_VERSION, "reports": [r.to_dict() for r in reports]})
    trivial = all(r.conclusion == "trivial solution" for r in reports)
    n_forbidden = sum(r.forbidden for r in reports)
    run.summary.update(sup_f=reports[0].sup_f, residual_min=min(r.residual for r in reports),
                       decay_verified=V.decay_verified, conclusions=sorted({r.conclusion for r in reports}))
    run.check("no_forbidden_outcome", n_forbidden, cfg["tol_check"])
    if not trivial:
        run.check("residual_above_tol_r", min(r.residual for r in reports), cfg["tol_r"], relation=">")
        run.check("amplitude_inconsistent_with_traveling_wave",
                  sum(r.verdict.consistent_with_traveling_wave for r in reports), 0.0)


def exp_kdv(run: Run):
    from .nv import PeriodicLine, kdv_reduction_map_check, kdv_residual_soliton, kdv_soliton

    cfg = run.cfg
    line = PeriodicLine(cfg["L"], cfg["N"])
    kappa, phi = cfg["kappa"], cfg["phi"]
    res = kdv_residual_soliton(kappa, phi, line)
    u = kdv_soliton(kappa, phi, line.x)
    ux = line.deriv(u, 1)
    density = -4 * kappa**2 * ux - 6 * u * ux + line.deriv(u, 3)
    run.csv("profile.csv", ["x", "u", "residual"], zip(line.x, u, density))
    run.summary["soliton_residual"] = res
    run.check("kdv_soliton_residual", res, cfg["tol_check"])
    for E in sorted({0.0, cfg["E"]}):
        r = kdv_reduction_map_check(lambda xi, tau: kdv_soliton(kappa, phi, xi, tau), E, line)
        run.summary[f"reduction_residual_E{E:g}"] = r
        run.check(f"reduction_map_residual_E{E:g}", r, cfg["tol_check"])


def exp_torus(run: Run):
    from . import identities as idt

    cfg = run.cfg
    rng = np.random.default_rng(cfg["seed"])
    E = cfg["E"]
    n = cfg["samples"]
    tk, tl = rng.uniform(0, 2 * math.pi, n), rng.uniform(0, 2 * math.pi, n)
    s = math.sqrt(E)
    k = s * np.stack([np.cos(tk), np.sin(tk)], -1)
    l = s * np.stack([np.cos(tl), np.sin(tl)], -1)
    lam, lam_p = idt.torus_from_k(k, E), idt.torus_from_k(l, E)
    y = rng.normal(size=2)
    t = float(rng.normal())
    c = rng.normal(size=2)
    tol = cfg["tol_check"]
    e18 = np.max(np.abs(idt.translation_phase(y, k, l) - idt.translation_phase_torus(y, lam, lam_p, E)))
    e19 = np.max(np.abs(idt.evolution_phase(t, k, l) - idt.evolution_phase_torus(t, lam, lam_p, E)))
    rt = np.max(np.abs(idt.k_from_torus(lam, E) - k)) / s
    phi = idt._mismatch_complex(lam, lam_p, c, E)
    anti = np.max(np.abs(idt.traveling_phase_mismatch(lam, lam_p, c, E)
                         + idt.traveling_phase_mismatch(lam_p, lam, c, E)))
    scale = 1.0 + E**1.5
    gram = idt.gram_matrix(0.0, 2 * math.pi, 256)
    run.check("translation_torus_agreement", e18, tol)
    run.check("evolution_torus_agreement", e19, tol)
    run.check("torus_round_trip", rt, tol)
    run.check("phi_realness", np.max(np.abs(phi.imag)) / scale, tol)
    run.check("phi_antisymmetry", anti / scale, tol)
    run.check("full_circle_gram_orthogonality", np.max(np.abs(gram - np.eye(5))), tol)
    for length in (0.1, 0.5, math.pi):
        sv = idt.linear_independence_gram((0.0, length), 64)
        run.summary[f"gram_min_singular_arc_{length:.4g}"] = sv
        run.check(f"gram_positive_arc_{length:.4g}", sv, 0.0, relation=">")
    th = 2 * math.pi * np.arange(256) / 256
    run.csv("phi.csv", ["theta", "phi"],
            zip(th, idt.traveling_phase_mismatch(np.exp(1j * th), 1.0 + 0j, c, E)))


RUNNERS = {
    "scatter": exp_scatter,
    "verify-translation": exp_translation,
    "verify-evolution": exp_evolution,
    "soliton-test": exp_soliton,
    "kdv-check": exp_kdv,
    "torus-check": exp_torus,
}


def list_experiments() -> str:
    width = max(len(k) for k in EXPERIMENTS)
    return "\n".join(f"{name:<{width}}  {desc}" for name, desc in EXPERIMENTS.items())


def _manifest(run: Run | None, cfg, status, started, wall, error=None, raw=None):
    from .kernels import BACKEND

    return {
        "schema_version": SCHEMA_VERSION,
        "toolkit_version": __version__,
        "backend": BACKEND,
        "experiment": cfg.values["experiment"] if cfg else (raw or {}).get("experiment"),
        "config": cfg.echo() if cfg else {k: str(x) for k, x in (raw or {}).items() if x is not None},
        "started": started,
        "wall_clock_seconds": wall,
        "status": status,
        "error": error,
        "checks": run.checks if run else [],
        "artifacts": sorted(run.artifacts + ["manifest.json"]) if run else ["manifest.json"],
        "summary": run.summary if run else {},
    }


def _output_root() -> Path:
    return Path(os.environ.get("NVSCATTER_OUTPUT_ROOT", "runs"))


def _write_manifest(out: Path, manifest: dict):
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run(config: RunConfig | dict) -> int:
    """Execute one experiment and write its artifacts; returns the exit code."""
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    t0 = time.perf_counter()
    try:
        cfg = config if isinstance(config, RunConfig) else RunConfig.from_raw(config)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raw = dict(config)
        exp = raw.get("experiment")
        name = exp if exp in EXPERIMENTS else "invalid"
        out = Path(raw.get("output_dir") or _output_root() / name)
        out.mkdir(parents=True, exist_ok=True)
        _write_manifest(out, _manifest(None, None, "invalid-input", started, time.perf_counter() - t0,
                                       str(exc), raw))
        return 2
    exp = cfg["experiment"]
    out = Path(cfg["output_dir"] or _output_root() / exp)
    out.mkdir(parents=True, exist_ok=True)
    r = Run(cfg, out)
    code, status, error = 0, "passed", None
    try:
        RUNNERS[exp](r)
        if not all(c["passed"] for c in r.checks):
            code, status = 1, "failed"
            for c in r.checks:
                if not c["passed"]:
                    print(f"check failed: {c['name']} = {c['value']:.3e} (tolerance {c['tolerance']:.3e})",
                          file=sys.stderr)
    except InvalidInputError as exc:
        code, status, error = 2, "invalid-input", str(exc)
    except NumericalError as exc:
        code, status, error = 3, "numerical-failure", str(exc)
    except NVScatterError as exc:
        code, status, error = 3, "numerical-failure", str(exc)
    if error:
        print(f"error: {error}", file=sys.stderr)
    _write_manifest(out, _manifest(r, cfg, status, started, time.perf_counter() - t0, error))
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nvscatter", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list the available experiments")
    p = sub.add_parser("run", help="run one experiment")
    p.add_argument("config", nargs="?", help="flat key = value config file")
    for key in KEYS:
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        print(list_experiments())
        return 0
    raw = {}
    try:
        if args.config:
            raw.update(read_config(args.config))
    except (OSError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raw.update({k: getattr(args, k) for k in KEYS if getattr(args, k) is not None})
    return run(raw)


if __name__ == "__main__":
    sys.exit(main())
