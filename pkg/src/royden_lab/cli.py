"""Batch command line: ``royden-lab <command> --manifest path [--jobs N] [--out dir]``.

A manifest is a JSON object, or a list of objects for a sweep::

    {
      "name": "annulus",
      "domain": "annulus.json",          # path relative to the manifest, or inline
      "K": 16, "M": 128, "D": [4, 8, 12],
      "tolerance": 1e-8,                 # overrides ROYDEN_LAB_TOL for this entry
      "gauge": {"kind": "p", "p": 2},
      "corpus": ["w*(w-2)"],
      "output": "out"
    }

Each entry writes ``report.json`` plus CSV tables to ``<out>/<name>/``.
Failures produce ``error.json`` there and a JSON line on stderr.  Exit
status is 0 on success, 2 for configuration errors and 3 for numerical
ones; with several entries the largest status wins.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import default_nodes
from .corpus import _split, beurling_corpus, parse_tag
from .errors import ConfigError, ManifestError, RoydenLabError
from .galerkin import (
    build_space,
    cyclicity_distance,
    extract_inner_generator,
    generate_invariant_subspace,
    beurling_angle,
)
from .gauge import GaugeNormSpec, check_gauge_axioms, dual_norm_report, gauge_eval
from .geometry import CircularDomain, load_domain, sample_boundary, validate_domain
from .hardy import (
    ZeroFreeForm,
    affiliated_graph,
    equivalent_inner,
    inner_outer_factor,
    is_inner,
    is_outer,
    omega_density,
)
from .laplace import (
    evaluate_harmonic,
    harmonic_measure_density,
    harmonic_unit_basis,
    integrate_omega,
    period_matrix,
    q_functions,
)
from .report import write_csv, write_json
from .series import AnalyticRep

logger = logging.getLogger(__name__)

COMMANDS = ("measure", "factor", "beurling", "gauge", "affiliated")
RANGES = {"K": (1, 256), "M": (8, 8192), "D": (1, 128)}
CYCLIC_SPLIT = 0.1  # distance from 1 separating cyclic from non-cyclic verdicts
DEFAULT_GAUGE = {"kind": "max", "terms": [{"w": 1, "p": 1}, {"w": 0.5, "p": 2}]}


@dataclass(frozen=True)
class RunManifest:
    command: str
    name: str
    domain: dict | Path
    output: Path
    K: int | None = None
    M: int | None = None
    D: tuple[int, ...] = ()
    tolerance: float | None = None
    gauge: dict | None = None
    corpus: tuple[str, ...] = ()
    seed: int = 0
    fields: int = 8
    extract: bool = False
    extras: dict = field(default_factory=dict)


def _knob(raw: dict, key: str):
    if key not in raw or raw[key] is None:
        return None
    value = raw[key]
    lo, hi = RANGES[key]
    if isinstance(value, bool) or not isinstance(value, int) or not lo <= value <= hi:
        raise ManifestError(f"{key} must be an integer in [{lo}, {hi}], got {value!r}")
    return value


def parse_manifest(raw: dict, command: str, base: Path, out: Path | None, index: int | None) -> RunManifest:
    if not isinstance(raw, dict):
        raise ManifestError(f"manifest entry must be an object, got {type(raw).__name__}")
    if raw.get("command", command) != command:
        raise ManifestError(f"manifest is for {raw['command']!r}, invoked as {command!r}")
    if "domain" not in raw:
        raise ManifestError("manifest entry has no domain")
    dom = raw["domain"]
    if isinstance(dom, str):
        dom = (base / dom).resolve()
        if not dom.is_file():
            raise ManifestError(f"domain config {dom} does not exist")
    elif not isinstance(dom, dict):
        raise ManifestError("domain must be a path or an inline object")
    D = raw.get("D", ())
    D = (D,) if isinstance(D, int) else tuple(D)
    for d in D:
        _knob({"D": d}, "D")
    tol = raw.get("tolerance")
    if tol is not None and not (isinstance(tol, (int, float)) and 0 < tol < 1):
        raise ManifestError(f"tolerance must lie in (0, 1), got {tol!r}")
    corpus = raw.get("corpus", ())
    if isinstance(corpus, str) or not all(isinstance(t, str) for t in corpus):
        raise ManifestError("corpus must be a list of function tags")
    name = raw.get("name") or (command if index is None else f"{command}-{index:02d}")
    output = out or (base / raw.get("output", "royden-lab-out")).resolve()
    known = {"command", "name", "domain", "output", "K", "M", "D", "tolerance", "gauge", "corpus", "seed", "fields", "extract"}
    return RunManifest(
        command=command,
        name=str(name),
        domain=dom,
        output=Path(output),
        K=_knob(raw, "K"),
        M=_knob(raw, "M"),
        D=D,
        tolerance=tol,
        gauge=raw.get("gauge"),
        corpus=tuple(corpus),
        seed=int(raw.get("seed", 0)),
        fields=int(raw.get("fields", 8)),
        extract=bool(raw.get("extract", False)),
        extras={k: v for k, v in raw.items() if k not in known},
    )


def load_manifest(path, command: str, out=None) -> list[RunManifest]:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from None
    out = Path(out).resolve() if out else None
    if isinstance(raw, list):
        if not raw:
            raise ManifestError("manifest list is empty")
        entries = [parse_manifest(r, command, path.parent, out, i) for i, r in enumerate(raw)]
    else:
        entries = [parse_manifest(raw, command, path.parent, out, None)]
    names = [e.name for e in entries]
    if len(set(names)) != len(names):
        raise ManifestError(f"duplicate entry names in manifest: {names}")
    return entries


@contextlib.contextmanager
def _tolerance(tol: float | None):
    if tol is None:
        yield
        return
    old = os.environ.get("ROYDEN_LAB_TOL")
    os.environ["ROYDEN_LAB_TOL"] = repr(float(tol))
    try:
        yield
    finally:
        if old is None:
            os.environ.pop("ROYDEN_LAB_TOL", None)
        else:
            os.environ["ROYDEN_LAB_TOL"] = old


def _domain_record(d: CircularDomain) -> dict:
    return {
        "outer_center": d.outer_center,
        "outer_radius": d.outer_radius,
        "holes": [{"center": c, "radius": r} for c, r in d.holes],
        "base_point": d.base_point,
    }


def _function_record(f) -> dict:
    if isinstance(f, ZeroFreeForm):
        return {"form": "zero_free", "k": f.k, "anchors": f.anchors, "exponent": _function_record(f.exponent)}
    if isinstance(f, AnalyticRep):
        return {"form": "series", "K": f.K, **f.raw_coefficients()}
    return {"form": "callable"}


def _coefficient_rows(tag: str, part: str, f):
    if isinstance(f, ZeroFreeForm):
        yield from _coefficient_rows(tag, part + ".exponent", f.exponent)
        return
    raw = f.raw_coefficients()
    yield (tag, part, 0, 0, raw["constant"].real, raw["constant"].imag)
    for k, a in enumerate(raw["outer"], start=1):
        yield (tag, part, 0, k, a.real, a.imag)
    for j, row in enumerate(raw["holes"], start=1):
        for k, a in enumerate(row, start=1):
            yield (tag, part, j, -k, a.real, a.imag)


# ---------------------------------------------------------------- commands


def run_measure(m: RunManifest, domain: CircularDomain, out: Path) -> dict:
    K = m.K or 32
    M = m.M or max(128, default_nodes(K))
    s = sample_boundary(domain, M)
    density = harmonic_measure_density(domain, s, K)
    basis = harmonic_unit_basis(domain, K, s)
    P = period_matrix(domain, K, s, basis=basis)
    Q = q_functions(domain, s, K, density=density, basis=basis)
    n = domain.n
    write_csv(out / "period_matrix.csv", [f"k{k}" for k in range(1, n + 1)], P.p.tolist())
    rows = []
    for j in range(n + 1):
        for i in range(M):
            rows.append((j, i, s.angles[i], density.values[j, i], *[q.values[j, i] for q in Q]))
    write_csv(out / "boundary.csv", ["component", "node", "angle", "density", *[f"Q{j}" for j in range(1, n + 1)]], rows)
    return {
        "command": "measure",
        "domain": _domain_record(domain),
        "K": K,
        "M": M,
        "omega_masses": density.component_masses(),
        "total_mass": density.mass,
        "h_at_base_point": [float(evaluate_harmonic(h, domain.base_point)) for h in basis],
        "period_matrix": P.p,
        "period_matrix_asymmetry": P.asymmetry,
        "period_matrix_min_singular_value": P.min_singular_value,
        "Q_omega_integrals": [float(integrate_omega(q, density).real) for q in Q],
    }


def run_factor(m: RunManifest, domain: CircularDomain, out: Path) -> dict:
    K = m.K or 96
    tags = m.corpus or ("w*(w-2)",)
    density = omega_density(domain, m.M or 256)
    records, summary, coeffs = [], [], []
    for tag in tags:
        f = parse_tag(tag, domain, K)
        res = inner_outer_factor(f, domain, K, m.M)
        s = sample_boundary(domain, m.M or 256)
        jensen = is_outer(f, density)
        inner_check = is_inner(res.inner, s, tol=1e-8)
        records.append(
            {
                "tag": tag,
                "winding": res.winding,
                "zero_count": res.zero_count,
                "component_moduli": res.component_moduli,
                "unit": res.unit.a,
                "residual": res.residual,
                "inner_is_inner": bool(inner_check),
                "inner_modulus_deviation": inner_check.deviations,
                "is_outer": bool(jensen),
                "jensen_gap": jensen.gap,
                "inner": _function_record(res.inner),
                "outer": _function_record(res.outer),
            }
        )
        summary.append((tag, res.zero_count, res.residual, bool(jensen), jensen.gap, *res.component_moduli))
        coeffs += list(_coefficient_rows(tag, "inner", res.inner))
        coeffs += list(_coefficient_rows(tag, "outer", res.outer))
    moduli = [f"modulus{j}" for j in range(domain.n + 1)]
    write_csv(out / "factor_summary.csv", ["tag", "zero_count", "residual", "is_outer", "jensen_gap", *moduli], summary)
    write_csv(out / "coefficients.csv", ["tag", "factor", "component", "degree", "re", "im"], coeffs)
    return {"command": "factor", "domain": _domain_record(domain), "K": K, "functions": records}


def _beurling_entries(m: RunManifest):
    if not m.corpus:
        return beurling_corpus()
    entries = []
    for tag in m.corpus:
        parts = _split(tag.replace(" ", ""))
        entries.append((tag, parts[0], "*".join(parts[1:]) or "1"))
    return entries


def run_beurling(m: RunManifest, domain: CircularDomain, out: Path) -> dict:
    K = m.K or 24
    M = m.M or 256
    degrees = m.D or (4, 8, 12)
    density = omega_density(domain, M)
    space = build_space(domain, K, density)
    records, angle_rows, dist_rows = [], [], []
    for tag, inner_tag, _ in _beurling_entries(m):
        f = parse_tag(tag, domain)
        phi = parse_tag(inner_tag, domain)
        angles, dists = [], []
        for D in degrees:
            model = generate_invariant_subspace(f, space, D, tag)
            angles.append(beurling_angle(model, phi, space))
            dists.append(cyclicity_distance(f, space, D))
            angle_rows.append((tag, D, angles[-1]))
            dist_rows.append((tag, D, dists[-1]))
        outer = is_outer(f, density)
        cyclic = dists[-1] < CYCLIC_SPLIT
        rec = {
            "tag": tag,
            "inner": inner_tag,
            "D": list(degrees),
            "angles": angles,
            "cyclicity_distances": dists,
            "cyclic": cyclic,
            "is_outer": bool(outer),
            "verdicts_agree": cyclic == bool(outer),
        }
        if m.extract:
            ext = extract_inner_generator(model, space)
            rec["extraction"] = {
                "order": ext.order,
                "common_zeros": [[z, k] for z, k in ext.common_zeros],
                "equivalent_to_inner": bool(equivalent_inner(ext.phi, phi, domain)),
                "extremal_is_inner": bool(ext.extremal_inner),
            }
        records.append(rec)
    write_csv(out / "beurling_angles.csv", ["tag", "D", "angle"], angle_rows)
    write_csv(out / "cyclicity.csv", ["tag", "D", "distance"], dist_rows)
    return {
        "command": "beurling",
        "domain": _domain_record(domain),
        "K": K,
        "M": M,
        "gram_min_eigenvalue": space.gram_min_eigenvalue,
        "n_orthogonality": space.n_orthogonality,
        "members": records,
    }


def run_gauge(m: RunManifest, domain: CircularDomain, out: Path) -> dict:
    spec = GaugeNormSpec.from_config(m.gauge or DEFAULT_GAUGE)
    M = m.M or 128
    density = omega_density(domain, M)
    axioms = check_gauge_axioms(spec, density)
    rng = np.random.default_rng(m.seed)
    shape = density.sampling.shape
    duals, holder = [], []
    for i in range(m.fields):
        f = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        res = dual_norm_report(spec, f, density)
        duals.append((i, res.value, res.gap, res.iterations, res.closed_form))
        h = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        pairing = abs(np.sum(f * h * density.weights) / density.weights.sum())
        holder.append(pairing / (gauge_eval(spec, h, density) * res.value))
    write_csv(out / "continuity.csv", ["arc_mass", "alpha"], zip(axioms.arc_masses, axioms.continuity))
    write_csv(
        out / "dual_norms.csv",
        ["field", "value", "gap", "iterations", "closed_form"],
        [(i, v, g, it, "" if c is None else c) for i, v, g, it, c in duals],
    )
    return {
        "command": "gauge",
        "domain": _domain_record(domain),
        "M": M,
        "spec": spec.to_config(),
        "axioms": axioms,
        "dual_norms": [{"value": v, "gap": g, "iterations": it, "closed_form": c} for _, v, g, it, c in duals],
        "holder_max_ratio": max(holder) if holder else 0.0,
        "holder_violations": int(sum(r > 1 + 1e-9 for r in holder)),
    }


def run_affiliated(m: RunManifest, domain: CircularDomain, out: Path) -> dict:
    tags = m.corpus or ("w", "1", "w-2", "1")
    if len(tags) != 4:
        raise ManifestError("affiliated needs corpus [psi, eta, u, v]")
    K = m.K or 64
    psi, eta, u, v = (parse_tag(t, domain) for t in tags)
    G = affiliated_graph(psi, eta, u, v, domain, K)
    s = G.sampling
    total = np.abs(G.a(s.points)) + np.abs(G.b(s.points))
    rows = [(j, i, s.angles[i], total[j, i]) for j in range(domain.n + 1) for i in range(s.M)]
    write_csv(out / "ab_modulus.csv", ["component", "node", "angle", "abs_a_plus_abs_b"], rows)
    return {
        "command": "affiliated",
        "domain": _domain_record(domain),
        "K": K,
        "functions": dict(zip(("psi", "eta", "u", "v"), tags)),
        "c": G.c,
        "C": G.C,
        "bounds_hold": bool(0 < G.c <= G.C < np.inf),
        "component_constants": G.component_constants,
        "fit_residuals": list(G.fit_residuals),
    }


RUNNERS = {
    "measure": run_measure,
    "factor": run_factor,
    "beurling": run_beurling,
    "gauge": run_gauge,
    "affiliated": run_affiliated,
}


def run(m: RunManifest) -> dict:
    """Execute one manifest entry and write its artifacts."""
    out = m.output / m.name
    with _tolerance(m.tolerance):
        domain = load_domain(m.domain) if isinstance(m.domain, Path) else validate_domain(m.domain)
        result = RUNNERS[m.command](m, domain, out)
    write_json(result, out / "report.json")
    write_json({"version": __version__, "command": m.command, "name": m.name, "tolerance": m.tolerance}, out / "meta.json")
    return result


def error_record(exc: BaseException, command: str, name: str | None) -> dict:
    code = getattr(exc, "exit_code", 2 if isinstance(exc, ValueError) else 3)
    rec = {"error": type(exc).__name__, "exit_code": code, "message": str(exc), "command": command, "entry": name}
    report = getattr(exc, "report", None)
    if report is not None:
        rec["details"] = report
    return rec


def _guarded(m: RunManifest) -> tuple[int, dict | None]:
    try:
        run(m)
        return 0, None
    except (RoydenLabError, ValueError) as exc:
        rec = error_record(exc, m.command, m.name)
    except Exception as exc:  # noqa: BLE001 - surfaced as a typed record
        rec = error_record(exc, m.command, m.name)
        rec["exit_code"] = 3
    with contextlib.suppress(RoydenLabError):
        write_json(rec, m.output / m.name / "error.json")
    return rec["exit_code"], rec


def _emit(rec: dict) -> None:
    from .report import dumps

    print(dumps(rec, indent=0).replace("\n", ""), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="royden-lab", description="Hardy space experiments on circular domains")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--manifest", required=True, type=Path)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out", type=Path, default=None)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be positive, got {args.jobs}")
        entries = load_manifest(args.manifest, args.command, args.out)
    except (RoydenLabError, ValueError) as exc:
        _emit(error_record(exc, args.command, None))
        return getattr(exc, "exit_code", 2)

    if args.jobs > 1 and len(entries) > 1:
        with ProcessPoolExecutor(max_workers=min(args.jobs, len(entries))) as pool:
            outcomes = list(pool.map(_guarded, entries))
    else:
        outcomes = [_guarded(e) for e in entries]
    for code, rec in outcomes:
        if rec is not None:
            _emit(rec)
    return max(code for code, _ in outcomes)


if __name__ == "__main__":
    sys.exit(main())
