"""``potlab analyze <model.json>``: run every analysis and emit a report.

Exit status: 0 when every harness is consistent, 2 when one disagrees,
1 on input errors.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import resolvent as rc
from .classification import (absorbing_report, absorbing_sets, invariant_function_test,
                             invariant_partition, is_m_irreducible, is_m_recurrent, is_m_transient)
from .dirichlet import build_form, form_equivalence_report, zero_energy_space
from .ergodic import ergodic_projection, generator_kernels, harmonic_basis
from .errors import DimensionMismatch, InputError, ParseError, SchemaError
from .invariant_measures import extremality_report, gm_set, invariant_probabilities
from .oracles import absorbing_bruteforce_oracle, potential_series_oracle, reduced_lp_oracle
from .potential import class_decomposition, potential_kernel, reduced_function
from .process import modification_equivalence_report, strict_classify

SECTIONS = ("classify", "potential", "ergodic", "invariant", "dirichlet")
DEFAULT_ALPHAS = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class ModelFile:
    version: str
    states: tuple
    generator: tuple
    measure: tuple
    options: dict = field(default_factory=dict)


def _number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def parse_model(text, source="<string>"):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise SchemaError("<root>", "expected a JSON object")
    if raw.get("version") != "1":
        raise SchemaError("version", f'expected "1", got {raw.get("version")!r}')
    states = raw.get("states")
    if not isinstance(states, list) or not states or not all(isinstance(s, str) for s in states):
        raise SchemaError("states", "expected a nonempty list of strings")
    gen = raw.get("generator")
    if not isinstance(gen, list) or not all(isinstance(r, list) for r in gen):
        raise SchemaError("generator", "expected a list of rows")
    for i, row in enumerate(gen):
        if not all(_number(x) for x in row):
            raise SchemaError("generator", f"row {i} has a non-numeric entry")
    meas = raw.get("measure")
    if not isinstance(meas, list) or not all(_number(x) for x in meas):
        raise SchemaError("measure", "expected a list of numbers")
    for i, x in enumerate(meas):
        if x < 0:
            raise SchemaError("measure", f"negative entry at index {i}")
    n = len(states)
    if len(gen) != n or any(len(r) != n for r in gen):
        raise DimensionMismatch(f"generator must be {n}x{n} to match states")
    if len(meas) != n:
        raise DimensionMismatch(f"measure has length {len(meas)}, expected {n}")
    opts = raw.get("options", {})
    if not isinstance(opts, dict):
        raise SchemaError("options", "expected an object")
    return ModelFile(version="1", states=tuple(states), generator=tuple(tuple(r) for r in gen),
                     measure=tuple(meas), options=opts)


def parse_model_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_model(text, str(path))


# ---------------------------------------------------------------- report assembly

def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (frozenset, set)):
        return sorted(_clean(v) for v in x)
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        x = float(f"{x:.12g}")
        return 0.0 if x == 0 else x
    if x is None or isinstance(x, str):
        return x
    return str(x)


def _verdict(value, conditions):
    return {"value": None if value is None else bool(value), "conditions": list(conditions)}


def _harness(rep):
    return {
        "theorem": rep.theorem,
        "verdicts": {k: _verdict(v, [k]) for k, v in rep.verdicts.items()},
        "verdict": _verdict(rep.verdict, rep.verdicts),
        "consistent": rep.consistent,
        "violations": list(rep.violations),
        "notes": list(rep.notes),
    }


class _Harnesses:
    """Collects harness outcomes; a numeric exception inside a harness counts as a disagreement."""

    def __init__(self):
        self.items = {}

    def run(self, name, fn):
        try:
            rep = fn()
        except InputError:
            raise
        except Exception as exc:  # noqa: BLE001 - surfaced as an inconsistent harness
            self.items[name] = {"theorem": name, "consistent": False, "error": f"{type(exc).__name__}: {exc}"}
            return None
        self.items[name] = _harness(rep) if hasattr(rep, "verdicts") else rep
        return rep

    @property
    def consistent(self):
        return all(h.get("consistent", False) for h in self.items.values())


def _duality_harness(gen, star, w, alphas, tol):
    n = gen.n
    worst = 0.0
    for a in alphas:
        for i in range(n):
            for j in range(n):
                f = np.eye(n)[i]
                g = np.eye(n)[j]
                worst = max(worst, rc.duality_residual(gen, star, w, a, f, g))
    back = rc.adjoint_generator(star, w)
    idx = w.idx
    inv = float(np.abs(back.L[np.ix_(idx, idx)] - gen.L[np.ix_(idx, idx)]).max())
    ok = worst <= tol and inv <= tol
    return {"theorem": "weak duality", "consistent": ok, "max_residual": worst, "involution_residual": inv}


def _resolvent_harness(gen, alphas):
    worst_id, worst_row, neg = 0.0, 0.0, 0.0
    for a in alphas:
        M = rc.resolvent_at(gen, a).M
        neg = min(neg, float(M.min()))
        worst_row = max(worst_row, float((a * M.sum(axis=1)).max()))
        for b in alphas:
            worst_id = max(worst_id, rc.resolvent_identity_residual(gen, a, b))
    ok = worst_id <= 1e-9 * max(1.0, gen.scale) and worst_row <= 1 + 1e-12 and neg >= -1e-12
    return {"theorem": "resolvent identity", "consistent": ok, "identity_residual": worst_id,
            "max_row_mass": worst_row, "min_entry": neg}


def _labels(gen, idx):
    return [gen.labels[i] for i in idx]


def _parse_vector(text, n, what):
    try:
        v = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise SchemaError(what, f"cannot parse {text!r}") from exc
    if len(v) != n:
        raise DimensionMismatch(f"{what} has length {len(v)}, expected {n}")
    return np.array(v)


def run_report(model, flags=None):
    """Assemble the full report; returns ``(report_dict, exit_code)``."""
    flags = dict(flags or {})
    opts = dict(model.options)
    opts.update({k: v for k, v in flags.items() if v is not None})
    sections = opts.get("sections", SECTIONS)
    if isinstance(sections, str):
        sections = [s.strip() for s in sections.split(",") if s.strip()]
    unknown = set(sections) - set(SECTIONS)
    if unknown:
        raise SchemaError("sections", f"unknown sections {sorted(unknown)}")
    alphas = opts.get("alpha_grid", DEFAULT_ALPHAS)
    if isinstance(alphas, str):
        alphas = [float(a) for a in alphas.split(",")]
    if not alphas or any(not (isinstance(a, (int, float)) and a > 0) for a in alphas):
        raise SchemaError("alpha_grid", "expected positive numbers")
    beta = float(opts.get("beta", 1.0))
    if beta <= 0:
        raise SchemaError("beta", "must be positive")
    tol = float(opts.get("tol", 1e-10))

    gen = rc.validate_generator(np.array(model.generator, dtype=float), model.states)
    w = rc.weighted_space(gen, np.array(model.measure, dtype=float))
    n = gen.n
    star = rc.adjoint_generator(gen, w)
    H = _Harnesses()
    report = {
        "model": {"version": model.version, "states": list(model.states),
                  "generator": model.generator, "measure": model.measure},
        "sections": list(sections),
    }
    H.run("resolvent", lambda: _resolvent_harness(gen, alphas))
    H.run("duality", lambda: _duality_harness(gen, star, w, alphas, tol))

    if "classify" in sections:
        t = H.run("P2.1", lambda: is_m_transient(gen, w, star))
        r = H.run("P2.3", lambda: is_m_recurrent(gen, w, star))
        tv = t.verdict if t else None
        rv = r.verdict if r else None
        irr = H.run("P2.5/P2.9", lambda: is_m_irreducible(gen, w, star, tv, rv)[1])
        lat = absorbing_sets(gen, w)
        for k, A in enumerate(lat.sets):
            H.run(f"P2.4[{k}]", lambda A=A: absorbing_report(gen, w, A, star))
        atoms = invariant_partition(gen, w)
        for k, atom in enumerate(atoms):
            u = np.zeros(n)
            u[list(atom)] = 1.0
            H.run(f"T2.19[atom {k}]", lambda u=u: invariant_function_test(gen, w, u, recurrent=rv))
        H.run("P2.1.16", lambda: strict_classify(gen, [], w).report)
        H.run("P2.1.14/P2.1.18", lambda: modification_equivalence_report(gen, w, tv, rv,
                                                                         irr["irreducible"] if irr else None))
        strict = strict_classify(gen, [w.m])
        report["classification"] = {
            "m_transient": _verdict(tv, t.verdicts if t else []),
            "m_recurrent": _verdict(rv, r.verdicts if r else []),
            "m_irreducible": _verdict(irr["irreducible"] if irr else None, ["irreducible", "irreducible[adjoint]"]),
            "absorbing_sets": [_labels(gen, sorted(A)) for A in lat.sets],
            "absorbing_exhaustive": lat.exhaustive,
            "invariant_atoms": [_labels(gen, a) for a in atoms],
            "strict": {
                "transient": _verdict(strict.strict_transient, ["strict"]),
                "recurrent": _verdict(strict.strict_recurrent, ["strict"]),
                "irreducible": _verdict(strict.strict_irreducible, ["P2.1.16.i"]),
                "m_is_reference": _verdict(strict.reference_measure_ok[0], ["P2.1.16.iii"]),
            },
        }

    if "potential" in sections:
        dec = class_decomposition(gen)
        pot = potential_kernel(gen)
        sec = {
            "classes": [_labels(gen, c) for c in dec.classes],
            "class_types": list(dec.class_type),
            "U": pot.U,
            "resolvents": {str(a): rc.resolvent_at(gen, a).M for a in alphas},
        }
        red = opts.get("reduced")
        if red:
            ftxt, _, btxt = red.partition(";")
            f = _parse_vector(ftxt, n, "reduced")
            b = float(btxt or 0.0)
            sec["reduced"] = {"f": f, "beta": b, "value": reduced_function(gen, f, b)}
        report["potential"] = sec

    if "ergodic" in sections:
        hb = harmonic_basis(gen, w, beta)
        K, Ks, ang = generator_kernels(gen, w)
        H.items["harmonic"] = {"theorem": "harmonic space", "consistent": bool(
            hb.coincides_with_adjoint and hb.beta_independent and hb.dimension_ok and ang <= 1e-9)}
        projections = []
        vecs = opts.get("project") or []
        if isinstance(vecs, str):
            vecs = [vecs]
        for v in vecs:
            u = _parse_vector(v, n, "project") if isinstance(v, str) else np.asarray(v, dtype=float)
            projections.append({"u": u, "projection": ergodic_projection(gen, w, u, beta=beta, check=False)})
        report["ergodic"] = {
            "beta": beta,
            "support": _labels(gen, hb.support),
            "harmonic_basis": hb.basis.T,
            "dimension": hb.dim,
            "coincides_with_adjoint": _verdict(hb.coincides_with_adjoint, ["Ker L = Ker L*"]),
            "projections": projections,
        }

    if "invariant" in sections:
        wp = w if abs(w.mass - 1) < 1e-12 else w.normalized()
        ims = invariant_probabilities(gen)
        gm = gm_set(gen, wp)
        ext = H.run("T2.26", lambda: extremality_report(gen, wp))
        report["invariant"] = {
            "extreme_points": list(ims.extreme_points),
            "gm_density_basis": gm.density_basis.T,
            "gm_dimension": gm.dim,
            "m_extremal": _verdict(ext["T2.26.iii"] if ext else None, ["T2.26.ii", "T2.26.iii"]),
            "singular_pairs": _verdict(ext["P3.8"] if ext else None, ["P3.8"]),
        }

    if "dirichlet" in sections:
        form = build_form(gen, w)
        ze = zero_energy_space(form, gen, w)
        H.items["L5.1"] = {"theorem": "zero energy", "consistent": bool(ze.agree)}
        H.run("C5.3", lambda: form_equivalence_report(gen, w))
        report["dirichlet"] = {
            "sector_k": form.sector_k,
            "energy_of_one": form.energy(np.ones(len(form.support))),
            "zero_energy_dim": ze.basis.shape[1],
            "duality_residual": form.duality_residual,
        }

    if opts.get("verify"):
        report["verify"] = _verify(gen, w)
        H.items["verify"] = {"theorem": "oracle agreement", "consistent": report["verify"]["all_match"]}

    report["harnesses"] = H.items
    report["consistent"] = H.consistent
    return _clean(report), 0 if H.consistent else 2


def _verify(gen, w):
    pot = potential_kernel(gen)
    series = potential_series_oracle(gen)
    fin = np.isfinite(pot.U)
    series_ok = bool(np.array_equal(series.diverging, ~fin))
    rel = np.abs(series.U[fin] - pot.U[fin]) / np.maximum(1.0, np.abs(pot.U[fin]))
    series_ok &= bool(rel.max(initial=0.0) <= 1e-4)
    red_ok = True
    for f in np.eye(gen.n):
        for b in (0.0, 1.0):
            red_ok &= bool(np.abs(reduced_function(gen, f, b) - reduced_lp_oracle(gen, f, b)).max() <= 1e-8)
    try:
        abs_ok = set(absorbing_sets(gen, w).sets) == set(absorbing_bruteforce_oracle(gen, w))
    except Exception:  # noqa: BLE001 - too large to brute force
        abs_ok = None
    return {
        "potential_series": series_ok,
        "reduced_lp": red_ok,
        "absorbing_bruteforce": abs_ok,
        "all_match": bool(series_ok and red_ok and abs_ok is not False),
    }


# ---------------------------------------------------------------- rendering

def render_text(rep):
    lines = ["potlab report"]

    def fmt(v):
        if v == "inf":
            return "∞"
        if isinstance(v, list):
            return "[" + ", ".join(fmt(x) for x in v) + "]"
        if isinstance(v, dict) and "value" in v and "conditions" in v:
            return f"{v['value']}  ({', '.join(v['conditions'])})"
        return str(v)

    for sec in ("classification", "potential", "ergodic", "invariant", "dirichlet", "verify"):
        if sec not in rep:
            continue
        lines.append(f"\n[{sec}]")
        for k, v in rep[sec].items():
            if isinstance(v, dict) and not ("value" in v and "conditions" in v):
                lines.append(f"  {k}:")
                for k2, v2 in v.items():
                    lines.append(f"    {k2}: {fmt(v2)}")
            else:
                lines.append(f"  {k}: {fmt(v)}")
    lines.append("\n[harnesses]")
    for name, h in rep["harnesses"].items():
        mark = "ok" if h.get("consistent") else "DISAGREE"
        extra = "; ".join(h.get("violations", [])) or h.get("error", "")
        lines.append(f"  {name}: {mark}" + (f"  {extra}" if extra else ""))
    lines.append(f"\nconsistent: {rep['consistent']}")
    return "\n".join(lines) + "\n"


def build_parser():
    p = argparse.ArgumentParser(prog="potlab", description="Potential theory of finite sub-Markovian resolvents.")
    sub = p.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", help="analyze a JSON model file")
    a.add_argument("file")
    a.add_argument("--sections", help="comma-separated subset of " + ",".join(SECTIONS))
    a.add_argument("--alpha-grid", dest="alpha_grid")
    a.add_argument("--beta", type=float)
    a.add_argument("--project", action="append", help="vector to project (comma-separated); repeatable")
    a.add_argument("--reduced", help='"f1,...,fn;beta"')
    a.add_argument("--verify", action="store_true", default=None)
    a.add_argument("--format", choices=("json", "text"), default="json")
    a.add_argument("--tol", type=float)
    a.add_argument("--out")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    flags = {k: getattr(args, k) for k in ("sections", "alpha_grid", "beta", "project", "reduced", "verify", "tol")}
    try:
        model = parse_model_file(args.file)
        rep, code = run_report(model, flags)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = json.dumps(rep, indent=2, sort_keys=True) + "\n" if args.format == "json" else render_text(rep)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
