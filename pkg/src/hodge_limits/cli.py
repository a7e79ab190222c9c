"""Command line front end: analyze, verify and make-model."""

import argparse
import csv
import hashlib
import json
import os
import shutil
import sys
import time
from fractions import Fraction
from math import comb

import numpy as np

from .asymptotics import (
    DEFAULT_Y_VALUES, cheap_sl2_series, commutator_inequality_check, default_order, equality_matrix,
    growth_exponent, higgs_norm_check, limit_filtrations, nilpotent_orbit_scan, rescaled_decay_check,
    sl2_orbit_identity_error, twisted_datum,
)
from .errors import HodgeError
from .exact import GQ, Matrix, Subspace, integer_spectrum, is_nilpotent
from .mhs import deligne_splitting, is_split
from .monodromy import (
    datum_from_matrices, grading_splitting, isotypical_decompose, monodromy_constants, sl2_complete,
    weight_filtration,
)
from .sl2hodge import (
    build_model_variation, model_family, recognize_sl2_filtration, sharp_structure, weil_checks,
)
from .specfile import (
    CHECK_NAMES, SpecError, degeneration_spec, dump_spec, load_spec, model_spec,
)
from . import plotting

EXIT_OK, EXIT_USAGE, EXIT_MATH = 0, 2, 3


# ---------------------------------------------------------------- serialisation


def mat_out(A):
    return [[str(a) for a in r] for r in A.rows]


def space_out(S):
    return [[str(a) for a in v] for v in S.rows]


def filt_out(F):
    return {str(p): space_out(F[p]) for p in F.indices()}


def dims_out(F):
    return {str(p): F[p].dim for p in F.indices()}


def _num(x):
    """Stable text form of a float for the structured report."""
    if x is None:
        return None
    if isinstance(x, float) and (x != x or x in (float("inf"), float("-inf"))):
        return str(x)
    return float("%.12g" % x)


# ---------------------------------------------------------------- pipeline


class Pipeline:
    """Runs the exact pipeline for one spec and collects the report tree."""

    def __init__(self, spec, order=None):
        self.spec = spec
        self.order = order
        self.report = {"kind": spec["kind"], "name": spec["name"], "dim": spec["dim"],
                       "weight": spec["weight"], "checks": {}}
        self.timings = {}
        self.model = None
        self.datum = None
        self.pkg = None
        self.sl2 = None
        self.deligne_dims = {}

    def _timed(self, label, fn):
        t0 = time.perf_counter()
        out = fn()
        self.timings[label] = time.perf_counter() - t0
        return out

    def run(self):
        kind = self.spec["kind"]
        if kind == "model":
            self._model()
        elif kind == "degeneration":
            self._degeneration()
        else:
            self._sl2_build()
        return self.report

    def _model(self):
        s = self._timed("model", lambda: model_family(self.spec["summands"]))
        self.model = build_model_variation(s, self.spec["S"])
        self.datum = self.model.datum()
        self._monodromy(self.datum, model_H=s.triple.H)
        self._limits(self.model)

    def _degeneration(self):
        sp = self.spec
        self.datum = datum_from_matrices(sp["Q"], sp["N"], sp["weight"], sp["F"], sp["ts_spectrum"])
        self._monodromy(self.datum)
        if self.datum.F is not None:
            self._limits(self.datum)
        else:
            self.report["limits"] = None

    def _monodromy(self, d, model_H=None):
        r = self.report
        W = self._timed("weight_filtration", lambda: weight_filtration(d.N))
        r["weight_filtration"] = {"dims": dims_out(W), "bases": filt_out(W)}
        H = self._timed("splitting", lambda: grading_splitting(d))
        r["splitting_H"] = mat_out(H)
        if model_H is not None:
            r["model_H"] = mat_out(model_H)
            r["splitting_equals_model_H"] = H == model_H
            H = model_H
        t = sl2_complete(H, d.N)
        r["triple"] = {"H": mat_out(t.H), "X": mat_out(t.X), "Y": mat_out(t.Y)}
        r["isotypical"] = [[m, E.dim] for m, E in isotypical_decompose(t)]
        delta, m_N, C0 = monodromy_constants(d)
        r["constants"] = {"delta": str(delta), "m_N": m_N, "C0": _num(C0)}
        r["ts_spectrum"] = [[str(a), E.dim] for a, E in d.ts_spectrum]
        r["pure_case"] = d.N.is_zero()
        self._H = H

    def _limits(self, source):
        r = self.report
        pkg = self._timed("limit_filtrations", lambda: limit_filtrations(source, H=self._H))
        order = self.order or default_order(pkg.N)
        pkg = self._timed("sl2_series", lambda: cheap_sl2_series(pkg, order))
        self.pkg = pkg
        self.sl2 = pkg.sl2
        r["limits"] = {
            "F_lim": filt_out(pkg.F_lim),
            "F_H": filt_out(pkg.F_H),
            "F_sharp": filt_out(pkg.F_sharp),
            "F_H_equals_F_lim": pkg.F_H == pkg.F_lim,
        }
        if r["pure_case"]:
            r["limits"]["note"] = "pure case, F_lim in D"
        r["sl2_pieces"] = {"%d,%d,%d" % k: P.dim for k, P in sorted(pkg.sl2.pieces.items())}
        dl = deligne_splitting(pkg.mhs)
        self.deligne_dims = {k: P.dim for k, P in dl.pieces.items()}
        r["deligne"] = {"pieces": {"%d,%d" % k: P.dim for k, P in sorted(dl.pieces.items())},
                        "split": is_split(pkg.mhs),
                        "membership_checked": dl.membership_checked}
        r["sl2_series"] = {
            "order": order,
            "h": {str(k): mat_out(A) for k, A in sorted(pkg.h_coeffs.items())},
            "B": {str(k): mat_out(A) for k, A in sorted(pkg.B_coeffs.items())},
            "C": {str(k): mat_out(A) for k, A in sorted(pkg.C_coeffs.items())},
        }
        r["checks"].update({k: bool(v) for k, v in pkg.checks.items()})

    def _sl2_build(self):
        sp = self.spec
        s = self._timed("recognition", lambda: recognize_sl2_filtration(
            sp["Q"], sp["H"], sp["Y"], sp["F"], sp["weight"]))
        self.sl2 = s
        r = self.report
        r["sl2_pieces"] = {"%d,%d,%d" % k: P.dim for k, P in sorted(s.pieces.items())}
        r["triple"] = {"H": mat_out(s.triple.H), "X": mat_out(s.triple.X), "Y": mat_out(s.triple.Y)}
        r["isotypical"] = [[m, E.dim] for m, E in isotypical_decompose(s.triple)]
        r["checks"].update({k: bool(v) for k, v in weil_checks(s).items()})
        sharp_structure(s)
        r["checks"]["associated-pure-structure"] = True
        r["checks"]["sl2-recognition"] = True
        self.deligne_dims = {(i, j): P.dim for (k, i, j), P in s.pieces.items()}


# ---------------------------------------------------------------- output


def prepare_out(out, force):
    if os.path.exists(out) and os.listdir(out):
        if not force:
            raise SpecError("output directory %s exists and is not empty; pass --force to overwrite" % out)
        for sub in ("curves", "figures"):
            shutil.rmtree(os.path.join(out, sub), ignore_errors=True)
    os.makedirs(os.path.join(out, "curves"), exist_ok=True)
    os.makedirs(os.path.join(out, "figures"), exist_ok=True)


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "quantity", "value"])
        for row in rows:
            w.writerow(row)


def structured_text(report):
    return json.dumps(report, sort_keys=True, indent=1) + "\n"


def text_report(report, timings):
    lines = ["hodge-limits report: %s (%s)" % (report.get("name"), report.get("kind")),
             "dim %s, weight %s" % (report.get("dim"), report.get("weight"))]
    if report.get("failed_check"):
        lines.append("FAILED check %s: %s" % (report["failed_check"], report.get("error", "")))
    if "weight_filtration" in report:
        lines.append("weight filtration dims: %s" % _fmt_dims(report["weight_filtration"]["dims"]))
    if "triple" in report:
        lines.append("H = %s" % _fmt_mat(report["triple"]["H"]))
        lines.append("X = %s" % _fmt_mat(report["triple"]["X"]))
    if "isotypical" in report:
        lines.append("isotypical components (m, dim): %s" % report["isotypical"])
    if "constants" in report:
        c = report["constants"]
        lines.append("delta = %s, m(N) = %s, C0 = %s" % (c["delta"], c["m_N"], c["C0"]))
    lim = report.get("limits")
    if lim:
        lines.append("F_lim dims: %s" % _fmt_dims({p: len(v) for p, v in lim["F_lim"].items()}))
        lines.append("F_H dims: %s" % _fmt_dims({p: len(v) for p, v in lim["F_H"].items()}))
        lines.append("F_H = F_lim: %s" % lim["F_H_equals_F_lim"])
        if lim.get("note"):
            lines.append(lim["note"])
    if "deligne" in report:
        d = report["deligne"]
        lines.append("Deligne pieces: %s (split: %s)" % (d["pieces"], d["split"]))
    if "sl2_series" in report:
        s = report["sl2_series"]
        if not (s["h"] or s["B"] or s["C"]):
            lines.append("SL(2) series: empty (order %d)" % s["order"])
        else:
            lines.append("SL(2) series to order %d: h at %s, B at %s, C at %s" % (
                s["order"], sorted(map(int, s["h"])), sorted(map(int, s["B"])), sorted(map(int, s["C"]))))
    if "verify" in report:
        lines.append("")
        lines.append("numeric checks:")
        for name, res in report["verify"].items():
            lines.append("  %-11s %s  %s" % (name, res["verdict"], res.get("summary", "")))
    lines.append("")
    lines.append("exact checks:")
    for k, v in sorted(report.get("checks", {}).items()):
        lines.append("  %-32s %s" % (k, "PASS" if v else "FAIL"))
    lines.append("")
    lines.append("timings (s):")
    for k, v in timings.items():
        lines.append("  %-20s %.4f" % (k, v))
    return "\n".join(lines) + "\n"


def _fmt_dims(d):
    return ", ".join("%s:%s" % (k, v) for k, v in sorted(d.items(), key=lambda kv: int(kv[0])))


def _fmt_mat(rows):
    return "[" + "; ".join(" ".join(r) for r in rows) + "]"


def write_outputs(out, report, timings, csv_files, figure_jobs):
    with open(os.path.join(out, "report.structured"), "w") as fh:
        fh.write(structured_text(report))
    text = text_report(report, timings)
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write(text)
    for name, rows in csv_files.items():
        write_csv(os.path.join(out, "curves", name), rows)
    for name, job in figure_jobs.items():
        job(os.path.join(out, "figures", name))
    return text


def _deligne_outputs(pipe):
    rows = [(p, q, "I_dim", d) for (p, q), d in sorted(pipe.deligne_dims.items())]
    dims = dict(pipe.deligne_dims)
    return {"bigrading.csv": rows}, {"bigrading.png": lambda path: plotting.plot_hodge_diamond(dims, path)}


def _spec_digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def cmd_analyze(spec_path, out=None, force=False, order=None, stream=None):
    """Run the exact pipeline; returns an exit code."""
    stream = stream or sys.stdout
    try:
        spec = load_spec(spec_path)
        if out is not None:
            prepare_out(out, force)
    except (SpecError, OSError) as exc:
        print("error: %s: %s" % (spec_path, exc), file=sys.stderr)
        return EXIT_USAGE
    pipe = Pipeline(spec, order)
    pipe.report["spec_sha256"] = _spec_digest(spec_path)
    code = EXIT_OK
    try:
        pipe.run()
    except HodgeError as exc:
        pipe.report["failed_check"] = exc.check
        pipe.report["error"] = str(exc)
        code = EXIT_MATH
    if any(v is False for v in pipe.report["checks"].values()):
        code = EXIT_MATH
    pipe.report["status"] = "ok" if code == EXIT_OK else "failed"
    csvs, figs = _deligne_outputs(pipe)
    if out is not None:
        text = write_outputs(out, pipe.report, pipe.timings, csvs, figs)
    else:
        text = text_report(pipe.report, pipe.timings)
    stream.write(text)
    if code == EXIT_MATH:
        print("mathematical check failed: %s" % pipe.report.get("failed_check", "see report"), file=sys.stderr)
    return code


# ---------------------------------------------------------------- verify


def _resolve_real(x):
    if x == "pi":
        return float(np.pi)
    if isinstance(x, int):
        return float(x)
    return float(Fraction(x[0], x[1]))


def _vec(v):
    from .specfile import parse_scalar
    return np.array([complex(parse_scalar(a)) for a in v], dtype=complex)


def _expected_growth(W, v):
    """Smallest k with v in W_k."""
    ex = tuple(GQ(Fraction(complex(a).real).limit_denominator(10**9)) for a in v)
    for k in range(W.lo, W.hi + 1):
        if W[k].contains_vector(ex):
            return k
    return W.hi


class Verifier:
    def __init__(self, pipe, analysis, scale=1.0):
        self.pipe = pipe
        self.a = analysis
        self.scale = scale
        self.csv = {}
        self.figs = {}

    def x_grid(self):
        lo, hi = self.a.get("x_decades", [2, 6])
        return tuple(float(x) for x in np.logspace(lo, hi, self.a.get("points", 25)))

    def y_values(self):
        if "y_values" in self.a:
            return [_resolve_real(y) for y in self.a["y_values"]]
        return list(DEFAULT_Y_VALUES)

    def growth(self):
        mv = self.pipe.model
        if mv is None:
            return {"verdict": "SKIP", "summary": "needs a model spec"}
        dim = mv.base.dim
        vecs = [_vec(v) for v in self.a.get("growth_vectors", [])]
        if not vecs:
            vecs = [np.eye(dim)[i] for i in range(dim)] + [np.ones(dim)]
        W = weight_filtration(mv.N)
        tol = 0.05 * self.scale
        rows, curves, results, ok = [], [], [], True
        for i, v in enumerate(vecs):
            expected = _expected_growth(W, v)
            for y in self.y_values():
                fit = growth_exponent(mv, v, self.x_grid(), y)
                good = abs(fit.slope - expected) <= tol
                ok &= good
                results.append({"vector": i, "y": _num(y), "slope": _num(fit.slope),
                                "expected": expected, "pass": good})
                rows += [(x, _num(y), "norm2_v%d" % i, val) for x, val in zip(fit.xs, fit.values)]
                curves.append(("v%d y=%.3g" % (i, y), fit.xs, fit.values, fit.slope))
        self.csv["growth.csv"] = rows
        self.figs["growth.png"] = lambda p: plotting.plot_growth(curves, p)
        worst = max(abs(r["slope"] - r["expected"]) for r in results)
        return {"verdict": "PASS" if ok else "FAIL", "tolerance": tol, "fits": results,
                "summary": "max |slope - weight| = %.2e (tol %.2g)" % (worst, tol)}

    def higgs(self):
        mv = self.pipe.model
        if mv is None:
            return {"verdict": "SKIP", "summary": "needs a model spec"}
        xs = self.x_grid()
        vals, bounds, rows, ok, worst = [], [], [], True, 0.0
        for x in xs:
            value, bound, gap = higgs_norm_check(mv, complex(-x, 0.0))
            vals.append(value)
            bounds.append(bound)
            ok &= gap >= -1e-12 * self.scale * max(1.0, bound)
            worst = max(worst, abs(gap) * x * x)
            rows += [(x, 0.0, "higgs_value", value), (x, 0.0, "higgs_bound", bound)]
        self.csv["higgs.csv"] = rows
        self.figs["higgs.png"] = lambda p: plotting.plot_higgs(xs, vals, bounds, p)
        x2v = vals[0] * xs[0] ** 2
        return {"verdict": "PASS" if ok else "FAIL", "x2_value": _num(x2v),
                "C0_squared": _num(bounds[0] * xs[0] ** 2), "max_scaled_gap": _num(worst),
                "summary": "x^2 |theta|^2 = %.12g, C0^2 = %.12g" % (x2v, bounds[0] * xs[0] ** 2)}

    def decay(self):
        pkg = self.pipe.pkg
        if pkg is None:
            return {"verdict": "SKIP", "summary": "needs a limiting filtration"}
        spec = integer_spectrum(pkg.H)
        pairs = []
        for v, w in self.a.get("decay_pairs", []):
            pairs.append((_vec(v), _vec(w)))
        labelled = []
        if pairs:
            for v, w in pairs:
                labelled.append((v, w, _weight_of(spec, v), _weight_of(spec, w)))
        else:
            firsts = {k: np.array([complex(a) for a in E.rows[0]]) for k, E in spec.items()}
            ks = sorted(firsts)
            for i, k in enumerate(ks):
                for k2 in ks[i:]:
                    labelled.append((firsts[k], firsts[k2], k, k2))
        tol = 0.1 * self.scale
        rows, curves, fits, ok = [], [], [], True
        for idx, (v, w, k, k2) in enumerate(labelled):
            fit = rescaled_decay_check(pkg, v, w)
            if k is None or k2 is None:
                good = None
            else:
                good = fit.identically_zero or fit.slope >= abs(k - k2) - tol
                ok &= good
            fits.append({"pair": idx, "k": k, "k2": k2, "identically_zero": fit.identically_zero,
                         "slope": _num(fit.slope), "pass": good})
            rows += [(u, 0.0, "pairing_%d" % idx, val) for u, val in zip(fit.us, fit.values)]
            curves.append(("k=%s,k'=%s" % (k, k2), fit.us, fit.values, fit.slope))
        errs = {str(u): _num(sl2_orbit_identity_error(pkg, u)) for u in (0.1, 0.05, 0.01)}
        self.csv["decay.csv"] = rows
        self.figs["decay.png"] = lambda p: plotting.plot_decay(curves, p)
        cross = [f for f in fits if f["k"] is not None and f["k"] != f["k2"]]
        zeros = sum(1 for f in cross if f["identically_zero"])
        margins = [f["slope"] - abs(f["k"] - f["k2"]) for f in cross if not f["identically_zero"]]
        summary = "%d cross-weight pairs, %d identically zero" % (len(cross), zeros)
        if margins:
            summary += ", min slope - |k-k'| = %.3f" % min(margins)
        return {"verdict": "PASS" if ok else "FAIL", "fits": fits, "orbit_identity_error": errs,
                "summary": summary}

    def orbit_scan(self):
        pkg = self.pipe.pkg
        d = self.pipe.datum
        if d is None or d.F is None:
            return {"verdict": "SKIP", "summary": "needs a limiting filtration"}
        xs = [_resolve_real(x) for x in self.a.get("scan_x", [-1000, -100, -10, -1, [-1, 10]])]
        ys = [_resolve_real(y) for y in self.a.get("scan_y", [0, 1])]
        table = nilpotent_orbit_scan(d.F, d.N, d.Q, d.weight, xs, ys)
        code = {"In-D": 1, "NotPolarized": 0, "DecompositionFails": -1, "Indeterminate": -2}
        self.csv["orbit_scan.csv"] = [(x, y, "in_D", code[v]) for x, y, v, _ in table]
        self.figs["orbit_scan.png"] = lambda p: plotting.plot_orbit_scan(table, p)
        counts = {}
        for _, _, v, _ in table:
            counts[v] = counts.get(v, 0) + 1
        return {"verdict": "RECORDED", "table": [[_num(x), _num(y), v] for x, y, v, _ in table],
                "summary": ", ".join("%s: %d" % kv for kv in sorted(counts.items()))}

    def commutator(self):
        samples = self.a.get("commutator_samples", 200)
        lo, hi = self.a.get("commutator_dims", [2, 8])
        rng = np.random.default_rng(self.a.get("seed", 0))
        tol = 1e-9 * self.scale
        ratios, rows, ok, eq_ok = {}, [], True, True
        for r in range(lo, hi + 1):
            low, upp = [], []
            for _ in range(samples):
                A = random_nilpotent(rng, r)
                lhs, mid, rhs = commutator_inequality_check(A)
                ok &= lhs <= mid * (1 + tol) and mid <= rhs * (1 + tol)
                low.append(lhs / mid)
                upp.append(mid / rhs)
            ratios[r] = (low, upp)
            _, mid, rhs = commutator_inequality_check(equality_matrix(r))
            eq_ok &= abs(mid - rhs) <= 1e-10 * max(1.0, rhs)
            rows += [(r, 0.0, "max_lhs_over_mid", max(low) if low else 0.0),
                     (r, 0.0, "max_mid_over_rhs", max(upp) if upp else 0.0),
                     (r, 0.0, "equality_gap", mid - rhs)]
        self.csv["commutator.csv"] = rows
        if samples:
            self.figs["commutator.png"] = lambda p: plotting.plot_commutator(ratios, p)
        return {"verdict": "PASS" if ok and eq_ok else "FAIL", "equality_attained": eq_ok,
                "summary": "%d samples per r in [%d, %d], equality matrix %s" % (
                    samples, lo, hi, "attains" if eq_ok else "misses")}


def random_nilpotent(rng, r):
    """U T U^H with T strictly upper triangular and U unitary."""
    T = np.triu(rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r)), 1)
    U, _ = np.linalg.qr(rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r)))
    return U @ T @ U.conj().T


def _weight_of(spec, v):
    for k, E in spec.items():
        ex = tuple(GQ(Fraction(complex(a).real).limit_denominator(10**9),
                      Fraction(complex(a).imag).limit_denominator(10**9)) for a in v)
        if E.contains_vector(ex):
            return k
    return None


_RUNNERS = {"growth": "growth", "higgs": "higgs", "decay": "decay", "orbit-scan": "orbit_scan",
            "commutator": "commutator"}


def cmd_verify(spec_path, checks=(), out=None, force=False, tolerance_scale=1.0, order=None, stream=None):
    stream = stream or sys.stdout
    unknown = [c for c in checks if c not in CHECK_NAMES]
    if unknown:
        print("error: unknown check(s): %s (choose from %s)" % (", ".join(unknown), ", ".join(CHECK_NAMES)),
              file=sys.stderr)
        return EXIT_USAGE
    try:
        spec = load_spec(spec_path)
        if out is not None:
            prepare_out(out, force)
    except (SpecError, OSError) as exc:
        print("error: %s: %s" % (spec_path, exc), file=sys.stderr)
        return EXIT_USAGE
    analysis = spec["analysis"]
    if not checks:
        checks = analysis.get("checks") or []
    if not checks:
        print("error: no checks requested and the spec has no analysis.checks", file=sys.stderr)
        return EXIT_USAGE
    pipe = Pipeline(spec, order or analysis.get("order"))
    pipe.report["spec_sha256"] = _spec_digest(spec_path)
    code = EXIT_OK
    try:
        pipe.run()
    except HodgeError as exc:
        pipe.report["failed_check"] = exc.check
        pipe.report["error"] = str(exc)
        code = EXIT_MATH
    ver = Verifier(pipe, analysis, tolerance_scale)
    results = {}
    for name in checks:
        if code != EXIT_OK and name != "commutator":
            results[name] = {"verdict": "SKIP", "summary": "pipeline failed"}
            continue
        t0 = time.perf_counter()
        results[name] = getattr(ver, _RUNNERS[name])()
        pipe.timings["verify " + name] = time.perf_counter() - t0
    pipe.report["verify"] = results
    if any(r["verdict"] == "FAIL" for r in results.values()):
        code = EXIT_MATH
    pipe.report["status"] = "ok" if code == EXIT_OK else "failed"
    if out is not None:
        text = write_outputs(out, pipe.report, pipe.timings, ver.csv, ver.figs)
    else:
        text = text_report(pipe.report, pipe.timings)
    stream.write(text)
    return code


# ---------------------------------------------------------------- make-model


def _parse_rational(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise SpecError("not a rational number: %r" % text) from None


def make_model_doc(kind, params, eps="1"):
    if kind == "sm":
        if len(params) != 1:
            raise SpecError("sm takes one parameter m")
        m = _int_param(params[0])
        return model_spec([(m, 0, 0)], name="S%d" % m)
    if kind == "sum":
        if len(params) != 1:
            raise SpecError("sum takes one parameter, a comma separated m-list")
        ms = [_int_param(x) for x in params[0].split(",") if x.strip()]
        if not ms:
            raise SpecError("empty m-list")
        # twist the smaller summands so every m + p + q equals the largest m
        top = max(ms)
        summands = [(m, (top - m) // 2, top - m - (top - m) // 2) for m in ms]
        return model_spec(summands, name="sum_" + "_".join(map(str, ms)))
    if kind == "twisted":
        if len(params) != 1:
            raise SpecError("twisted takes one parameter m")
        m = _int_param(params[0])
        if m < 1:
            raise SpecError("twisted needs m >= 1")
        e = _parse_rational(eps)
        if e == 0:
            raise SpecError("eps must be nonzero")
        d = twisted_datum(m, e)
        return degeneration_spec(d, name="twisted_S%d_eps_%s" % (m, str(e).replace("/", "_")))
    raise SpecError("unknown model kind %r (sm, sum, twisted)" % kind)


def _int_param(x):
    try:
        m = int(x)
    except ValueError:
        raise SpecError("not an integer: %r" % x) from None
    if m < 0:
        raise SpecError("m must be nonnegative")
    return m


def cmd_make_model(kind, params, out=None, eps="1", force=False, stream=None):
    stream = stream or sys.stdout
    try:
        doc = make_model_doc(kind, params, eps)
    except SpecError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    text = dump_spec(doc)
    if out is None:
        stream.write(text)
        return EXIT_OK
    if os.path.exists(out) and not force:
        print("error: %s exists; pass --force to overwrite" % out, file=sys.stderr)
        return EXIT_USAGE
    with open(out, "w") as fh:
        fh.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- main


def build_parser():
    p = argparse.ArgumentParser(prog="hodge-limits", description="Limits of polarized Hodge structures.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the exact pipeline on a spec")
    a.add_argument("spec")
    a.add_argument("--out", help="output directory")
    a.add_argument("--force", action="store_true", help="overwrite an existing output directory")
    a.add_argument("--order", type=int, help="truncation order of the SL(2) series")

    v = sub.add_parser("verify", help="run numeric checks")
    v.add_argument("spec")
    v.add_argument("checks", nargs="*", help="any of: %s" % ", ".join(CHECK_NAMES))
    v.add_argument("--out")
    v.add_argument("--force", action="store_true")
    v.add_argument("--tolerance-scale", type=float, default=1.0)
    v.add_argument("--order", type=int)

    m = sub.add_parser("make-model", help="write a generated spec")
    m.add_argument("kind", choices=["sm", "sum", "twisted"])
    m.add_argument("params", nargs="*")
    m.add_argument("--eps", default="1", help="twist parameter for 'twisted' (rational)")
    m.add_argument("--out", help="spec file to write (stdout if omitted)")
    m.add_argument("--force", action="store_true")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "order", None) is not None and args.order < 1:
        print("error: --order must be positive", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "analyze":
        return cmd_analyze(args.spec, args.out, args.force, args.order)
    if args.command == "verify":
        if args.tolerance_scale <= 0:
            print("error: --tolerance-scale must be positive", file=sys.stderr)
            return EXIT_USAGE
        return cmd_verify(args.spec, args.checks, args.out, args.force, args.tolerance_scale, args.order)
    return cmd_make_model(args.kind, args.params, args.out, args.eps, args.force)


if __name__ == "__main__":
    sys.exit(main())
