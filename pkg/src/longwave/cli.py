"""Command-line front-end.

Exit codes: 0 on success, 1 on invalid input (message on stderr), 2 on a
numerical failure (JSON object on stdout with ``error`` and ``message``).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np
import scipy

from . import __version__
from .errors import NumericalError, OptimizerDidNotConverge, UserError
from .filters import make_bank
from .io import CsvFormatError, read_matrix, write_matrix, write_rows

__all__ = ["main", "build_parser"]


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _matrix(text: str) -> list:
    """``'1,0.5;0.5,1'`` -> nested list."""
    return [_floats(row) for row in text.split(";")]


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _add_bank(p):
    p.add_argument("--variant", default="cfw-c", choices=["cfw-c", "cfw-pr", "daubechies"])
    p.add_argument("--M", type=int, default=4, help="vanishing moments")
    p.add_argument("--L", type=int, default=4, help="common-factor order")


def _add_scales(p):
    p.add_argument("--j0", type=int, default=4)
    p.add_argument("--j1", type=int, default=None)


def _emit_json(obj, path):
    text = json.dumps(obj, indent=2)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _cplx(A):
    A = np.asarray(A)
    return {"re": A.real.tolist(), "im": A.imag.tolist()}


# ---------------------------------------------------------------------------
# subcommands


def _cmd_dump_filters(a):
    bank = make_bank(a.variant, a.M, a.L)
    rows = []
    for name in ("hL", "hH", "gL", "gH"):
        taps, start = bank.taps(name)
        rows += [(name, start + i, float(v)) for i, v in enumerate(taps)]
    write_rows(a.output, ["filter", "position", "value"], rows)


def _read_series(path):
    header, X = read_matrix(path)
    return header, X


def _cmd_transform(a):
    from .transform import pyramid

    _, X = _read_series(a.input)
    pyr = pyramid(X, make_bank(a.variant, a.M, a.L), a.j_max)
    rows = []
    for j in range(1, pyr.j_max + 1):
        W = pyr.W(j)
        for k in range(W.shape[0]):
            for c in range(W.shape[1]):
                rows.append((j, k, c, float(W[k, c].real), float(W[k, c].imag)))
    write_rows(a.output, ["scale", "k", "channel", "re", "im"], rows)


def _cmd_scalogram(a):
    from .scalogram import scalogram
    from .transform import pyramid

    _, X = _read_series(a.input)
    sc = scalogram(pyramid(X, make_bank(a.variant, a.M, a.L)), centered=a.centered)
    rows = []
    for j, n in zip(sc.scales, sc.counts):
        S = sc.at(j)
        for l in range(sc.p):
            for m in range(sc.p):
                rows.append((int(j), int(n), l, m, float(S[l, m].real), float(S[l, m].imag)))
    write_rows(a.output, ["scale", "n", "l", "m", "re", "im"], rows)


def _cmd_estimate(a):
    from .whittle import WhittleConfig, estimate

    header, X = _read_series(a.input)
    cfg = WhittleConfig(j0=a.j0, j1=a.j1, M=a.M, L=a.L, variant=a.variant)
    fit = estimate(X, cfg)
    out = {
        "channels": header,
        "d": fit.d_hat.tolist(),
        "Omega": fit.Omega_hat.tolist(),
        "Phi": fit.Phi_hat.tolist(),
        "rho": fit.rho_hat.tolist(),
        "G": _cplx(fit.G_hat),
        "criterion": fit.criterion,
        "n": fit.n,
        "j0": fit.j0,
        "j1": fit.j1,
        "counts": {str(k): v for k, v in fit.counts.items()},
        "filter": fit.bank.label,
    }
    if a.ci:
        from .asymptotics import asymptotic_variance

        av = asymptotic_variance(fit.G_hat, fit.d_hat, u_max=a.u_max, bank=fit.bank)
        se = np.sqrt(np.diag(av.Vd) / fit.n)
        seG = np.sqrt(np.abs(np.diag(av.VG).real) / fit.n).reshape(fit.p, fit.p)
        out["ci"] = {
            "level": 0.95,
            "d_se": se.tolist(),
            "d_lower": (fit.d_hat - 1.96 * se).tolist(),
            "d_upper": (fit.d_hat + 1.96 * se).tolist(),
            "G_se": seG.tolist(),
            "Vd": av.Vd.tolist(),
            "diagnostics": av.diagnostics,
        }
    _emit_json(out, a.output)


def _cmd_simulate(a):
    from .simulate import MfbmParams, sim_arfima0d0, sim_mfbm

    d = np.asarray(a.d)
    p = d.size
    if a.model == "arfima":
        if a.sigma is not None:
            Sigma = np.asarray(a.sigma, dtype=float)
        elif a.rho is not None:
            Sigma = np.full((p, p), a.rho)
            np.fill_diagonal(Sigma, 1.0)
        else:
            Sigma = np.eye(p)
        X = sim_arfima0d0(a.n, d, Sigma, a.seed)
    else:
        if p != 2 and (a.r is not None or a.eta is not None):
            raise UserError("--r and --eta are scalar pair coefficients; use p = 2")
        r = 0.0 if a.r is None else a.r
        eta = 0.0 if a.eta is None else a.eta
        scale = np.ones(p) if a.sigma is None else np.ravel(a.sigma)
        if p == 2:
            params = MfbmParams.bivariate(d, r, eta, scale)
        else:
            params = MfbmParams(scale, np.eye(p), np.zeros((p, p)), d)
        X = sim_mfbm(a.n, params, a.seed)
    header = [f"x{i + 1}" for i in range(X.shape[1])]
    if a.output in (None, "-"):
        write_rows(None, header, X.tolist())
    else:
        write_matrix(a.output, header, X)


def _cmd_mc(a):
    from .montecarlo import load_scenario, run_mc

    sc = load_scenario(a.scenario)
    if a.reps is not None:
        from dataclasses import replace

        sc = replace(sc, reps=a.reps)
    rep = run_mc(sc, workers=a.workers)
    if a.output:
        rep.to_csv(a.output)
    _emit_json(rep.to_dict(), a.json)


def _cmd_connect(a):
    from .connectivity import fit_subjects, group_graph
    from .whittle import WhittleConfig

    cfg = WhittleConfig(j0=a.j0, j1=a.j1, M=a.M, L=a.L, variant=a.variant)
    data, labels = [], None
    for path in a.inputs:
        header, X = _read_series(path)
        if labels is None:
            labels = header
        elif header != labels:
            raise UserError(f"{path}: channel names differ from the first subject")
        data.append((path, X))
    fits = fit_subjects(data, cfg)
    g = group_graph(fits, a.threshold, labels)
    _emit_json(g.to_dict(), a.output)
    if a.edges:
        write_rows(
            a.edges,
            ["l", "m", "label_l", "label_m", "mean_phase", "reference", "class"],
            [(e.l, e.m, labels[e.l], labels[e.m], e.mean_phase, e.reference, e.cls) for e in g.edges],
        )


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ver = f"longwave {__version__} (numpy {np.__version__}, scipy {scipy.__version__}, python {sys.version.split()[0]})"
    ap = argparse.ArgumentParser(prog="longwave", description="Wavelet local Whittle estimation of multivariate long memory.")
    ap.add_argument("--version", action="version", version=ver)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dump-filters", help="write filter taps as CSV")
    _add_bank(p)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_dump_filters)

    p = sub.add_parser("transform", help="complex wavelet coefficients")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--j-max", type=int, default=None)
    _add_bank(p)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("scalogram", help="per-scale Hermitian scalogram")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--centered", action="store_true")
    _add_bank(p)
    p.set_defaults(func=_cmd_scalogram)

    p = sub.add_parser("estimate", help="wavelet local Whittle estimation")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--ci", action="store_true", help="add standard errors and 95%% intervals")
    p.add_argument("--u-max", type=int, default=10)
    _add_scales(p)
    _add_bank(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("simulate", help="simulate ARFIMA(0,d,0) or mFBM")
    p.add_argument("--model", choices=["arfima", "mfbm"], default="arfima")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=_floats, required=True)
    p.add_argument("--rho", type=float, default=None, help="common innovation correlation (arfima)")
    p.add_argument("--sigma", type=_matrix, default=None, help="arfima: covariance 'a,b;c,d'; mfbm: scales 'a,b'")
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("mc", help="Monte Carlo replications")
    p.add_argument("--scenario", required=True, help="TOML or JSON file")
    p.add_argument("--output", help="CSV table")
    p.add_argument("--json", default=None, help="JSON summary (stdout by default)")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--workers", type=int, default=None, help="defaults to LONGWAVE_THREADS or 1")
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("connect", help="group connectivity graph")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--threshold", type=float, default=0.3)
    p.add_argument("--output")
    p.add_argument("--edges", help="edge-list CSV")
    _add_scales(p)
    _add_bank(p)
    p.set_defaults(func=_cmd_connect)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        a.func(a)
    except NumericalError as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, OptimizerDidNotConverge) and exc.best is not None:
            err["best"] = np.asarray(exc.best).tolist()
            err["value"] = exc.value
        print(json.dumps(err))
        return 2
    except (UserError, CsvFormatError) as exc:
        print(f"longwave: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"longwave: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
