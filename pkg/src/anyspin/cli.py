"""Command line driver.  Every command writes one JSON report with a manifest.

Exit codes: 0 success, 1 error, 2 certificate evaluated and failed.
The thread count of the numerical libraries is taken from ANYSPIN_THREADS.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _set_threads() -> None:
    n = os.environ.get("ANYSPIN_THREADS")
    if n:
        for v in THREAD_VARS:
            os.environ[v] = n


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _jsonable(x):
    import numpy as np

    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def _cmatrix(m) -> dict:
    import numpy as np

    m = np.asarray(m)
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


def _load_config(path):
    from .model import ModelConfig, default_config

    return default_config() if path is None else ModelConfig.from_json(path)


# ------------------------------------------------------------------ commands


def cmd_cg_table(a):
    from .angular import HalfInt, cg_matrix, coupled_spins

    j1, j2 = HalfInt(a.j1), HalfInt(a.j2)
    js = [HalfInt(a.j)] if a.j is not None else coupled_spins(j1, j2)
    rows = []
    for j in js:
        c = cg_matrix(j1, j2, j)
        for i1, m1 in enumerate(j1.projections()):
            for i2, m2 in enumerate(j2.projections()):
                for k, m in enumerate(j.projections()):
                    if c[i1, i2, k] != 0:
                        rows.append([m1.twice, m2.twice, j.twice, m.twice, float(c[i1, i2, k])])
    if a.csv:
        lines = ["2m1,2m2,2j,2m,value"] + [f"{r[0]},{r[1]},{r[2]},{r[3]},{r[4]:.17g}" for r in rows]
        Path(a.csv).write_text("\n".join(lines) + "\n")
    return {"j1_twice": a.j1, "j2_twice": a.j2, "columns": ["2m1", "2m2", "2j", "2m", "value"], "entries": rows}, 0


def cmd_boost(a):
    import numpy as np

    from .lorentz import MassiveMomentum, MasslessMomentum, shell_residual, standard_boost

    p = np.array([a.px, a.py, a.pz], dtype=float)
    q = MasslessMomentum(p) if a.mass == 0 else MassiveMomentum(a.mass, p)
    A = standard_boost(q, a.formalism)
    return {"matrix": _cmatrix(A), "shell_residual": shell_residual(q, a.formalism), "tol": 1e-9}, 0


def cmd_irrep(a):
    import numpy as np

    from .irreps import IrrepLabel, d_general
    from .lorentz import random_sl2c

    l = IrrepLabel.from_twice(a.j1, a.j2)
    rng = np.random.default_rng(a.seed)
    y = random_sl2c(rng)
    if a.boost is not None:
        from .lorentz import MassiveMomentum, standard_boost

        x = standard_boost(MassiveMomentum(a.boost[0], np.array(a.boost[1:])), a.formalism)
    else:
        x = random_sl2c(rng)
    Dx, Dy, Dxy = d_general(l, x), d_general(l, y), d_general(l, x @ y)
    res = float(np.abs(Dxy - Dx @ Dy).max() / max(1.0, np.abs(Dxy).max()))
    return {"irrep": str(l), "dim": l.dim, "element": _cmatrix(x), "D": _cmatrix(Dx),
            "homomorphism_residual": res, "tol": 1e-9}, 0


def cmd_field_eval(a):
    import numpy as np

    from .angular import HalfInt
    from .fields import FieldSpec, coefficient_tables
    from .irreps import IrrepLabel

    l = IrrepLabel.from_twice(a.j1, a.j2)
    if a.mass == 0:
        spec = FieldSpec.massless(l.J1, l.J2)
    else:
        stat = "boson" if a.j % 2 == 0 else "fermion"
        spec = FieldSpec("massive", stat, a.mass, HalfInt(a.j), l, a.formalism)
    u, v = coefficient_tables(spec, np.array([a.px, a.py, a.pz], dtype=float))
    if a.csv:
        lines = ["2M1,2M2,2s,u_re,u_im,v_re,v_im"]
        for r, (M1, M2) in enumerate(l.index_labels()):
            for c, sl in enumerate(spec.spin_labels()):
                uu, vv = u[0][r, c], v[0][r, c]
                lines.append(f"{M1.twice},{M2.twice},{sl.twice},{uu.real:.17g},{uu.imag:.17g},{vv.real:.17g},{vv.imag:.17g}")
        Path(a.csv).write_text("\n".join(lines) + "\n")
    return {"irrep": str(l), "kind": spec.kind, "formalism": spec.formalism,
            "spin_labels_twice": [s.twice for s in spec.spin_labels()], "u": _cmatrix(u[0]), "v": _cmatrix(v[0])}, 0


def cmd_causality_scan(a):
    from .angular import HalfInt
    from .fields import CausalityQuadrature, FieldSpec, causality_check
    from .irreps import IrrepLabel

    import numpy as np

    l = IrrepLabel.from_twice(a.j1, a.j2)
    stat = "boson" if a.j % 2 == 0 else "fermion"
    spec = FieldSpec("massive", stat, a.mass, HalfInt(a.j), l, a.formalism)
    quad = CausalityQuadrature(n_radial=a.n_radial, n_polar=a.n_polar)
    space = None
    if a.points:
        space = np.loadtxt(a.points, delimiter=",", ndmin=2)
    rep = causality_check(spec, quad, space=space)
    out = {"irrep": str(l), "spacelike": rep.spacelike, "timelike": rep.timelike, "flipped": rep.flipped,
           "reference": rep.reference, "max_relative": rep.max_relative,
           "flipped_min_relative": rep.flipped_min_relative, "tol": rep.tol, "control": rep.control,
           "points": rep.points, "passed": rep.passed,
           "quadrature": {"n_radial": quad.n_radial, "n_polar": quad.n_polar, "n_azimuth": quad.n_azimuth,
                          "p_max": quad.p_max, "eps": quad.eps}}
    return out, 0 if rep.passed else 2


def _grid_info(model) -> dict:
    return {"dim": model.space.dim, "modes": [s.n_modes for s in model.species],
            "caps": {"boson": model.config.boson_cap, "species": list(model.config.species_caps),
                     "total": model.config.total_cap}}


def cmd_build_model(a):
    from .fock import export_basis, export_triplets
    from .model import build_model, hypothesis_sigma_sweep, kernel_norms, relative_bound_constants

    cfg = _load_config(a.config)
    m = build_model(cfg)
    bc = relative_bound_constants(m, n_states=a.states, seed=a.seed)
    if a.export:
        d = Path(a.export)
        d.mkdir(parents=True, exist_ok=True)
        export_triplets(m.H0, d / "H0.txt")
        export_triplets(m.HI, d / "HI.txt")
        export_basis(m.space, d / "basis.txt")
    out = {"config": cfg.to_dict(), "grid": _grid_info(m), "nnz_HI": m.HI.nnz,
           "hermitian_defect": float(abs(m.HI - m.HI.conj().T).max()) if m.HI.nnz else 0.0,
           "constants": bc.to_dict(), "kernel_norms": kernel_norms(m),
           "hypothesis_K_Gt": hypothesis_sigma_sweep(m)["K_Gt"]}
    return out, 0 if bc.verified else 2


def _coupling(a, consts) -> float:
    return a.g if a.g is not None else a.g_fraction * consts.bound.g1


def cmd_spectrum(a):
    from .model import build_model, relative_bound_constants
    from .spectral import lowest_eigs, thresholds

    cfg = _load_config(a.config)
    m = build_model(cfg)
    if a.g is not None:
        g = a.g
    else:
        g = a.g_fraction * relative_bound_constants(m, n_states=0).g1
    rep = lowest_eigs(m.hamiltonian(g), k=a.k, tol=a.tol, seed=a.seed)
    out = {"g": g, "grid": _grid_info(m), "E": rep.E, "gap": rep.gap, **rep.to_dict(),
           "thresholds": thresholds(*cfg.masses, 2)[:8]}
    return out, 0


def cmd_gap_scan(a):
    from .model import build_model
    from .spectral import certificate_constants, gap_certificate

    cfg = _load_config(a.config)
    cc = certificate_constants(build_model(cfg), n_ladder=max(a.n_max, 2), seed=a.seed)
    g = _coupling(a, cc)
    certs = [gap_certificate(cfg, g, n, cc, tol=a.tol, seed=a.seed) for n in range(1, a.n_max + 1)]
    ok = all(c.passed for c in certs)
    return {"g": g, "constants": cc.to_dict(), "certificates": [c.to_dict() for c in certs], "passed": ok}, 0 if ok else 2


def cmd_mourre(a):
    from .errors import CertificateFailure, EmptyWindow
    from .model import build_model
    from .spectral import certificate_constants, mourre_residual

    cfg = _load_config(a.config)
    m = build_model(cfg)
    cc = certificate_constants(m, n_ladder=max(a.n, 2), seed=a.seed)
    g = _coupling(a, cc)
    try:
        rep = mourre_residual(m, g, a.n, cc, tol=a.tol, seed=a.seed)
    except (CertificateFailure, EmptyWindow) as e:
        return {"g": g, "n": a.n, "passed": False, "diagnostic": f"{type(e).__name__}: {e}"}, 2
    out = rep.to_dict()
    out["grid"] = _grid_info(m)
    if not rep.passed:
        out["diagnostic"] = f"lowest window eigenvalue {rep.lowest:.3e} is not positive"
    return out, 0 if rep.passed else 2


def cmd_repr_selftest(a):
    from .selftest import cg_suite, representation_suite

    res = representation_suite(a.cases, a.seed)
    res.update(cg_suite())
    tol = 1e-9
    ok = all(v <= tol for v in res.values())
    return {"residuals": res, "tol": tol, "cases": a.cases, "passed": ok}, 0 if ok else 2


COMMANDS = {
    "cg-table": cmd_cg_table,
    "boost": cmd_boost,
    "irrep": cmd_irrep,
    "field-eval": cmd_field_eval,
    "causality-scan": cmd_causality_scan,
    "build-model": cmd_build_model,
    "spectrum": cmd_spectrum,
    "gap-scan": cmd_gap_scan,
    "mourre": cmd_mourre,
    "repr-selftest": cmd_repr_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    def common(parser, default):
        parser.add_argument("--seed", type=int, default=0 if default else argparse.SUPPRESS)
        parser.add_argument("--out", default=None if default else argparse.SUPPRESS,
                            help="write the JSON report here instead of stdout")
        parser.add_argument("--reproducible", action="store_true", default=False if default else argparse.SUPPRESS,
                            help="omit wall time so reruns are byte-identical")

    p = argparse.ArgumentParser(prog="anyspin", description="Relativistic spin fields and the cutoff decay model.")
    common(p, True)
    shared = argparse.ArgumentParser(add_help=False)
    common(shared, False)
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[shared], **kw)

    sub.add_parser = add_parser

    s = sub.add_parser("cg-table", help="Clebsch-Gordan coefficients (spins as twice-integers)")
    s.add_argument("--j1", type=int, required=True, help="2 j1")
    s.add_argument("--j2", type=int, required=True, help="2 j2")
    s.add_argument("--j", type=int, default=None, help="2 j; all coupled spins when omitted")
    s.add_argument("--csv")

    s = sub.add_parser("boost", help="standard boost A_p")
    s.add_argument("--mass", type=float, required=True)
    for c in ("--px", "--py", "--pz"):
        s.add_argument(c, type=float, default=0.0)
    s.add_argument("--formalism", default="helicity")

    s = sub.add_parser("irrep", help="D^[J1,J2] of a standard boost or a random SL(2,C) element")
    s.add_argument("--j1", type=int, required=True, help="2 J1")
    s.add_argument("--j2", type=int, required=True, help="2 J2")
    s.add_argument("--boost", type=float, nargs=4, metavar=("MASS", "PX", "PY", "PZ"))
    s.add_argument("--formalism", default="canonical")

    for name in ("field-eval", "causality-scan"):
        s = sub.add_parser(name)
        s.add_argument("--j1", type=int, required=True, help="2 J1")
        s.add_argument("--j2", type=int, required=True, help="2 J2")
        s.add_argument("--j", type=int, default=None, help="2 j (massive)")
        s.add_argument("--mass", type=float, default=1.0)
        s.add_argument("--formalism", default="canonical")
        if name == "field-eval":
            for c in ("--px", "--py", "--pz"):
                s.add_argument(c, type=float, default=0.0)
            s.add_argument("--csv")
        else:
            s.add_argument("--points", help="CSV of spacelike four-vectors t,x,y,z")
            s.add_argument("--n-radial", type=int, default=400)
            s.add_argument("--n-polar", type=int, default=200)

    s = sub.add_parser("build-model")
    s.add_argument("--config")
    s.add_argument("--states", type=int, default=100)
    s.add_argument("--export", help="directory for triplet files of H0, H_I and the basis")

    for name in ("spectrum", "gap-scan", "mourre"):
        s = sub.add_parser(name)
        s.add_argument("--config")
        s.add_argument("--g", type=float, default=None, help="absolute coupling")
        s.add_argument("--g-fraction", type=float, default=0.125, help="coupling as a fraction of g1")
        s.add_argument("--tol", type=float, default=1e-10)
        if name == "spectrum":
            s.add_argument("--k", type=int, default=4)
        if name == "gap-scan":
            s.add_argument("--n-max", type=int, default=4)
        if name == "mourre":
            s.add_argument("--n", type=int, default=1)

    s = sub.add_parser("repr-selftest")
    s.add_argument("--cases", type=int, default=200)
    return p


def _strip_out(argv: list[str]) -> list[str]:
    # the output location is not an input
    kept, skip = [], False
    for tok in argv:
        if skip:
            skip = False
        elif tok == "--out":
            skip = True
        elif not tok.startswith("--out="):
            kept.append(tok)
    return kept


def manifest(args, argv: list[str], wall: float | None) -> dict:
    from . import __version__

    inputs = {"argv": _sha256(json.dumps(_strip_out(argv)).encode())}
    cfg = getattr(args, "config", None)
    if cfg:
        inputs["config"] = _sha256(Path(cfg).read_bytes())
    core = {"command": args.command, "config": cfg, "seed": args.seed, "version": __version__, "inputs": inputs}
    core["hash"] = _sha256(json.dumps(core, sort_keys=True).encode())
    core["wall_time"] = wall
    return core


def main(argv: list[str] | None = None) -> int:
    _set_threads()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    from .errors import AnyspinError

    if args.command in ("field-eval", "causality-scan") and args.j is None:
        args.j = abs(args.j1 - args.j2)
    t0 = time.perf_counter()
    try:
        body, code = COMMANDS[args.command](args)
    except (AnyspinError, ValueError, OSError) as e:
        err = {"error": type(e).__name__, "message": str(e)}
        if hasattr(e, "invariant"):
            err["invariant"] = e.invariant
        print(json.dumps(err), file=sys.stderr)
        return 1
    wall = None if args.reproducible else round(time.perf_counter() - t0, 6)
    report = {"manifest": manifest(args, argv, wall), "result": _jsonable(body)}
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
