"""Command-line driver: ``lsness {verify,ness,observe,scan,partition}``."""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__
from .exceptions import LSNessError
from .report import Report

SCHEMA_VERSION = 1
DEFAULTS = {
    "n": "3",
    "eps": "1.0",
    "mu": "0.0",
    "sector": None,
    "mode": "numeric",
    "cutoff": None,
    "tol": 1e-10,
    "state_tol": 1e-8,
    "format": "json",
    "out": None,
    "jobs": 1,
    "obs": "partition",
    "i": 1,
    "j": None,
    "x": 1,
    "fit": False,
    "negative_control": False,
    "what": "both",
}


# ---------------------------------------------------------------------------
# parsing


def parse_ints(text) -> list:
    """``"4"``, ``"2..8"`` or ``"2,3,5"``."""
    text = str(text).strip()
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise ValueError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    out = [int(t) for t in text.split(",") if t.strip()]
    if not out:
        raise ValueError("empty integer list")
    return out


def parse_floats(text) -> list:
    """``"1.0"`` or ``"0.5,2"``; fractions like ``1/2`` are accepted."""
    out = [float(Fraction(t.strip())) for t in str(text).split(",") if t.strip()]
    if not out:
        raise ValueError("empty list")
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", help="chain length: INT, LO..HI or a comma list")
    common.add_argument("--eps", help="coupling: FLOAT or comma list")
    common.add_argument("--mu", help="hole chemical potential: FLOAT or comma list")
    common.add_argument("--sector", type=int, help="hole-number sector")
    common.add_argument("--mode", choices=["exact", "numeric"])
    common.add_argument("--exact", action="store_const", const="exact", dest="mode",
                        help="shorthand for --mode exact")
    common.add_argument("--cutoff", type=int, help="auxiliary lattice cutoff override")
    common.add_argument("--tol", type=float, help="tolerance for numeric identities")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--jobs", type=int, help="worker cap for grid points")
    common.add_argument("--config", help="JSON file with default values for any flag")

    parser = argparse.ArgumentParser(prog="lsness", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="run the identity suite")
    v.add_argument("--negative-control", action="store_true", dest="negative_control",
                   help="run the boundary system with the wrong Verma weight")
    ness = sub.add_parser("ness", parents=[common], help="dump S_n and/or rho")
    ness.add_argument("--what", choices=["cholesky", "density", "both"])
    o = sub.add_parser("observe", parents=[common], help="observable table")
    o.add_argument("--obs", choices=["partition", "doping", "current", "density", "profile"])
    o.add_argument("--i", type=int, help="species index")
    o.add_argument("--j", type=int, help="second species for a partial current")
    o.add_argument("--x", type=int, help="site or bond")
    s = sub.add_parser("scan", parents=[common], help="Z_n, doping and current over a grid")
    s.add_argument("--fit", action="store_true", help="fit log Z_n on {n, n log n}")
    sub.add_parser("partition", parents=[common], help="partition functions")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Flags over config file over defaults."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg.update({k.replace("-", "_"): v for k, v in json.load(fh).items()})
    for k, v in vars(args).items():
        if v is not None and v is not False and k != "config":
            cfg[k] = v
    cfg["command"] = args.command
    if cfg["tol"] is None or float(cfg["tol"]) <= 0:
        raise ValueError("tolerance must be positive")
    cfg["n_list"] = parse_ints(cfg["n"])
    cfg["eps_list"] = parse_floats(cfg["eps"])
    cfg["mu_list"] = parse_floats(cfg["mu"])
    return cfg


def _echo(cfg: dict) -> dict:
    # worker count is left out so parallel and serial runs are byte-identical
    keys = ["command", "n", "eps", "mu", "sector", "mode", "cutoff", "tol", "format"]
    return {k: cfg.get(k) for k in keys}


# ---------------------------------------------------------------------------
# output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    return obj


def _rows_to_csv(rows: list) -> str:
    cols: list = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in cols})
    return buf.getvalue()


def _emit(cfg: dict, payload: dict, rows: list | None = None) -> None:
    if cfg["format"] == "csv" and rows is not None:
        text = _rows_to_csv(rows)
    else:
        payload = {"schema_version": SCHEMA_VERSION, "config": _echo(cfg), **payload}
        text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    if cfg.get("out"):
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _grid(cfg: dict) -> list:
    return list(itertools.product(cfg["n_list"], cfg["eps_list"], cfg["mu_list"]))


def _map(cfg: dict, fn, items: list) -> list:
    jobs = int(cfg.get("jobs") or 1)
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


# ---------------------------------------------------------------------------
# verify


def _guard(report: Report, name: str, fn) -> None:
    try:
        sub = fn()
    except (LSNessError, ValueError, ArithmeticError) as exc:
        report.add(name, False, math.nan, detail=f"{type(exc).__name__}: {exc}")
        return
    if isinstance(sub, Report):
        report.extend(sub, prefix=name)


def verify_suite(n: int, eps: float, tol: float = 1e-10, state_tol: float = 1e-8,
                 negative_control: bool = False, mu: float = 0.0) -> Report:
    """Every construction-level and oracle check at chain length ``n``."""
    from . import auxrep, mpo, observables, oracle

    report = Report(f"verify n={n} eps={eps} mu={mu}")
    exact5 = auxrep.build_generators(auxrep.ReprParams(cutoff=5))
    _guard(report, "lie-algebra", lambda: auxrep.check_lie_algebra(exact5))
    _guard(report, "lie-algebra-conjugate", lambda: auxrep.check_lie_algebra(auxrep.build_conjugate(exact5)))
    _guard(report, "vacuum", lambda: auxrep.check_vacuum_conditions(exact5))
    _guard(report, "weyl-heisenberg", lambda: auxrep.check_weyl_heisenberg(auxrep.ReprParams(cutoff=5)))
    _guard(report, "levi", lambda: auxrep.check_levi_structure(exact5))
    _guard(report, "sutherland", lambda: mpo.check_sutherland(auxrep.ReprParams(cutoff=4)))
    _guard(report, "boundary-system", lambda: mpo.check_boundary_system(auxrep.ReprParams(cutoff=3)))
    if negative_control:
        def control():
            bad = auxrep.build_generators(auxrep.ReprParams(cutoff=3, spin_branch=-1))
            good = auxrep.build_generators(auxrep.ReprParams(cutoff=3))
            return mpo.check_boundary_system(lax=bad, lbar=auxrep.build_conjugate(good))
        _guard(report, "negative-control/boundary-system", control)
    _guard(report, "aux-symmetries", lambda: observables.check_aux_symmetries())
    if n >= 2:
        _guard(report, "defining-relation", lambda: mpo.check_defining_relation(n))
    if n <= 6:
        _guard(report, "transfer-commutation",
               lambda: mpo.check_transfer_commutation(n, Fraction(1, 2), Fraction(2)))
    if n <= 5:
        def wgs():
            r = Report("wgs")
            same = mpo.wgs_contract(n).data == mpo.contract_cholesky(n).data
            r.add("wgs == lax", same, 0.0 if same else 1.0)
            return r
        _guard(report, "wgs", wgs)
        _guard(report, "parities", lambda: mpo.check_parities(n))
    if 2 <= n <= 4:
        def oracle_checks():
            r = Report("oracle")
            model = oracle.build_model(n, eps)
            states = oracle.steady_states(model)
            rho = mpo.grand_canonical_density(n, eps, mu, tol=tol)
            res = oracle.liouvillian_residual(model, rho)
            r.add("liouvillian residual", res <= tol, res)
            base = mpo.build_density(n, mpo.default_params(n, eps))
            worst = 0.0
            for nu, op in states:
                a = mpo.project_sector(base, nu).toarray().ravel()
                b = op.toarray().ravel()
                ov = abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))
                worst = max(worst, 1 - ov)
            r.add("sector overlap", worst <= state_tol, worst)
            kd = oracle.kernel_dimensions(model)
            total = sum(kd.values())
            r.add("diagonal kernel dimension", total == n + 1, total, detail=str(kd))
            return r
        _guard(report, "oracle", oracle_checks)
        if n <= 3:
            _guard(report, "oracle-invariants", lambda: oracle.check_oracle_invariants(n, eps))
    if n >= 2 and eps != 0:
        def currents():
            r = Report("currents")
            z = observables.partition_function(n, eps, mu)
            zm = observables.partition_function(n - 1, eps, mu) if n > 1 else 1.0
            prof = observables.current_profile(1, n, eps, mu)
            prof3 = observables.current_profile(3, n, eps, mu)
            want = 2 * eps * zm / z
            r.add("<J1> = 2 eps Z_{n-1}/Z_n", abs(prof[0] - want) <= tol * abs(want), abs(prof[0] - want))
            r.add("<J3> = -<J1>", abs(prof3[0] + prof[0]) <= tol * abs(want), abs(prof3[0] + prof[0]))
            spread = float(prof.max() - prof.min())
            r.add("bond independence", spread <= tol * abs(want), spread)
            return r
        _guard(report, "currents", currents)
    return report


def cmd_verify(cfg: dict) -> int:
    items = _grid(cfg)

    def run(item):
        n, eps, mu = item
        return verify_suite(n, eps, float(cfg["tol"]), float(cfg["state_tol"]),
                            bool(cfg["negative_control"]), mu)

    reports = _map(cfg, run, items)
    passed = all(r.passed for r in reports)
    rows = [{"n": n, "epsilon": e, "mu": m, **res.to_dict()}
            for (n, e, m), rep in zip(items, reports) for res in rep.results]
    _emit(cfg, {"passed": passed, "reports": [r.to_dict() for r in reports]}, rows)
    for r in reports:
        for f in r.failures:
            print(f"FAIL {r.title}: {f.name} residual={f.residual:.3g} {f.detail}", file=sys.stderr)
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# ness


def _traces(op, exact: bool, n: int):
    from .physical import hole_counts

    holes = hole_counts(n)
    if exact:
        out = {}
        for (r, c), v in op.data.items():
            if r == c:
                nu = int(holes[r])
                out[nu] = out[nu] + v if nu in out else v
        return {nu: str(out[nu]) for nu in sorted(out)}
    d = op.tosparse().diagonal()
    return {nu: float(d[holes == nu].sum().real) for nu in range(n + 1)}


def cmd_ness(cfg: dict) -> int:
    from .auxrep import ReprParams
    from .mpo import contract_cholesky, grand_canonical_cholesky, project_sector

    exact = cfg["mode"] == "exact"
    out, rows = {}, []
    for n, eps, mu in _grid(cfg):
        cutoff = cfg["cutoff"] or max(n, 2)
        if exact:
            S = contract_cholesky(n, ReprParams(cutoff=cutoff))
        else:
            S = grand_canonical_cholesky(n, eps, mu, cutoff=cutoff)
        if cfg["sector"] is not None:
            S = project_sector(S, cfg["sector"])
        rho = S @ S.dagger()
        traces = _traces(rho, exact, n)
        if exact:
            z = str(sum((v for (r, c), v in rho.data.items() if r == c), start=rho.data[(0, 0)] * 0)) \
                if rho.data else "0"
        else:
            z = float(rho.tosparse().diagonal().sum().real)
        header = {"n": n, "epsilon": None if exact else eps, "mu": None if exact else mu,
                  "mode": cfg["mode"], "sector": cfg["sector"], "cutoff": cutoff,
                  "normalized": False, "Z": z, "sector_traces": traces}
        entry = {}
        for name, op in (("cholesky", S), ("density", rho)):
            if cfg["what"] in (name, "both"):
                entry[name] = json.loads(op.to_json(header))
                for (r, c), v in sorted(op.entries().items()):
                    row = {"n": n, "epsilon": header["epsilon"], "mu": header["mu"],
                           "operator": name, "row": r, "col": c}
                    if exact:
                        row["value"] = str(v)
                    else:
                        row["value_re"], row["value_im"] = v.real, v.imag
                    rows.append(row)
        out[f"n={n},eps={eps},mu={mu}"] = entry
    _emit(cfg, {"operators": out}, rows)
    return 0


# ---------------------------------------------------------------------------
# observe / scan / partition


def _observe_rows(cfg: dict, item) -> tuple:
    from . import observables as ob

    n, eps, mu = item
    prov = {"mode": "numeric", "cutoff": n // 2 + 1, "tol": cfg["tol"]}
    obs = cfg["obs"]
    ok = True
    rows = []
    if obs == "partition":
        rows.append(ob.record(n, eps, mu, "Z", ob.partition_function(n, eps, mu), **prov))
    elif obs == "doping":
        d = ob.doping(n, eps, mu)
        ok = d["agree"]
        rows.append(ob.record(n, eps, mu, "doping", d["sector"], **prov))
        rows.append(ob.record(n, eps, mu, "doping_difference", d["difference"], **prov))
    elif obs == "current":
        i, j, x = int(cfg["i"]), cfg["j"], int(cfg["x"])
        if not 1 <= x < n:
            raise ValueError(f"bond {x} outside 1..{n - 1}")
        js = (1, 2, 3) if j is None else (int(j),)
        val = sum(ob.current_expectation(i, jj, x, n, eps, mu) for jj in js)
        name = f"J{i}" if j is None else f"J{i}{j}"
        rows.append(ob.record(n, eps, mu, name, val, sites=[x, x + 1], **prov))
        if j is None and i in (1, 3) and n >= 2:
            ratio = val * ob.partition_function(n, eps, mu) / ob.partition_function(n - 1, eps, mu)
            want = 2 * eps * (1 if i == 1 else -1)
            ok = abs(ratio - want) <= float(cfg["tol"]) * max(abs(want), 1.0)
    elif obs == "density":
        e = np.zeros((3, 3))
        e[int(cfg["i"]) - 1, int(cfg["i"]) - 1] = 1
        x = int(cfg["x"])
        rows.append(ob.record(n, eps, mu, f"e{cfg['i']}{cfg['i']}", ob.local_expectation(e, x, n, eps, mu),
                              sites=[x], **prov))
    elif obs == "profile":
        prof = ob.density_profile(int(cfg["i"]), n, eps, mu)
        for x, v in enumerate(prof, start=1):
            rows.append(ob.record(n, eps, mu, f"e{cfg['i']}{cfg['i']}", v, sites=[x], **prov))
    return rows, ok


def cmd_observe(cfg: dict) -> int:
    results = _map(cfg, lambda it: _observe_rows(cfg, it), _grid(cfg))
    rows = [r for rs, _ in results for r in rs]
    ok = all(flag for _, flag in results)
    _emit(cfg, {"passed": ok, "rows": rows}, rows)
    return 0 if ok else 1


def cmd_scan(cfg: dict) -> int:
    from . import observables as ob

    def point(item):
        n, eps, mu = item
        z = ob.partition_function(n, eps, mu)
        row = ob.record(n, eps, mu, "Z", z, log_z=math.log(z), mode="numeric",
                        cutoff=n // 2 + 1, tol=cfg["tol"])
        row["doping"] = ob.doping(n, eps, mu)["sector"]
        if n >= 2:
            row["J1"] = sum(ob.current_expectation(1, j, 1, n, eps, mu) for j in (1, 2, 3))
        return row

    rows = _map(cfg, point, _grid(cfg))
    payload: dict = {"rows": rows}
    ok = True
    if cfg["fit"]:
        fits = []
        for eps, mu in itertools.product(cfg["eps_list"], cfg["mu_list"]):
            try:
                f = ob.scaling_fit(eps, mu, cfg["n_list"])
                fits.append(f.to_dict())
            except ValueError as exc:
                ok = False
                fits.append({"epsilon": eps, "mu": mu, "error": str(exc)})
        payload["fits"] = fits
        if cfg["format"] == "csv":
            rows = rows + [{"observable": "fit", "epsilon": f.get("epsilon"), "mu": f.get("mu"),
                            "alpha": f.get("alpha"), "beta1": f.get("beta1"),
                            "intercept": f.get("intercept")} for f in fits]
    _emit(cfg, payload, rows)
    return 0 if ok else 1


def cmd_partition(cfg: dict) -> int:
    from . import observables as ob

    rows = []
    if cfg["mode"] == "exact":
        for n in cfg["n_list"]:
            rows.append({"n": n, "observable": "Z", "value": str(ob.partition_function_exact(n)),
                         "mode": "exact"})
    else:
        rows = _map(cfg, lambda it: ob.record(*it, "Z", ob.partition_function(*it), mode="numeric",
                                              cutoff=it[0] // 2 + 1, tol=cfg["tol"]), _grid(cfg))
    _emit(cfg, {"rows": rows}, rows)
    return 0


COMMANDS = {"verify": cmd_verify, "ness": cmd_ness, "observe": cmd_observe,
            "scan": cmd_scan, "partition": cmd_partition}


def _join_negative_values(argv: list) -> list:
    """Rewrite ``--mu -1,0`` as ``--mu=-1,0`` so argparse does not read an option."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--n", "--eps", "--mu", "--tol"):
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and nxt[1:2].isdigit():
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_negative_values(argv))
    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg["command"]](cfg)
    except (LSNessError, ValueError, TypeError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
