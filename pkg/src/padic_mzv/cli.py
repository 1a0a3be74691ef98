"""Command-line front door: zeta, sigma, regularize, oracle, verify.

Configuration comes from an optional flat ``key = value`` file and from flags;
flags win.  JSON reports carry a ``schema_version``; CSV output has a header
row.  Exit codes: 0 success, 1 math-level failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from typing import Any, Sequence

from .mzv import FrobeniusEngine, WeightExceededError, _vp_factorial
from .oracle import Composition, SumTables, brute_sigma
from .padic import PadicError, PadicNumber, PrecisionBudget, is_prime
from .psf import psf_taylor
from .sigma import SigmaAlgebra
from .tables import exact_scale
from .words import all_words, parse_indices, word_to_zeta

SCHEMA_VERSION = "1"
COMMANDS = ("zeta", "sigma", "regularize", "oracle", "verify")

log = logging.getLogger("padic_mzv")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    p: int = 5
    N: int = 12
    W: int = 4
    D: int = 8
    n_max: int | None = None
    j_max: int = 6
    workers: int | None = None

    def resolved(self) -> "RunConfig":
        n_max = self.p**5 if self.n_max is None else self.n_max
        workers = self.workers if self.workers else (os.cpu_count() or 1)
        return RunConfig(self.p, self.N, self.W, self.D, n_max, self.j_max, workers)

    def validate(self) -> None:
        if not is_prime(self.p) or self.p == 2:
            raise UsageError(f"prime must be an odd prime, got {self.p}")
        if self.N < 4:
            raise UsageError(f"precision must be >= 4, got {self.N}")
        if self.W < 1:
            raise UsageError(f"weight must be >= 1, got {self.W}")
        if self.n_max is not None and self.n_max < self.p**3:
            raise UsageError(f"n_max must be >= p^3 = {self.p**3}, got {self.n_max}")
        if self.D < 1 or self.j_max < 2:
            raise UsageError("degree must be >= 1 and j_max >= 2")


# config-file keys and the flags that override them
_KEYS = {"prime": "p", "precision": "N", "weight": "W", "degree": "D",
         "n_max": "n_max", "j_max": "j_max", "workers": "workers"}


def read_config(path: str) -> dict[str, int]:
    out: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (x.strip() for x in line.split("=", 1))
            field_name = _KEYS.get(key.lower().replace("-", "_"))
            if field_name is None:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[field_name] = int(value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: {key} must be an integer") from None
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    values: dict[str, Any] = {}
    if args.config:
        try:
            values.update(read_config(args.config))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    for flag, name in (("prime", "p"), ("precision", "N"), ("weight", "W"), ("degree", "D"),
                       ("n_max", "n_max"), ("j_max", "j_max"), ("workers", "workers")):
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    args.explicit = set(values)
    known = {f.name for f in fields(RunConfig)}
    cfg = RunConfig(**{k: v for k, v in values.items() if k in known})
    cfg.validate()
    return cfg.resolved()


# ------------------------------------------------------------------ parser
def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--prime", type=int, help="odd prime p (default 5)")
    common.add_argument("--precision", type=int, help="target p-adic precision N (default 12)")
    common.add_argument("--weight", type=int, help="weight bound W (default 4)")
    common.add_argument("--degree", type=int, help="PSF fit degree D (default 8)")
    common.add_argument("--n-max", dest="n_max", type=int, help="grid bound (default p^5)")
    common.add_argument("--j-max", dest="j_max", type=int, help="limits are tested at n = p^j, j <= j_max")
    common.add_argument("--workers", type=int, help="worker pool size (default: available cores)")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json",
                     help="JSON report (default except for oracle)")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv",
                     help="CSV with header row (default for oracle)")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(prog="padic-mzv", description="p-adic multi-zeta values and regularized iterated sums")
    sub = parser.add_subparsers(dest="command", required=True)

    z = sub.add_parser("zeta", parents=[common], help="p-adic multi-zeta values with their regularized-value trace")
    z.add_argument("--indices", action="append",
                   help='"(s_k,...,s_1)"; repeatable; default: every index tuple of weight <= W')
    z.add_argument("--reversed", action="store_true", help="indices are given as (s_1,...,s_k)")
    z.add_argument("--emit-trace", action="store_true", help="include the expression in regularized values")

    s = sub.add_parser("sigma", parents=[common], help="iterated sum by brute force and by expansion")
    s.add_argument("--composition", required=True, help='"(s_1,...,s_k);(m_1,...,m_k)"')
    s.add_argument("--n", required=True, help="argument, or a comma-separated list")

    r = sub.add_parser("regularize", parents=[common], help="regularized values by two routes")
    r.add_argument("--composition", required=True, help='"(s_1,...,s_k);(m_1,...,m_k)"')
    r.add_argument("--taylor", type=int, default=3, help="number of Taylor coefficients of the regularized PSF")

    o = sub.add_parser("oracle", parents=[common], help="brute-force tables (CSV word,n,valuation,unit_digits)")
    o.add_argument("--composition", help="tabulate this iterated sum instead of the Frobenius words")
    o.add_argument("--words", help="comma-separated words over {0,1}; default all words of weight <= W")
    o.add_argument("--rows", type=int, help="largest n to emit (default p^3)")

    v = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    v.add_argument("--quick", action="store_true", help="smaller case counts")
    return parser


# ------------------------------------------------------------------ commands
def _padic(x: PadicNumber, N: int | None = None) -> dict:
    out = x.to_json()
    if N is not None:
        capped = x.with_precision(min(N, x.precision))
        out = capped.to_json()
        out["tracked_precision"] = x.precision
    return out


def cmd_zeta(args, cfg: RunConfig) -> tuple[dict, list[list]]:
    requested = []
    for text in args.indices or []:
        idx = parse_indices(text)
        requested.append(tuple(reversed(idx)) if args.reversed else idx)
    W = cfg.W
    if requested and "W" not in getattr(args, "explicit", ()):
        W = max(sum(i) for i in requested)
        cfg.W = W  # the envelope reports the weight actually solved
    if not requested:
        requested = [word_to_zeta(w) for w in all_words(W)[1:] if w.endswith("1")]
    for idx in requested:
        if sum(idx) > W:
            raise WeightExceededError(f"weight {sum(idx)} of {idx} exceeds --weight {W}")
    budget = PrecisionBudget(cfg.N)
    engine = FrobeniusEngine(cfg.p, cfg.N, W, cfg.D, cfg.n_max, cfg.j_max, budget=budget)
    sol = engine.solve()
    results, rows = [], [["indices", "word", "weight", "valuation", "unit_digits", "precision"]]
    for idx in requested:
        z = sol.zeta(idx)
        item = z.to_json(emit_trace=args.emit_trace)
        item["value"] = _padic(z.value, cfg.N)
        results.append(item)
        val = item["value"]
        rows.append(["(" + ",".join(map(str, idx)) + ")", z.word, z.weight, val["valuation"],
                     val["unit_digits"], val["precision"]])
    diag = sol.diagnostics
    report = {"values": results,
              "diagnostics": {"identity_residual_min_valuation": diag.get("identity_residual_min_valuation"),
                              "grouplike_g": diag.get("grouplike_g"), "grouplike_h": diag.get("grouplike_h"),
                              "ranks": diag.get("ranks"), "limits_final_increment":
                                  {w: inc[-1] for w, inc in diag.get("limits", {}).items()}},
              "precision_loss": budget.report()}
    return report, rows


def _algebra(cfg: RunConfig, weight: int, budget: PrecisionBudget) -> SigmaAlgebra:
    scale = exact_scale(cfg.p, cfg.n_max, max(weight, 1) + 1, cfg.N)
    threshold = cfg.N - (_vp_factorial(cfg.D, cfg.p) + cfg.D + 2)
    return SigmaAlgebra(SumTables(scale), cfg.D, threshold, budget)


def _composition(text: str, p: int) -> Composition:
    try:
        return Composition.parse(text).check(p)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_sigma(args, cfg: RunConfig) -> tuple[dict, list[list]]:
    c = _composition(args.composition, cfg.p)
    try:
        ns = [int(x) for x in args.n.split(",")]
    except ValueError:
        raise UsageError("--n must be an integer or a comma-separated list") from None
    if any(n < 1 or n > cfg.n_max for n in ns):
        raise UsageError(f"--n must lie in [1, n_max = {cfg.n_max}]")
    budget = PrecisionBudget(cfg.N)
    alg = _algebra(cfg, c.weight, budget)
    expr = alg.expand_sigma(c)
    table = expr.table()
    out, rows = [], [["n", "brute_valuation", "brute_unit_digits", "expanded_valuation",
                      "expanded_unit_digits", "equal"]]
    all_equal = True
    for n in ns:
        b = brute_sigma(c, n, cfg.p, cfg.N, budget)
        e = table[n]
        prec = min(b.precision, e.precision)
        equal = (b - e).with_precision(prec).is_zero
        all_equal = all_equal and equal
        terms = {"(" + ",".join(map(str, t)) + ")": coeff.values()[n].to_json() for t, coeff in expr.terms.items()}
        out.append({"n": n, "brute": _padic(b), "expanded": _padic(e), "equal": equal, "terms": terms})
        rows.append([n, b.valuation, b.to_json()["unit_digits"], e.valuation, e.to_json()["unit_digits"], equal])
    report = {"composition": c.to_json(), "values": out, "all_equal": all_equal,
              "basis": ["(" + ",".join(map(str, t)) + ")" for t in expr.basis()],
              "precision_loss": budget.report()}
    if not all_equal:
        report["error"] = {"type": "ExpansionMismatch", "message": "expansion disagrees with brute force"}
    return report, rows


def cmd_regularize(args, cfg: RunConfig) -> tuple[dict, list[list]]:
    c = _composition(args.composition, cfg.p)
    budget = PrecisionBudget(cfg.N)
    alg = _algebra(cfg, c.weight + args.taylor, budget)
    sb = alg.sigma_bar(c).value
    col = alg.regularize_by_collocation(c)
    d = sb - col
    agreement = d.precision if d.is_zero else d.valuation
    tilde = alg.sigma_tilde(c)
    taylor = [psf_taylor(tilde, j) for j in range(args.taylor)]
    report = {"composition": c.to_json(),
              "sigma_bar": _padic(sb, cfg.N), "sigma_bar_collocation": _padic(col, cfg.N),
              "agreement_valuation": agreement,
              "sigma_tilde_taylor": [_padic(x, cfg.N) for x in taylor],
              "precision_loss": budget.report()}
    rows = [["quantity", "valuation", "unit_digits", "precision"]]
    for name, x in [("sigma_bar", sb), ("sigma_bar_collocation", col)] + \
            [(f"taylor_{j}", x) for j, x in enumerate(taylor)]:
        j = _padic(x, cfg.N)
        rows.append([name, j["valuation"], j["unit_digits"], j["precision"]])
    if c.m[-1] == 0 and c.depth >= 1:
        gb = alg.gamma_bar(c).value
        report["gamma_bar"] = _padic(gb, cfg.N)
        j = report["gamma_bar"]
        rows.append(["gamma_bar", j["valuation"], j["unit_digits"], j["precision"]])
    return report, rows


def cmd_oracle(args, cfg: RunConfig) -> tuple[dict, list[list]]:
    p = cfg.p
    last = args.rows if args.rows else p**3
    if last < 1:
        raise UsageError("--rows must be >= 1")
    rows = [["word", "n", "valuation", "unit_digits"]]
    budget = PrecisionBudget(cfg.N)
    if args.composition:
        c = _composition(args.composition, p)
        scale = exact_scale(p, last, max(c.weight, 1), cfg.N)
        table = SumTables(scale).sigma(c)
        label = args.composition
        for n in range(1, last + 1):
            x = table[n].with_precision(min(cfg.N, table[n].precision))
            rows.append([label, n, x.valuation, x.to_json()["unit_digits"]])
        return {"composition": c.to_json(), "rows": len(rows) - 1, "table": rows[1:],
                "precision_loss": budget.report()}, rows
    words = args.words.split(",") if args.words else all_words(cfg.W)[1:]
    if any(not w or set(w) - {"0", "1"} for w in words):
        raise UsageError("--words must be nonempty words over {0,1}")
    W = max(len(w) for w in words)
    engine = FrobeniusEngine(p, cfg.N, W, cfg.D, cfg.n_max, cfg.j_max, budget=budget,
                             check_tables=False, check_limits=False)
    sol = engine.solve()
    tables = engine.oracle_tables(sol, last)
    for w in words:
        for n in range(1, last + 1):
            x = tables[w][n]
            x = x.with_precision(min(cfg.N, x.precision))
            rows.append([w, n, x.valuation, x.to_json()["unit_digits"]])
    return {"words": words, "rows": len(rows) - 1, "table": rows[1:], "precision_loss": budget.report()}, rows


def cmd_verify(args, cfg: RunConfig) -> tuple[dict, list[list]]:
    from .verify import run_suite

    suite = run_suite(cfg.p, cfg.N, cfg.W, cfg.D, cfg.n_max, cfg.j_max, quick=args.quick, workers=cfg.workers)
    checks = suite.checks
    rows = [["check", "passed", "gating", "cases", "worst_valuation", "tolerance"]]
    for c in checks:
        rows.append([c.name, c.passed, c.gating, c.cases, c.worst, c.tolerance])
    failed = suite.failed
    report = {"checks": [c.to_json() for c in checks], "failed": failed, "all_passed": not failed,
              "precision_loss": suite.precision_loss}
    if failed:
        report["error"] = {"type": "InvariantFailure", "message": f"failed checks: {', '.join(failed)}"}
    return report, rows


HANDLERS = {"zeta": cmd_zeta, "sigma": cmd_sigma, "regularize": cmd_regularize,
            "oracle": cmd_oracle, "verify": cmd_verify}


# ------------------------------------------------------------------ output
def _envelope(command: str, cfg: RunConfig | None, body: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command,
            "config": asdict(cfg) if cfg else None, **body,
            "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds")}


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(rows: Sequence[Sequence]) -> str:
    import io

    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def run(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    cfg = None
    try:
        cfg = build_config(args)
        report, rows = HANDLERS[args.command](args, cfg)
    except (UsageError, WeightExceededError) as exc:
        parser.print_usage(sys.stderr)
        print(f"padic-mzv: error: {exc}", file=sys.stderr)
        return 2
    except (PadicError, ValueError) as exc:
        body = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        _emit(json.dumps(_envelope(args.command, cfg, body), indent=2) + "\n", args.output)
        return 1
    fmt = args.fmt or ("csv" if args.command == "oracle" else "json")
    if fmt == "csv":
        _emit(_csv_text(rows), args.output)
    else:
        _emit(json.dumps(_envelope(args.command, cfg, report), indent=2) + "\n", args.output)
    return 1 if "error" in report else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
