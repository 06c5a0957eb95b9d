"""Command-line front end.

Subcommands: gen, phi, xi, exact, tree-decay, alpha-star, rho-threshold,
de, phi-derivative-check.  Structured output is JSON (CSV for sweeps),
written to stdout or --out, with the full run configuration embedded so
any output can be reproduced bit-for-bit from itself.  The seed comes
from --seed or the KSAT_SEED environment variable.

Exit codes: 0 success, 2 usage or invalid parameters, 3 instance over
the oracle cap, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import de as de_mod
from . import interpolate, oracle, trees
from .errors import InstanceTooLarge, KsatError
from .formula import (
    Formula,
    generate_random,
    generation_comment,
    parse_dimacs,
    read_generation_comment,
    write_dimacs,
)
from .output import dumps_json, format_csv, format_float

__all__ = ["main", "build_argv"]

_EXIT_OK = 0
_EXIT_USAGE = 2
_EXIT_CAP = 3
_EXIT_IO = 4


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # keep argparse's exit code 2, quiet usage dump
        self.exit(_EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser, *, needs_seed: bool) -> None:
    p.add_argument("--out", "-o", default=None, help="output path (default stdout)")
    p.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker hint; results are independent of this value",
    )
    p.add_argument(
        "--seed",
        type=int,
        default=None,
        required=False,
        help="RNG seed (falls back to KSAT_SEED)" if needs_seed else "provenance seed",
    )


def _resolve_seed(args, *, required: bool) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("KSAT_SEED")
    if env is not None:
        return int(env)
    if required:
        raise KsatError("a seed is required (--seed or KSAT_SEED)")
    return None


def _parse_beta(text: str, *, allow_inf: bool) -> float:
    val = float(text)
    if math.isinf(val) and not allow_inf:
        raise KsatError("beta=inf is not supported by this command")
    if math.isnan(val) or val < 0:
        raise KsatError(f"beta must be >= 0, got {text}")
    return val


def _load_cnf(path: str) -> tuple[Formula, int | None]:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    meta = read_generation_comment(text)
    return parse_dimacs(text), (meta["seed"] if meta else None)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _config(args, command: str, keys: list[str]) -> dict:
    cfg = {"command": command}
    for key in keys:
        cfg[key] = getattr(args, key.replace("-", "_"))
    return cfg


def build_argv(config: dict) -> list[str]:
    """Reconstruct an argv from an embedded run configuration."""
    argv = [config["command"]]
    for key, val in config.items():
        if key == "command" or val is None:
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                argv.append(flag)
        elif isinstance(val, float):
            argv += [flag, format_float(val)]
        else:
            argv += [flag, str(val)]
    return argv


def _cmd_gen(args) -> int:
    seed = _resolve_seed(args, required=True)
    if (args.m is None) == (args.alpha is None):
        raise KsatError("provide exactly one of --m / --alpha")
    m = args.m if args.m is not None else round(args.alpha * args.n)
    f = generate_random(args.n, m, args.k, seed)
    alpha = m / args.n if args.n else 0.0
    text = write_dimacs(f, comments=(generation_comment(args.k, alpha, seed),))
    _emit(text, args.out)
    return _EXIT_OK


def _cmd_phi(args) -> int:
    f, gen_seed = _load_cnf(args.cnf)
    beta = _parse_beta(args.beta, allow_inf=False)
    plan = interpolate.make_plan(beta, f.num_vars, args.steps)
    res = interpolate.estimate_log_partition(f, plan, seed=gen_seed)
    payload = {
        "config": _config(args, "phi", ["cnf", "beta", "steps", "threads"]),
        "n": res.num_vars,
        "m": res.num_clauses,
        "k": res.k,
        "beta": res.beta,
        "n_steps": res.n_steps,
        "phi": res.phi,
        "log2_term": res.log2_term,
        "energy_integral": res.energy_integral,
        "seed": res.seed,
        "rule": res.rule,
    }
    _emit(dumps_json(payload), args.out)
    return _EXIT_OK


def _cmd_xi(args) -> int:
    f, gen_seed = _load_cnf(args.cnf)
    res = interpolate.estimate_good_count(
        f, args.epsilon, a_const=args.a_const, override_steps=args.steps, seed=gen_seed
    )
    payload = {
        "config": _config(args, "xi", ["cnf", "epsilon", "a-const", "steps", "threads"]),
        "n": res.num_vars,
        "m": res.num_clauses,
        "k": res.k,
        "epsilon": args.epsilon,
        "beta": res.beta,
        "n_steps": res.n_steps,
        "log_xi": res.phi,
        "phi": res.phi,
        "seed": res.seed,
    }
    _emit(dumps_json(payload), args.out)
    return _EXIT_OK


def _cmd_exact(args) -> int:
    f, gen_seed = _load_cnf(args.cnf)
    beta = _parse_beta(args.beta, allow_inf=True)
    summary = oracle.enumerate_exact(f, beta)
    payload = {
        "config": _config(args, "exact", ["cnf", "beta", "threads"]),
        "n": summary.num_vars,
        "m": summary.num_clauses,
        "k": summary.k,
        "beta": summary.beta,
        "log_z": summary.log_z,
        "energy_mean": summary.energy_mean,
        "energy_second_moment": summary.energy_second_moment,
        "histogram": summary.histogram,
        "seed": gen_seed,
    }
    _emit(dumps_json(payload), args.out)
    return _EXIT_OK


def _cmd_tree_decay(args) -> int:
    seed = _resolve_seed(args, required=True)
    beta = _parse_beta(args.beta, allow_inf=False)
    stats = trees.decay_experiment(
        args.k, args.alpha, beta, args.depth, args.samples, seed
    )
    cfg = _config(args, "tree-decay", ["k", "alpha", "beta", "depth", "samples", "threads"])
    cfg["seed"] = seed
    rows = [
        [args.k, args.alpha, beta, s.depth, s.samples, s.mean_tanh_delta, s.stderr]
        for s in stats
    ]
    text = format_csv(
        ["k", "alpha", "beta", "depth", "samples", "mean_tanh_delta", "stderr"],
        rows,
        comment="config " + dumps_json(cfg).strip(),
    )
    _emit(text, args.out)
    return _EXIT_OK


def _cmd_alpha_star(args) -> int:
    payload = {
        "config": _config(args, "alpha-star", ["k", "threads"]),
        "k": args.k,
        "alpha_star": trees.contraction_threshold(args.k),
    }
    _emit(dumps_json(payload), args.out)
    return _EXIT_OK


def _cmd_rho_threshold(args) -> int:
    res = trees.forcing_threshold(args.k, depth=args.depth, tol=args.tol)
    payload = {
        "config": _config(args, "rho-threshold", ["k", "depth", "tol", "threads"]),
        "k": args.k,
        "rho_threshold": res.alpha,
        "bracket_lo": res.bracket_lo,
        "bracket_hi": res.bracket_hi,
        "depth": res.depth,
        "tol": res.tol,
    }
    _emit(dumps_json(payload), args.out)
    return _EXIT_OK


def _moments(pop) -> list[float]:
    import numpy as np

    return [float(np.mean(pop**p)) for p in range(1, 5)]


def _cmd_de(args) -> int:
    seed = _resolve_seed(args, required=True)
    beta = _parse_beta(args.beta, allow_inf=False)
    fp = de_mod.fixed_point(
        args.k,
        args.alpha,
        beta,
        pop_size=args.pop_size,
        max_iters=args.max_iters,
        tol=args.tol,
        seed=seed,
    )
    phi, stderr = de_mod.free_energy_density(
        fp, n_eval_samples=args.eval_samples, seed=seed
    )
    cfg = _config(
        args,
        "de",
        ["k", "alpha", "beta", "pop-size", "max-iters", "tol", "eval-samples", "threads"],
    )
    cfg["seed"] = seed
    payload = {
        "config": cfg,
        "k": args.k,
        "alpha": args.alpha,
        "beta": beta,
        "pop_size": args.pop_size,
        "iters": fp.iterations,
        "converged": fp.converged,
        "phi": phi,
        "phi_stderr": stderr,
        "mu_moments": _moments(fp.mu_star),
        "nu_moments": _moments(fp.nu_star),
    }
    _emit(dumps_json(payload), args.out)
    return _EXIT_OK


def _cmd_phi_derivative_check(args) -> int:
    seed = _resolve_seed(args, required=True)
    beta = _parse_beta(args.beta, allow_inf=False)
    chk = de_mod.free_energy_derivative_check(
        args.k,
        args.alpha,
        beta,
        dbeta=args.dbeta,
        pop_size=args.pop_size,
        n_eval_samples=args.eval_samples,
        seed=seed,
    )
    cfg = _config(
        args,
        "phi-derivative-check",
        ["k", "alpha", "beta", "dbeta", "pop-size", "eval-samples", "threads"],
    )
    cfg["seed"] = seed
    payload = {
        "config": cfg,
        "k": args.k,
        "alpha": args.alpha,
        "beta": beta,
        "dbeta": args.dbeta,
        "finite_difference": chk.finite_difference,
        "finite_difference_stderr": chk.finite_difference_stderr,
        "derivative_estimate": chk.derivative_estimate,
        "derivative_stderr": chk.derivative_stderr,
        "gap": chk.gap,
        "combined_stderr": chk.combined_stderr,
    }
    _emit(dumps_json(payload), args.out)
    return _EXIT_OK


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="ksat-count", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random formula as DIMACS CNF")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    _add_common(p, needs_seed=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("phi", help="interpolation estimate of log Z(beta)")
    p.add_argument("--cnf", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--steps", type=int, default=None, help="override grid size (default N^2)")
    _add_common(p, needs_seed=False)
    p.set_defaults(func=_cmd_phi)

    p = sub.add_parser("xi", help="estimate log #assignments violating <= N*eps clauses")
    p.add_argument("--cnf", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--a-const", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=None)
    _add_common(p, needs_seed=False)
    p.set_defaults(func=_cmd_xi)

    p = sub.add_parser("exact", help="brute-force partition function (beta may be inf)")
    p.add_argument("--cnf", required=True)
    p.add_argument("--beta", required=True)
    _add_common(p, needs_seed=False)
    p.set_defaults(func=_cmd_exact)

    p = sub.add_parser("tree-decay", help="interval-decay sweep on random trees (CSV)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    _add_common(p, needs_seed=True)
    p.set_defaults(func=_cmd_tree_decay)

    p = sub.add_parser("alpha-star", help="contraction threshold")
    p.add_argument("--k", type=int, required=True)
    _add_common(p, needs_seed=False)
    p.set_defaults(func=_cmd_alpha_star)

    p = sub.add_parser("rho-threshold", help="vanishing-forcing threshold (beta=inf bound)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--depth", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-8)
    _add_common(p, needs_seed=False)
    p.set_defaults(func=_cmd_rho_threshold)

    p = sub.add_parser("de", help="population-dynamics fixed point and free energy")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--pop-size", type=int, default=100_000)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--eval-samples", type=int, default=100_000)
    _add_common(p, needs_seed=True)
    p.set_defaults(func=_cmd_de)

    p = sub.add_parser("phi-derivative-check", help="free-energy derivative consistency")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--dbeta", type=float, default=1e-2)
    p.add_argument("--pop-size", type=int, default=100_000)
    p.add_argument("--eval-samples", type=int, default=100_000)
    _add_common(p, needs_seed=True)
    p.set_defaults(func=_cmd_phi_derivative_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InstanceTooLarge as exc:
        print(f"ksat-count: {exc}", file=sys.stderr)
        return _EXIT_CAP
    except KsatError as exc:
        print(f"ksat-count: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except ValueError as exc:
        print(f"ksat-count: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except OSError as exc:
        print(f"ksat-count: {exc}", file=sys.stderr)
        return _EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
