"""Command-line entry point: ``ssdmh {fit,simulate,ppp,compare,oracle-check}``.

Exit codes: 0 success, 2 invalid input or configuration, 3 oracle check failed.
"""
from __future__ import annotations

import argparse
import csv
import logging
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (
    PppConfig,
    adjacency_rmse,
    batch_means_mcse,
    posterior_predictive_pvalues,
    pvalue_rmse,
)
from .inner import AuxChainConfig, sample_exact_rows, set_threads
from .io import (
    DataFormatError,
    estimate_from_dict,
    estimate_to_dict,
    read_chain,
    read_json,
    read_responses,
    write_json,
    write_responses,
)
from .model import n_params
from .pseudolikelihood import ElassoConfig, fit_elasso
from .sampler import SamplerConfig, posterior_summary, run_chain
from .simulation import SimDesign, generate_dataset

EXIT_OK, EXIT_INVALID, EXIT_ORACLE = 0, 2, 3

log = logging.getLogger("ssdmh")


def _versions() -> dict:
    import numba
    import scipy

    return {"ssdmh": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__}


def _manifest(command: str, args: argparse.Namespace, **extra) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
    return {"command": command, "args": params, "seed": args.seed,
            "versions": _versions(), **extra}


def _sampler_config(args, checkpoint=None) -> SamplerConfig:
    return SamplerConfig(
        iterations=args.iterations,
        burn_in=args.burn_in,
        aux=AuxChainConfig(sweeps=args.aux_sweeps),
        seed=args.seed,
        mcse_target=args.mcse_target,
        adaptive_stop=args.adaptive_stop,
        checkpoint_every=args.checkpoint_every,
        checkpoint_path=checkpoint,
        select_beta=not args.beta_always_slab,
        progress_every=args.progress_every,
    )


def _elasso_config(args) -> ElassoConfig:
    return ElassoConfig(ebic_gamma=args.ebic_gamma, rule=args.rule)


def _design(args, seed) -> SimDesign:
    return SimDesign(n=args.n, p=args.p, groups=args.groups, classes=args.classes,
                     p11=args.p11, p12=args.p12, p21=args.p21, p22=args.p22, rho=args.rho,
                     seed=seed)


def _child_seeds(seed: int, k: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(k)]


def _write_edges(path: Path, est, names) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["item_j", "item_k", "weight", "pip"])
        for j, k, g, pip in est.edges():
            w.writerow([names[j], names[k], repr(g), repr(pip)])


def cmd_fit(args) -> int:
    if args.manifest:
        saved = read_json(args.manifest)["args"]
        for key, value in saved.items():
            if key not in ("output", "threads"):
                setattr(args, key, value)
    if args.input is None:
        raise ValueError("--input is required")
    x, names = read_responses(args.input)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _sampler_config(args, checkpoint=out / "chain.jsonl")
    chain = run_chain(x, cfg)
    est = posterior_summary(chain)
    write_json(out / "estimate.json", estimate_to_dict(est, names))
    _write_edges(out / "edges.csv", est, names)
    mcse = batch_means_mcse(chain.theta) if len(chain) >= 4 else np.full(est.theta_hat.shape, np.nan)
    write_json(out / "mcse.json", {
        "target": args.mcse_target,
        "max": float(np.nanmax(mcse)),
        "theta": [float(v) for v in mcse],
        "stored_states": len(chain),
        "acceptance_theta": [float(v) for v in chain.acceptance["theta"]],
    })
    n, p = x.shape
    write_json(out / "manifest.json",
               _manifest("fit", args, n=n, p=p, q=n_params(p), items=names))
    print(f"fit: n={n} p={p} q={n_params(p)} states={len(chain)} -> {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    _design(args, args.seed)  # validate before writing anything
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    seeds = _child_seeds(args.seed, args.replicates)
    files = []
    for r, s in enumerate(seeds):
        design = _design(args, s)
        x, truth = generate_dataset(design)
        stem = f"rep{r + 1:03d}"
        write_responses(out / f"{stem}.csv", x, [f"item{j + 1}" for j in range(design.p)])
        write_json(out / f"{stem}_truth.json", {
            "seed": s,
            "item_groups": truth.item_groups.tolist(),
            "respondent_classes": truth.respondent_classes.tolist(),
            "signed_adjacency": truth.signed_adjacency.astype(int).tolist(),
        })
        files.append({"data": f"{stem}.csv", "truth": f"{stem}_truth.json", "seed": s})
    write_json(out / "manifest.json", _manifest("simulate", args, replicates=files))
    print(f"simulate: {args.replicates} replicate(s) of {args.n}x{args.p} -> {out}")
    return EXIT_OK


def _write_pvalues(out: Path, pvals: np.ndarray) -> None:
    write_json(out.with_suffix(".json"), {"pvalues": [float(v) for v in pvals],
                                          "rmse": pvalue_rmse(pvals)})
    with open(out.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["statistic", "pvalue"])
        for i, v in enumerate(pvals):
            w.writerow([i, repr(float(v))])


def cmd_ppp(args) -> int:
    x, _ = read_responses(args.input)
    cfg = PppConfig(num_draws=args.num_draws, sim_sweeps=args.sim_sweeps, seed=args.seed)
    if args.estimate:
        draws = estimate_from_dict(read_json(args.estimate))
    else:
        draws = read_chain(Path(args.chain) / "chain.jsonl")
        if len(draws) == 0:
            raise ValueError(f"{args.chain}: chain has no stored states")
    pvals = posterior_predictive_pvalues(draws, x, cfg)
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_pvalues(out, pvals)
    print(f"ppp: q={pvals.shape[0]} p-value RMSE {pvalue_rmse(pvals):.4f}")
    return EXIT_OK


def _compare_one(x, truth_adj, args, seed) -> dict:
    s_chain, s_ppp = _child_seeds(seed, 2)
    cfg = _sampler_config(args)
    cfg.seed = s_chain
    chain = run_chain(x, cfg)
    bayes = posterior_summary(chain)
    elasso = fit_elasso(x, _elasso_config(args))
    ppp = PppConfig(num_draws=args.num_draws, sim_sweeps=args.sim_sweeps, seed=s_ppp)
    row = {
        "seed": seed,
        "elasso_pvalue_rmse": pvalue_rmse(posterior_predictive_pvalues(elasso, x, ppp)),
        "bayes_pvalue_rmse": pvalue_rmse(posterior_predictive_pvalues(chain, x, ppp)),
    }
    if truth_adj is not None:
        row["elasso_adjacency_rmse"] = adjacency_rmse(elasso.signed_adjacency, truth_adj)
        row["bayes_adjacency_rmse"] = adjacency_rmse(bayes.signed_adjacency, truth_adj)
    return row


def cmd_compare(args) -> int:
    rows = []
    if args.input:
        x, _ = read_responses(args.input)
        truth = None
        if args.truth:
            truth = np.array(read_json(args.truth)["signed_adjacency"])
        rows.append({"setting": Path(args.input).name, **_compare_one(x, truth, args, args.seed)})
    else:
        _design(args, args.seed)
        for r, s in enumerate(_child_seeds(args.seed, args.replicates)):
            x, truth = generate_dataset(_design(args, s))
            setting = f"p11={args.p11}, p12={args.p12}, rep {r + 1}"
            rows.append({"setting": setting, **_compare_one(x, truth.signed_adjacency, args, s)})
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    keys = list(rows[0])
    with open(out / "compare.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        w.writerows(rows)
    summary = {
        "rows": rows,
        "mean_elasso_pvalue_rmse": float(np.mean([r["elasso_pvalue_rmse"] for r in rows])),
        "mean_bayes_pvalue_rmse": float(np.mean([r["bayes_pvalue_rmse"] for r in rows])),
    }
    write_json(out / "compare.json", summary)
    write_json(out / "manifest.json", _manifest("compare", args))
    print(f"{'setting':<32} {'elasso':>8} {'bayes':>8}")
    for r in rows:
        print(f"{r['setting']:<32} {r['elasso_pvalue_rmse']:8.3f} {r['bayes_pvalue_rmse']:8.3f}")
    return EXIT_OK


def oracle_agreement(x, args) -> dict:
    """Run the DMH and exact-likelihood chains on the same data and compare means."""
    s_dmh, s_exact = _child_seeds(args.seed, 2)
    cfg = _sampler_config(args)
    cfg.seed = s_dmh
    dmh = run_chain(x, cfg)
    cfg_exact = _sampler_config(args)
    cfg_exact.seed, cfg_exact.kernel = s_exact, "exact"
    exact = run_chain(x, cfg_exact)
    diff = np.abs(dmh.theta.mean(axis=0) - exact.theta.mean(axis=0))
    se = np.sqrt(batch_means_mcse(dmh.theta) ** 2 + batch_means_mcse(exact.theta) ** 2)
    ok = diff <= args.tolerance * se
    return {
        "dmh_mean": dmh.theta.mean(axis=0).tolist(),
        "exact_mean": exact.theta.mean(axis=0).tolist(),
        "abs_diff": diff.tolist(),
        "combined_mcse": se.tolist(),
        "tolerance_multiple": args.tolerance,
        "pass": bool(ok.all()),
        "per_parameter_pass": ok.tolist(),
    }


def cmd_oracle_check(args) -> int:
    if args.p > 4:
        raise ValueError("oracle-check needs p <= 4")
    q = n_params(args.p)
    if args.theta:
        theta = np.array([float(v) for v in args.theta.split(",")])
        if theta.shape != (q,):
            raise ValueError(f"--theta needs {q} comma-separated values for p={args.p}")
    else:
        theta = np.zeros(q)
    data_seed = _child_seeds(args.seed, 3)[2]
    x = sample_exact_rows(theta, args.n, data_seed, p=args.p)
    report = oracle_agreement(x, args)
    report["true_theta"] = theta.tolist()
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "oracle_check.json", report)
        write_json(out / "manifest.json", _manifest("oracle-check", args))
    for i, (a, b, d, s) in enumerate(zip(report["dmh_mean"], report["exact_mean"],
                                         report["abs_diff"], report["combined_mcse"])):
        print(f"theta[{i}]: dmh {a:+.4f} exact {b:+.4f} |diff| {d:.4f} <= {args.tolerance}x{s:.4f}"
              f" {'ok' if d <= args.tolerance * s else 'FAIL'}")
    print("oracle-check:", "PASS" if report["pass"] else "FAIL")
    return EXIT_OK if report["pass"] else EXIT_ORACLE


def _add_sampler_flags(sp, iterations=10_000, burn_in=1_000):
    sp.add_argument("--iterations", type=int, default=iterations)
    sp.add_argument("--burn-in", type=int, default=burn_in)
    sp.add_argument("--aux-sweeps", type=int, default=None,
                    help="Gibbs sweeps per auxiliary dataset (default: n)")
    sp.add_argument("--mcse-target", type=float, default=0.03)
    sp.add_argument("--adaptive-stop", action="store_true",
                    help="stop once every parameter's MCSE is at or below the target")
    sp.add_argument("--checkpoint-every", type=int, default=1000)
    sp.add_argument("--beta-always-slab", action="store_true",
                    help="exempt easiness parameters from selection")
    sp.add_argument("--progress-every", type=int, default=1000)


def _add_design_flags(sp):
    sp.add_argument("--n", type=int, default=300)
    sp.add_argument("--p", type=int, default=24)
    sp.add_argument("--groups", type=int, default=6)
    sp.add_argument("--classes", type=int, default=3)
    sp.add_argument("--p11", type=float, default=0.7)
    sp.add_argument("--p12", type=float, default=0.7)
    sp.add_argument("--p21", type=float, default=0.5)
    sp.add_argument("--p22", type=float, default=0.5)
    sp.add_argument("--rho", type=float, default=0.8)
    sp.add_argument("--replicates", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssdmh", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ssdmh {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("fit", help="run the spike-and-slab DMH sampler on a 0/1 CSV")
    sp.add_argument("--input")
    sp.add_argument("--output", required=True)
    sp.add_argument("--manifest", help="rerun with the arguments recorded in a manifest")
    common(sp)
    _add_sampler_flags(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("simulate", help="generate class/group datasets")
    sp.add_argument("--output", required=True)
    common(sp)
    _add_design_flags(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("ppp", help="posterior predictive p-values")
    sp.add_argument("--input", required=True)
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--chain", help="results directory written by 'fit'")
    src.add_argument("--estimate", help="point estimate JSON (e.g. elasso)")
    sp.add_argument("--output", required=True, help="output stem; .json and .csv are written")
    sp.add_argument("--num-draws", type=int, default=1000)
    sp.add_argument("--sim-sweeps", type=int, default=None)
    common(sp)
    sp.set_defaults(func=cmd_ppp)

    sp = sub.add_parser("compare", help="Bayes vs elasso p-value RMSE table")
    sp.add_argument("--input", help="0/1 CSV; omit to simulate from the design flags")
    sp.add_argument("--truth", help="truth JSON with signed_adjacency")
    sp.add_argument("--output", required=True)
    sp.add_argument("--ebic-gamma", type=float, default=0.25)
    sp.add_argument("--rule", choices=("and", "or"), default="and")
    sp.add_argument("--num-draws", type=int, default=1000)
    sp.add_argument("--sim-sweeps", type=int, default=None)
    common(sp)
    _add_sampler_flags(sp, iterations=2000, burn_in=1000)
    _add_design_flags(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("oracle-check", help="DMH vs exact-likelihood chain on a small model")
    sp.add_argument("--p", type=int, default=3)
    sp.add_argument("--n", type=int, default=50)
    sp.add_argument("--theta", help="comma-separated true parameters (default: all zero)")
    sp.add_argument("--tolerance", type=float, default=3.0,
                    help="allowed multiple of the combined MCSE")
    sp.add_argument("--output")
    common(sp)
    _add_sampler_flags(sp, iterations=20_000, burn_in=2_000)
    sp.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        set_threads(args.threads)
        return args.func(args)
    except (DataFormatError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
