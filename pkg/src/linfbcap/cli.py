"""Command-line surface.

Subcommands: rho-star, region, sum-capacity, duality-check, search,
simulate.  Every command is deterministic given its flags (seeds
included).  Exit codes: 0 success, 1 verification failure, 2
usage/validation error.  Downlink region requests are computed through
the dual uplink and record ``via: duality`` in their metadata.
"""

import argparse
import json
import sys

import numpy as np

from . import fileio, siso
from ._kernels import backend_name
from .duality import verify_duality_identities
from .exceptions import LinfbError, NoRootInIntervalError
from .regions import ChannelSpec, FeedbackDesign, search_feedback_design
from .simulate import RngSpec, verify_power_lemma
from .blockmat import kron_lift, omega_tilde_inv

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2


def _fail_usage(message):
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _parse_vector(text, flag):
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip() != ""]
    except ValueError:
        raise LinfbError(f"{flag} must be a comma-separated list of numbers")
    if not vals:
        raise LinfbError(f"{flag} must contain at least one number")
    return np.array(vals)


def _require_positive(value, flag):
    if value is None or value <= 0:
        raise LinfbError(f"{flag} must be positive")
    return float(value)


def _require_nonnegative(value, flag):
    if value is None or value < 0:
        raise LinfbError(f"{flag} must be nonnegative")
    return float(value)


def _write_output(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_rho_star(args):
    p1 = _require_nonnegative(args.p1, "--p1")
    p2 = _require_nonnegative(args.p2, "--p2")
    rho = siso.rho_star(args.h1, args.h2, p1, p2)
    residual = siso.rho_star_residual(args.h1, args.h2, p1, p2, rho)
    if args.format == "json":
        print(json.dumps({"rho": rho, "residual": residual}, sort_keys=True))
    else:
        print(f"rho = {fileio.format_rate(rho)}")
        print(f"residual = {residual:.3e}")
    return EXIT_OK


def _region_for_request(args):
    power = _require_positive(args.power, "--power")
    h1 = _parse_vector(args.h1, "--h1")
    h2 = _parse_vector(args.h2, "--h2")
    model = args.model
    channel = args.channel
    alpha_grid = args.alpha_grid
    rho_grid = args.rho_grid
    if alpha_grid < 2 or rho_grid < 2:
        raise LinfbError("--alpha-grid and --rho-grid must be >= 2")

    if channel == "bc":
        # The downlink region equals the dual uplink one; receiver and
        # transmitter roles swap, so the multi-antenna side flips model.
        eval_model = {"siso": "siso", "miso": "simo", "simo": "miso"}[model]
    else:
        eval_model = model

    if eval_model == "siso":
        if h1.size != 1 or h2.size != 1:
            raise LinfbError("siso model takes scalar --h1/--h2")
        region = siso.mac_siso_region(float(h1[0]), float(h2[0]), power,
                                      alpha_grid, rho_grid, refine=args.refine)
    elif eval_model == "miso":
        region = siso.miso_mac_region(h1, h2, power, alpha_grid, rho_grid,
                                      refine=args.refine)
    else:
        if args.beta_grid < 2:
            raise LinfbError("--beta-grid must be >= 2")
        region = siso.simo_mac_region(h1, h2, power, alpha_grid, rho_grid,
                                      args.beta_grid, refine=args.refine)
    region.meta["channel"] = channel
    region.meta["requested_model"] = model
    region.meta["via"] = "duality" if channel == "bc" else "direct"
    region.meta["backend"] = backend_name()
    return region


def cmd_region(args):
    region = _region_for_request(args)
    if args.format == "csv":
        _write_output(fileio.region_to_csv(region), args.output)
    elif args.format == "json":
        _write_output(fileio.region_to_json(region), args.output)
    else:
        _write_output(fileio.region_to_svg(region), args.output)
    return EXIT_OK


def cmd_sum_capacity(args):
    if args.model == "siso":
        if args.h1 is None or args.h2 is None:
            raise LinfbError("--h1 and --h2 are required for the siso model")
        power = _require_positive(args.power, "--power")
        value = siso.mac_siso_sum_capacity(args.h1, args.h2, power)
        print(json.dumps({"model": "siso", "sum_capacity_bits": value},
                         sort_keys=True))
        return EXIT_OK
    power = _require_positive(args.power, "--power")
    if args.k is None or args.k < 2:
        raise LinfbError("--k must be an integer >= 2 for the k-user model")
    try:
        value = siso.k_user_symmetric_sum_capacity(args.k, power, args.variant)
    except NoRootInIntervalError as exc:
        print(json.dumps({
            "model": "k-user",
            "variant": args.variant,
            "no_root": True,
            "log_residual_at_1": exc.residual_lo,
            "log_residual_at_K": exc.residual_hi,
            "note": "fixed-point equation has no root in [1, K]; "
                    "no sum-capacity value is asserted for this variant",
        }, sort_keys=True))
        return EXIT_OK
    phi = siso.phi_k(args.k, power, args.variant)
    print(json.dumps({"model": "k-user", "variant": args.variant,
                      "phi": phi, "sum_capacity_bits": value}, sort_keys=True))
    return EXIT_OK


def cmd_duality_check(args):
    try:
        nu1, nu2, kappa = (int(v) for v in str(args.dims).split(","))
    except ValueError:
        raise LinfbError("--dims must be 'nu1,nu2,kappa'")
    if min(nu1, nu2, kappa) < 1:
        raise LinfbError("--dims entries must be >= 1")
    if args.eta < 1 or args.eta > 4:
        raise LinfbError("--eta must be in 1..4")
    if args.trials < 1:
        raise LinfbError("--trials must be >= 1")
    power = _require_positive(args.power, "--power")
    tol = 1e-8
    worst = {"residual_S_eq_EQE": 0.0, "residual_channel_identity": 0.0,
             "residual_trace_equality": 0.0}
    rng = np.random.default_rng(args.seed)
    corrupt = 1e-3 if args.corrupt else 0.0
    for _ in range(args.trials):
        eta = int(rng.integers(1, args.eta + 1))
        spec = ChannelSpec(rng.standard_normal((nu1, kappa)),
                           rng.standard_normal((nu2, kappa)), power, "bc")
        design = _random_feasible_design(rng, eta, nu1, nu2, kappa, power)
        rep = verify_duality_identities(design, spec, corrupt=corrupt)
        worst["residual_S_eq_EQE"] = max(
            worst["residual_S_eq_EQE"], rep.residual_S_eq_EQE)
        worst["residual_channel_identity"] = max(
            worst["residual_channel_identity"], rep.residual_channel_identity)
        worst["residual_trace_equality"] = max(
            worst["residual_trace_equality"], rep.residual_trace_equality)
    passed = all(v < tol for v in worst.values())
    report = {"trials": args.trials, "eta_max": args.eta,
              "dims": [nu1, nu2, kappa], "tolerance": tol,
              "worst_residuals": worst, "passed": passed,
              "corrupt": bool(args.corrupt)}
    _write_output(json.dumps(report, sort_keys=True, indent=2) + "\n",
                  args.output)
    if not passed:
        failing = [k for k, v in worst.items() if v >= tol]
        print(f"verification failed: {', '.join(failing)} above {tol:g}",
              file=sys.stderr)
        return EXIT_VERIFICATION
    return EXIT_OK


def _random_feasible_design(rng, eta, nu1, nu2, kappa, power):
    from .blockmat import BlockTriangularSet

    blocks1 = {}
    blocks2 = {}
    for l in range(2, eta + 1):
        for tau in range(1, l):
            blocks1[(l, tau)] = rng.standard_normal((nu1, kappa))
            blocks2[(l, tau)] = rng.standard_normal((nu2, kappa))
    d1 = BlockTriangularSet(eta, nu1, kappa, blocks1)
    d2 = BlockTriangularSet(eta, nu2, kappa, blocks2)
    design = FeedbackDesign(eta, "D", d1, d2)
    t1, t2 = design.traces()
    used = t1 + t2
    if used > 0:
        factor = np.sqrt(rng.uniform(0.1, 0.95) * eta * power / used)
        design = FeedbackDesign(eta, "D", d1.scaled(factor), d2.scaled(factor))
    return design


def cmd_search(args):
    power = _require_positive(args.power, "--power")
    if args.eta < 1 or args.eta > 4:
        raise LinfbError("--eta must be in 1..4")
    if args.trials < 1:
        raise LinfbError("--trials must be >= 1")
    spec = ChannelSpec(np.array([[float(args.h1)]]),
                       np.array([[float(args.h2)]]), power, "mac")
    best, frontier = search_feedback_design(spec, args.eta, args.trials,
                                            args.seed)
    prefix = args.output_prefix
    _write_output(fileio.design_to_json(best), f"{prefix}-design.json")
    _write_output(fileio.region_to_csv(frontier), f"{prefix}-frontier.csv")
    print(json.dumps({
        "best_sum_rate_bits": frontier.meta["best_sum_rate"],
        "design_file": f"{prefix}-design.json",
        "frontier_file": f"{prefix}-frontier.csv",
        "seed": args.seed, "trials": args.trials, "eta": args.eta,
    }, sort_keys=True))
    return EXIT_OK


def cmd_simulate(args):
    power = _require_positive(args.power, "--power")
    if args.trials < 1:
        raise LinfbError("--trials must be >= 1")
    with open(args.design, "r", encoding="utf-8") as fh:
        design = fileio.design_from_json(fh.read())
    if design.form not in ("C", "D"):
        raise LinfbError("simulate expects an uplink (C/D-form) design file")
    spec = ChannelSpec(np.array([[float(args.h1)]]),
                       np.array([[float(args.h2)]]), power, "mac")
    report = verify_power_lemma(design, spec, args.trials,
                                RngSpec(args.seed, "simulate"))
    identity_residual = _inner_code_identity_residual(design, spec, args.seed)
    payload = {
        "power": {
            "empirical": report.empirical,
            "analytic": report.analytic,
            "lemma_value": report.lemma_value,
            "analytic_residual": report.analytic_residual,
            "mc_std_error": report.mc_std_error,
            "relative_gap": report.relative_gap,
            "trials": report.trials,
        },
        "inner_code_identity_max_abs": identity_residual,
        "passed": bool(report.passed and identity_residual < 1e-10),
    }
    _write_output(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                  args.output)
    return EXIT_OK if payload["passed"] else EXIT_VERIFICATION


def _inner_code_identity_residual(design, spec, seed, samples=256):
    """Max deviation of the causal recursion from the closed form."""
    from .blockmat import mac_M_matrices, psd_sqrt
    from .simulate import simulate_mac_block

    eta = design.eta
    h1t = kron_lift(spec.H1, eta).T
    h2t = kron_lift(spec.H2, eta).T
    if design.form == "C":
        c1, c2 = design.M1, design.M2
        from .blockmat import omega_tilde

        d1, d2 = omega_tilde(c1, c2, h1t, h2t)
    else:
        d1, d2 = design.M1, design.M2
        c1, c2 = omega_tilde_inv(d1, d2, h1t, h2t)
    m1, m2 = mac_M_matrices(d1, d2, h1t, h2t)
    q1i = np.linalg.inv(psd_sqrt(m1))
    q2i = np.linalg.inv(psd_sqrt(m2))
    gen = RngSpec(seed, "identity").generator()
    n1, n2, nk = eta * spec.nu1, eta * spec.nu2, eta * spec.kappa
    u1 = gen.standard_normal((samples, n1))
    u2 = gen.standard_normal((samples, n2))
    z = gen.standard_normal((samples, nk))
    sample = simulate_mac_block(c1, c2, spec, u1, u2, z)
    inner = u1 @ (h1t @ q1i).T + u2 @ (h2t @ q2i).T + z
    x1c = u1 @ q1i.T + inner @ d1.materialize().T
    x2c = u2 @ q2i.T + inner @ d2.materialize().T
    res = max(float(np.max(np.abs(sample.X[0] - x1c))),
              float(np.max(np.abs(sample.X[1] - x2c))))
    return res


def build_parser():
    ap = argparse.ArgumentParser(
        prog="linfbcap",
        description="Linear-feedback capacity regions of Gaussian MAC/BC "
                    "pairs and duality certification.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rho-star", help="optimal input correlation")
    p.add_argument("--h1", type=float, required=True)
    p.add_argument("--h2", type=float, required=True)
    p.add_argument("--p1", type=float, required=True)
    p.add_argument("--p2", type=float, required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_rho_star)

    p = sub.add_parser("region", help="emit a rate-region frontier file")
    p.add_argument("--channel", choices=("mac", "bc"), required=True)
    p.add_argument("--model", choices=("siso", "miso", "simo"), default="siso")
    p.add_argument("--h1", required=True,
                   help="scalar or comma-separated vector")
    p.add_argument("--h2", required=True)
    p.add_argument("--power", type=float, required=True)
    p.add_argument("--alpha-grid", type=int, default=129)
    p.add_argument("--rho-grid", type=int, default=129)
    p.add_argument("--beta-grid", type=int, default=65)
    p.add_argument("--refine", type=int, default=8193)
    p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("sum-capacity", help="scalar sum-capacity values")
    p.add_argument("--model", choices=("siso", "k-user"), required=True)
    p.add_argument("--h1", type=float)
    p.add_argument("--h2", type=float)
    p.add_argument("--power", type=float, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--variant", choices=("printed", "exponent-K"),
                   default="exponent-K")
    p.set_defaults(func=cmd_sum_capacity)

    p = sub.add_parser("duality-check",
                       help="verify the duality identities on random designs")
    p.add_argument("--eta", type=int, default=3)
    p.add_argument("--dims", default="1,1,1", help="nu1,nu2,kappa")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--power", type=float, default=10.0)
    p.add_argument("--corrupt", action="store_true",
                   help="negative control: perturb the parameter map")
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_duality_check)

    p = sub.add_parser("search", help="search feedback designs at fixed eta")
    p.add_argument("--eta", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--h1", type=float, required=True)
    p.add_argument("--h2", type=float, required=True)
    p.add_argument("--power", type=float, required=True)
    p.add_argument("--output-prefix", default="search")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("simulate",
                       help="verify power accounting of a design file")
    p.add_argument("--design", required=True)
    p.add_argument("--h1", type=float, required=True)
    p.add_argument("--h2", type=float, required=True)
    p.add_argument("--power", type=float, required=True)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_simulate)

    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except LinfbError as exc:
        return _fail_usage(str(exc))
    except FileNotFoundError as exc:
        return _fail_usage(str(exc))


if __name__ == "__main__":
    sys.exit(main())
