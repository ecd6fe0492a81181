import json
from pathlib import Path

from mv_frontier.config import SpdMode
from mv_frontier.exceptions import InvalidParameter, UsageError, throw
from mv_frontier.portfolio.capm import beta as capm_beta
from mv_frontier.portfolio.capm import capm_expected_return, sml_classify
from mv_frontier.portfolio.estimation import estimate_moments, ingest_csv
from mv_frontier.portfolio.frontier import (
    cml_line,
    frontier_coefficients,
    frontier_csv,
    sample_frontier,
    tangent_line,
)
from mv_frontier.portfolio.market_model import MarketModel, load_model, validate_model
from mv_frontier.portfolio.optimizer import (
    Fund,
    combine_funds,
    min_variance_for_return,
    min_variance_portfolio,
    min_variance_with_riskfree,
)
from mv_frontier.portfolio.oracle import (
    MAX_SHARPE,
    MIN_VARIANCE,
    TARGET_RETURN,
    verify_max_sharpe,
    verify_min_variance,
    verify_target_return,
)
from mv_frontier.utils import logger


# ========= INPUTS =========
def read_model(args, tolerances) -> MarketModel:
    """Model from --model, or estimated from --returns."""
    if args.model:
        model = load_model(args.model)
    elif args.returns:
        series = ingest_csv(args.returns, has_header=not args.no_header)
        model = estimate_moments(series, ddof=args.ddof)
    else:
        raise UsageError("one of --model or --returns is required")

    rf = getattr(args, "rf", None)
    if rf is not None:
        model = model.with_rf(rf)
    return validate_model(model, spd_mode=SpdMode(args.spd_mode), tolerances=tolerances)


def read_funds(path: str) -> list[Fund]:
    """Funds file: a JSON list of weight arrays or of {"weights": [...], "mu0": x} objects."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        throw(f"Cannot read funds file {path}: {e}", InvalidParameter)
    except json.JSONDecodeError as e:
        throw(f"Funds file {path} is not valid JSON: {e}", InvalidParameter)
    if not isinstance(data, list):
        throw(f"Funds file {path} must hold a JSON list", InvalidParameter)

    funds = []
    for entry in data:
        if isinstance(entry, dict):
            if "weights" not in entry:
                throw(f"Fund entry in {path} has no 'weights' field", InvalidParameter)
            funds.append(Fund(entry["weights"], entry.get("mu0")))
        else:
            funds.append(Fund(entry))
    return funds


# ========= HANDLERS =========
def validate(args, tolerances):
    model = read_model(args, tolerances)
    f = model.factor
    return {
        "valid": True,
        "n": model.n,
        "labels": list(model.labels),
        "A": f.A,
        "B": f.B,
        "C": f.C,
        "d": f.d,
    }


def estimate(args, tolerances):
    if not args.returns:
        raise UsageError("estimate needs --returns")
    series = ingest_csv(args.returns, has_header=not args.no_header)
    model = estimate_moments(series, ddof=args.ddof, rf=args.rf)
    logger("commands").info(f"[estimate] {args.returns}: T={series.T} n={series.n} ddof={args.ddof}")
    return model.to_dict()


def minvar(args, tolerances):
    model = read_model(args, tolerances)
    return min_variance_portfolio(model, tolerances).to_dict()


def tangency(args, tolerances):
    model = read_model(args, tolerances)
    line = tangent_line(model, args.rf, tolerances)
    return {**line.to_dict(), "portfolio": line.portfolio.to_dict()}


def target(args, tolerances):
    model = read_model(args, tolerances)
    if args.rf is not None:
        solution = min_variance_with_riskfree(model, model.rf, args.mu0, tolerances)
    else:
        solution = min_variance_for_return(model, args.mu0, tolerances)
    return solution.to_dict()


def frontier(args, tolerances):
    model = read_model(args, tolerances)
    points = sample_frontier(model, args.lo, args.hi, args.k, args.include_inefficient, tolerances)
    if args.format == "csv":
        return frontier_csv(points)

    payload = {
        "coefficients": frontier_coefficients(model, tolerances).to_dict(),
        "points": [
            {"mu": p.mu, "sigma": p.sigma, "efficient": p.efficient, "weights": p.weights.tolist()}
            for p in points
        ],
    }
    if model.rf is not None:
        payload["cml"] = cml_line(model, model.rf, tolerances=tolerances).to_dict()
        payload["cml_mirrored"] = cml_line(model, model.rf, mirrored=True, tolerances=tolerances).to_dict()
    return payload


def separate(args, tolerances):
    model = read_model(args, tolerances)
    funds = read_funds(args.funds)
    return combine_funds(model, funds, args.coeffs, tolerances).to_dict()


def capm(args, tolerances):
    if args.beta is not None:
        if args.cov is not None or args.var is not None:
            raise UsageError("give either --beta or --cov with --var, not both")
        beta = args.beta
    elif args.cov is not None and args.var is not None:
        beta = capm_beta(args.cov, args.var)
    else:
        raise UsageError("capm needs --beta, or --cov together with --var")

    expected = capm_expected_return(args.rf, beta, args.mus)
    classification = None
    if args.observed is not None:
        classification = sml_classify(args.observed, beta, args.rf, args.mus, tolerances.sml_tol).value
    return {"beta": beta, "expected_return": expected, "classification": classification}


def oracle_check(args, tolerances):
    model = read_model(args, tolerances)
    sampling = {
        "samples": args.samples,
        "seed": args.seed,
        "spread": args.spread,
        "workers": args.workers,
        "tolerances": tolerances,
    }
    if args.objective == MIN_VARIANCE:
        report = verify_min_variance(model, **sampling)
    elif args.objective == MAX_SHARPE:
        report = verify_max_sharpe(model, model.rf, **sampling)
    elif args.objective == TARGET_RETURN:
        if args.mu0 is None:
            raise UsageError("oracle-check --objective target needs --mu0")
        report = verify_target_return(model, args.mu0, **sampling)
    else:
        raise UsageError(f"unknown objective {args.objective!r}")
    return report.to_dict()
