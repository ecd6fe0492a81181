import io
import json

import numpy as np

import mv_frontier
from mv_frontier import __version__, hooks
from mv_frontier.commands import build_parser, get_handler, run
from mv_frontier.portfolio.market_model import MarketModel
from mv_frontier.portfolio.optimizer import min_variance_portfolio
from mv_frontier.tests.utils import (
    PRINTED_FUNDS,
    PRINTED_MIN_VARIANCE,
    PortfolioTestCase,
    worked_example,
)


class CommandTestCase(PortfolioTestCase):
    def setUp(self):
        super().setUp()
        self.model_path = self.write_json("model.json", worked_example().to_dict())

    def invoke(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        code = run(list(argv), stdout=out, stderr=err)
        return code, out.getvalue(), err.getvalue()

    def invoke_json(self, *argv, expect: int = 0):
        code, out, err = self.invoke(*argv)
        self.assertEqual(code, expect, f"stdout={out!r} stderr={err!r}")
        return json.loads(out)


class TestHooks(CommandTestCase):
    def test_every_subcommand_has_a_handler(self):
        parser = build_parser()
        subparsers = next(a for a in parser._actions if a.dest == "command")
        self.assertEqual(set(subparsers.choices), set(hooks.cli_commands))
        for command in hooks.cli_commands:
            self.assertTrue(callable(get_handler(command)))

    def test_author_metadata(self):
        self.assertEqual(hooks.app_publisher, "MV Frontier Developers")
        self.assertIn(f"Author: {hooks.app_publisher}", mv_frontier.__doc__)


class TestHelpOutput(CommandTestCase):
    def test_version_goes_to_given_stdout(self):
        code, out, err = self.invoke("--version")
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(), f"mv-frontier {__version__}")
        self.assertEqual(err, "")

    def test_help_goes_to_given_stdout(self):
        for argv in (("--help",), ("minvar", "--help"), ("capm", "-h")):
            code, out, err = self.invoke(*argv)
            self.assertEqual(code, 0, argv)
            self.assertIn("usage: mv-frontier", out)
            self.assertEqual(err, "")


class TestModelCommands(CommandTestCase):
    def test_validate(self):
        data = self.invoke_json("validate", "--model", self.model_path)
        self.assertTrue(data["valid"])
        self.assertEqual(data["n"], 8)
        self.assertGreater(data["d"], 0)

    def test_validate_singular(self):
        path = self.write_json("dup.json", {"mu": [0.05, 0.05], "sigma": [[0.04, 0.04], [0.04, 0.04]]})
        data = self.invoke_json("validate", "--model", path, expect=2)
        self.assertEqual(data["error"], "NotPositiveDefinite")
        self.assertVectorClose(np.abs(data["certificate"]), [2**-0.5, 2**-0.5], 1e-12)

    def test_minvar(self):
        data = self.invoke_json("minvar", "--model", self.model_path)
        self.assertVectorClose(data["weights"], PRINTED_MIN_VARIANCE, 5e-4)
        self.assertAlmostEqual(data["sigma"], 0.0677, delta=5e-4)
        self.assertEqual(data["labels"], [f"A{i}" for i in range(1, 9)])

    def test_tangency(self):
        data = self.invoke_json("tangency", "--model", self.model_path, "--rf", "0.015")
        self.assertAlmostEqual(data["slope"], 0.7283, delta=1e-3)
        self.assertEqual(data["intercept"], 0.015)
        self.assertAlmostEqual(data["portfolio"]["sigma"], 0.0966, delta=5e-4)

    def test_target(self):
        data = self.invoke_json("target", "--model", self.model_path, "--mu0", "0.1319")
        self.assertAlmostEqual(data["sigma"], 0.1723, delta=5e-4)
        self.assertNotIn("wf", data)

        with_rf = self.invoke_json("target", "--model", self.model_path, "--mu0", "0.0854", "--rf", "0.015")
        self.assertAlmostEqual(with_rf["wf"], 0.0, delta=2e-3)

    def test_frontier_json(self):
        data = self.invoke_json(
            "frontier", "--model", self.model_path, "--lo", "0.0495", "--hi", "0.15", "--k", "50", "--rf", "0.015"
        )
        self.assertAlmostEqual(data["coefficients"]["a"], 3.7017, delta=5e-4)
        self.assertEqual(len(data["points"]), 50)
        self.assertAlmostEqual(data["points"][0]["sigma"], 0.0677, delta=5e-4)
        self.assertAlmostEqual(data["cml"]["slope"], 0.7283, delta=1e-3)
        self.assertEqual(data["cml_mirrored"]["slope"], -data["cml"]["slope"])

    def test_frontier_csv(self):
        code, out, _ = self.invoke(
            "frontier", "--model", self.model_path, "--lo", "0.05", "--hi", "0.15", "--k", "11", "--format", "csv"
        )
        self.assertEqual(code, 0)
        lines = out.strip().split("\n")
        self.assertEqual(lines[0], "mu,sigma,efficient")
        self.assertEqual(len(lines), 12)
        self.assertTrue(lines[1].endswith(",true"))

    def test_separate(self):
        funds = self.write_json("funds.json", [list(w) for w in PRINTED_FUNDS])
        data = self.invoke_json(
            "separate",
            "--model",
            self.model_path,
            "--funds",
            funds,
            "--coeffs",
            "0.0131,0.4545,0.5324",
            "--tol",
            "fund_budget=1e-3",
            "--tol",
            "efficiency_rtol=1e-3",
        )
        self.assertTrue(data["efficient"])
        self.assertAlmostEqual(data["sigma"], 0.1723, delta=1e-3)

    def test_separate_fund_objects(self):
        funds = self.write_json("funds.json", [{"weights": [1.0, 0.0], "mu0": 0.05}, {"weights": [0.0, 1.0]}])
        model = self.write_json("m.json", {"mu": [0.05, 0.08], "sigma": [[0.04, 0.0], [0.0, 0.09]]})
        data = self.invoke_json("separate", "--model", model, "--funds", funds, "--coeffs", "0.5,0.5")
        self.assertAlmostEqual(data["target_mu"], 0.065)
        self.assertTrue(data["efficient"])

    def test_oracle_check(self):
        data = self.invoke_json(
            "oracle-check", "--model", self.model_path, "--objective", "minvar", "--samples", "5000", "--seed", "7"
        )
        self.assertTrue(data["passed"])
        self.assertEqual(data["seed"], 7)

    def test_oracle_check_target_needs_mu0(self):
        code, _, err = self.invoke("oracle-check", "--model", self.model_path, "--objective", "target")
        self.assertEqual(code, 1)
        self.assertIn("--mu0", err)


class TestReturnsInput(CommandTestCase):
    def test_estimate_feeds_minvar(self):
        returns = np.random.default_rng(5).normal(0.01, 0.05, size=(40, 3))
        csv = self.write_text("r.csv", "\n".join(",".join(repr(float(x)) for x in row) for row in returns) + "\n")

        estimated = self.invoke_json("estimate", "--returns", csv, "--no-header")
        model_path = self.write_json("est.json", estimated)
        data = self.invoke_json("minvar", "--model", model_path)

        direct = min_variance_portfolio(MarketModel.from_dict(estimated))
        self.assertEqual(data["weights"], direct.weights.tolist())

        on_the_fly = self.invoke_json("minvar", "--returns", csv, "--no-header")
        self.assertEqual(on_the_fly["weights"], data["weights"])

    def test_estimate_header_and_ddof(self):
        csv = self.write_text("r.csv", "X,Y\n0.01,0.03\n0.03,0.01\n")
        data = self.invoke_json("estimate", "--returns", csv, "--ddof", "0")
        self.assertEqual(data["labels"], ["X", "Y"])
        self.assertAlmostEqual(data["sigma"][0][1], -0.0001)

    def test_estimate_bad_cell(self):
        csv = self.write_text("r.csv", "0.01,0.03\n0.03,oops\n")
        data = self.invoke_json("estimate", "--returns", csv, "--no-header", expect=2)
        self.assertEqual(data["error"], "NonNumericCell")
        self.assertEqual((data["row"], data["col"]), (2, 2))


class TestCapmCommand(CommandTestCase):
    def test_beta_given(self):
        data = self.invoke_json("capm", "--rf", "0.015", "--mus", "0.0854", "--beta", "0.5", "--observed", "0.06")
        self.assertAlmostEqual(data["expected_return"], 0.0502)
        self.assertEqual(data["classification"], "Underestimated")

    def test_beta_from_covariance(self):
        data = self.invoke_json("capm", "--rf", "0.015", "--mus", "0.0854", "--cov", "0.0045", "--var", "0.009")
        self.assertAlmostEqual(data["beta"], 0.5)
        self.assertIsNone(data["classification"])

    def test_non_positive_variance(self):
        data = self.invoke_json("capm", "--rf", "0.015", "--mus", "0.0854", "--cov", "0.1", "--var", "0", expect=2)
        self.assertEqual(data["error"], "NonPositiveSystemicVariance")


class TestExitCodes(CommandTestCase):
    def test_degenerate_frontier(self):
        path = self.write_json("flat.json", {"mu": [0.05, 0.05], "sigma": [[1.0, 0.0], [0.0, 1.0]]})
        data = self.invoke_json("frontier", "--model", path, "--lo", "0.0", "--hi", "0.1", "--k", "5", expect=3)
        self.assertEqual(data["error"], "DegenerateFrontier")

    def test_tangency_undefined(self):
        path = self.write_json("odd.json", {"mu": [0.1, -0.1], "sigma": [[1.0, 0.0], [0.0, 1.0]]})
        data = self.invoke_json("tangency", "--model", path, "--rf", "0", expect=3)
        self.assertEqual(data["error"], "TangencyUndefined")

    def test_usage_errors(self):
        for argv in (
            (),
            ("minvar",),
            ("bogus",),
            ("target", "--model", "m.json"),
            ("minvar", "--model", "m.json", "--tol", "nonsense=1"),
            ("separate", "--model", "m.json", "--funds", "f.json", "--coeffs", "a,b"),
            ("capm", "--rf", "0.01", "--mus", "0.05"),
        ):
            code, out, err = self.invoke(*argv)
            self.assertEqual(code, 1, argv)
            self.assertEqual(out, "")
            self.assertIn("usage:", err)

    def test_missing_model_file(self):
        code, out, _ = self.invoke("minvar", "--model", "/nonexistent/model.json")
        self.assertEqual(code, 2)
        self.assertEqual(json.loads(out)["error"], "InvalidParameter")

    def test_tolerance_override_changes_outcome(self):
        path = self.write_json("asym.json", {"mu": [0.05, 0.08], "sigma": [[0.04, 0.01], [0.010001, 0.09]]})
        self.assertEqual(self.invoke("validate", "--model", path)[0], 2)
        self.assertEqual(self.invoke("validate", "--model", path, "--tol", "sym_tol=1e-5")[0], 0)


class TestPretty(CommandTestCase):
    def test_tables(self):
        code, out, _ = self.invoke("minvar", "--model", self.model_path, "--pretty")
        self.assertEqual(code, 0)
        self.assertIn("A8", out)
        self.assertIn("weights", out)
