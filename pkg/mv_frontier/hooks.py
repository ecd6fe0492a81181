app_name = "mv_frontier"
app_title = "MV Frontier"
app_publisher = "MV Frontier Developers"
app_description = "Closed-form mean-variance portfolio analytics: minimum variance, tangency, efficient frontier, fund separation and CAPM"
app_license = "mit"

# Command Hooks
# -------------
# Subcommand name -> dotted path of its handler. Handlers receive the parsed
# argparse namespace plus the resolved tolerances and return a JSON-ready
# payload (or a CSV string).

cli_commands = {
    "validate": "mv_frontier.commands.handlers.validate",
    "estimate": "mv_frontier.commands.handlers.estimate",
    "minvar": "mv_frontier.commands.handlers.minvar",
    "tangency": "mv_frontier.commands.handlers.tangency",
    "target": "mv_frontier.commands.handlers.target",
    "frontier": "mv_frontier.commands.handlers.frontier",
    "separate": "mv_frontier.commands.handlers.separate",
    "capm": "mv_frontier.commands.handlers.capm",
    "oracle-check": "mv_frontier.commands.handlers.oracle_check",
}
