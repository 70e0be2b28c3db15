import argparse
import logging
import sys
from typing import List, Optional

import config
from modules import commands
from modules.errors import FockopError
from modules.result_tables import build_document, render_csv, render_json
from modules.run_config import RUN_SETTINGS, add_run_arguments, resolve_run_config
from modules.run_log import RunLog

logger = logging.getLogger("fockop")


class FockopArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1 like every other validation error."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = FockopArgumentParser(add_help=False)
    add_run_arguments(common)

    parser = FockopArgumentParser(
        prog="fockop",
        description="Toeplitz operators on generalized Fock spaces F2_{m,alpha,s}(C^d)",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for name, (_, summary) in commands.COMMANDS.items():
        sub = subparsers.add_parser(name, parents=[common], help=summary, description=summary)
        commands.add_command_arguments(name, sub)
    return parser


def _command_arguments(args: argparse.Namespace) -> dict:
    """Subcommand-specific flags, echoed next to the resolved run config."""
    skip = set(RUN_SETTINGS) | {"command"}
    return {key: value for key, value in sorted(vars(args).items()) if key not in skip}


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns 0, 1 (validation error) or 2 (numerical failure)."""
    logging.basicConfig(
        level=config.get_log_level(),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        run_config = resolve_run_config(args)
        handler, _ = commands.COMMANDS[args.command]
        logger.info("running %s with %s", args.command, run_config.as_dict())
        results, diagnostics = handler(args, run_config)
    except FockopError as e:
        print(f"fockop {args.command}: {e}", file=sys.stderr)
        return e.exit_code

    header = {"command": args.command, **run_config.as_dict(), "arguments": _command_arguments(args)}
    if run_config.format == "csv":
        text = render_csv(results, header)
    else:
        text = render_json(build_document(header, results, diagnostics))

    if run_config.output:
        with open(run_config.output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)

    run_log = RunLog.from_env()
    if run_log is not None:
        run_log.log(args.command, "done", f"{len(results)} result rows", {"config": header, "diagnostics": diagnostics})
    return 0


if __name__ == "__main__":
    sys.exit(main())
