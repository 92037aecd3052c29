import argparse
import os
import sys

from dotenv import load_dotenv

# Ensure src/ is on sys.path to import project modules when running from repo root
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SRC_PATH = os.path.join(PROJECT_ROOT, "src")
if SRC_PATH not in sys.path:
    sys.path.insert(0, SRC_PATH)
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

# Load .env before settings are read
load_dotenv(os.path.join(PROJECT_ROOT, ".env"))

from src.core.exceptions import AnalysisError, InputError  # type: ignore  # noqa: E402
from src.core.models import AnalysisRequest  # type: ignore  # noqa: E402
from src.core.parser import load_system  # type: ignore  # noqa: E402
from src.services.analysis import analyze  # type: ignore  # noqa: E402
from src.services.report import render_reports  # type: ignore  # noqa: E402
from src.utils.logger import get_logger  # type: ignore  # noqa: E402
from src.utils.validation import (  # type: ignore  # noqa: E402
    parse_overrides,
    validate_format,
    validate_non_negative,
    validate_picture,
    validate_positive,
)

from .config import (  # noqa: E402
    resolve_format,
    resolve_max_generations,
    resolve_picture,
    resolve_seed,
    resolve_verify_samples,
)

logger = get_logger("cli")

EXIT_OK = 0
EXIT_ANALYSIS_ERROR = 1
EXIT_INPUT_ERROR = 2


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, (InputError, OSError)):
        return EXIT_INPUT_ERROR
    return EXIT_ANALYSIS_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="analyzer", description="Constraint analysis of degenerate Lagrangians")
    subparsers = parser.add_subparsers(dest="command", required=True)

    p_analyze = subparsers.add_parser("analyze", help="Analyze one or more system files")
    p_analyze.add_argument("files", nargs="+", help="System files (.lag)")
    p_analyze.add_argument("--picture", type=str, default=None, help="lagrangian, hamiltonian or both")
    p_analyze.add_argument("--max-gen", dest="max_gen", type=int, default=None, help="Generation budget per picture")
    p_analyze.add_argument("--verify-samples", dest="verify_samples", type=int, default=None,
                           help="Random surface points for numeric verification (0 disables)")
    p_analyze.add_argument("--seed", type=int, default=None, help="Seed for sampling")
    p_analyze.add_argument("--set", dest="overrides", action="append", default=[], metavar="NAME=VALUE",
                           help="Assign a rational value to a declared parameter (repeatable)")
    p_analyze.add_argument("--format", type=str, default=None, help="text or json")
    p_analyze.add_argument("--out", type=str, default=None, help="Write the report to this path instead of stdout")
    return parser


def run_analyze(args) -> int:
    try:
        picture = validate_picture(resolve_picture(args.picture))
        output_format = validate_format(resolve_format(args.format))
        max_generations = validate_positive(resolve_max_generations(args.max_gen), "max-gen")
        verify_samples = validate_non_negative(resolve_verify_samples(args.verify_samples), "verify-samples")
        seed = resolve_seed(args.seed)
        overrides = parse_overrides(args.overrides)
    except InputError as e:
        print(f"error: {e.message}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    reports = []
    code = EXIT_OK
    for path in args.files:
        try:
            spec = load_system(path, overrides)
            request = AnalysisRequest(
                spec=spec,
                picture=picture,
                max_generations=max_generations,
                verify_samples=verify_samples,
                rng_seed=seed,
                output_format=output_format,
            )
            reports.append(analyze(request))
        except AnalysisError as e:
            logger.debug(f"{path}: {type(e).__name__}", exc_info=True)
            print(f"{path}: {type(e).__name__}: {e.message}", file=sys.stderr)
            code = max(code, exit_code_for(e))

    if reports:
        payload = render_reports(reports, output_format)
        try:
            if args.out:
                with open(args.out, "wb") as f:
                    f.write(payload)
            else:
                sys.stdout.buffer.write(payload)
                sys.stdout.flush()
        except OSError as e:
            print(f"{args.out or 'stdout'}: cannot write report ({e.strerror or e})", file=sys.stderr)
            code = max(code, EXIT_INPUT_ERROR)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "analyze":
        return run_analyze(args)
    return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
