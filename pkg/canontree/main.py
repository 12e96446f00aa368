import argparse
import asyncio
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from canontree.commands import analysis, enumeration
from canontree.commands.common import RunConfig
from canontree.utils import config

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="canontree",
        description="Exact enumeration and certified asymptotics of canonical t-ary trees",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Register command groups
    enumeration.register(subparsers)
    analysis.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; 0 on success, 1 on a failed computation or check, 2 on a usage error."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=config.LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        request = RunConfig.from_args(args)
    except ValidationError as e:
        parser.error(f"invalid arguments: {e.errors()[0]['loc'][0]}: {e.errors()[0]['msg']}")

    response = asyncio.run(args.handler(request))
    if response.output:
        sys.stdout.write(response.output)
    if response.error:
        print(f"{response.command}: {response.status}: {response.error}", file=sys.stderr)
    return response.exit_code


if __name__ == "__main__":
    sys.exit(main())
