"""``ntorrent-simple`` command-line entry point.

Exit codes: 0 completed, 2 configuration or topology error, 3 the run did not
complete (idle, timed out, or aborted on a digest mismatch), 4 I/O error.
"""

from __future__ import annotations

import logging
import sys
from typing import Sequence

from .engine import Tamper, UnreachableProducer
from .scenario import (
    EXIT_CONFIG,
    EXIT_IO,
    ConfigError,
    emit_report,
    exit_code_for,
    parse_config,
    run_scenario,
)


def main(argv: Sequence[str] | None = None, *, tamper: Tamper | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(argv)
        report = run_scenario(cfg, tamper=tamper)
        if cfg.report_out is None:
            emit_report(report)
    except (ConfigError, UnreachableProducer) as exc:
        print(f"ntorrent-simple: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ntorrent-simple: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if report.error:
        print(f"ntorrent-simple: {report.error}", file=sys.stderr)
    elif report.outcome != "completed":
        print(f"ntorrent-simple: run ended {report.outcome} without completing", file=sys.stderr)
    return exit_code_for(report.outcome)


if __name__ == "__main__":
    sys.exit(main())
