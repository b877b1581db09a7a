from __future__ import annotations

import argparse
import json
import sys

from app.core.config import get_settings
from app.core.exceptions import AppException
from app.services import census_service, census_store_service

settings = get_settings()


def main() -> int:
    parser = argparse.ArgumentParser(
        description="List stored census runs, or re-render one stored run in text or records format."
    )
    parser.add_argument("--db", default="", help="Database URL. Defaults to BRAIDCENSUS_DATABASE_URL.")
    parser.add_argument("--run-id", default="", help="Render this run instead of listing runs.")
    parser.add_argument("--format", choices=("text", "records"), default="text")
    parser.add_argument("--limit", type=int, default=20)
    args = parser.parse_args()

    url = args.db or settings.database_url
    try:
        with census_store_service.open_session(url) as db:
            if not args.run_id:
                print(json.dumps(census_store_service.list_runs(db, limit=args.limit), indent=2))
                return 0
            report = census_store_service.load_report(db, args.run_id)
            sys.stdout.write(census_service.format_report(report, args.format))
            return 0
    except AppException as exc:
        print(f"Census store failed: {exc.message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
