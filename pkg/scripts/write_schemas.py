"""Dump the CLI output schemas to docs/schemas/<command>.json."""

import argparse
import json
from pathlib import Path

from vphi.schemas import SCHEMAS


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "docs" / "schemas"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, schema in SCHEMAS.items():
        (out / f"{name}.json").write_text(json.dumps(schema, indent=2) + "\n")
        print(out / f"{name}.json")


if __name__ == "__main__":
    main()
