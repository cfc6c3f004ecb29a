#!/usr/bin/env python3
"""Regenerate packaged data: robot model documents (and, via flags, task
scenes / calibration profiles / golden streams as those tools land).

Run from the repo root: python tools/gen_data.py
"""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from telekin._models_builtin import builtin_docs  # noqa: E402

DATA = pathlib.Path(__file__).resolve().parents[1] / "src" / "telekin" / "data"


def main() -> None:
    models = DATA / "models"
    models.mkdir(parents=True, exist_ok=True)
    for name, doc in builtin_docs().items():
        path = models / f"{name}.json"
        path.write_text(json.dumps(doc, indent=1) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
