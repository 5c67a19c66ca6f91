"""Access to the JSON schemas shipped with the package."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib.resources import files

SCHEMAS = ("circuit", "measured_distribution", "mitigation_report", "pauli_sum", "report", "runs")


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    if name not in SCHEMAS:
        raise KeyError(f"no schema named {name!r}")
    return json.loads(files("nucresp").joinpath("schemas", f"{name}.json").read_text())
