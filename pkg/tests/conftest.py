from __future__ import annotations

import json

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def validate():
    """Validate a document (or JSON text) against a shipped schema."""
    jsonschema = pytest.importorskip("jsonschema")
    from nucresp.schema import load_schema

    def check(name: str, doc):
        if isinstance(doc, str):
            doc = json.loads(doc)
        jsonschema.validate(doc, load_schema(name))
        return doc

    return check
