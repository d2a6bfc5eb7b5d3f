"""Coefficient tables shipped as ready-to-use scoring models."""

from __future__ import annotations

import json
from importlib import resources

from chatdom.glm import LogitModel

PUBLISHED = {
    "model1": "model1.json",
    "model2": "model2.json",
    "model3": "model3.json",
}


def published_document(name: str) -> dict:
    try:
        fname = PUBLISHED[name]
    except KeyError:
        raise KeyError(f"unknown published model {name!r}; choose from {', '.join(PUBLISHED)}") from None
    return json.loads(resources.files("chatdom.data").joinpath(fname).read_text(encoding="utf-8"))


def published_model(name: str) -> LogitModel:
    """Model 1 (automatic indicators), 2 (manual codes) or 3 (both)."""
    return LogitModel.from_dict(published_document(name))
