"""Bundled sample data: the eight-triple drug extract, a labelled query suite
and the default routing policy."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

MINI_KG = "mini_kg.nt"
WORKLOAD_QUERIES = "workload_queries.rq"
DEFAULT_POLICY = "default_policy.json"


def path(name: str) -> Path:
    return Path(str(resources.files(__name__).joinpath(name)))


def read(name: str) -> str:
    return path(name).read_text(encoding="utf-8")
