"""Project configuration: where the catalog, design, data, and output live."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .catalog import RelationalCatalog, SourceDescriptor, load_catalog
from .ddl import parse_ddl
from .design import DesignDocument, load_design
from .errors import DesignError, MissingFileError, SchemaViolationError


@dataclass(frozen=True)
class ServeOptions:
    bind: str = "127.0.0.1"
    port: int = 8000

    def __post_init__(self) -> None:
        if not (1 <= self.port <= 65535):
            raise SchemaViolationError(f"port {self.port} outside 1-65535")


@dataclass(frozen=True)
class ProjectConfig:
    source: SourceDescriptor
    design_path: Path
    out_dir: Path
    serve: ServeOptions

    @property
    def catalog_path(self) -> Path:
        return Path(self.source.catalog_path)

    @property
    def data_dir(self) -> Path:
        if not self.source.data_dir:
            raise MissingFileError("project source has no data_dir configured")
        return Path(self.source.data_dir)

    def load_catalog(self) -> RelationalCatalog:
        path = self.catalog_path
        if not path.exists():
            raise MissingFileError(f"missing catalog file {path}")
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() == ".json":
            return load_catalog(text)
        return parse_ddl(text)

    def load_design(self) -> DesignDocument:
        if not self.design_path.exists():
            raise MissingFileError(f"missing design document {self.design_path}")
        try:
            document = json.loads(self.design_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DesignError(f"design document is not valid JSON: {exc}") from exc
        return load_design(document)


def load_project(path: str | Path) -> ProjectConfig:
    """Read a project config file; relative paths resolve beside it."""
    path = Path(path)
    if not path.exists():
        raise MissingFileError(f"missing project config {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaViolationError(f"project config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaViolationError("project config must be a JSON object")
    base = path.parent

    source_doc = doc.get("source")
    if not isinstance(source_doc, dict):
        raise SchemaViolationError("project config needs a source object")
    if "catalog" not in source_doc:
        raise SchemaViolationError("project source needs a catalog path")

    def resolve(value: str | None) -> str | None:
        if value is None:
            return None
        return str((base / value).resolve()) if not Path(value).is_absolute() else value

    source = SourceDescriptor(
        schema_name=source_doc.get("schema", "main"),
        catalog_path=resolve(source_doc["catalog"]),
        data_dir=resolve(source_doc.get("data_dir")),
        host=source_doc.get("host"),
        port=source_doc.get("port"),
        user=source_doc.get("user"),
        secret_ref=source_doc.get("secret_ref"),
    )
    if "design" not in doc:
        raise SchemaViolationError("project config needs a design path")
    design_path = Path(resolve(doc["design"]))
    out_dir = Path(resolve(doc.get("out", "out")))

    serve_doc = doc.get("serve", {})
    if not isinstance(serve_doc, dict):
        raise SchemaViolationError("serve options must be an object")
    serve = ServeOptions(
        bind=serve_doc.get("bind", "127.0.0.1"),
        port=serve_doc.get("port", 8000),
    )
    return ProjectConfig(source=source, design_path=design_path, out_dir=out_dir, serve=serve)


def fixture_dir(name: str) -> Path:
    """Directory of a bundled fixture project (mini_retail, gorannet)."""
    return Path(__file__).parent / "fixtures" / name
