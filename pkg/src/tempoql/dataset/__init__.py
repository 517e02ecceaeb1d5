from .spec import DatasetSpecification, TableSpec, VocabularySpec, load_spec
from .ingest import Dataset, ingest
from .catalog import CatalogEntry, build_catalog, search_concepts
from .resolve import RetrievalPlan, resolve_elements

__all__ = [
    "DatasetSpecification", "TableSpec", "VocabularySpec", "load_spec",
    "Dataset", "ingest",
    "CatalogEntry", "build_catalog", "search_concepts",
    "RetrievalPlan", "resolve_elements",
]
