"""Column taxonomy for the Porto Alegre traffic-accident table.

Every input column is assigned exactly one kind.  Count and categorical
columns become model features, casualty columns feed the target label,
the datetime column is validated during cleansing, and the excluded
kinds are removed before any feature ever reaches a model.  The
``excluded_leak`` kind exists because a couple of source columns encode
the outcome itself (severity gradings filled in after the fact) and
would trivially leak the label.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import Enum


class ColumnKind(str, Enum):
    COUNT = "count"
    CATEGORICAL = "categorical"
    BINARY_FLAG = "binary_flag"
    DATETIME = "datetime"
    CASUALTY = "casualty"
    EXCLUDED_ID = "excluded_id"
    EXCLUDED_LEAK = "excluded_leak"
    EXCLUDED_GEO = "excluded_geo"


#: kinds removed from the data during cleansing
EXCLUDED_KINDS = frozenset(
    {ColumnKind.EXCLUDED_ID, ColumnKind.EXCLUDED_LEAK, ColumnKind.EXCLUDED_GEO}
)

#: kinds that must be present in the header for the pipeline to run
REQUIRED_KINDS = frozenset(
    {ColumnKind.COUNT, ColumnKind.CATEGORICAL, ColumnKind.BINARY_FLAG,
     ColumnKind.DATETIME, ColumnKind.CASUALTY}
)


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: ColumnKind

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind.value}

    @staticmethod
    def from_dict(d: dict) -> "ColumnSpec":
        return ColumnSpec(name=d["name"], kind=ColumnKind(d["kind"]))


COUNT_COLUMNS = [
    "AUTO", "TAXI", "LOTACAO", "ONIBUS_URB", "ONIBUS_MET",
    "CAMINHAO", "MOTO", "CARROCA", "BICICLETA", "OUTRO",
]

CATEGORICAL_COLUMNS = [
    "LOCAL", "TIPO_ACID", "DIA_SEM", "CONSORCIO", "TEMPO",
    "NOITE_DIA", "MES", "FX_HORA", "CORREDOR",
]

#: casualty counts summed to derive the injury label, in this order
CASUALTY_COLUMNS = ["FERIDOS", "FERIDOS_GR", "MORTES", "MORTES_POST", "FATAIS"]

ID_COLUMNS = ["ID", "BOLETIM"]

#: columns that directly encode the outcome; never usable as features
LEAKAGE_COLUMNS = ["FONTE", "UPS"]

GEO_COLUMNS = [
    "LOG1", "LOG2", "PREDIAL1", "LATITUDE", "LONGITUDE",
    "LOCAL_VIA", "REGIAO", "REGION",
]

DEFAULT_DATETIME_COLUMN = "DATA_HORA"

#: default datetime layout; the trailing time portion is parsed leniently
DEFAULT_DATETIME_FORMAT = "%Y-%m-%d %H:%M"


def normalize_name(name: str) -> str:
    """Fold a header cell for matching: trim, uppercase, strip accents."""
    stripped = unicodedata.normalize("NFKD", name.strip())
    ascii_only = stripped.encode("ascii", "ignore").decode("ascii")
    return ascii_only.upper()


def default_schema(datetime_column: str = DEFAULT_DATETIME_COLUMN) -> list[ColumnSpec]:
    """Schema for the 2013 Datapoa accident table."""
    specs = [ColumnSpec(c, ColumnKind.COUNT) for c in COUNT_COLUMNS]
    specs += [ColumnSpec(c, ColumnKind.CATEGORICAL) for c in CATEGORICAL_COLUMNS]
    specs += [ColumnSpec(c, ColumnKind.CASUALTY) for c in CASUALTY_COLUMNS]
    specs.append(ColumnSpec(datetime_column, ColumnKind.DATETIME))
    specs += [ColumnSpec(c, ColumnKind.EXCLUDED_ID) for c in ID_COLUMNS]
    specs += [ColumnSpec(c, ColumnKind.EXCLUDED_LEAK) for c in LEAKAGE_COLUMNS]
    specs += [ColumnSpec(c, ColumnKind.EXCLUDED_GEO) for c in GEO_COLUMNS]
    return specs
