"""roottrace: classify and aggregate DNS root-server query traces."""

__version__ = "0.1.0"

from .classify import (  # noqa: F401
    DEFAULT_APPLETALK_TLDS,
    classify,
    classify_stream,
    is_all_numeric,
    is_chromium_label,
)
from .ingest import IngestStats, read_pcap, read_tsv, sample, window  # noqa: F401
from .model import (  # noqa: F401
    Classification,
    DomainName,
    Leaf,
    QueryRecord,
    SenderKey,
    TopCategory,
    qclass_code,
    qclass_mnemonic,
    qtype_code,
    qtype_mnemonic,
)
from .names import (  # noqa: F401
    NameParseError,
    label_has_bad_encoding,
    parse_presentation,
    to_presentation,
)
from .report import (  # noqa: F401
    Report,
    chromium_series,
    empty_query_stats,
    fold,
    merge,
    qmin_series,
    top_level_fractions,
    top_senders,
    trend_table,
    unexpected_fraction,
    write_report,
)
from .synth import MixSpec, generate, load_mixspec, write_tsv, year_mix  # noqa: F401
from .tlds import TldRegistry, default_registry, load_registry, load_registry_path  # noqa: F401
