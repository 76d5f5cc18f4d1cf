"""
CAIDA AS-relationship ingestion

Serial format: '#'-prefixed comments, data lines ``as1|as2|rel[|source]``
with rel 0 for peers and -1 when as1 is the provider of as2.
"""

import logging
import re
from pathlib import Path
from typing import Dict, Tuple, Union

import networkx as nx

try:
    from .graph import AsGraph
    from ..utils.errors import ParseError, ConflictError
    from ..utils.constants import REL_P2P, REL_C2P, CAIDA_P2P, CAIDA_P2C
except ImportError:
    from topology.graph import AsGraph
    from utils.errors import ParseError, ConflictError
    from utils.constants import REL_P2P, REL_C2P, CAIDA_P2P, CAIDA_P2C

logger = logging.getLogger(__name__)

LINE_PATTERN = re.compile(r"^\s*(\d+)\|(\d+)\|(-?\d+)(\|.*)?\s*$")


def parse_asrel_line(line: str, lineno: int = 0) -> Tuple[int, int, int]:
    """Split one data line into (as1, as2, rel code)"""
    match = LINE_PATTERN.match(line)
    if not match:
        raise ParseError(f"Line {lineno}: malformed relationship record {line.strip()!r}")
    as1, as2, code = int(match.group(1)), int(match.group(2)), int(match.group(3))
    if code not in (CAIDA_P2P, CAIDA_P2C):
        raise ParseError(f"Line {lineno}: unknown relationship code {code}")
    if as1 == as2:
        raise ParseError(f"Line {lineno}: AS {as1} related to itself")
    return as1, as2, code


def load_caida_asrel(path: Union[str, Path]) -> AsGraph:
    """Read a serial AS-rel file into a labeled graph.

    Repeated pairs are accepted when they agree and rejected otherwise.
    """
    path = Path(path)
    # (low asn, high asn) -> (label, customer asn)
    records: Dict[Tuple[int, int], Tuple[str, int]] = {}
    lineno = 0
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                as1, as2, code = parse_asrel_line(line, lineno)
                # -1: as1 provides transit to its customer as2
                record = (REL_P2P, -1) if code == CAIDA_P2P else (REL_C2P, as2)
                key = (min(as1, as2), max(as1, as2))
                previous = records.get(key)
                if previous is not None and previous != record:
                    raise ConflictError(f"Line {lineno}: conflicting relationships for AS pair {key}")
                records[key] = record
    except UnicodeDecodeError as e:
        raise ParseError(f"{path} is not UTF-8 text after line {lineno}: {e.reason}")
    except OSError as e:
        raise ParseError(f"Cannot read {path}: {e}")

    asns = sorted({asn for key in records for asn in key})
    index = {asn: node for node, asn in enumerate(asns)}
    graph = nx.Graph()
    for asn, node in index.items():
        graph.add_node(node, asn=asn)
    for (low, high), (label, customer) in records.items():
        attrs = {"rel": label}
        if label == REL_C2P:
            attrs["customer"] = index[customer]
        graph.add_edge(index[low], index[high], **attrs)

    logger.info(f"Loaded {len(asns)} ASes and {len(records)} links from {path}")
    return AsGraph(graph)
