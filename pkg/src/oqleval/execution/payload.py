"""Reading Overpass responses into element sets, and execution feedback text."""

import csv
import io
import json
import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from oqleval.errors import PayloadError
from oqleval.metrics.elements import OSM_KINDS, ElementRef
from oqleval.utils.constants import OUTCOME_SAMPLE_CAP
from oqleval.utils.file_utils import calculate_content_hash

logger = logging.getLogger(__name__)

PAYLOAD_FORMATS = ("json", "xml", "csv")
_XML_SKIP = frozenset({"note", "meta", "remark", "bounds"})

Record = Dict[str, Any]


@dataclass(frozen=True)
class Payload:
    """Elements of one response plus the first raw records in payload order."""

    elements: frozenset = field(default_factory=frozenset)
    returned_count: int = 0
    sample: Tuple[Record, ...] = ()
    remark: Optional[str] = None


def detect_format(content_type: str, body: bytes) -> str:
    """Guess the payload format from the content type, then from the body."""
    content_type = content_type.lower()
    if "json" in content_type:
        return "json"
    if "xml" in content_type:
        return "xml"
    if "csv" in content_type:
        return "csv"
    head = body.lstrip()[:1]
    if head == b"{":
        return "json"
    if head == b"<":
        return "xml"
    return "csv"


def element_ref(record: Record) -> ElementRef:
    """Identity of one record: OSM type and id, or a hash of its content."""
    kind = record.get("type")
    osm_id = record.get("id")
    if kind in OSM_KINDS and isinstance(osm_id, int) and osm_id >= 0:
        return ElementRef(kind=kind, id=osm_id)
    content = {k: v for k, v in record.items() if k != "id"}
    return ElementRef.derived(calculate_content_hash(content))


def extract_elements(body: bytes, fmt: str) -> Payload:
    """
    Collect the element set of a response body.

    Raises:
        PayloadError: body is not well-formed in the given format
    """
    if fmt == "json":
        records, remark = _json_records(body)
    elif fmt == "xml":
        records, remark = _xml_records(body)
    elif fmt == "csv":
        records, remark = _csv_records(body), None
    else:
        raise PayloadError(f"Unknown payload format: {fmt}")

    refs = [element_ref(r) for r in records]
    return Payload(
        elements=frozenset(refs),
        returned_count=len(records),
        sample=tuple(records[:OUTCOME_SAMPLE_CAP]),
        remark=remark,
    )


def _json_records(body: bytes) -> Tuple[List[Record], Optional[str]]:
    try:
        document = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise PayloadError(f"Malformed JSON payload: {e}") from e
    if not isinstance(document, dict):
        raise PayloadError("JSON payload is not an object")
    elements = document.get("elements", [])
    if not isinstance(elements, list) or not all(isinstance(e, dict) for e in elements):
        raise PayloadError("JSON payload `elements` is not a list of objects")
    remark = document.get("remark")
    return elements, str(remark) if remark else None


def _xml_records(body: bytes) -> Tuple[List[Record], Optional[str]]:
    try:
        root = ET.fromstring(body)
    except ET.ParseError as e:
        raise PayloadError(f"Malformed XML payload: {e}") from e

    records: List[Record] = []
    remark: Optional[str] = None
    for child in root:
        if child.tag == "remark":
            remark = (child.text or "").strip() or None
            continue
        if child.tag in _XML_SKIP:
            continue
        records.append(_xml_record(child))
    return records, remark


def _xml_record(node: ET.Element) -> Record:
    record: Record = {"type": node.tag}
    for name, value in node.attrib.items():
        record[name] = _xml_value(name, value)
    tags = {t.get("k", ""): t.get("v", "") for t in node if t.tag == "tag"}
    members = [dict(m.attrib) for m in node if m.tag == "member"]
    refs = [nd.get("ref") for nd in node if nd.tag == "nd"]
    if refs:
        record["nodes"] = [int(r) for r in refs if r is not None and r.isdigit()]
    if members:
        record["members"] = members
    if tags:
        record["tags"] = tags
    return record


def _xml_value(name: str, value: str) -> Any:
    if name in ("id", "version", "changeset", "uid") and value.isdigit():
        return int(value)
    if name in ("lat", "lon"):
        try:
            return float(value)
        except ValueError:
            return value
    return value


def _csv_records(body: bytes) -> List[Record]:
    try:
        text = body.decode("utf-8")
    except UnicodeDecodeError as e:
        raise PayloadError(f"Malformed CSV payload: {e}") from e
    lines = text.splitlines()
    if not lines:
        return []

    delimiter = "\t" if "\t" in lines[0] else ","
    rows = list(csv.reader(io.StringIO(text), delimiter=delimiter))
    header = rows[0]
    has_identity = "@id" in header and "@type" in header
    if not has_identity:
        logger.warning(
            "CSV payload without @type and @id columns; "
            "elements are identified by content hash"
        )

    records: List[Record] = []
    for row in rows[1:]:
        if not row:
            continue
        record: Record = dict(zip(header, row))
        if has_identity:
            raw_id = record.pop("@id")
            record = {
                "type": record.pop("@type"),
                "id": int(raw_id) if raw_id.isdigit() else raw_id,
                **record,
            }
        records.append(record)
    return records


def format_record(record: Record) -> str:
    """One element as a dictionary literal line."""
    return repr(record)
