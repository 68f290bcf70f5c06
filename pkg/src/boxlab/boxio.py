"""File formats for the command line: box files and analysis reports.

Box files are plain text with a magic+version line, a scenario header,
and the table flat in canonical order, one input block per line.  Values
are exact rational strings; decimals are accepted on input and converted
exactly, canonical output never contains floats.  Reports are JSON with
embedded certificates and the SHA-256 of the box file they refer to.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction

from .core import Box, BoxlabError, Scenario, validate_box
from .lp import LpCertificate

BOX_MAGIC = "BOXLAB-BOX 1"
REPORT_MAGIC = "BOXLAB-REPORT 1"


class ParseError(BoxlabError):
    def __init__(self, message, line=None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class StaleDigest(BoxlabError):
    pass


def parse_rational(token: str, line=None) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"cannot parse rational {token!r}", line) from None


def format_rational(value: Fraction) -> str:
    return str(value)


@dataclass(frozen=True)
class BoxFile:
    box: Box
    name: str | None = None


def dumps_box(box: Box, name: str | None = None) -> str:
    sc = box.scenario
    lines = [BOX_MAGIC]
    if name:
        lines.append(f"name: {name}")
    lines.append(f"parties: {sc.parties}")
    lines.append("inputs: " + " ".join(str(v) for v in sc.inputs))
    lines.append("outputs: " + " ".join(str(v) for v in sc.outputs))
    lines.append("table:")
    n_out = sc.num_output_tuples
    for xi in range(sc.num_input_tuples):
        block = box.table[xi * n_out : (xi + 1) * n_out]
        lines.append(" ".join(format_rational(v) for v in block))
    return "\n".join(lines) + "\n"


def loads_box(text: str) -> BoxFile:
    lines = text.splitlines()
    if not lines or lines[0].strip() != BOX_MAGIC:
        raise ParseError(f"missing magic line {BOX_MAGIC!r}", 1)
    header: dict[str, str] = {}
    table_tokens: list[tuple[str, int]] = []
    in_table = False
    for idx, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if in_table:
            table_tokens.extend((tok, idx) for tok in line.split())
            continue
        if line == "table:":
            in_table = True
            continue
        if ":" not in line:
            raise ParseError(f"expected 'key: value', got {line!r}", idx)
        key, value = line.split(":", 1)
        header[key.strip()] = value.strip()
    for key in ("parties", "inputs", "outputs"):
        if key not in header:
            raise ParseError(f"missing header field {key!r}")
    try:
        parties = int(header["parties"])
        inputs = tuple(int(v) for v in header["inputs"].split())
        outputs = tuple(int(v) for v in header["outputs"].split())
    except ValueError as exc:
        raise ParseError(f"bad scenario header: {exc}") from None
    if len(inputs) != parties or len(outputs) != parties:
        raise ParseError("scenario header sizes disagree with parties count")
    scenario = Scenario(inputs, outputs)
    if len(table_tokens) != scenario.table_size:
        raise ParseError(
            f"table has {len(table_tokens)} values, scenario needs {scenario.table_size}"
        )
    values = [parse_rational(tok, ln) for tok, ln in table_tokens]
    return BoxFile(validate_box(values, scenario), header.get("name"))


def write_box(path: str, box: Box, name: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_box(box, name))


def read_box(path: str) -> BoxFile:
    with open(path, encoding="utf-8") as fh:
        return loads_box(fh.read())


def file_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# ---------------------------------------------------------------------------
# JSON encoding of boxes, certificates, and witnesses


def encode_box(box: Box) -> dict:
    return {
        "inputs": list(box.scenario.inputs),
        "outputs": list(box.scenario.outputs),
        "table": [format_rational(v) for v in box.table],
    }


def decode_box(data: dict) -> Box:
    scenario = Scenario(tuple(data["inputs"]), tuple(data["outputs"]))
    return validate_box([parse_rational(t) for t in data["table"]], scenario)


def encode_lp_certificate(cert: LpCertificate) -> dict:
    return {
        "kind": cert.kind,
        "y_eq": [format_rational(v) for v in cert.y_eq],
        "y_ineq": [format_rational(v) for v in cert.y_ineq],
        "y_lb": [format_rational(v) for v in cert.y_lb],
        "y_ub": [format_rational(v) for v in cert.y_ub],
    }


def decode_lp_certificate(data: dict) -> LpCertificate:
    return LpCertificate(
        data["kind"],
        tuple(parse_rational(t) for t in data["y_eq"]),
        tuple(parse_rational(t) for t in data["y_ineq"]),
        tuple(parse_rational(t) for t in data["y_lb"]),
        tuple(parse_rational(t) for t in data["y_ub"]),
    )


def dumps_report(report: dict) -> str:
    payload = {"format": REPORT_MAGIC}
    payload.update(report)
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def loads_report(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"report is not valid JSON: {exc}") from None
    if data.get("format") != REPORT_MAGIC:
        raise ParseError(f"missing report magic {REPORT_MAGIC!r}")
    return data


def read_report(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return loads_report(fh.read())


def write_report(path: str, report: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_report(report))
