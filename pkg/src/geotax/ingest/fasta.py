"""FASTA parsing and writing: multi-record, wrapped or unwrapped lines,
CRLF tolerated, round-trip preserving headers and sequence bytes."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..errors import MalformedHeaderError, MalformedRecordError


@dataclass(frozen=True)
class FastaRecord:
    header: str     # text after '>', without the newline
    sequence: str


def parse_fasta(path: str | Path) -> list[FastaRecord]:
    records: list[FastaRecord] = []
    header: str | None = None
    chunks: list[str] = []

    def flush():
        if header is None:
            return
        seq = "".join(chunks)
        if not seq:
            raise MalformedRecordError(f"record {header!r} has an empty sequence")
        records.append(FastaRecord(header, seq))

    with open(path, "r", newline=None) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            if line.startswith(">"):
                flush()
                header = line[1:].strip()
                if not header:
                    raise MalformedHeaderError(f"{path}:{lineno}: empty header")
                chunks = []
            else:
                if header is None:
                    raise MalformedHeaderError(
                        f"{path}:{lineno}: sequence data before any header"
                    )
                chunks.append(line.strip())
    flush()
    if not records:
        raise MalformedRecordError(f"{path}: no FASTA records")
    return records


def write_fasta(records, path: str | Path, width: int = 80) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(f">{rec.header}\n")
            seq = rec.sequence
            if width:
                for i in range(0, len(seq), width):
                    fh.write(seq[i : i + width] + "\n")
            else:
                fh.write(seq + "\n")
