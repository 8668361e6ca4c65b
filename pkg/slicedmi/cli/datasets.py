"""
Dataset and result file I/O

Datasets are headerless delimited numeric text: one sample per row, comma
or whitespace separated, one column per dimension. Lines starting with '#'
and blank lines are skipped.
"""
import csv
import json
import logging
import math
import os
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from slicedmi.exceptions import DatasetParseError

logger = logging.getLogger(__name__)


def parse_table(lines: Iterable[str], source: str = '<table>') -> np.ndarray:
    """
    Parse numeric rows into an n x d matrix

    Raises:
        DatasetParseError: Non-numeric or non-finite field, ragged rows or no rows,
        with the 1-based line number
    """
    rows: List[List[float]] = []
    width: Optional[int] = None
    for line_number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        fields = [f.strip() for f in line.split(',')] if ',' in line else line.split()
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise DatasetParseError("non-numeric field", path=source, line=line_number)
        if not all(math.isfinite(v) for v in values):
            raise DatasetParseError("non-finite value", path=source, line=line_number)
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise DatasetParseError(f"expected {width} columns, found {len(values)}",
                                    path=source, line=line_number)
        rows.append(values)
    if not rows:
        raise DatasetParseError("no data rows", path=source)
    return np.asarray(rows, dtype=float)


def load_table(path: str) -> np.ndarray:
    """Read a dataset file; the file is opened read-only"""
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            table = parse_table(handle, source=path)
    except UnicodeDecodeError as e:
        raise DatasetParseError(f"dataset is not valid text: {e.reason}", path=path) from e
    except OSError as e:
        raise DatasetParseError(f"cannot read dataset: {e.strerror}", path=path) from e
    logger.info(f"Loaded {table.shape[0]} x {table.shape[1]} table from {path}")
    return table


def write_table(path: str, table: np.ndarray) -> str:
    """Write a headerless comma-separated numeric table"""
    table = np.atleast_2d(np.asarray(table, dtype=float))
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        for row in table:
            writer.writerow([repr(float(v)) for v in row])
    return path


def write_csv(path: str, columns: Sequence[str], rows: Iterable[Dict[str, Any]],
              provenance: Optional[str] = None) -> str:
    """
    Write a CSV with a header row

    Args:
        path: Target file
        columns: Header and column order; extra row keys are ignored
        rows: Row dictionaries
        provenance: Single-line JSON written first as a '# ' comment
    """
    with open(path, 'w', newline='') as handle:
        if provenance is not None:
            handle.write(f"# {provenance}\n")
        writer = csv.DictWriter(handle, fieldnames=list(columns), extrasaction='ignore',
                                lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    logger.info(f"Wrote {path}")
    return path


def write_json(path: str, document: Dict[str, Any]) -> str:
    with open(path, 'w') as handle:
        json.dump(document, handle, indent=2, sort_keys=True, allow_nan=True)
        handle.write('\n')
    logger.info(f"Wrote {path}")
    return path


def read_provenance(path: str) -> Optional[Dict[str, Any]]:
    """The JSON document of a CSV's leading '# ' comment line, if any"""
    with open(path, 'r') as handle:
        first = handle.readline()
    if not first.startswith('# '):
        return None
    return json.loads(first[2:])


def ensure_directory(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
