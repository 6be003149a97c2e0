"""
Report Exporter for fairkc

This module writes benchmark reports as CSV or JSON, one row per
algorithm x instance x lambda cell, and reads them back. Both formats carry
the same fields in the same order; numbers are rounded to six significant
digits when a row is built, so a written report reparses to the rows that
produced it.
"""

import csv
import io
import json
import logging
import os
import sys
from dataclasses import fields as dataclass_fields
from typing import Dict, List, Optional, Sequence

from marshmallow import ValidationError

from fairkc import config
from fairkc.utils.errors import ReportError
from fairkc.utils.validators import ReportRow, ReportRowSchema

# Configure logging
logger = logging.getLogger(__name__)

REPORT_FIELDS = [f.name for f in dataclass_fields(ReportRow)]


def build_row(instance: str, algorithm: str, k: int, pairwise, community, radius,
              lambda_scale: Optional[float] = None, seed: Optional[int] = None) -> ReportRow:
    """
    Collapse the three reports of one run into a report row

    Args:
        instance: Instance name
        algorithm: Row label (solver name or fair-<scale>)
        k: Number of centers
        pairwise: PairwiseReport of the run
        community: CommunityReport of the run
        radius: RadiusReport of the run
        lambda_scale: Lambda multiplier of 1 / R_ref, None for deterministic rows
        seed: Master seed, None for deterministic rows

    Returns:
        ReportRow with rounded numbers
    """
    return ReportRow(
        instance=instance,
        algorithm=algorithm,
        k=int(k),
        lambda_scale=lambda_scale,
        mean_max_radius=radius.mean_max_radius,
        radius_ratio_opt=radius.ratio_to_optimum,
        radius_ratio_scr=radius.ratio_to_reference,
        max_pair_ratio=pairwise.max_ratio,
        max_community_mean=community.max_mean,
        trials=radius.trials,
        seed=seed,
    )


class ReportExporter:
    """
    Class for rendering report rows as CSV or JSON.
    """

    FORMATS = ["csv", "json"]

    def __init__(self, digits: int = config.REPORT_SIGNIFICANT_DIGITS):
        """
        Initialize the report exporter.

        Args:
            digits: Significant digits used when rendering floats in CSV
        """
        self.digits = digits
        self.schema = ReportRowSchema(many=True)

    def _check_format(self, format: str) -> str:
        format = format.lower()
        if format not in self.FORMATS:
            raise ReportError(f"Unsupported format: {format}. Supported formats: {', '.join(self.FORMATS)}")
        return format

    def render(self, rows: Sequence[ReportRow], format: str) -> str:
        """
        Render rows in the given format

        Args:
            rows: Report rows, written in the given order
            format: csv or json

        Returns:
            Report text
        """
        format = self._check_format(format)
        if format == "csv":
            return self._render_csv(rows)
        return self._render_json(rows)

    def _render_cell(self, value) -> str:
        if value is None:
            return ""
        if isinstance(value, float):
            return f"{value:.{self.digits}g}"
        return str(value)

    def _render_csv(self, rows: Sequence[ReportRow]) -> str:
        output = io.StringIO()
        writer = csv.DictWriter(output, fieldnames=REPORT_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({name: self._render_cell(getattr(row, name)) for name in REPORT_FIELDS})
        return output.getvalue()

    def _render_json(self, rows: Sequence[ReportRow]) -> str:
        return json.dumps(self.schema.dump(list(rows)), indent=2) + "\n"

    def write(self, rows: Sequence[ReportRow], format: str, destination: str = "-") -> None:
        """
        Write a report to a file, or to standard output when destination is "-"

        Raises:
            ReportError: For an unsupported format or an unwritable destination
        """
        text = self.render(rows, format)
        if destination == "-":
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        try:
            with open(destination, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        except OSError as e:
            raise ReportError(f"Cannot write report to {destination}: {e}")
        logger.info(f"Wrote {len(rows)} report rows to {destination}")

    def parse(self, text: str, format: str) -> List[ReportRow]:
        """
        Parse report text back into rows

        Raises:
            ReportError: For malformed text or rows that fail validation
        """
        format = self._check_format(format)
        try:
            if format == "csv":
                reader = csv.DictReader(io.StringIO(text))
                if reader.fieldnames is not None and list(reader.fieldnames) != REPORT_FIELDS:
                    raise ReportError(f"Unexpected report header: {reader.fieldnames}")
                records: List[Dict] = [
                    {name: (value if value != "" else None) for name, value in record.items()}
                    for record in reader
                ]
            else:
                records = json.loads(text)
            return self.schema.load(records)
        except json.JSONDecodeError as e:
            raise ReportError(f"Malformed JSON report: {e}")
        except ValidationError as e:
            raise ReportError(f"Invalid report rows: {e.messages}")


# Create a singleton instance
_exporter = None


def get_exporter() -> ReportExporter:
    """
    Get the global report exporter instance.

    Returns:
        ReportExporter instance
    """
    global _exporter
    if _exporter is None:
        _exporter = ReportExporter()
    return _exporter


def write_report(rows: Sequence[ReportRow], format: str, destination: str = "-") -> None:
    """
    Write report rows using the global exporter.

    An empty row list still produces a CSV header (or an empty JSON list).

    Args:
        rows: Report rows
        format: csv or json
        destination: File path, or "-" for standard output
    """
    get_exporter().write(rows, format, destination)


def read_report(source: str, format: str) -> List[ReportRow]:
    """
    Read report rows from a file path or from report text

    Args:
        source: Path to a report file, or the report text itself
        format: csv or json

    Returns:
        List of ReportRow
    """
    if "\n" not in source and os.path.isfile(source):
        try:
            with open(source, "r", encoding="utf-8", newline="") as f:
                source = f.read()
        except OSError as e:
            raise ReportError(f"Cannot read report {source}: {e}")
    return get_exporter().parse(source, format)
