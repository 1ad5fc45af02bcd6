"""
CSV and JSON serialization of reports.

CSV files start with one ``#`` line naming the schema and its version,
followed by a header row. Floats are written with 12 significant digits.
JSON goes through pydantic so every emitted document re-parses into the
report type that produced it.
"""
import csv
import logging
from functools import singledispatch
from typing import Any, Iterable, TextIO, TypeVar

from pydantic import TypeAdapter

from fdi_game.core.models import MonteCarloEstimate
from fdi_game.core.ports import ReportWriter
from fdi_game.core.reports import ExponentCurve, FeedbackReport, PathBundle, SaddleReport, ValueReport

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

R = TypeVar("R")


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


class Table:
    def __init__(self, schema: str, columns: list[str], rows: Iterable[dict[str, Any]]):
        self.schema = schema
        self.columns = columns
        self.rows = rows


def _config_columns(config) -> dict[str, float]:
    return {
        "T": config.horizon,
        "d": config.unsafe_slope,
        "c": config.success_floor,
        "eps": config.false_alarm_budget,
    }


@singledispatch
def to_table(report: Any) -> Table:
    raise TypeError(f"no CSV layout for {type(report).__name__}")


@to_table.register
def _(report: ValueReport) -> Table:
    row = {
        **_config_columns(report.config),
        "theta_bar": report.theta_bar,
        "detector_cutoff": report.detector_cutoff,
        "log_lambda_star": report.log_lambda_star,
        "game_value": report.game_value,
        "baseline_unsafe_probability": report.baseline_unsafe_probability,
        "relative_entropy": report.information.relative_entropy,
        "variance": report.information.variance,
        "symmetric": report.symmetric,
        "symmetric_value": report.symmetric_value,
    }
    return Table("value", list(row), [row])


_SADDLE_COLUMNS = [
    "side", "description", "alpha", "alpha_stderr", "beta", "beta_stderr",
    "closed_form_beta", "margin", "passed", "note",
]


def _estimate_cells(prefix: str, estimate: MonteCarloEstimate | None) -> dict[str, Any]:
    if estimate is None:
        return {prefix: None, f"{prefix}_stderr": None}
    return {prefix: estimate.estimate, f"{prefix}_stderr": estimate.stderr}


@to_table.register
def _(report: SaddleReport) -> Table:
    rows = [{
        "side": "value",
        "description": "theta* vs phi*",
        **_estimate_cells("alpha", None),
        **_estimate_cells("beta", report.beta_star_mc),
        "closed_form_beta": report.value_closed_form,
        "margin": report.value_margin,
        "passed": report.value_consistent,
        "note": None,
    }]
    for deviation in report.attacker_deviations:
        rows.append({
            "side": "attacker",
            "description": deviation.description,
            **_estimate_cells("alpha", None),
            **_estimate_cells("beta", deviation.beta),
            "closed_form_beta": deviation.best_response_beta,
            "margin": deviation.margin,
            "passed": deviation.passed,
            "note": None,
        })
    for deviation in report.detector_deviations:
        rows.append({
            "side": "detector",
            "description": deviation.description,
            **_estimate_cells("alpha", deviation.alpha),
            **_estimate_cells("beta", deviation.beta),
            "closed_form_beta": None,
            "margin": deviation.margin,
            "passed": deviation.passed,
            "note": None,
        })
    for skipped in report.skipped:
        rows.append({
            "side": "skipped",
            "description": skipped.description,
            **_estimate_cells("alpha", None),
            **_estimate_cells("beta", None),
            "closed_form_beta": None,
            "margin": None,
            "passed": None,
            "note": skipped.reason,
        })
    return Table("saddle", _SADDLE_COLUMNS, rows)


_EXPONENT_COLUMNS = [
    "T", "theta_bar", "neg_log_beta", "first_order_term",
    "second_order_term", "hoeffding_bound", "residual",
]


@to_table.register
def _(report: ExponentCurve) -> Table:
    rows = (
        {
            "T": p.horizon,
            "theta_bar": p.theta_bar,
            "neg_log_beta": p.neg_log_beta,
            "first_order_term": p.first_order_term,
            "second_order_term": p.second_order_term,
            "hoeffding_bound": p.hoeffding_bound,
            "residual": p.residual,
        }
        for p in report.points
    )
    return Table("exponents", _EXPONENT_COLUMNS, rows)


@to_table.register
def _(report: FeedbackReport) -> Table:
    row = {
        **_config_columns(report.config),
        "policy": report.policy,
        "steps": report.steps,
        **_estimate_cells("gamma", report.gamma),
        **_estimate_cells("beta", report.beta),
        **_estimate_cells("alpha", report.alpha),
        "game_value": report.game_value,
        "saddle_broken": report.saddle_broken,
    }
    return Table("feedback", list(row), [row])


@to_table.register
def _(report: PathBundle) -> Table:
    rows = (
        {"path_id": path.path_id, "t": t, "x": x}
        for path in report.paths
        for t, x in zip(path.times, path.values)
    )
    return Table("paths", ["path_id", "t", "x"], rows)


class CsvReportWriter(ReportWriter):
    def write(self, report: Any, stream: TextIO) -> None:
        table = to_table(report)
        stream.write(f"# fdi_game.{table.schema} v{SCHEMA_VERSION}\n")
        writer = csv.DictWriter(stream, fieldnames=table.columns, lineterminator="\n")
        writer.writeheader()
        count = 0
        for row in table.rows:
            writer.writerow({key: format_cell(value) for key, value in row.items()})
            count += 1
        logger.debug(f"Wrote {count} {table.schema} rows")


class JsonReportWriter(ReportWriter):
    def write(self, report: Any, stream: TextIO) -> None:
        payload = TypeAdapter(type(report)).dump_json(report, indent=2)
        stream.write(payload.decode("utf-8"))
        stream.write("\n")


def parse_report(report_type: type[R], text: str | bytes) -> R:
    """Re-parse a JSON document written by JsonReportWriter."""
    return TypeAdapter(report_type).validate_json(text)


def writer_for(output_format: str) -> ReportWriter:
    if output_format == "csv":
        return CsvReportWriter()
    if output_format == "json":
        return JsonReportWriter()
    raise ValueError(f"unknown output format: {output_format}")
