"""Tabular results with provenance: CSV plus JSON sidecar, or a single JSON file."""
import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version


def package_version():
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _parse_value(text):
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return {"true": True, "false": False}.get(text, text)


@dataclass
class ResultRecord:
    """A dataset: input echo, named columns, rows and provenance."""

    command: str
    inputs: dict
    columns: list
    rows: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def metadata(self):
        return {"command": self.command, "inputs": self.inputs, "columns": self.columns,
                "provenance": self.provenance}

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(v) for v in row])
        return buf.getvalue()

    def to_json(self):
        rows = [[None if isinstance(v, float) and math.isnan(v) else v for v in row] for row in self.rows]
        return json.dumps({**self.metadata(), "rows": rows}, indent=1, sort_keys=False) + "\n"

    def write(self, path, fmt="csv"):
        """Write to ``path``; CSV output also gets ``<path>.json`` with the metadata."""
        if fmt == "json":
            with open(path, "w") as fh:
                fh.write(self.to_json())
            return [path]
        sidecar = f"{path}.json"
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())
        with open(sidecar, "w") as fh:
            json.dump(self.metadata(), fh, indent=1)
            fh.write("\n")
        return [path, sidecar]

    @classmethod
    def read(cls, path):
        """Inverse of :meth:`write` (format inferred from the file contents)."""
        with open(path) as fh:
            text = fh.read()
        if text.lstrip().startswith("{"):
            data = json.loads(text)
            rows = [[math.nan if v is None else v for v in row] for row in data["rows"]]
            return cls(data["command"], data["inputs"], data["columns"], rows, data["provenance"])
        with open(f"{path}.json") as fh:
            meta = json.load(fh)
        reader = csv.reader(io.StringIO(text))
        columns = next(reader)
        rows = [[_parse_value(v) for v in row] for row in reader]
        return cls(meta["command"], meta["inputs"], columns, rows, meta["provenance"])
