"""Report assembly: fixed-schema CSV sections plus SVG renderings.

A report is a mapping from section name to a section dict:
  {"kind": "table",  "columns": [...], "rows": [[...], ...]}
  {"kind": "curves", "x_name": str, "x": [...], "series": {label: [...]}}
  {"kind": "matrix", "locations": [...], "values": [[...], ...]}
Sections emit deterministically (sorted by name) so re-runs are
byte-identical.
"""

from __future__ import annotations

import csv
import json
import os

from . import svgplot

__all__ = ["emit_report"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _write_table(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def emit_report(report: dict, output_dir) -> list[str]:
    """Write every section of `report` under output_dir; returns the
    manifest of written paths (also saved as manifest.json)."""
    os.makedirs(output_dir, exist_ok=True)
    written: list[str] = []
    omitted: list[str] = []
    for name in sorted(report):
        section = report[name]
        if not section:
            omitted.append(name)
            continue
        kind = section["kind"]
        base = os.path.join(output_dir, name)
        if kind == "table":
            _write_table(base + ".csv", section["columns"], section["rows"])
            written.append(base + ".csv")
        elif kind == "curves":
            x = section["x"]
            labels = list(section["series"])
            rows = [[x[i]] + [section["series"][lab][i] for lab in labels]
                    for i in range(len(x))]
            _write_table(base + ".csv", [section["x_name"]] + labels, rows)
            written.append(base + ".csv")
            svgplot.line_plot(base + ".svg", x,
                              [(lab, section["series"][lab]) for lab in labels],
                              title=name, xlabel=section["x_name"])
            written.append(base + ".svg")
        elif kind == "matrix":
            locs = section["locations"]
            _write_table(base + ".csv", [_fmt(float(v)) for v in locs],
                         section["values"])
            written.append(base + ".csv")
            svgplot.heatmap(base + ".svg", section["values"], title=name)
            written.append(base + ".svg")
        else:
            raise ValueError(f"unknown section kind {kind!r} in {name!r}")
    manifest = {"files": [os.path.basename(p) for p in written],
                "omitted_sections": omitted}
    mpath = os.path.join(output_dir, "manifest.json")
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(mpath)
    return written
