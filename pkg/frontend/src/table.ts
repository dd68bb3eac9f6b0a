/** Render an experiment record as a metric grid.
 *
 * One row per corpus x geoparser cell; metric columns follow the canonical
 * order. String markers render distinctly: "not_applicable" as an n/a cell
 * and "undefined" as a dash, both CSS-classed; a null row means that cell
 * of the run failed.
 */

import { METRIC_IDS, METRIC_LABELS } from "./api.js";
import type { ExperimentRecord, MetricCell } from "./api.js";

export function formatCell(value: MetricCell | undefined): {
  text: string;
  className: string;
} {
  if (value === undefined) {
    return { text: "", className: "cell-missing" };
  }
  if (value === "not_applicable") {
    return { text: "n/a", className: "cell-na" };
  }
  if (value === "undefined") {
    return { text: "undef", className: "cell-undefined" };
  }
  return { text: value.toFixed(3), className: "cell-value" };
}

export function orderedMetrics(selected: string[]): string[] {
  const chosen = new Set(selected);
  return METRIC_IDS.filter((id) => chosen.has(id));
}

export function renderMetricTable(
  doc: Document,
  record: ExperimentRecord,
): HTMLTableElement {
  const table = doc.createElement("table");
  table.className = "metric-table";
  const metrics = orderedMetrics(record.metrics);

  const head = table.createTHead().insertRow();
  for (const title of ["Corpus", "Geoparser", ...metrics.map((m) => METRIC_LABELS[m] ?? m)]) {
    const cell = doc.createElement("th");
    cell.textContent = title;
    head.appendChild(cell);
  }

  const body = table.createTBody();
  const results = record.results ?? {};
  for (const corpusId of Object.keys(results)) {
    for (const parserId of Object.keys(results[corpusId])) {
      const row = body.insertRow();
      row.insertCell().textContent = corpusId;
      row.insertCell().textContent = parserId;
      const metricRow = results[corpusId][parserId];
      if (metricRow === null) {
        const failed = row.insertCell();
        failed.colSpan = metrics.length;
        failed.textContent = "failed";
        failed.className = "cell-failed";
        continue;
      }
      for (const metric of metrics) {
        const { text, className } = formatCell(metricRow[metric]);
        const cell = row.insertCell();
        cell.textContent = text;
        cell.className = className;
      }
    }
  }
  return table;
}
