import { describe, expect, it } from "vitest";

import type { ExperimentRecord } from "../src/api.js";
import { formatCell, orderedMetrics, renderMetricTable } from "../src/table.js";

const RECORD: ExperimentRecord = {
  experiment_id: "A1B2C3D4E5F6G7H8",
  created_at: "2026-08-26T00:00:00+00:00",
  corpora: ["news10", "wiki"],
  geoparsers: [],
  metrics: [
    "precision",
    "recall",
    "fscore",
    "accuracy",
    "med",
    "mdned",
    "acc_at_161",
    "auc",
  ],
  status: "complete",
  results: {
    news10: {
      gazpop: {
        precision: 1,
        recall: 0.8,
        fscore: 0.8888888888888888,
        accuracy: 0.8,
        med: 25,
        mdned: 0,
        acc_at_161: 0.875,
        auc: 0.066,
      },
      broken: null,
    },
    wiki: {
      gazpop: {
        precision: "not_applicable",
        recall: "not_applicable",
        fscore: "not_applicable",
        accuracy: 0.5,
        med: "undefined",
        mdned: "undefined",
        acc_at_161: "undefined",
        auc: "undefined",
      },
    },
  },
  failure_detail: null,
};

describe("metric table", () => {
  it("orders selected metrics canonically", () => {
    expect(orderedMetrics(["auc", "precision", "med"])).toEqual([
      "precision",
      "med",
      "auc",
    ]);
  });

  it("formats numbers to three decimals and markers distinctly", () => {
    expect(formatCell(0.875)).toEqual({ text: "0.875", className: "cell-value" });
    expect(formatCell("not_applicable")).toEqual({ text: "n/a", className: "cell-na" });
    expect(formatCell("undefined")).toEqual({
      text: "undef",
      className: "cell-undefined",
    });
  });

  it("renders an eight-metric grid with corpus and geoparser columns", () => {
    const table = renderMetricTable(document, RECORD);
    const headers = Array.from(table.querySelectorAll("th")).map(
      (th) => th.textContent,
    );
    expect(headers).toHaveLength(10); // corpus + geoparser + 8 metrics
    expect(headers[0]).toBe("Corpus");
    expect(headers.at(-1)).toBe("AUC");

    const rows = table.querySelectorAll("tbody tr");
    expect(rows).toHaveLength(3); // news10/gazpop, news10/broken, wiki/gazpop
    const first = Array.from(rows[0].querySelectorAll("td")).map(
      (td) => td.textContent,
    );
    expect(first).toEqual([
      "news10",
      "gazpop",
      "1.000",
      "0.800",
      "0.889",
      "0.800",
      "25.000",
      "0.000",
      "0.875",
      "0.066",
    ]);
  });

  it("marks not_applicable cells so they render differently", () => {
    const table = renderMetricTable(document, RECORD);
    const naCells = table.querySelectorAll("td.cell-na");
    expect(naCells).toHaveLength(3); // wiki precision/recall/fscore
    for (const cell of Array.from(naCells)) {
      expect(cell.textContent).toBe("n/a");
    }
  });

  it("collapses a failed cell into one marked table cell", () => {
    const table = renderMetricTable(document, RECORD);
    const failed = table.querySelector("td.cell-failed");
    expect(failed).not.toBeNull();
    expect(failed?.textContent).toBe("failed");
    expect(failed?.getAttribute("colspan")).toBe("8");
  });

  it("renders only the header when results are absent", () => {
    const running: ExperimentRecord = { ...RECORD, status: "running", results: null };
    const table = renderMetricTable(document, running);
    expect(table.querySelectorAll("tbody tr")).toHaveLength(0);
  });
});
