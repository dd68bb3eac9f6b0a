/** Page wiring: load the catalogs, run experiments, search the archive. */

import { ApiError, Client, METRIC_IDS, METRIC_LABELS } from "./api.js";
import type { ExperimentRecord } from "./api.js";
import { setupForm } from "./form.js";
import { pollExperiment } from "./poll.js";
import { renderMetricTable } from "./table.js";
import { ID_FORMAT_HINT, normalizeExperimentId } from "./search.js";

const client = new Client();

function byId<T extends HTMLElement>(id: string): T {
  const element = document.getElementById(id);
  if (!element) {
    throw new Error(`missing #${id} in index.html`);
  }
  return element as T;
}

function showError(message: string): void {
  const banner = byId<HTMLDivElement>("banner");
  banner.textContent = message;
  banner.classList.remove("hidden");
}

function clearError(): void {
  byId<HTMLDivElement>("banner").classList.add("hidden");
}

function reportFailure(error: unknown): void {
  if (error instanceof ApiError) {
    showError(error.message);
  } else {
    showError(String(error));
  }
}

function renderRecord(target: HTMLElement, record: ExperimentRecord): void {
  target.textContent = "";
  const status = document.createElement("p");
  status.className = `status status-${record.status}`;
  status.textContent = `${record.experiment_id}: ${record.status} (${record.created_at})`;
  target.appendChild(status);
  const config = document.createElement("p");
  config.className = "run-config";
  const parsers = record.geoparsers
    .map((g) => `${g.display_name} ${g.version}`)
    .join(", ");
  config.textContent =
    `corpora: ${record.corpora.join(", ")}; geoparsers: ${parsers}; ` +
    `metrics: ${record.metrics.join(", ")}`;
  target.appendChild(config);
  if (record.failure_detail) {
    const detail = document.createElement("p");
    detail.className = "failure-detail";
    detail.textContent = record.failure_detail;
    target.appendChild(detail);
  }
  if (record.results) {
    target.appendChild(renderMetricTable(document, record));
  }
}

async function refreshRecent(): Promise<void> {
  const list = byId<HTMLUListElement>("recent-list");
  const summaries = await client.listExperiments(10);
  list.textContent = "";
  for (const summary of summaries) {
    const item = document.createElement("li");
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = summary.experiment_id;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      void showExperiment(summary.experiment_id);
    });
    item.appendChild(link);
    item.appendChild(
      document.createTextNode(` ${summary.status}, ${summary.created_at}`),
    );
    list.appendChild(item);
  }
}

async function showExperiment(id: string): Promise<void> {
  clearError();
  try {
    const record = await client.getExperiment(id);
    renderRecord(byId("search-result"), record);
  } catch (error) {
    reportFailure(error);
  }
}

async function rebuildForm(): Promise<void> {
  const [corpora, geoparsers] = await Promise.all([
    client.listCorpora(),
    client.listGeoparsers(),
  ]);
  setupForm(
    byId("form-root"),
    {
      corpora: corpora.map((c) => ({
        id: c.id,
        label: `${c.name} (${c.entries} entries, ${c.annotations} annotations)`,
      })),
      geoparsers: geoparsers.map((g) => ({
        id: g.id,
        label: `${g.display_name} ${g.version}`,
      })),
      metrics: METRIC_IDS.map((id) => ({ id, label: METRIC_LABELS[id] ?? id })),
    },
    (selection) => {
      void runExperiment(selection.corpora, selection.geoparsers, selection.metrics);
    },
  );
}

async function runExperiment(
  corpora: string[],
  geoparsers: string[],
  metrics: string[],
): Promise<void> {
  clearError();
  const result = byId<HTMLDivElement>("run-result");
  try {
    const id = await client.startExperiment(corpora, geoparsers, metrics);
    result.textContent = `experiment ${id} started...`;
    const record = await pollExperiment((eid) => client.getExperiment(eid), id, {
      onAttempt: (r) => {
        result.textContent = `experiment ${r.experiment_id}: ${r.status}`;
      },
    });
    renderRecord(result, record);
    await refreshRecent();
  } catch (error) {
    reportFailure(error);
  }
}

function wireSearch(): void {
  const input = byId<HTMLInputElement>("search-input");
  const hint = byId<HTMLParagraphElement>("search-hint");
  byId<HTMLButtonElement>("search-button").addEventListener("click", () => {
    const id = normalizeExperimentId(input.value);
    if (id === null) {
      hint.textContent = ID_FORMAT_HINT;
      return;
    }
    hint.textContent = "";
    void showExperiment(id);
  });
}

function wireUpload(): void {
  byId<HTMLButtonElement>("upload-button").addEventListener("click", () => {
    void (async () => {
      clearError();
      const fileInput = byId<HTMLInputElement>("upload-file");
      const fully = byId<HTMLInputElement>("upload-fully").checked;
      const file = fileInput.files?.[0];
      if (!file) {
        showError("choose a corpus XML file first");
        return;
      }
      try {
        const id = await client.uploadCorpus(file, fully);
        byId("upload-result").textContent = `stored corpus ${id}`;
        await rebuildForm();
      } catch (error) {
        reportFailure(error);
      }
    })();
  });
}

function wireRegister(): void {
  byId<HTMLButtonElement>("register-button").addEventListener("click", () => {
    void (async () => {
      clearError();
      const registration = {
        id: byId<HTMLInputElement>("register-id").value.trim(),
        display_name: byId<HTMLInputElement>("register-name").value.trim(),
        kind: "rest",
        version: byId<HTMLInputElement>("register-version").value.trim() || "0",
        endpoint_url: byId<HTMLInputElement>("register-url").value.trim(),
      };
      try {
        const id = await client.registerGeoparser(registration);
        byId("register-result").textContent = `registered ${id}`;
        await rebuildForm();
      } catch (error) {
        reportFailure(error);
      }
    })();
  });
}

async function start(): Promise<void> {
  wireSearch();
  wireUpload();
  wireRegister();
  try {
    await rebuildForm();
    await refreshRecent();
  } catch (error) {
    reportFailure(error);
  }
}

document.addEventListener("DOMContentLoaded", () => {
  void start();
});
