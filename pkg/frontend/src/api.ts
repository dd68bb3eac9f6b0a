/** Typed client for the benchmarking server's JSON API.
 *
 * Every non-2xx response carries {code, message, detail?}; request() turns
 * that into an ApiError so callers can surface message to the user.
 */

export interface ApiErrorBody {
  code: string;
  message: string;
  detail?: unknown;
}

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.name = "ApiError";
    this.status = status;
    this.code = body.code;
    this.detail = body.detail;
  }
}

export interface CorpusMeta {
  id: string;
  name: string;
  genre: string;
  fully_annotated: boolean;
  entries: number;
  annotations: number;
}

export interface GeoparserMeta {
  id: string;
  display_name: string;
  kind: string;
  version: string;
  endpoint_url: string | null;
  rate_limit: number | null;
}

export type MetricCell = number | "not_applicable" | "undefined";
export type MetricRow = Record<string, MetricCell>;
/** results[corpusId][geoparserId] is a row, or null when that cell failed */
export type MetricTable = Record<string, Record<string, MetricRow | null>>;

export type ExperimentStatus = "running" | "complete" | "failed";

export interface ExperimentRecord {
  experiment_id: string;
  created_at: string;
  corpora: string[];
  geoparsers: GeoparserMeta[];
  metrics: string[];
  status: ExperimentStatus;
  results: MetricTable | null;
  failure_detail: string | null;
}

export interface ExperimentSummary {
  experiment_id: string;
  created_at: string;
  status: ExperimentStatus;
  corpora: string[];
  geoparsers: string[];
  metrics: string[];
}

/** Canonical metric column order; the server reports rows in this order. */
export const METRIC_IDS = [
  "precision",
  "recall",
  "fscore",
  "accuracy",
  "med",
  "mdned",
  "acc_at_161",
  "auc",
] as const;

export const METRIC_LABELS: Record<string, string> = {
  precision: "Precision",
  recall: "Recall",
  fscore: "F-score",
  accuracy: "Accuracy",
  med: "Mean error (km)",
  mdned: "Median error (km)",
  acc_at_161: "Acc@161km",
  auc: "AUC",
};

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Client {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let body: ApiErrorBody;
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        body = { code: "http_error", message: `HTTP ${response.status}` };
      }
      throw new ApiError(response.status, body);
    }
    return (await response.json()) as T;
  }

  async listCorpora(): Promise<CorpusMeta[]> {
    const doc = await this.request<{ corpora: CorpusMeta[] }>("/api/corpora");
    return doc.corpora;
  }

  async listGeoparsers(): Promise<GeoparserMeta[]> {
    const doc = await this.request<{ geoparsers: GeoparserMeta[] }>("/api/geoparsers");
    return doc.geoparsers;
  }

  async uploadCorpus(xml: string | Blob, fullyAnnotated = true): Promise<string> {
    const query = fullyAnnotated ? "" : "?fully_annotated=false";
    const doc = await this.request<{ id: string }>(`/api/corpora${query}`, {
      method: "POST",
      headers: { "Content-Type": "application/xml" },
      body: xml,
    });
    return doc.id;
  }

  async registerGeoparser(registration: object): Promise<string> {
    const doc = await this.request<{ id: string }>("/api/geoparsers", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(registration),
    });
    return doc.id;
  }

  async startExperiment(
    corpora: string[],
    geoparsers: string[],
    metrics: string[],
  ): Promise<string> {
    const doc = await this.request<{ experiment_id: string }>("/api/experiments", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ corpora, geoparsers, metrics }),
    });
    return doc.experiment_id;
  }

  getExperiment(id: string): Promise<ExperimentRecord> {
    return this.request<ExperimentRecord>(`/api/experiments/${encodeURIComponent(id)}`);
  }

  async listExperiments(limit = 20): Promise<ExperimentSummary[]> {
    const doc = await this.request<{ experiments: ExperimentSummary[] }>(
      `/api/experiments?limit=${limit}`,
    );
    return doc.experiments;
  }
}
