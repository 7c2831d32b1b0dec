/** Typed client for the prediction service. The console never computes
 * predictions locally; everything rendered comes from these responses. */

export interface PredictRequest {
  title: string;
  summary: string;
  source: string;
  category: string;
}

export interface PredictResponse {
  features: {
    S: number;
    C: number;
    Subj: number;
    Ent_ct: number;
    Ent_max: number;
    Ent_avg: number;
  };
  regression_estimate: number;
  predicted_class: string;
  class_distribution: Record<string, number>;
  zero_tweet_probability: number;
  model_fingerprint: string;
}

export interface ScoreTablePayload {
  kind: string;
  global_mean: number;
  built_from: string;
  scores: Record<string, number>;
}

export interface ClassScheme {
  boundaries: number[];
  labels: string[];
}

export interface ModelMetadata {
  bundle_fingerprint: string;
  features_fingerprint: string;
  class_scheme: ClassScheme | null;
  classes: string[];
  models: Record<string, unknown>;
}

export interface ApiError {
  code: string;
  message: string;
  field?: string;
}

export class ServiceError extends Error {
  constructor(readonly status: number, readonly detail: ApiError) {
    super(detail.message);
  }
}

export class Api {
  constructor(readonly base: string) {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.base + path, init);
    const body = await resp.json().catch(() => null);
    if (!resp.ok) {
      const detail: ApiError = body?.error ?? {
        code: `http_${resp.status}`,
        message: `request failed with status ${resp.status}`,
      };
      throw new ServiceError(resp.status, detail);
    }
    return body as T;
  }

  predict(request: PredictRequest): Promise<PredictResponse> {
    return this.json<PredictResponse>("/v1/predict", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
  }

  sources(): Promise<ScoreTablePayload> {
    return this.json<ScoreTablePayload>("/v1/sources");
  }

  categories(): Promise<ScoreTablePayload> {
    return this.json<ScoreTablePayload>("/v1/categories");
  }

  model(): Promise<ModelMetadata> {
    return this.json<ModelMetadata>("/v1/model");
  }
}
