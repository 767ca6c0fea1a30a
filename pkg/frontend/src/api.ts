/** Typed client for the rbe HTTP service.
 *
 * The workbench never computes labels or similarities itself; every number
 * it renders comes straight out of one of these response payloads.
 */

export interface RuleSummary {
  id: string;
  expr: string;
  provenance: string;
  exemplar_ids: string[];
  cover_count: number;
}

export interface RulesResponse {
  revision: number;
  rules: RuleSummary[];
}

export interface NearestExemplar {
  exemplar: string;
  rule: string;
  sim: number;
}

export interface PredictResponse {
  label: 0 | 1;
  score: number;
  tau: number;
  fired_rules: string[];
  nearest: NearestExemplar[];
  revision: number;
}

export interface WeakLabelPreviewResponse {
  strategy: string;
  k: number;
  positives: number;
  total: number;
  eliminated_rules: string[];
  sample_flips: { doc_id: string; from: number; to: number }[];
  revision: number;
}

export interface SyntaxErrorDetail {
  message: string;
  offset: number;
}

/** Non-2xx response, with the parsed `detail` body FastAPI sends. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string | SyntaxErrorDetail,
  ) {
    super(typeof detail === 'string' ? detail : detail.message);
    this.name = 'ApiError';
  }

  /** Byte offset of a rule-DSL syntax error, when the server reported one. */
  get offset(): number | null {
    return typeof this.detail === 'object' ? this.detail.offset : null;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, {
    ...init,
    headers: { 'content-type': 'application/json', ...init?.headers },
  });
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiError(resp.status, (body as { detail?: string }).detail ?? resp.statusText);
  }
  return body as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  getRules(): Promise<RulesResponse> {
    return request(`${this.baseUrl}/rules`);
  }

  addRule(body: {
    id?: string;
    expr: string;
    provenance?: string;
    exemplar_ids?: string[];
  }): Promise<{ id: string; revision: number }> {
    return request(`${this.baseUrl}/rules`, {
      method: 'POST',
      body: JSON.stringify(body),
    });
  }

  deleteRule(ruleId: string): Promise<{ revision: number }> {
    return request(`${this.baseUrl}/rules/${encodeURIComponent(ruleId)}`, {
      method: 'DELETE',
    });
  }

  attachExemplars(
    ruleId: string,
    exemplarIds: string[],
  ): Promise<{ id: string; exemplar_ids: string[]; revision: number }> {
    return request(`${this.baseUrl}/rules/${encodeURIComponent(ruleId)}/exemplars`, {
      method: 'POST',
      body: JSON.stringify({ exemplar_ids: exemplarIds }),
    });
  }

  predict(text: string): Promise<PredictResponse> {
    return request(`${this.baseUrl}/predict`, {
      method: 'POST',
      body: JSON.stringify({ text }),
    });
  }

  weakLabelPreview(strategy: string, k: number): Promise<WeakLabelPreviewResponse> {
    return request(`${this.baseUrl}/weaklabel/preview`, {
      method: 'POST',
      body: JSON.stringify({ strategy, k }),
    });
  }
}
