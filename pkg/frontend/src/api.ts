/** Typed client for the assessment service HTTP API.
 *
 * Every method maps 1:1 onto an endpoint; no numbers are computed here.
 */

export interface NetworkNode {
  name: string;
  states: string[];
  kind: "condition" | "symptom" | "surrogate";
  symptom: string | null;
  condition: string | null;
}

export interface NetworkStructure {
  nodes: NetworkNode[];
  edges: [string, string][];
}

export interface ConditionProbabilities {
  raw: number;
  calibrated: number | null;
}

export interface SymptomPosterior {
  distribution: number[];
  expected_severity: number;
  isolated: boolean;
  contribution: Record<string, number>;
}

export interface PosteriorsResponse {
  session_id: string;
  evidence: Record<string, number>;
  interventions: string[];
  symptoms: Record<string, SymptomPosterior>;
  severity_totals: Record<string, number>;
  conditions: Record<string, ConditionProbabilities>;
}

export interface SessionState {
  session_id: string;
  evidence: Record<string, number>;
  interventions: string[];
  history: { action: Record<string, unknown>; conditions: Record<string, ConditionProbabilities> }[];
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function unwrap<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  if (resp.status === 204) return undefined as T;
  return (await resp.json()) as T;
}

export class AssessmentApi {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  async health(): Promise<{ status: string; calibrated: boolean }> {
    return unwrap(await fetch(this.url("/health")));
  }

  async network(): Promise<NetworkStructure> {
    return unwrap(await fetch(this.url("/network")));
  }

  async createSession(): Promise<string> {
    const body = await unwrap<{ session_id: string }>(
      await fetch(this.url("/sessions"), { method: "POST" }),
    );
    return body.session_id;
  }

  async sessionState(sessionId: string): Promise<SessionState> {
    return unwrap(await fetch(this.url(`/sessions/${sessionId}`)));
  }

  async deleteSession(sessionId: string): Promise<void> {
    await unwrap(await fetch(this.url(`/sessions/${sessionId}`), { method: "DELETE" }));
  }

  async updateEvidence(
    sessionId: string,
    update: { set?: Record<string, number>; clear?: string[] },
  ): Promise<SessionState> {
    return unwrap(
      await fetch(this.url(`/sessions/${sessionId}/evidence`), {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ set: update.set ?? {}, clear: update.clear ?? [] }),
      }),
    );
  }

  async updateInterventions(
    sessionId: string,
    update: { add?: string[]; remove?: string[] },
  ): Promise<SessionState> {
    return unwrap(
      await fetch(this.url(`/sessions/${sessionId}/interventions`), {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ add: update.add ?? [], remove: update.remove ?? [] }),
      }),
    );
  }

  async posteriors(sessionId: string): Promise<PosteriorsResponse> {
    return unwrap(await fetch(this.url(`/sessions/${sessionId}/posteriors`)));
  }
}
