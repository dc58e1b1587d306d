/** Session store: the single state machine behind the console.
 *
 * The store never computes probabilities. Every mutation round-trips the
 * service and replaces the displayed CaseView wholesale with the fresh
 * posteriors response, so the view is always a pure projection of service
 * state. Controls lock (`busy`) while a request is in flight.
 */

import {
  ApiError,
  AssessmentApi,
  NetworkStructure,
  PosteriorsResponse,
  SymptomPosterior,
} from "./api.js";

export interface SymptomRow {
  name: string;
  condition: string;
  posterior: SymptomPosterior;
  /** largest absolute condition contribution; rows sort by this */
  salience: number;
}

export interface CaseView {
  sessionId: string;
  evidence: Record<string, number>;
  interventions: string[];
  /** symptom rows ordered by contribution magnitude, descending */
  symptoms: SymptomRow[];
  severityTotals: Record<string, number>;
  conditions: Record<string, { raw: number; calibrated: number | null }>;
}

export interface ComparisonDelta {
  conditions: Record<string, number>;
  expectedSeverity: Record<string, number>;
}

export type StoreListener = (store: SessionStore) => void;

function toCaseView(network: NetworkStructure, posteriors: PosteriorsResponse): CaseView {
  const conditionOf = new Map(
    network.nodes.filter((n) => n.kind === "symptom").map((n) => [n.name, n.condition ?? ""]),
  );
  const symptoms: SymptomRow[] = Object.entries(posteriors.symptoms).map(
    ([name, posterior]) => ({
      name,
      condition: conditionOf.get(name) ?? "",
      posterior,
      salience: Math.max(0, ...Object.values(posterior.contribution).map(Math.abs)),
    }),
  );
  symptoms.sort((a, b) => b.salience - a.salience || a.name.localeCompare(b.name));
  return {
    sessionId: posteriors.session_id,
    evidence: posteriors.evidence,
    interventions: posteriors.interventions,
    symptoms,
    severityTotals: posteriors.severity_totals,
    conditions: posteriors.conditions,
  };
}

export class SessionStore {
  view: CaseView | null = null;
  network: NetworkStructure | null = null;
  /** snapshot taken before the most recent intervention change */
  comparisonBase: CaseView | null = null;
  error: string | null = null;
  busy = false;

  private listeners: StoreListener[] = [];

  constructor(private readonly api: AssessmentApi) {}

  subscribe(listener: StoreListener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify() {
    for (const listener of this.listeners) listener(this);
  }

  private async mutate(action: () => Promise<void>): Promise<void> {
    if (this.busy) throw new Error("a request is already in flight");
    this.busy = true;
    this.notify();
    try {
      await action();
      this.error = null;
    } catch (err) {
      // service errors are surfaced verbatim; the last good view stays up
      this.error = err instanceof ApiError ? err.message : String(err);
    } finally {
      this.busy = false;
      this.notify();
    }
  }

  async loadCase(sessionId?: string): Promise<void> {
    await this.mutate(async () => {
      this.network = await this.api.network();
      const id = sessionId ?? (await this.api.createSession());
      this.view = toCaseView(this.network, await this.api.posteriors(id));
      this.comparisonBase = null;
    });
  }

  private async refresh(): Promise<void> {
    if (!this.view || !this.network) throw new Error("no active case");
    this.view = toCaseView(this.network, await this.api.posteriors(this.view.sessionId));
  }

  async setEvidence(node: string, state: number): Promise<void> {
    await this.mutate(async () => {
      if (!this.view) throw new Error("no active case");
      await this.api.updateEvidence(this.view.sessionId, { set: { [node]: state } });
      await this.refresh();
    });
  }

  async clearEvidence(node: string): Promise<void> {
    await this.mutate(async () => {
      if (!this.view) throw new Error("no active case");
      await this.api.updateEvidence(this.view.sessionId, { clear: [node] });
      await this.refresh();
    });
  }

  async toggleIntervention(symptom: string): Promise<void> {
    await this.mutate(async () => {
      if (!this.view) throw new Error("no active case");
      this.comparisonBase = this.view;
      const isolated = this.view.interventions.includes(symptom);
      await this.api.updateInterventions(
        this.view.sessionId,
        isolated ? { remove: [symptom] } : { add: [symptom] },
      );
      await this.refresh();
    });
  }

  /** Pre/post deltas for the comparison panel; null before any intervention. */
  comparison(): ComparisonDelta | null {
    if (!this.view || !this.comparisonBase) return null;
    const conditions: Record<string, number> = {};
    for (const name of Object.keys(this.view.conditions)) {
      conditions[name] =
        this.view.conditions[name].raw - this.comparisonBase.conditions[name].raw;
    }
    const expectedSeverity: Record<string, number> = {};
    const before = new Map(
      this.comparisonBase.symptoms.map((row) => [row.name, row.posterior.expected_severity]),
    );
    for (const row of this.view.symptoms) {
      expectedSeverity[row.name] =
        row.posterior.expected_severity - (before.get(row.name) ?? 0);
    }
    return { conditions, expectedSeverity };
  }
}
