/** HTML rendering of the store state.
 *
 * Pure string templating over the CaseView; the only transformation applied
 * to any probability is display formatting, so every rendered number is
 * traceable to a service response field. `mount` wires the templates to a
 * container element and the store's listener hook.
 */

import { SessionStore, CaseView, ComparisonDelta } from "./store.js";

const SEVERITY_LABELS = ["none", "mild", "moderate", "severe"];

export function formatProbability(p: number): string {
  return `${(p * 100).toFixed(1)}%`;
}

export function formatDelta(d: number): string {
  return `${d >= 0 ? "+" : ""}${(d * 100).toFixed(1)} pp`;
}

function escapeHtml(text: string): string {
  return text.replace(/[&<>"]/g, (c) => `&#${c.charCodeAt(0)};`);
}

function bar(fraction: number, cssClass: string): string {
  const width = Math.max(0, Math.min(1, fraction)) * 100;
  return `<span class="bar ${cssClass}" style="width:${width.toFixed(1)}%"></span>`;
}

export function renderConditionGauges(view: CaseView): string {
  const gauges = Object.entries(view.conditions).map(([name, probs]) => {
    const shown = probs.calibrated ?? probs.raw;
    const label = probs.calibrated === null ? "raw" : "calibrated";
    return `
      <div class="gauge" data-condition="${escapeHtml(name)}" data-raw="${probs.raw}">
        <h3>${escapeHtml(name)}</h3>
        ${bar(shown, "gauge-fill")}
        <span class="gauge-value">${formatProbability(shown)}</span>
        <span class="gauge-kind">${label}</span>
      </div>`;
  });
  return `<section class="gauges">${gauges.join("")}</section>`;
}

export function renderSymptomRows(view: CaseView): string {
  const rows = view.symptoms.map((row) => {
    const cells = row.posterior.distribution.map(
      (p, state) =>
        `<td class="dist" title="${SEVERITY_LABELS[state]}">${bar(p, "dist-fill")}</td>`,
    );
    const badge = row.posterior.isolated ? '<span class="badge isolated">isolated</span>' : "";
    return `
      <tr class="symptom${row.posterior.isolated ? " detached" : ""}" data-symptom="${escapeHtml(row.name)}">
        <td class="name">${escapeHtml(row.name)}${badge}</td>
        <td class="condition">${escapeHtml(row.condition)}</td>
        ${cells.join("")}
        <td class="expected">${row.posterior.expected_severity.toFixed(2)}</td>
      </tr>`;
  });
  return `<table class="symptoms"><tbody>${rows.join("")}</tbody></table>`;
}

export function renderComparison(delta: ComparisonDelta | null): string {
  if (delta === null) return '<section class="comparison empty">no intervention yet</section>';
  const conditions = Object.entries(delta.conditions)
    .map(
      ([name, d]) =>
        `<li data-condition="${escapeHtml(name)}">${escapeHtml(name)}: ${formatDelta(d)}</li>`,
    )
    .join("");
  const symptoms = Object.entries(delta.expectedSeverity)
    .filter(([, d]) => Math.abs(d) > 1e-9)
    .map(
      ([name, d]) =>
        `<li data-symptom="${escapeHtml(name)}">${escapeHtml(name)}: ${d >= 0 ? "+" : ""}${d.toFixed(2)}</li>`,
    )
    .join("");
  return `
    <section class="comparison">
      <h3>before / after</h3>
      <ul class="condition-deltas">${conditions}</ul>
      <ul class="severity-deltas">${symptoms}</ul>
    </section>`;
}

export function renderErrorBanner(error: string | null): string {
  if (error === null) return "";
  return `<div class="banner error">${escapeHtml(error)}</div>`;
}

export function render(store: SessionStore): string {
  const banner = renderErrorBanner(store.error);
  if (!store.view) {
    return banner || '<div class="banner">connecting…</div>';
  }
  return [
    banner,
    renderConditionGauges(store.view),
    renderSymptomRows(store.view),
    renderComparison(store.comparison()),
  ].join("\n");
}

export function mount(store: SessionStore, container: HTMLElement): () => void {
  const draw = () => {
    container.innerHTML = render(store);
    container
      .querySelectorAll<HTMLElement>("button, input, select")
      .forEach((el) => ((el as HTMLButtonElement).disabled = store.busy));
  };
  const unsubscribe = store.subscribe(draw);
  draw();
  return unsubscribe;
}
