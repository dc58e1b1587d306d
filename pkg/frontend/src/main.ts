/** Browser bootstrap: one session per tab, controls locked while busy. */

import { AssessmentApi } from "./api.js";
import { SessionStore } from "./store.js";
import { mount } from "./view.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8000";

function buildControls(store: SessionStore, container: HTMLElement): void {
  container.innerHTML = "";
  if (!store.network) return;
  for (const node of store.network.nodes) {
    if (node.kind === "surrogate") {
      const select = document.createElement("select");
      select.dataset.node = node.name;
      select.append(new Option(`${node.name}: unset`, ""));
      node.states.forEach((state, index) => {
        select.append(new Option(`${node.name}: ${state}`, String(index)));
      });
      select.addEventListener("change", () => {
        if (select.value === "") void store.clearEvidence(node.name);
        else void store.setEvidence(node.name, Number(select.value));
      });
      container.append(select);
    } else if (node.kind === "symptom") {
      const button = document.createElement("button");
      button.dataset.symptom = node.name;
      button.textContent = `isolate ${node.name}`;
      button.addEventListener("click", () => void store.toggleIntervention(node.name));
      container.append(button);
    }
  }
}

async function start(): Promise<void> {
  const caseEl = document.getElementById("case");
  const controlsEl = document.getElementById("controls");
  if (!caseEl || !controlsEl) throw new Error("missing #case / #controls containers");

  const store = new SessionStore(new AssessmentApi(SERVICE_URL));
  mount(store, caseEl);
  store.subscribe((s) => {
    controlsEl
      .querySelectorAll<HTMLButtonElement>("button, select")
      .forEach((el) => (el.disabled = s.busy));
    controlsEl.querySelectorAll<HTMLButtonElement>("button").forEach((button) => {
      const symptom = button.dataset.symptom ?? "";
      const isolated = s.view?.interventions.includes(symptom) ?? false;
      button.textContent = `${isolated ? "restore" : "isolate"} ${symptom}`;
    });
  });
  await store.loadCase();
  buildControls(store, controlsEl);
}

void start();
