/** Vitest global setup: boot the real assessment service on a free port.
 *
 * The contract tests exercise the actual HTTP API (no mocks), backed by the
 * small deterministic network and calibrators committed under fixtures/.
 */

import { spawn, ChildProcess } from "node:child_process";
import { createServer } from "node:net";
import { fileURLToPath } from "node:url";
import path from "node:path";
import type { TestProject } from "vitest/node";

let child: ChildProcess | undefined;

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address === null || typeof address === "string") {
        reject(new Error("could not allocate a port"));
        return;
      }
      server.close(() => resolve(address.port));
    });
    server.on("error", reject);
  });
}

async function waitForHealth(baseUrl: string, timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${baseUrl}/health`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error(`service did not become healthy at ${baseUrl}`);
}

export default async function setup(project: TestProject): Promise<() => void> {
  const here = path.dirname(fileURLToPath(import.meta.url));
  const fixtures = path.join(here, "..", "fixtures");
  const port = await freePort();
  child = spawn(
    "python3",
    [
      "-m", "symptomnet.cli", "serve",
      "--network", path.join(fixtures, "network.json"),
      "--calibrator", path.join(fixtures, "calibrators.json"),
      "--port", String(port),
    ],
    { stdio: ["ignore", "inherit", "inherit"] },
  );
  const baseUrl = `http://127.0.0.1:${port}`;
  await waitForHealth(baseUrl);
  project.provide("serviceUrl", baseUrl);
  return () => {
    child?.kill();
  };
}

declare module "vitest" {
  export interface ProvidedContext {
    serviceUrl: string;
  }
}
