// Entry point: read the service base URL from ?service=... (default same
// host, port 8000) and mount the workbench.

import { ApiClient } from "./api.js";
import { SessionStore } from "./store.js";
import { Workbench } from "./ui.js";

function serviceBaseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("service");
  if (fromQuery) return fromQuery.replace(/\/$/, "");
  return `${window.location.protocol}//${window.location.hostname}:8000`;
}

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const client = new ApiClient(serviceBaseUrl());
const store = new SessionStore(client);
const workbench = new Workbench(root, store);

// Keep running-phase state fresh: the service's poll semantics, 1 s cadence.
setInterval(() => void store.refreshAll(), 1000);

declare global {
  interface Window {
    workbench: Workbench;
  }
}
window.workbench = workbench;
