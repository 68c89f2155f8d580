import { queryShell, type Shell } from "../src/app.js";
import type { GraphDoc } from "../src/types.js";

/** Build the fixed page regions the application expects and return them. */
export function makeShell(): Shell {
  document.body.innerHTML = `
    <div id="banner"></div>
    <div id="toolbar"></div>
    <div id="graph"></div>
    <section id="details"></section>
    <section id="charts"></section>
    <section id="script"></section>
    <section id="characteristics"></section>
    <div id="toasts"></div>
  `;
  return queryShell(document);
}

/** A three-node chain as the gateway lays it out: model -> enabler -> service. */
export function chainGraph(): GraphDoc {
  return {
    constellation: 1,
    nodes: [
      { id: "what_if_sim", label: "what_if_sim", category: "DT_Service", x: 400.0, y: 0.0 },
      { id: "simulator", label: "simulator", category: "DT_Enabler", x: 400.0, y: 180.0 },
      { id: "controller_model", label: "controller_model", category: "DT_ModelData", x: 400.0, y: 360.0 },
    ],
    edges: [
      { src: "controller_model", dst: "simulator", relation: "inputTo" },
      { src: "simulator", dst: "what_if_sim", relation: "enables" },
    ],
  };
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

/** Poll until the predicate holds; fails the caller's assertion on timeout. */
export async function waitFor(predicate: () => boolean, timeoutMs = 2000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!predicate()) {
    if (Date.now() > deadline) {
      throw new Error("condition not reached in time");
    }
    await sleep(10);
  }
}
