/**
 * Console bootstrap: load config.json, poll the backend, render, and
 * translate operator clicks into API calls (exactly one call per click;
 * the button is disabled while the call is in flight, and the view
 * re-renders from the server's response cycle).
 */

import { ApiClient, ApiError, type ConsoleConfig } from "./api.js";
import { assistanceQueue, fleetRows } from "./state.js";
import { foodTagChart } from "./chart.js";
import {
  renderAssistanceQueue,
  renderFleetTable,
  renderFoodTagDetail,
  renderFoodTagList,
  renderHeader,
  renderMap,
  renderToast,
} from "./render.js";

let api: ApiClient;
let config: ConsoleConfig;
let selectedTag: string | null = null;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id} in index.html`);
  return node;
}

function toast(message: string): void {
  const holder = el("toasts");
  const node = document.createElement("div");
  node.innerHTML = renderToast(message);
  const item = node.firstElementChild as HTMLElement;
  holder.appendChild(item);
  setTimeout(() => item.remove(), 6000);
}

async function guarded(work: () => Promise<void>): Promise<void> {
  try {
    await work();
  } catch (error) {
    if (error instanceof ApiError) toast(error.message);
    else toast(`request failed: ${String(error)}`);
  }
}

async function refreshTickets(): Promise<void> {
  const tickets = await api.assistance(config.store_id);
  el("assistance").innerHTML = renderAssistanceQueue(assistanceQueue(tickets));
}

async function refreshFleet(): Promise<void> {
  const [carts, malfunctions, locations] = await Promise.all([
    api.carts(config.store_id),
    api.malfunctions(config.store_id),
    api.locations(config.store_id),
  ]);
  el("fleet").innerHTML = renderFleetTable(fleetRows(carts, malfunctions, new Date()));
  el("map").innerHTML = renderMap(locations, carts);
}

async function refreshFoodTags(): Promise<void> {
  const { tag_ids } = await api.foodTags();
  if (selectedTag === null && tag_ids.length > 0) selectedTag = tag_ids[0];
  el("tags").innerHTML = renderFoodTagList(tag_ids, selectedTag);
  if (selectedTag !== null) {
    const [summary, log] = await Promise.all([
      api.foodTagSummary(selectedTag),
      api.foodTagLog(selectedTag),
    ]);
    el("tag-detail").innerHTML = renderFoodTagDetail(summary, foodTagChart(log.records));
  }
}

const ACTIONS: Record<string, (id: string) => Promise<void>> = {
  "assist-ack": async (id) => {
    await api.ackAssistance(Number(id));
    await refreshTickets();
  },
  "assist-resolve": async (id) => {
    await api.resolveAssistance(Number(id));
    await refreshTickets();
  },
  "malf-ack": async (id) => {
    await api.ackMalfunction(Number(id));
    await refreshFleet();
  },
  "malf-resolve": async (id) => {
    await api.resolveMalfunction(Number(id));
    await refreshFleet();
  },
  "select-tag": async (id) => {
    selectedTag = id;
    await refreshFoodTags();
  },
};

function onClick(event: Event): void {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target) return;
  const action = ACTIONS[target.dataset.action ?? ""];
  const id = target.dataset.id ?? "";
  if (!action || (target as HTMLButtonElement).disabled) return;
  (target as HTMLButtonElement).disabled = true;
  void guarded(() => action(id)).finally(() => {
    (target as HTMLButtonElement).disabled = false;
  });
}

async function boot(): Promise<void> {
  const response = await fetch("./config.json");
  config = (await response.json()) as ConsoleConfig;
  api = new ApiClient(config.server);
  document.body.addEventListener("click", onClick);

  await guarded(async () => {
    el("header").innerHTML = renderHeader(await api.store(config.store_id));
  });
  const tick = () =>
    void guarded(async () => {
      await Promise.all([refreshTickets(), refreshFleet()]);
      el("status-dot").className = "dot live";
    }).catch(() => {
      el("status-dot").className = "dot dead";
    });
  tick();
  setInterval(tick, config.poll_interval_ms);
  void guarded(refreshFoodTags);
  setInterval(() => void guarded(refreshFoodTags), Math.max(config.poll_interval_ms * 5, 5000));
}

void boot();
