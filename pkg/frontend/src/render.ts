/**
 * HTML fragment builders. Pure string producers so tests can assert on
 * rendered output without a DOM; main.ts injects them and wires clicks
 * through data-action attributes.
 */

import type { FoodTagSummary, LocationRecord, CartRecord, StoreRecord } from "./api.js";
import type { AssistanceRow, FleetRow } from "./state.js";
import { formatAge } from "./state.js";
import type { ChartSpec } from "./chart.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderHeader(store: StoreRecord): string {
  return (
    `<h1>${escapeHtml(store.name)}</h1>` +
    `<span class="stat">store <b>${store.store_id}</b></span>` +
    `<span class="stat">traffic <b>${escapeHtml(store.traffic_status)}</b></span>` +
    `<span class="stat">parking <b>${store.parking_free}</b> free</span>`
  );
}

export function renderAssistanceQueue(rows: AssistanceRow[]): string {
  if (rows.length === 0) {
    return `<div class="empty-msg">no assistance requests waiting</div>`;
  }
  const items = rows
    .map(({ ticket, canAck, canResolve }) => {
      return (
        `<tr class="ticket status-${ticket.status.toLowerCase()}" data-ticket="${ticket.id}">` +
        `<td>#${ticket.id}</td>` +
        `<td>cart ${ticket.cart_id}</td>` +
        `<td><span class="badge ${ticket.status.toLowerCase()}">${ticket.status}</span></td>` +
        `<td>${escapeHtml(ticket.created_at)}</td>` +
        `<td>` +
        `<button data-action="assist-ack" data-id="${ticket.id}"${canAck ? "" : " disabled"}>Acknowledge</button> ` +
        `<button data-action="assist-resolve" data-id="${ticket.id}"${canResolve ? "" : " disabled"}>Resolve</button>` +
        `</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="grid-table"><thead><tr>` +
    `<th>id</th><th>cart</th><th>status</th><th>created</th><th>actions</th>` +
    `</tr></thead><tbody>${items}</tbody></table>`
  );
}

export function renderFleetTable(rows: FleetRow[]): string {
  if (rows.length === 0) return `<div class="empty-msg">no carts registered</div>`;
  const items = rows
    .map((row) => {
      const flag = row.malfunction
        ? `<span class="badge malfunction">malfunction #${row.malfunction.id} (${row.malfunction.status})</span>` +
          ` <button data-action="malf-ack" data-id="${row.malfunction.id}"` +
          `${row.malfunction.status === "Open" ? "" : " disabled"}>Ack</button>` +
          ` <button data-action="malf-resolve" data-id="${row.malfunction.id}"` +
          `${row.malfunction.status === "Acknowledged" ? "" : " disabled"}>Back in service</button>`
        : `<span class="ok">in service</span>`;
      return (
        `<tr data-cart="${row.cart_id}">` +
        `<td>cart ${row.cart_id}</td>` +
        `<td>${row.location ? escapeHtml(row.location) : "<i>unknown</i>"}</td>` +
        `<td>${formatAge(row.ageSeconds)}</td>` +
        `<td>${flag}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="grid-table"><thead><tr>` +
    `<th>cart</th><th>location</th><th>updated</th><th>state</th>` +
    `</tr></thead><tbody>${items}</tbody></table>`
  );
}

/** Floor map: location dots plus a marker for every cart with a known
 * location, positioned by the location table served by the backend. */
export function renderMap(locations: LocationRecord[], carts: CartRecord[]): string {
  if (locations.length === 0) return `<div class="empty-msg">no locations</div>`;
  const maxX = Math.max(...locations.map((l) => l.x)) + 1;
  const maxY = Math.max(...locations.map((l) => l.y)) + 1;
  const byId = new Map(locations.map((l) => [l.location_id, l]));
  const dots = locations
    .map((l) => `<circle class="loc" cx="${l.x}" cy="${maxY - l.y}" r="0.18"/>`)
    .join("");
  const cartsHere = new Map<string, number[]>();
  for (const cart of carts) {
    if (!cart.cart_location || !byId.has(cart.cart_location)) continue;
    const list = cartsHere.get(cart.cart_location) ?? [];
    list.push(cart.cart_id);
    cartsHere.set(cart.cart_location, list);
  }
  const markers = [...cartsHere.entries()]
    .map(([loc, ids]) => {
      const p = byId.get(loc)!;
      return (
        `<g class="cart-marker"><circle cx="${p.x}" cy="${maxY - p.y}" r="0.42"/>` +
        `<title>${ids.map((id) => `cart ${id}`).join(", ")} @ ${escapeHtml(loc)}</title>` +
        (ids.length > 1
          ? `<text x="${p.x}" y="${maxY - p.y + 0.18}">${ids.length}</text>`
          : "") +
        `</g>`
      );
    })
    .join("");
  return (
    `<svg class="floor" viewBox="0 0 ${maxX} ${maxY}" preserveAspectRatio="xMidYMid meet">` +
    `<rect class="floor-bg" x="0" y="0" width="${maxX}" height="${maxY}"/>` +
    dots +
    markers +
    `</svg>`
  );
}

export function renderFoodTagList(tagIds: string[], selected: string | null): string {
  if (tagIds.length === 0) return `<div class="empty-msg">no food tags registered</div>`;
  return tagIds
    .map(
      (id) =>
        `<button class="tag-pill${id === selected ? " active" : ""}" ` +
        `data-action="select-tag" data-id="${escapeHtml(id)}">${escapeHtml(id)}</button>`,
    )
    .join("");
}

export function renderFoodTagDetail(summary: FoodTagSummary, chart: ChartSpec): string {
  const fmt = (v: number | null, unit: string) => (v === null ? "n/a" : `${v.toFixed(2)}${unit}`);
  const events = summary.plant_events
    .map(
      (e) =>
        `<li>plant ${e.plant_id}: ${escapeHtml(e.kind)} at ${escapeHtml(e.timestamp)}</li>`,
    )
    .join("");
  return (
    `<div class="tag-summary">` +
    `<span class="stat">production <b>${summary.production_date ?? "unset"}</b></span>` +
    `<span class="stat">expiry <b>${summary.expiry_date ?? "unset"}</b></span>` +
    `<span class="stat">est. expiry <b>${summary.estimated_expiry ?? "n/a"}</b></span>` +
    `<span class="stat">max <b>${fmt(summary.max_temp_c, " degC")}</b></span>` +
    `<span class="stat">avg <b>${fmt(summary.avg_temp_c, " degC")}</b></span>` +
    `<span class="stat">records <b>${summary.log_count}</b></span>` +
    (summary.overflow ? `<span class="badge malfunction">log overflow</span>` : "") +
    `</div>` +
    (events ? `<ul class="plant-events">${events}</ul>` : "") +
    chart.svg
  );
}

export function renderToast(message: string): string {
  return `<div class="toast">${escapeHtml(message)}</div>`;
}
