import { describe, expect, it } from "vitest";

import type { CartRecord, LocationRecord, Ticket } from "../src/api.js";
import { assistanceQueue, fleetRows } from "../src/state.js";
import {
  escapeHtml,
  renderAssistanceQueue,
  renderFleetTable,
  renderMap,
} from "../src/render.js";

function ticket(id: number, status: Ticket["status"], cartId = 1): Ticket {
  return {
    id,
    store_id: 1,
    cart_id: cartId,
    created_at: "2025-01-01T00:00:00Z",
    status,
    updated_at: "2025-01-01T00:00:00Z",
  };
}

describe("renderAssistanceQueue", () => {
  it("renders one row per queued ticket with lifecycle-gated buttons", () => {
    const html = renderAssistanceQueue(
      assistanceQueue([ticket(1, "Open"), ticket(2, "Acknowledged"), ticket(3, "Resolved")]),
    );
    expect(html.match(/<tr class="ticket/g)).toHaveLength(2);
    expect(html).toContain('data-action="assist-ack" data-id="1"');
    expect(html).toContain('data-action="assist-resolve" data-id="1" disabled');
    expect(html).toContain('data-action="assist-resolve" data-id="2"');
    expect(html).toContain('data-action="assist-ack" data-id="2" disabled');
  });

  it("shows an empty message when nothing is queued", () => {
    expect(renderAssistanceQueue([])).toContain("no assistance requests");
  });
});

describe("renderFleetTable", () => {
  it("marks malfunctioning carts and offers the service toggle", () => {
    const carts: CartRecord[] = [
      { store_id: 1, cart_id: 1, cart_location: "L001", updated_at: "2025-01-01T00:00:00Z" },
    ];
    const rows = fleetRows(carts, [ticket(7, "Acknowledged", 1)], new Date());
    const html = renderFleetTable(rows);
    expect(html).toContain("malfunction #7");
    expect(html).toContain('data-action="malf-resolve" data-id="7">Back in service');
    expect(html).toContain('data-action="malf-ack" data-id="7" disabled');
  });
});

describe("renderMap", () => {
  const locations: LocationRecord[] = [
    { store_id: 1, location_id: "L001", label: "L001", x: 1.5, y: 1.5 },
    { store_id: 1, location_id: "L002", label: "L002", x: 4.5, y: 2.5 },
  ];

  it("draws a dot per location and a marker per occupied location", () => {
    const carts: CartRecord[] = [
      { store_id: 1, cart_id: 1, cart_location: "L001", updated_at: "t" },
      { store_id: 1, cart_id: 2, cart_location: "L001", updated_at: "t" },
      { store_id: 1, cart_id: 3, cart_location: null, updated_at: "t" },
    ];
    const svg = renderMap(locations, carts);
    expect(svg.match(/class="loc"/g)).toHaveLength(2);
    expect(svg.match(/class="cart-marker"/g)).toHaveLength(1);
    expect(svg).toContain("cart 1, cart 2");
  });
});

describe("escapeHtml", () => {
  it("neutralizes markup from server strings", () => {
    expect(escapeHtml('<img src=x onerror="x">&')).toBe(
      "&lt;img src=x onerror=&quot;x&quot;&gt;&amp;",
    );
  });
});
