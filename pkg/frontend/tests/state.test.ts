import { describe, expect, it } from "vitest";

import type { CartRecord, Ticket } from "../src/api.js";
import {
  assistanceQueue,
  fleetRows,
  formatAge,
  transitionAllowed,
} from "../src/state.js";

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

describe("transitionAllowed", () => {
  it("matches the Open -> Acknowledged -> Resolved lifecycle", () => {
    expect(transitionAllowed("Open", "ack")).toBe(true);
    expect(transitionAllowed("Open", "resolve")).toBe(false);
    expect(transitionAllowed("Acknowledged", "ack")).toBe(false);
    expect(transitionAllowed("Acknowledged", "resolve")).toBe(true);
    expect(transitionAllowed("Resolved", "ack")).toBe(false);
    expect(transitionAllowed("Resolved", "resolve")).toBe(false);
  });
});

describe("assistanceQueue", () => {
  it("keeps Open and Acknowledged, drops Resolved, orders Open first", () => {
    const rows = assistanceQueue([
      ticket(3, "Acknowledged"),
      ticket(1, "Resolved"),
      ticket(5, "Open"),
      ticket(2, "Open"),
    ]);
    expect(rows.map((r) => r.ticket.id)).toEqual([2, 5, 3]);
    expect(rows[0].canAck).toBe(true);
    expect(rows[0].canResolve).toBe(false);
    expect(rows[2].canAck).toBe(false);
    expect(rows[2].canResolve).toBe(true);
  });

  it("renders nothing for an all-resolved board", () => {
    expect(assistanceQueue([ticket(1, "Resolved")])).toEqual([]);
  });
});

describe("fleetRows", () => {
  const carts: CartRecord[] = [
    { store_id: 1, cart_id: 2, cart_location: "L005", updated_at: "2025-01-01T00:00:30Z" },
    { store_id: 1, cart_id: 1, cart_location: null, updated_at: "1970-01-01T00:00:00Z" },
  ];

  it("sorts by cart id and computes update age from the clock", () => {
    const rows = fleetRows(carts, [], new Date("2025-01-01T00:01:00Z"));
    expect(rows.map((r) => r.cart_id)).toEqual([1, 2]);
    expect(rows[0].location).toBeNull();
    expect(rows[0].ageSeconds).toBeNull();
    expect(rows[1].ageSeconds).toBe(30);
  });

  it("flags carts with unresolved malfunction tickets only", () => {
    const rows = fleetRows(
      carts,
      [ticket(4, "Resolved", 2), ticket(7, "Open", 2)],
      new Date("2025-01-01T00:01:00Z"),
    );
    expect(rows[1].malfunction?.id).toBe(7);
    expect(rows[0].malfunction).toBeNull();
    const cleared = fleetRows(carts, [ticket(4, "Resolved", 2)], new Date());
    expect(cleared[1].malfunction).toBeNull();
  });
});

describe("formatAge", () => {
  it("humanizes seconds, minutes, hours and never", () => {
    expect(formatAge(null)).toBe("never");
    expect(formatAge(12)).toBe("12s ago");
    expect(formatAge(200)).toBe("3m ago");
    expect(formatAge(7300)).toBe("2h ago");
  });
});
