/**
 * Pure view-state builders. Everything here is a function of API
 * responses (plus the clock for age display), so the console rebuilds
 * identically from the server after any reload.
 */

import type { CartRecord, Ticket, TicketStatus } from "./api.js";

export type TicketAction = "ack" | "resolve";

/** Legal lifecycle: Open -> Acknowledged -> Resolved. The UI disables
 * everything else before the server would reject it. */
export function transitionAllowed(status: TicketStatus, action: TicketAction): boolean {
  if (action === "ack") return status === "Open";
  return status === "Acknowledged";
}

export interface AssistanceRow {
  ticket: Ticket;
  canAck: boolean;
  canResolve: boolean;
}

/** Work queue: Open first (oldest first), then Acknowledged. Resolved
 * tickets leave the queue. */
export function assistanceQueue(tickets: Ticket[]): AssistanceRow[] {
  const rank: Record<TicketStatus, number> = { Open: 0, Acknowledged: 1, Resolved: 2 };
  return tickets
    .filter((t) => t.status !== "Resolved")
    .sort((a, b) => rank[a.status] - rank[b.status] || a.id - b.id)
    .map((ticket) => ({
      ticket,
      canAck: transitionAllowed(ticket.status, "ack"),
      canResolve: transitionAllowed(ticket.status, "resolve"),
    }));
}

export interface FleetRow {
  cart_id: number;
  location: string | null;
  ageSeconds: number | null;
  malfunction: Ticket | null;
}

/** One row per cart: last known location, age of the last update, and
 * the cart's unresolved malfunction ticket if any. */
export function fleetRows(
  carts: CartRecord[],
  malfunctions: Ticket[],
  now: Date,
): FleetRow[] {
  const openByCart = new Map<number, Ticket>();
  for (const ticket of malfunctions) {
    if (ticket.status === "Resolved") continue;
    const existing = openByCart.get(ticket.cart_id);
    if (!existing || ticket.id > existing.id) openByCart.set(ticket.cart_id, ticket);
  }
  return carts
    .slice()
    .sort((a, b) => a.cart_id - b.cart_id)
    .map((cart) => ({
      cart_id: cart.cart_id,
      location: cart.cart_location,
      ageSeconds: cart.cart_location
        ? Math.max(0, (now.getTime() - Date.parse(cart.updated_at)) / 1000)
        : null,
      malfunction: openByCart.get(cart.cart_id) ?? null,
    }));
}

export function formatAge(ageSeconds: number | null): string {
  if (ageSeconds === null) return "never";
  if (ageSeconds < 60) return `${Math.round(ageSeconds)}s ago`;
  if (ageSeconds < 3600) return `${Math.floor(ageSeconds / 60)}m ago`;
  return `${Math.floor(ageSeconds / 3600)}h ago`;
}
