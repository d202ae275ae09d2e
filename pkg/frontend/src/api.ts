/**
 * Typed client for the sysmart backend /v1 HTTP API.
 *
 * Every console datum comes through this client; nothing is fabricated
 * client-side. Errors carry the server's diagnostic so the UI can show
 * it verbatim in a toast.
 */

export interface ConsoleConfig {
  server: string;
  store_id: number;
  poll_interval_ms: number;
}

export type TicketStatus = "Open" | "Acknowledged" | "Resolved";

export interface Ticket {
  id: number;
  store_id: number;
  cart_id: number;
  created_at: string;
  status: TicketStatus;
  updated_at: string;
}

export interface CartRecord {
  store_id: number;
  cart_id: number;
  cart_location: string | null;
  updated_at: string;
}

export interface StoreRecord {
  store_id: number;
  name: string;
  lat: number;
  lon: number;
  traffic_status: string;
  parking_free: number;
}

export interface LocationRecord {
  store_id: number;
  location_id: string;
  label: string;
  x: number;
  y: number;
}

export interface PlantEvent {
  plant_id: number;
  kind: string;
  timestamp: string;
}

export interface FoodTagSummary {
  tag_id: string;
  production_date: string | null;
  expiry_date: string | null;
  max_temp_c: number | null;
  avg_temp_c: number | null;
  estimated_expiry: string | null;
  plant_events: PlantEvent[];
  log_count: number;
  overflow: boolean;
}

export interface LogRecord {
  minutes: number;
  time: string;
  temp_c: number;
  rh_pct: number;
}

export interface FoodTagLog {
  tag_id: string;
  count: number;
  records: LogRecord[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly base: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.base}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed = (await response.json()) as { detail?: unknown };
        if (parsed.detail !== undefined) detail = JSON.stringify(parsed.detail);
      } catch {
        /* non-JSON error body; keep statusText */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  store(storeId: number): Promise<StoreRecord> {
    return this.request("GET", `/v1/stores/${storeId}`);
  }

  carts(storeId: number): Promise<CartRecord[]> {
    return this.request("GET", `/v1/stores/${storeId}/carts`);
  }

  locations(storeId: number): Promise<LocationRecord[]> {
    return this.request("GET", `/v1/stores/${storeId}/locations`);
  }

  assistance(storeId: number, status?: TicketStatus): Promise<Ticket[]> {
    const query = status ? `?status=${status}` : "";
    return this.request("GET", `/v1/stores/${storeId}/assistance${query}`);
  }

  malfunctions(storeId: number, status?: TicketStatus): Promise<Ticket[]> {
    const query = status ? `?status=${status}` : "";
    return this.request("GET", `/v1/stores/${storeId}/malfunctions${query}`);
  }

  ackAssistance(id: number): Promise<Ticket> {
    return this.request("POST", `/v1/assistance/${id}/ack`);
  }

  resolveAssistance(id: number): Promise<Ticket> {
    return this.request("POST", `/v1/assistance/${id}/resolve`);
  }

  ackMalfunction(id: number): Promise<Ticket> {
    return this.request("POST", `/v1/malfunctions/${id}/ack`);
  }

  resolveMalfunction(id: number): Promise<Ticket> {
    return this.request("POST", `/v1/malfunctions/${id}/resolve`);
  }

  requestAssistance(storeId: number, cartId: number): Promise<Ticket> {
    return this.request("POST", `/v1/stores/${storeId}/carts/${cartId}/assistance`);
  }

  reportMalfunction(storeId: number, cartId: number): Promise<Ticket> {
    return this.request("POST", `/v1/stores/${storeId}/carts/${cartId}/malfunction`);
  }

  foodTags(): Promise<{ tag_ids: string[] }> {
    return this.request("GET", `/v1/foodtags`);
  }

  foodTagSummary(tagId: string): Promise<FoodTagSummary> {
    return this.request("GET", `/v1/foodtags/${encodeURIComponent(tagId)}/summary`);
  }

  foodTagLog(tagId: string): Promise<FoodTagLog> {
    return this.request("GET", `/v1/foodtags/${encodeURIComponent(tagId)}/log`);
  }
}
