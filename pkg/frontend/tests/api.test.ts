import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function fakeFetch(status: number, body: unknown) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fetchFn = async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { calls, fetchFn };
}

describe("ApiClient", () => {
  it("issues exactly one POST per mutating call, to the documented path", async () => {
    const { calls, fetchFn } = fakeFetch(200, { id: 5, status: "Acknowledged" });
    const api = new ApiClient("http://backend:8000", fetchFn);
    await api.ackAssistance(5);
    expect(calls).toHaveLength(1);
    expect(calls[0].url).toBe("http://backend:8000/v1/assistance/5/ack");
    expect(calls[0].init?.method).toBe("POST");

    await api.resolveMalfunction(9);
    expect(calls).toHaveLength(2);
    expect(calls[1].url).toBe("http://backend:8000/v1/malfunctions/9/resolve");
  });

  it("builds status-filtered listing URLs", async () => {
    const { calls, fetchFn } = fakeFetch(200, []);
    const api = new ApiClient("http://b", fetchFn);
    await api.assistance(1, "Open");
    expect(calls[0].url).toBe("http://b/v1/stores/1/assistance?status=Open");
    await api.malfunctions(1);
    expect(calls[1].url).toBe("http://b/v1/stores/1/malfunctions");
  });

  it("surfaces the server diagnostic on errors", async () => {
    const { fetchFn } = fakeFetch(409, { detail: "assistance 5 is Resolved" });
    const api = new ApiClient("http://b", fetchFn);
    await expect(api.resolveAssistance(5)).rejects.toThrowError(ApiError);
    await expect(api.resolveAssistance(5)).rejects.toThrow(/assistance 5 is Resolved/);
  });

  it("percent-encodes food tag ids in paths", async () => {
    const { calls, fetchFn } = fakeFetch(200, { tag_id: "FT 1", count: 0, records: [] });
    const api = new ApiClient("http://b", fetchFn);
    await api.foodTagLog("FT 1");
    expect(calls[0].url).toBe("http://b/v1/foodtags/FT%201/log");
  });
});
