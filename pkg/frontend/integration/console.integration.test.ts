/**
 * Console acceptance against a live backend seeded with the case-study
 * scenario. Run via ./run-integration.sh, which starts the backend and
 * sets CONSOLE_BACKEND_URL; without that variable the suite skips.
 */

import { beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { countChartPoints, foodTagChart } from "../src/chart.js";
import { assistanceQueue, fleetRows } from "../src/state.js";
import { renderAssistanceQueue, renderFleetTable, renderMap } from "../src/render.js";

const BACKEND = process.env.CONSOLE_BACKEND_URL;
const STORE_ID = 1;

describe.skipIf(!BACKEND)("operator console against a live backend", () => {
  let api: ApiClient;

  beforeAll(() => {
    api = new ApiClient(BACKEND!);
  });

  it("renders every Open assistance request in the queue", async () => {
    const cartIds = [3, 17, 42, 96];
    for (const cartId of cartIds) {
      await api.requestAssistance(STORE_ID, cartId);
    }
    const open = await api.assistance(STORE_ID, "Open");
    expect(open.length).toBeGreaterThanOrEqual(cartIds.length);

    const queue = assistanceQueue(await api.assistance(STORE_ID));
    const html = renderAssistanceQueue(queue);
    for (const ticket of open) {
      expect(html).toContain(`data-ticket="${ticket.id}"`);
    }
    expect(html.match(/<tr class="ticket/g)?.length).toBe(queue.length);
  });

  it("acknowledge and resolve round-trip and the server state agrees", async () => {
    const created = await api.requestAssistance(STORE_ID, 7);
    expect(created.status).toBe("Open");

    const acked = await api.ackAssistance(created.id);
    expect(acked.status).toBe("Acknowledged");
    let onServer = (await api.assistance(STORE_ID)).find((t) => t.id === created.id);
    expect(onServer?.status).toBe("Acknowledged");

    const resolved = await api.resolveAssistance(created.id);
    expect(resolved.status).toBe("Resolved");
    onServer = (await api.assistance(STORE_ID)).find((t) => t.id === created.id);
    expect(onServer?.status).toBe("Resolved");

    // resolved tickets leave the rendered queue
    const html = renderAssistanceQueue(assistanceQueue(await api.assistance(STORE_ID)));
    expect(html).not.toContain(`data-ticket="${created.id}"`);
  });

  it("rejects an illegal transition with the server's diagnostic", async () => {
    const created = await api.requestAssistance(STORE_ID, 11);
    await expect(api.resolveAssistance(created.id)).rejects.toThrow(/Open/);
    // the UI would never enable that button in the first place
    const row = assistanceQueue(await api.assistance(STORE_ID)).find(
      (r) => r.ticket.id === created.id,
    );
    expect(row?.canResolve).toBe(false);
  });

  it("chart point count equals the log endpoint's record count for every tag", async () => {
    const { tag_ids } = await api.foodTags();
    expect(tag_ids.length).toBeGreaterThan(0);
    for (const tagId of tag_ids) {
      const [summary, log] = await Promise.all([
        api.foodTagSummary(tagId),
        api.foodTagLog(tagId),
      ]);
      const chart = foodTagChart(log.records);
      expect(log.records.length).toBe(log.count);
      expect(chart.pointCount).toBe(log.count);
      expect(countChartPoints(chart.svg)).toBe(log.count);
      expect(summary.log_count).toBe(log.count);
    }
  });

  it("fleet table and map render from the carts, malfunctions and locations endpoints", async () => {
    const malfunction = await api.reportMalfunction(STORE_ID, 23);
    const [carts, malfunctions, locations] = await Promise.all([
      api.carts(STORE_ID),
      api.malfunctions(STORE_ID),
      api.locations(STORE_ID),
    ]);
    expect(carts.length).toBe(150);
    expect(locations.length).toBeGreaterThan(0);
    const rows = fleetRows(carts, malfunctions, new Date());
    const html = renderFleetTable(rows);
    expect(html).toContain(`malfunction #${malfunction.id}`);
    expect(renderMap(locations, carts)).toContain("<svg");

    await api.ackMalfunction(malfunction.id);
    const serverSide = await api.malfunctions(STORE_ID);
    expect(serverSide.find((t) => t.id === malfunction.id)?.status).toBe("Acknowledged");
  });
});
