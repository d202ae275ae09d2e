import { describe, expect, it } from "vitest";

import type { LogRecord } from "../src/api.js";
import { countChartPoints, foodTagChart } from "../src/chart.js";

function record(minutes: number, temp: number, rh: number): LogRecord {
  return { minutes, time: `t+${minutes}m`, temp_c: temp, rh_pct: rh };
}

describe("foodTagChart", () => {
  it("draws one marker per log record", () => {
    const records = [record(0, 4, 40), record(30, 9, 45), record(90, 25, 60)];
    const chart = foodTagChart(records);
    expect(chart.pointCount).toBe(3);
    expect(countChartPoints(chart.svg)).toBe(3);
    expect(chart.svg).toContain("<polyline");
  });

  it("handles a single record without dividing by zero", () => {
    const chart = foodTagChart([record(0, 4, 40)]);
    expect(chart.pointCount).toBe(1);
    expect(chart.svg).not.toContain("NaN");
  });

  it("labels the value range in decoded units", () => {
    const chart = foodTagChart([record(0, -18, 30), record(10, 25, 70)]);
    expect(chart.svg).toContain(">25C<");
    expect(chart.svg).toContain(">-18C<");
    expect(chart.svg).toContain(">70%<");
  });

  it("renders an explicit empty state for no records", () => {
    const chart = foodTagChart([]);
    expect(chart.pointCount).toBe(0);
    expect(countChartPoints(chart.svg)).toBe(0);
    expect(chart.svg).toContain("no log records");
  });

  it("scales marker count linearly with the log", () => {
    const records = Array.from({ length: 57 }, (_, i) => record(i * 5, 4 + (i % 7), 40));
    expect(countChartPoints(foodTagChart(records).svg)).toBe(57);
  });
});
