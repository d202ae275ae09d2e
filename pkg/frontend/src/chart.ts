/**
 * Self-contained SVG chart for a food tag's temperature/humidity log.
 *
 * Renders the decoded degC / %RH values from the log endpoint as two
 * polylines with one marker circle per record, so the marker count
 * always equals the endpoint's record count.
 */

import type { LogRecord } from "./api.js";

export interface ChartSpec {
  pointCount: number;
  svg: string;
}

const WIDTH = 640;
const HEIGHT = 220;
const PAD = { left: 44, right: 44, top: 14, bottom: 26 };

function scale(value: number, lo: number, hi: number, outLo: number, outHi: number): number {
  if (hi === lo) return (outLo + outHi) / 2;
  return outLo + ((value - lo) / (hi - lo)) * (outHi - outLo);
}

function round2(value: number): number {
  return Math.round(value * 100) / 100;
}

export function foodTagChart(records: LogRecord[]): ChartSpec {
  if (records.length === 0) {
    return {
      pointCount: 0,
      svg:
        `<svg class="th-chart" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img">` +
        `<text x="${WIDTH / 2}" y="${HEIGHT / 2}" class="chart-empty">no log records</text></svg>`,
    };
  }
  const minutes = records.map((r) => r.minutes);
  const temps = records.map((r) => r.temp_c);
  const hums = records.map((r) => r.rh_pct);
  const xLo = Math.min(...minutes);
  const xHi = Math.max(...minutes);
  const tLo = Math.min(...temps);
  const tHi = Math.max(...temps);
  const hLo = Math.min(...hums);
  const hHi = Math.max(...hums);

  const x = (m: number) => round2(scale(m, xLo, xHi, PAD.left, WIDTH - PAD.right));
  const yT = (t: number) => round2(scale(t, tLo, tHi, HEIGHT - PAD.bottom, PAD.top));
  const yH = (h: number) => round2(scale(h, hLo, hHi, HEIGHT - PAD.bottom, PAD.top));

  const tempLine = records.map((r) => `${x(r.minutes)},${yT(r.temp_c)}`).join(" ");
  const humLine = records.map((r) => `${x(r.minutes)},${yH(r.rh_pct)}`).join(" ");
  const markers = records
    .map(
      (r) =>
        `<circle class="pt-temp" cx="${x(r.minutes)}" cy="${yT(r.temp_c)}" r="2.5">` +
        `<title>${r.time}: ${round2(r.temp_c)} degC, ${round2(r.rh_pct)} %RH</title></circle>`,
    )
    .join("");

  const svg =
    `<svg class="th-chart" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img">` +
    `<text x="4" y="${PAD.top + 4}" class="axis temp">${round2(tHi)}C</text>` +
    `<text x="4" y="${HEIGHT - PAD.bottom}" class="axis temp">${round2(tLo)}C</text>` +
    `<text x="${WIDTH - 40}" y="${PAD.top + 4}" class="axis hum">${round2(hHi)}%</text>` +
    `<text x="${WIDTH - 40}" y="${HEIGHT - PAD.bottom}" class="axis hum">${round2(hLo)}%</text>` +
    `<text x="${PAD.left}" y="${HEIGHT - 6}" class="axis">${xLo} min</text>` +
    `<text x="${WIDTH - PAD.right - 40}" y="${HEIGHT - 6}" class="axis">${xHi} min</text>` +
    `<polyline class="line-hum" fill="none" points="${humLine}"/>` +
    `<polyline class="line-temp" fill="none" points="${tempLine}"/>` +
    markers +
    `</svg>`;
  return { pointCount: records.length, svg };
}

/** Marker circles in a rendered chart; the integration test compares
 * this against the log endpoint's record count. */
export function countChartPoints(svg: string): number {
  return (svg.match(/<circle /g) ?? []).length;
}
