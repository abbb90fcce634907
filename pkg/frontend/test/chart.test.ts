import { readFileSync } from "fs";
import { join } from "path";
import { describe, expect, it } from "vitest";
import { renderChart } from "../src/chart";
import { parseFigureCsv } from "../src/schema";

const FIXTURE = join(__dirname, "fixtures", "figure_small.csv");

function countMatches(text: string, re: RegExp): number {
  return (text.match(re) ?? []).length;
}

describe("renderChart", () => {
  const table = parseFigureCsv(readFileSync(FIXTURE, "utf8"));
  const svg = renderChart(table);

  it("emits a standalone svg document", () => {
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
    expect(svg).toContain('xmlns="http://www.w3.org/2000/svg"');
  });

  it("draws one trace polyline per tracked expert", () => {
    expect(countMatches(svg, /class="trace"/g)).toBe(5);
  });

  it("draws exactly one bound line and one dotted baseline", () => {
    expect(countMatches(svg, /class="bound"/g)).toBe(1);
    expect(countMatches(svg, /class="baseline"/g)).toBe(1);
    const baseline = svg.match(/<polyline class="baseline"[^>]*>/)![0];
    expect(baseline).toContain("stroke-dasharray");
  });

  it("labels every legend entry", () => {
    for (const birth of [16, 24, 33, 42, 50]) {
      expect(svg).toContain(`expert born ${birth}`);
    }
    expect(svg).toContain("regret bound");
    expect(svg).toContain("full-history baseline");
  });

  it("starts each trace at its birth step", () => {
    const traceLines = svg.match(/<polyline class="trace"[^>]*>/g)!;
    expect(traceLines).toHaveLength(5);
    table.traces.forEach((trace, i) => {
      const points = traceLines[i].match(/points="([^"]*)"/)![1].split(" ");
      const alive = trace.values.filter((v) => v !== null).length;
      expect(points).toHaveLength(alive);
    });
  });

  it("is deterministic", () => {
    expect(renderChart(table)).toBe(svg);
  });

  it("keeps every plotted point inside the viewBox", () => {
    const coords = svg.match(/points="([^"]*)"/g)!.flatMap((attr) =>
      attr
        .slice(8, -1)
        .split(" ")
        .map((pair) => pair.split(",").map(Number)),
    );
    for (const [x, y] of coords) {
      expect(x).toBeGreaterThanOrEqual(0);
      expect(x).toBeLessThanOrEqual(960);
      expect(y).toBeGreaterThanOrEqual(0);
      expect(y).toBeLessThanOrEqual(560);
    }
  });

  it("renders a table without traces", () => {
    const bare = renderChart({
      t: [1, 2, 3],
      lossAlg: [0.1, 0.2, 0.3],
      bound: [0, 1, 2],
      baselineRegret: [0.1, 0.1, 0.2],
      traces: [],
    });
    expect(countMatches(bare, /class="trace"/g)).toBe(0);
    expect(countMatches(bare, /class="bound"/g)).toBe(1);
  });
});
