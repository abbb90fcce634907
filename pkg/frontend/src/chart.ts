import { FigureTable } from "./schema";

const WIDTH = 960;
const HEIGHT = 560;
const MARGIN = { top: 30, right: 210, bottom: 50, left: 70 };

/** fixed palette so output never depends on environment state */
const TRACE_COLORS = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#7f7f7f",
];

function fmt(value: number): string {
  return Number(value.toFixed(2)).toString();
}

interface Scale {
  (value: number): number;
}

function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (value) => r0 + ((value - d0) / span) * (r1 - r0);
}

function polyline(
  points: [number, number][],
  cls: string,
  stroke: string,
  width = 2,
  extra = "",
): string {
  const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return `<polyline class="${cls}" fill="none" stroke="${stroke}" stroke-width="${width}"${extra} points="${path}"/>`;
}

export function renderChart(table: FigureTable): string {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;

  const tMin = table.t[0];
  const tMax = table.t[table.t.length - 1];
  let yMin = 0;
  let yMax = -Infinity;
  const consider = (value: number | null) => {
    if (value === null) return;
    if (value < yMin) yMin = value;
    if (value > yMax) yMax = value;
  };
  table.bound.forEach(consider);
  table.baselineRegret.forEach(consider);
  table.traces.forEach((trace) => trace.values.forEach(consider));
  if (!Number.isFinite(yMax)) yMax = 1;
  if (yMax === yMin) yMax = yMin + 1;

  const sx = linearScale(tMin, tMax, MARGIN.left, MARGIN.left + plotW);
  const sy = linearScale(yMin, yMax, MARGIN.top + plotH, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="13">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  // axes
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + plotH;
  parts.push(
    `<line x1="${x0}" y1="${y0}" x2="${x0 + plotW}" y2="${y0}" stroke="black"/>`,
  );
  parts.push(
    `<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}" stroke="black"/>`,
  );
  const nTicks = 5;
  for (let i = 0; i <= nTicks; i++) {
    const tv = tMin + ((tMax - tMin) * i) / nTicks;
    const yv = yMin + ((yMax - yMin) * i) / nTicks;
    parts.push(
      `<text x="${fmt(sx(tv))}" y="${y0 + 20}" text-anchor="middle">${fmt(tv)}</text>`,
    );
    parts.push(
      `<text x="${x0 - 8}" y="${fmt(sy(yv) + 4)}" text-anchor="end">${fmt(yv)}</text>`,
    );
  }
  parts.push(
    `<text x="${fmt(x0 + plotW / 2)}" y="${HEIGHT - 12}" text-anchor="middle">step</text>`,
  );
  parts.push(
    `<text x="18" y="${fmt(MARGIN.top + plotH / 2)}" text-anchor="middle" transform="rotate(-90 18 ${fmt(MARGIN.top + plotH / 2)})">cumulative excess loss</text>`,
  );

  // one line per tracked expert, from its birth step on
  const legend: { label: string; color: string; dash: string }[] = [];
  table.traces.forEach((trace, i) => {
    const color = TRACE_COLORS[i % TRACE_COLORS.length];
    const points: [number, number][] = [];
    trace.values.forEach((value, j) => {
      if (value !== null) points.push([sx(table.t[j]), sy(value)]);
    });
    if (points.length > 0) {
      parts.push(polyline(points, "trace", color));
    }
    legend.push({ label: `expert born ${trace.birth}`, color, dash: "" });
  });

  const boundPts: [number, number][] = table.bound.map((value, j) => [
    sx(table.t[j]),
    sy(value),
  ]);
  parts.push(polyline(boundPts, "bound", "black", 3));
  legend.push({ label: "regret bound", color: "black", dash: "" });

  const basePts: [number, number][] = table.baselineRegret.map((value, j) => [
    sx(table.t[j]),
    sy(value),
  ]);
  parts.push(
    polyline(basePts, "baseline", "#555555", 2, ' stroke-dasharray="6 4"'),
  );
  legend.push({ label: "full-history baseline", color: "#555555", dash: "6 4" });

  const lx = MARGIN.left + plotW + 16;
  legend.forEach((entry, i) => {
    const ly = MARGIN.top + 12 + i * 22;
    const dash = entry.dash ? ` stroke-dasharray="${entry.dash}"` : "";
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 28}" y2="${ly}" stroke="${entry.color}" stroke-width="2"${dash}/>`,
    );
    parts.push(
      `<text x="${lx + 36}" y="${ly + 4}">${entry.label}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
