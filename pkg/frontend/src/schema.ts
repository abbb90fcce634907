import { parse } from "papaparse";

export class SchemaError extends Error {}

export interface RegretTrace {
  birth: number;
  /** null before the expert's birth step */
  values: (number | null)[];
}

export interface FigureTable {
  t: number[];
  lossAlg: number[];
  bound: number[];
  baselineRegret: number[];
  traces: RegretTrace[];
}

const REQUIRED = ["t", "loss_alg", "bound", "baseline_regret"];
const TRACE_PREFIX = "regret_tau_";

function toNumber(field: string, row: number, raw: unknown): number {
  const value = typeof raw === "number" ? raw : Number(raw);
  if (raw === null || raw === "" || !Number.isFinite(value)) {
    throw new SchemaError(`row ${row}: column ${field} is not a finite number`);
  }
  return value;
}

export function parseFigureCsv(text: string): FigureTable {
  const parsed = parse<Record<string, unknown>>(text, {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  const missing = REQUIRED.filter((name) => !fields.includes(name));
  if (missing.length > 0) {
    throw new SchemaError(`missing required columns: ${missing.join(", ")}`);
  }
  const traceColumns = fields.filter((name) => name.startsWith(TRACE_PREFIX));
  for (const name of traceColumns) {
    if (!/^\d+$/.test(name.slice(TRACE_PREFIX.length))) {
      throw new SchemaError(`malformed trace column name: ${name}`);
    }
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new SchemaError("no data rows");
  }

  const table: FigureTable = {
    t: [],
    lossAlg: [],
    bound: [],
    baselineRegret: [],
    traces: traceColumns.map((name) => ({
      birth: Number(name.slice(TRACE_PREFIX.length)),
      values: [],
    })),
  };
  rows.forEach((row, i) => {
    const t = toNumber("t", i + 1, row["t"]);
    if (i > 0 && t <= table.t[i - 1]) {
      throw new SchemaError(`rows out of order: t=${t} follows t=${table.t[i - 1]}`);
    }
    table.t.push(t);
    table.lossAlg.push(toNumber("loss_alg", i + 1, row["loss_alg"]));
    table.bound.push(toNumber("bound", i + 1, row["bound"]));
    table.baselineRegret.push(toNumber("baseline_regret", i + 1, row["baseline_regret"]));
    traceColumns.forEach((name, j) => {
      const raw = row[name];
      if (raw === null || raw === undefined || raw === "") {
        table.traces[j].values.push(null);
      } else {
        table.traces[j].values.push(toNumber(name, i + 1, raw));
      }
    });
  });

  for (const trace of table.traces) {
    let seen = false;
    trace.values.forEach((value, i) => {
      if (value !== null) {
        seen = true;
      } else if (seen) {
        throw new SchemaError(
          `trace regret_tau_${trace.birth} has a gap at t=${table.t[i]}`,
        );
      }
    });
  }
  return table;
}
