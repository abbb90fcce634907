import { readFileSync } from "fs";
import { join } from "path";
import { describe, expect, it } from "vitest";
import { parseFigureCsv, SchemaError } from "../src/schema";

const FIXTURES = join(__dirname, "fixtures");

function fixture(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf8");
}

describe("parseFigureCsv", () => {
  it("parses the generated figure CSV", () => {
    const table = parseFigureCsv(fixture("figure_small.csv"));
    expect(table.t).toHaveLength(60);
    expect(table.t[0]).toBe(1);
    expect(table.t[59]).toBe(60);
    expect(table.traces.map((tr) => tr.birth)).toEqual([16, 24, 33, 42, 50]);
    expect(table.lossAlg).toHaveLength(60);
    expect(table.bound[0]).toBe(0);
  });

  it("keeps pre-birth cells as nulls and values after birth", () => {
    const table = parseFigureCsv(fixture("figure_small.csv"));
    for (const trace of table.traces) {
      const firstReal = trace.values.findIndex((v) => v !== null);
      expect(table.t[firstReal]).toBe(trace.birth);
      trace.values.slice(0, firstReal).forEach((v) => expect(v).toBeNull());
      trace.values.slice(firstReal).forEach((v) => {
        expect(typeof v).toBe("number");
      });
    }
  });

  it("names the missing columns in the error", () => {
    expect(() => parseFigureCsv(fixture("figure_truncated.csv"))).toThrowError(
      /missing required columns: baseline_regret/,
    );
  });

  it("names every missing column when several are absent", () => {
    const text = "t,regret_tau_5\n1,0.5\n";
    expect(() => parseFigureCsv(text)).toThrowError(
      /missing required columns: loss_alg, bound, baseline_regret/,
    );
  });

  it("rejects a header-only file", () => {
    expect(() => parseFigureCsv(fixture("figure_empty.csv"))).toThrowError(
      SchemaError,
    );
    expect(() => parseFigureCsv(fixture("figure_empty.csv"))).toThrowError(
      /no data rows/,
    );
  });

  it("rejects non-numeric required cells", () => {
    const text = "t,loss_alg,bound,baseline_regret\n1,abc,0.0,0.0\n";
    expect(() => parseFigureCsv(text)).toThrowError(/loss_alg/);
  });

  it("rejects out-of-order steps", () => {
    const text =
      "t,loss_alg,bound,baseline_regret\n2,0.1,0.0,0.0\n1,0.2,0.1,0.0\n";
    expect(() => parseFigureCsv(text)).toThrowError(/out of order/);
  });

  it("rejects a gap inside a trace column", () => {
    const text =
      "t,loss_alg,bound,baseline_regret,regret_tau_2\n" +
      "1,0.1,0.0,0.0,\n2,0.1,0.1,0.0,0.3\n3,0.1,0.2,0.0,\n";
    expect(() => parseFigureCsv(text)).toThrowError(/gap at t=3/);
  });

  it("rejects malformed trace column names", () => {
    const text = "t,loss_alg,bound,baseline_regret,regret_tau_x\n1,0.1,0.0,0.0,0.2\n";
    expect(() => parseFigureCsv(text)).toThrowError(/malformed trace column/);
  });

  it("accepts a file with no trace columns", () => {
    const text = "t,loss_alg,bound,baseline_regret\n1,0.1,0.0,0.0\n";
    const table = parseFigureCsv(text);
    expect(table.traces).toHaveLength(0);
  });
});
