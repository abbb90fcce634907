#!/usr/bin/env node
import { readFileSync, writeFileSync } from "fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { parseFigureCsv, SchemaError } from "./schema";
import { renderChart } from "./chart";

export function run(argv: string[]): number {
  const args = yargs(argv)
    .usage("render --in <figure.csv> --out <figure.svg>")
    .option("in", { type: "string", demandOption: true, describe: "input figure CSV" })
    .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
    .strict()
    .exitProcess(false)
    .parseSync();

  if (!args.out.endsWith(".svg")) {
    process.stderr.write(
      "png output is not supported; write an .svg path instead\n",
    );
    return 2;
  }
  let text: string;
  try {
    text = readFileSync(args.in, "utf8");
  } catch (err) {
    process.stderr.write(`cannot read ${args.in}: ${(err as Error).message}\n`);
    return 1;
  }
  let svg: string;
  try {
    svg = renderChart(parseFigureCsv(text));
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }
  writeFileSync(args.out, svg);
  process.stdout.write(`wrote ${args.out}\n`);
  return 0;
}

if (require.main === module) {
  process.exitCode = run(hideBin(process.argv));
}
