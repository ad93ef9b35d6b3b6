#!/usr/bin/env node
import { parseArgs } from "node:util";
import { PlotError } from "./csv.js";
import { plotHeatmap } from "./heatmap.js";
import { plotComparison } from "./compare.js";

const USAGE = `usage:
  plot heatmap --csv <path> --value <mean_mse|pct_change> --out <path.svg>
               [--row-label <text>] [--col-label <text>] [--bound <number>]
  plot compare --csv <path> --out <path.svg>`;

function required(values: Record<string, string | undefined>, name: string): string {
  const v = values[name];
  if (v === undefined) {
    throw new PlotError(`missing required option --${name}\n${USAGE}`);
  }
  return v;
}

export function run(argv: string[]): number {
  try {
    const [command, ...rest] = argv;
    if (command === "heatmap") {
      const { values } = parseArgs({
        args: rest,
        options: {
          csv: { type: "string" },
          value: { type: "string" },
          out: { type: "string" },
          "row-label": { type: "string" },
          "col-label": { type: "string" },
          bound: { type: "string" },
        },
      });
      plotHeatmap({
        inputCsv: required(values, "csv"),
        valueColumn: required(values, "value") as "mean_mse" | "pct_change",
        out: required(values, "out"),
        rowCaption: values["row-label"] ?? "clients",
        colCaption: values["col-label"] ?? "level",
        bound: values.bound === undefined ? undefined : Number(values.bound),
      });
      return 0;
    }
    if (command === "compare") {
      const { values } = parseArgs({
        args: rest,
        options: { csv: { type: "string" }, out: { type: "string" } },
      });
      plotComparison(required(values, "csv"), required(values, "out"));
      return 0;
    }
    throw new PlotError(`unknown command ${command ?? "(none)"}\n${USAGE}`);
  } catch (err) {
    if (err instanceof PlotError || err instanceof TypeError) {
      console.error(`plot: ${(err as Error).message}`);
      return 1;
    }
    console.error(`plot: ${(err as Error).stack ?? err}`);
    return 2;
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("cli.ts") || entry.endsWith("plot")) {
  process.exit(run(process.argv.slice(2)));
}
