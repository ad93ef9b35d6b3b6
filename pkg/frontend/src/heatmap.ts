import { PlotError, readTable, requireColumns, toNumber } from "./csv.js";
import { diverging, sequential, textColor } from "./color.js";
import { writeOutput } from "./svg.js";

export interface HeatmapSpec {
  inputCsv: string;
  valueColumn: "mean_mse" | "pct_change";
  rowCaption: string;
  colCaption: string;
  out: string;
  /** Optional symmetric color bound for diverging maps. */
  bound?: number;
}

const CELL_W = 72;
const CELL_H = 44;
const LEFT = 84;
const TOP = 48;
const BOTTOM = 56;

interface Cell {
  row: number;
  col: number;
  value: number;
}

function uniqueSorted(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}

export function renderHeatmap(spec: HeatmapSpec): string {
  const table = readTable(spec.inputCsv);
  requireColumns(table, ["row_key", "col_key", spec.valueColumn], spec.inputCsv);
  const cells: Cell[] = table.rows.map((r) => ({
    row: toNumber(r.row_key, "row_key"),
    col: toNumber(r.col_key, "col_key"),
    value: toNumber(r[spec.valueColumn], spec.valueColumn),
  }));
  const rows = uniqueSorted(cells.map((c) => c.row));
  const cols = uniqueSorted(cells.map((c) => c.col));

  const values = cells.map((c) => c.value);
  const bound =
    spec.bound ?? Math.max(...values.map(Math.abs), Number.MIN_VALUE);
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const fill = (v: number) =>
    spec.valueColumn === "pct_change" ? diverging(v, bound) : sequential(v, lo, hi);

  const width = LEFT + cols.length * CELL_W + 16;
  const height = TOP + rows.length * CELL_H + BOTTOM;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `font-family="Helvetica, Arial, sans-serif" font-size="12">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="#ffffff"/>`);
  parts.push(
    `<text x="${LEFT + (cols.length * CELL_W) / 2}" y="20" text-anchor="middle" ` +
      `font-size="14">${spec.valueColumn}</text>`
  );

  for (const cell of cells) {
    const x = LEFT + cols.indexOf(cell.col) * CELL_W;
    const y = TOP + rows.indexOf(cell.row) * CELL_H;
    const color = fill(cell.value);
    const label = cell.value.toFixed(3);
    parts.push(
      `<rect class="cell" x="${x}" y="${y}" width="${CELL_W}" height="${CELL_H}" ` +
        `fill="${color}" stroke="#ffffff"/>`
    );
    parts.push(
      `<text class="cell-value" x="${x + CELL_W / 2}" y="${y + CELL_H / 2 + 4}" ` +
        `text-anchor="middle" fill="${textColor(color)}">${label}</text>`
    );
  }

  rows.forEach((row, i) => {
    parts.push(
      `<text x="${LEFT - 8}" y="${TOP + i * CELL_H + CELL_H / 2 + 4}" ` +
        `text-anchor="end">${row}</text>`
    );
  });
  cols.forEach((col, j) => {
    parts.push(
      `<text x="${LEFT + j * CELL_W + CELL_W / 2}" y="${TOP + rows.length * CELL_H + 18}" ` +
        `text-anchor="middle">${col}</text>`
    );
  });
  parts.push(
    `<text x="${LEFT + (cols.length * CELL_W) / 2}" y="${height - 12}" ` +
      `text-anchor="middle">${spec.colCaption}</text>`
  );
  parts.push(
    `<text x="16" y="${TOP + (rows.length * CELL_H) / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${TOP + (rows.length * CELL_H) / 2})">${spec.rowCaption}</text>`
  );
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export function plotHeatmap(spec: HeatmapSpec): void {
  if (spec.valueColumn !== "mean_mse" && spec.valueColumn !== "pct_change") {
    throw new PlotError(
      `value column must be mean_mse or pct_change, got ${spec.valueColumn}`
    );
  }
  writeOutput(spec.out, renderHeatmap(spec));
}
