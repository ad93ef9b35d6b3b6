import { readFileSync } from "node:fs";
import { parse } from "csv-parse/sync";

export class PlotError extends Error {}

export interface Table {
  header: string[];
  rows: Record<string, string>[];
}

/** Read a CSV file into string records, failing on empty input. */
export function readTable(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new PlotError(`cannot read ${path}: ${(err as Error).message}`);
  }
  let records: Record<string, string>[];
  try {
    records = parse(text, { columns: true, skip_empty_lines: true });
  } catch (err) {
    throw new PlotError(`malformed CSV in ${path}: ${(err as Error).message}`);
  }
  const headerLine = text.split(/\r?\n/, 1)[0] ?? "";
  const header = headerLine.length ? headerLine.split(",") : [];
  if (header.length === 0) {
    throw new PlotError(`empty CSV: ${path}`);
  }
  if (records.length === 0) {
    throw new PlotError(`no data rows in ${path}`);
  }
  return { header, rows: records };
}

/** Fail with the offending column name unless every column is present. */
export function requireColumns(table: Table, columns: string[], path: string): void {
  for (const col of columns) {
    if (!table.header.includes(col)) {
      throw new PlotError(`missing column ${col} in ${path}`);
    }
  }
}

export function toNumber(value: string, column: string): number {
  const n = Number(value);
  if (!Number.isFinite(n)) {
    throw new PlotError(`non-numeric value ${JSON.stringify(value)} in column ${column}`);
  }
  return n;
}
