import { readTable, requireColumns, toNumber } from "./csv.js";
import { writeOutput } from "./svg.js";

const COLUMNS = [
  "distribution",
  "client_count",
  "ensemble_mse",
  "federated_mse",
  "pct_difference",
];

const ENSEMBLE_FILL = "#4c72b0";
const FEDERATED_FILL = "#dd8452";

const BAR_W = 26;
const GROUP_GAP = 22;
const PANEL_H = 220;
const PANEL_TOP = 44;
const PANEL_LEFT = 56;
const PANEL_GAP = 36;
const BOTTOM = 48;

interface Row {
  distribution: string;
  clientCount: number;
  ensemble: number;
  federated: number;
}

export function renderComparison(inputCsv: string): string {
  const table = readTable(inputCsv);
  requireColumns(table, COLUMNS, inputCsv);
  const rows: Row[] = table.rows.map((r) => ({
    distribution: r.distribution,
    clientCount: toNumber(r.client_count, "client_count"),
    ensemble: toNumber(r.ensemble_mse, "ensemble_mse"),
    federated: toNumber(r.federated_mse, "federated_mse"),
  }));
  const distributions = [...new Set(rows.map((r) => r.distribution))].sort();
  const maxVal = Math.max(...rows.map((r) => Math.max(r.ensemble, r.federated)));
  const scale = maxVal > 0 ? (PANEL_H - 24) / maxVal : 0;

  const panelWidth = (n: number) => n * (2 * BAR_W + GROUP_GAP) + GROUP_GAP;
  const panels = distributions.map((d) => ({
    distribution: d,
    rows: rows
      .filter((r) => r.distribution === d)
      .sort((a, b) => a.clientCount - b.clientCount),
  }));
  const width =
    PANEL_LEFT +
    panels.reduce((w, p) => w + panelWidth(p.rows.length) + PANEL_GAP, 0);
  const height = PANEL_TOP + PANEL_H + BOTTOM;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `font-family="Helvetica, Arial, sans-serif" font-size="11">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="#ffffff"/>`);
  parts.push(`<text x="${PANEL_LEFT - 40}" y="${PANEL_TOP + PANEL_H / 2}" text-anchor="middle" transform="rotate(-90 ${PANEL_LEFT - 40} ${PANEL_TOP + PANEL_H / 2})">MSE</text>`);

  let x0 = PANEL_LEFT;
  for (const panel of panels) {
    const pw = panelWidth(panel.rows.length);
    parts.push(`<g class="panel" data-distribution="${panel.distribution}">`);
    parts.push(
      `<text x="${x0 + pw / 2}" y="${PANEL_TOP - 16}" text-anchor="middle" ` +
        `font-size="13">${panel.distribution}</text>`
    );
    parts.push(
      `<line x1="${x0}" y1="${PANEL_TOP + PANEL_H}" x2="${x0 + pw}" ` +
        `y2="${PANEL_TOP + PANEL_H}" stroke="#000000"/>`
    );
    panel.rows.forEach((row, i) => {
      const gx = x0 + GROUP_GAP + i * (2 * BAR_W + GROUP_GAP);
      const pairs: [number, string, string][] = [
        [row.ensemble, ENSEMBLE_FILL, "ensemble"],
        [row.federated, FEDERATED_FILL, "federated"],
      ];
      pairs.forEach(([value, fill, kind], j) => {
        const h = value * scale;
        const bx = gx + j * BAR_W;
        const by = PANEL_TOP + PANEL_H - h;
        parts.push(
          `<rect class="bar ${kind}" x="${bx}" y="${by}" width="${BAR_W - 2}" ` +
            `height="${h}" fill="${fill}"/>`
        );
        parts.push(
          `<text class="bar-value" x="${bx + (BAR_W - 2) / 2}" y="${by - 4}" ` +
            `text-anchor="middle" font-size="9">${value.toFixed(3)}</text>`
        );
      });
      parts.push(
        `<text x="${gx + BAR_W}" y="${PANEL_TOP + PANEL_H + 16}" ` +
          `text-anchor="middle">${row.clientCount}</text>`
      );
    });
    parts.push(
      `<text x="${x0 + pw / 2}" y="${height - 10}" text-anchor="middle">clients</text>`
    );
    parts.push("</g>");
    x0 += pw + PANEL_GAP;
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export function plotComparison(inputCsv: string, out: string): void {
  writeOutput(out, renderComparison(inputCsv));
}
