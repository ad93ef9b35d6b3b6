import { writeFileSync } from "node:fs";
import { PlotError } from "./csv.js";

/** Write a finished SVG document, rejecting unsupported extensions.
 *
 * Rendering happens entirely in memory before this is called, so a
 * failed run never leaves a partial file behind.
 */
export function writeOutput(path: string, svg: string): void {
  if (!path.endsWith(".svg")) {
    throw new PlotError(
      `unsupported output format for ${path}: only .svg output is supported`
    );
  }
  try {
    writeFileSync(path, svg, "utf8");
  } catch (err) {
    throw new PlotError(`cannot write ${path}: ${(err as Error).message}`);
  }
}
