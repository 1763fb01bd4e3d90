/**
 * Lookup tables mapping a serialized state to its action probabilities.
 *
 * File format: one record per line - the state serialization with
 * newlines replaced by `|`, a tab, then four space-separated reals.
 * Every row must be a probability distribution (non-negative, summing
 * to 1 within 1e-9); a malformed table aborts server startup.
 */

import * as fs from "node:fs";

export const ACTION_COUNT = 4;
export const UNIFORM: readonly number[] = [0.25, 0.25, 0.25, 0.25];

const SUM_TOLERANCE = 1e-9;

export type LookupTable = Map<string, number[]>;

export function parseTable(text: string): LookupTable {
  const table: LookupTable = new Map();
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    if (line === "") {
      continue;
    }
    const tab = line.indexOf("\t");
    if (tab < 0) {
      throw new Error(`table line ${i + 1}: missing tab separator`);
    }
    const key = line.slice(0, tab).replace(/\|/g, "\n");
    const parts = line.slice(tab + 1).trim().split(/\s+/);
    if (parts.length !== ACTION_COUNT) {
      throw new Error(
        `table line ${i + 1}: expected ${ACTION_COUNT} probabilities, got ${parts.length}`,
      );
    }
    const probs = parts.map(Number);
    if (probs.some((p) => !Number.isFinite(p) || p < 0)) {
      throw new Error(`table line ${i + 1}: probabilities must be non-negative reals`);
    }
    const total = probs.reduce((a, b) => a + b, 0);
    if (Math.abs(total - 1) > SUM_TOLERANCE) {
      throw new Error(`table line ${i + 1}: probabilities sum to ${total}, not 1`);
    }
    table.set(key, probs);
  }
  return table;
}

export function loadTable(path: string): LookupTable {
  return parseTable(fs.readFileSync(path, "utf8"));
}
