/**
 * Per-recipe CSV schemas.
 *
 * Every experiment CSV carries the recipe's declared columns plus a
 * trailing `status` column.  Metric cells of failed sweep points hold
 * "nan"; papaparse's dynamic typing leaves those as strings, so numeric
 * cells accept either a finite number or the literal "nan".
 */

import { z } from "zod";

const numericCell = z
  .union([z.number(), z.literal("nan"), z.literal("inf"), z.literal("-inf")])
  .transform((v) => {
    if (v === "nan") return NaN;
    if (v === "inf") return Infinity;
    if (v === "-inf") return -Infinity;
    return v;
  });

const statusCell = z.enum(["ok", "failed"]);

export type CellKind = "number" | "string";

export interface RecipeSchema {
  /** data columns in declared order (the CSV appends `status`) */
  columns: string[];
  kinds: Record<string, CellKind>;
}

export const RECIPES: Record<string, RecipeSchema> = {
  "charge-converge": {
    columns: ["h", "sup_error", "sup_charge"],
    kinds: { h: "number", sup_error: "number", sup_charge: "number" },
  },
  "step-beta-converge": {
    columns: ["n", "sup_diff", "sup_step_charge", "sup_charge"],
    kinds: {
      n: "number",
      sup_diff: "number",
      sup_step_charge: "number",
      sup_charge: "number",
    },
  },
  "sigma-converge": {
    columns: ["sigma", "l2_error"],
    kinds: { sigma: "number", l2_error: "number" },
  },
  "gs-energy": {
    columns: ["sigma", "energy", "scaled_identity", "target", "rel_deviation"],
    kinds: {
      sigma: "number",
      energy: "number",
      scaled_identity: "number",
      target: "number",
      rel_deviation: "number",
    },
  },
  ionize: {
    columns: ["t", "survival"],
    kinds: { t: "number", survival: "number" },
  },
  "field-potential": {
    columns: ["r", "v_start", "a_coef", "b_coef", "well_scaled"],
    kinds: {
      r: "number",
      v_start: "number",
      a_coef: "number",
      b_coef: "number",
      well_scaled: "number",
    },
  },
  "resonance-tune": {
    columns: ["shape", "coupling", "bs_eigenvalue", "pairing", "simple"],
    kinds: {
      shape: "string",
      coupling: "number",
      bs_eigenvalue: "number",
      pairing: "number",
      simple: "number",
    },
  },
};

export type Row = Record<string, number | string> & { status: "ok" | "failed" };

export function rowSchema(recipe: RecipeSchema): z.ZodType<Row> {
  const fields: Record<string, z.ZodTypeAny> = { status: statusCell };
  for (const column of recipe.columns) {
    fields[column] = recipe.kinds[column] === "string" ? z.string() : numericCell;
  }
  return z.object(fields) as unknown as z.ZodType<Row>;
}

/** axis labels with the units of the natural system (hbar = 2m = 1) */
export const UNITS: Record<string, string> = {
  h: "time",
  t: "time",
  sigma: "length",
  r: "length",
  energy: "energy",
  v_start: "energy",
  a_coef: "energy",
};

export function axisLabel(column: string): string {
  const unit = UNITS[column] ?? "dimensionless";
  return `${column} (${unit})`;
}
