/**
 * CSV -> SVG figure rendering, one figure per recipe.
 *
 * Convergence recipes (charge-converge, step-beta-converge, sigma-converge,
 * gs-energy) get log-log marker series; ionize gets a linear survival trace;
 * field-potential gets the induced potential with the rescaled-well
 * reference overlaid; resonance-tune gets a per-shape bar chart.
 *
 * Rendering is read-only over its inputs and the output name carries no
 * timestamp, so a rerun on the same CSV writes the same bytes.
 */

import { mkdirSync, readFileSync, writeFileSync } from "fs";
import { dirname, join } from "path";
import { init } from "echarts";
import type { EChartsOption, SeriesOption } from "echarts";
import Papa from "papaparse";

import { RECIPES, Row, axisLabel, rowSchema } from "./schemas.js";

export class SchemaError extends Error {}
export class EmptyData extends Error {}

export type Axes = "linear" | "loglog";

export interface Overlay {
  label: string;
  points: [number, number][];
}

export interface PlotSpec {
  recipe: string;
  csvPath: string;
  figurePath: string;
  axes?: Axes;
  overlays?: Overlay[];
}

const DEFAULT_AXES: Record<string, Axes> = {
  "charge-converge": "loglog",
  "step-beta-converge": "loglog",
  "sigma-converge": "loglog",
  "gs-energy": "loglog",
  ionize: "linear",
  "field-potential": "linear",
  "resonance-tune": "linear",
};

const WIDTH = 800;
const HEIGHT = 560;

export function knownRecipes(): string[] {
  return Object.keys(RECIPES);
}

/** Parse and validate one experiment CSV against its recipe schema. */
export function loadRows(recipe: string, csvPath: string): Row[] {
  const schema = RECIPES[recipe];
  if (!schema) {
    throw new SchemaError(
      `unknown recipe '${recipe}' (known: ${knownRecipes().join(", ")})`
    );
  }
  const text = readFileSync(csvPath, "utf8");
  const parsed = Papa.parse<Record<string, unknown>>(text, {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  const expected = [...schema.columns, "status"];
  const got = parsed.meta.fields ?? [];
  if (expected.length !== got.length || expected.some((c, i) => c !== got[i])) {
    throw new SchemaError(
      `header mismatch for '${recipe}': expected ${expected.join(",")} ` +
        `but the file has ${got.join(",")}`
    );
  }
  const rows: Row[] = [];
  const validator = rowSchema(schema);
  for (const [index, raw] of parsed.data.entries()) {
    const check = validator.safeParse(raw);
    if (!check.success) {
      throw new SchemaError(
        `row ${index + 1} of '${csvPath}' does not match the ` +
          `${recipe} schema: ${check.error.issues[0]?.message ?? "invalid"}`
      );
    }
    rows.push(check.data);
  }
  if (rows.length === 0) {
    throw new EmptyData(`no data rows in '${csvPath}'`);
  }
  return rows;
}

function markerSeries(
  rows: Row[],
  x: string,
  y: string,
  label: string,
  logSafe: boolean
): SeriesOption {
  const points = rows
    .filter((row) => row.status === "ok")
    .map((row) => [row[x] as number, row[y] as number] as [number, number])
    .filter(
      ([a, b]) =>
        Number.isFinite(a) && Number.isFinite(b) && (!logSafe || (a > 0 && b > 0))
    );
  return {
    name: label,
    type: "line",
    symbol: "circle",
    symbolSize: 8,
    data: points,
  };
}

function valueAtPeak(rows: Row[], column: string): number {
  let best = 0;
  for (const row of rows) {
    const v = row[column] as number;
    if (Number.isFinite(v) && Math.abs(v) > Math.abs(best)) best = v;
  }
  return best;
}

/** The echarts option for a recipe; exported so tests can inspect series. */
export function buildOption(
  recipe: string,
  rows: Row[],
  axes?: Axes,
  overlays?: Overlay[]
): EChartsOption {
  const mode = axes ?? DEFAULT_AXES[recipe] ?? "linear";
  const log = mode === "loglog";
  const axisType = log ? ("log" as const) : ("value" as const);
  let xColumn: string;
  let series: SeriesOption[];
  let yLabel: string;

  switch (recipe) {
    case "charge-converge":
      xColumn = "h";
      yLabel = "sup error (dimensionless)";
      series = [markerSeries(rows, "h", "sup_error", "sup_error", log)];
      break;
    case "step-beta-converge":
      xColumn = "n";
      yLabel = "sup difference (dimensionless)";
      series = [markerSeries(rows, "n", "sup_diff", "sup_diff", log)];
      break;
    case "sigma-converge":
      xColumn = "sigma";
      yLabel = "L2 error at t (dimensionless)";
      series = [markerSeries(rows, "sigma", "l2_error", "l2_error", log)];
      break;
    case "gs-energy":
      xColumn = "sigma";
      yLabel = "relative energy deviation (dimensionless)";
      series = [
        markerSeries(rows, "sigma", "rel_deviation", "rel_deviation", log),
      ];
      break;
    case "ionize":
      xColumn = "t";
      yLabel = "survival probability (dimensionless)";
      series = [markerSeries(rows, "t", "survival", "survival", false)];
      break;
    case "field-potential": {
      xColumn = "r";
      yLabel = "potential (energy)";
      series = [markerSeries(rows, "r", "v_start", "V(r, s)", false)];
      (series[0] as { symbol?: string }).symbol = "none";
      const scaleTop = valueAtPeak(rows, "v_start");
      const wellTop = valueAtPeak(rows, "well_scaled");
      if (wellTop !== 0) {
        const scale = scaleTop / wellTop;
        series.push({
          name: "rescaled well reference",
          type: "line",
          symbol: "none",
          lineStyle: { type: "dashed" },
          data: rows
            .filter((row) => row.status === "ok")
            .map((row) => [
              row.r as number,
              (row.well_scaled as number) * scale,
            ]),
        });
      }
      break;
    }
    case "resonance-tune":
      return {
        title: { text: "resonance-tune" },
        xAxis: {
          type: "category",
          data: rows.map((row) => String(row.shape)),
          name: "shape",
        },
        yAxis: { type: "value", name: "resonant coupling (dimensionless)" },
        series: [
          {
            name: "coupling",
            type: "bar",
            data: rows.map((row) => row.coupling as number),
          },
        ],
      };
    default:
      throw new SchemaError(`unknown recipe '${recipe}'`);
  }

  for (const overlay of overlays ?? []) {
    series.push({
      name: overlay.label,
      type: "line",
      symbol: "none",
      lineStyle: { type: "dashed" },
      data: overlay.points,
    });
  }

  return {
    title: { text: recipe },
    legend: { top: 28 },
    xAxis: { type: axisType, name: axisLabel(xColumn) },
    yAxis: { type: axisType, name: yLabel },
    series,
  };
}

/**
 * The SVG backend numbers CSS classes and clip paths with a process-wide
 * instance counter; renumber them in order of first appearance so the
 * same data yields the same bytes no matter what rendered before.
 */
function normalizeIds(svg: string): string {
  const mapped = new Map<string, string>();
  return svg.replace(/zr\d+-(?:cls-\d+|c\d+)/g, (token) => {
    let name = mapped.get(token);
    if (name === undefined) {
      const kind = token.includes("-cls-") ? "cls" : "c";
      name = `zr-${kind}-${mapped.size}`;
      mapped.set(token, name);
    }
    return name;
  });
}

export function renderToString(spec: PlotSpec): string {
  const rows = loadRows(spec.recipe, spec.csvPath);
  const option = buildOption(spec.recipe, rows, spec.axes, spec.overlays);
  const chart = init(null, null, {
    renderer: "svg",
    ssr: true,
    width: WIDTH,
    height: HEIGHT,
  });
  try {
    chart.setOption({ animation: false, ...option });
    return normalizeIds(chart.renderToSVGString());
  } finally {
    chart.dispose();
  }
}

/** Validate, build, and only then write the figure file. */
export function render(spec: PlotSpec): string {
  const svg = renderToString(spec);
  mkdirSync(dirname(spec.figurePath), { recursive: true });
  writeFileSync(spec.figurePath, svg, "utf8");
  return spec.figurePath;
}

/** `out` may name the .svg file itself or a directory to put recipe.svg in. */
export function figurePathFor(out: string, recipe: string): string {
  return out.endsWith(".svg") ? out : join(out, `${recipe}.svg`);
}
