/**
 * render --csv PATH --out PATH --recipe NAME [--axes linear|loglog]
 *
 * Exit codes: 0 figure written; 1 bad usage; 2 schema mismatch, empty
 * data, or I/O failure.  On failure nothing is written.
 */

import { EmptyData, SchemaError, figurePathFor, knownRecipes, render } from "./render.js";

interface Args {
  csv?: string;
  out?: string;
  recipe?: string;
  axes?: "linear" | "loglog";
}

function parseArgs(argv: string[]): Args {
  const args: Args = {};
  let i = 0;
  if (argv[0] === "render") i = 1; // invoked as `render ...` via npm script
  for (; i < argv.length; i++) {
    const flag = argv[i];
    const value = argv[i + 1];
    switch (flag) {
      case "--csv":
      case "--out":
      case "--recipe":
      case "--axes": {
        if (value === undefined) {
          throw new Error(`${flag} expects a value`);
        }
        if (flag === "--axes" && value !== "linear" && value !== "loglog") {
          throw new Error(`--axes expects linear or loglog, got '${value}'`);
        }
        args[flag.slice(2) as keyof Args] = value as never;
        i++;
        break;
      }
      default:
        throw new Error(`unknown flag '${flag}'`);
    }
  }
  return args;
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 1;
  }
  if (!args.csv || !args.out || !args.recipe) {
    console.error(
      "usage: render --csv PATH --out PATH --recipe NAME [--axes linear|loglog]"
    );
    console.error(`recipes: ${knownRecipes().join(", ")}`);
    return 1;
  }
  if (!knownRecipes().includes(args.recipe)) {
    console.error(
      `unknown recipe '${args.recipe}' (known: ${knownRecipes().join(", ")})`
    );
    return 1;
  }
  try {
    const figurePath = render({
      recipe: args.recipe,
      csvPath: args.csv,
      figurePath: figurePathFor(args.out, args.recipe),
      axes: args.axes,
    });
    console.log(`wrote ${figurePath}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof EmptyData) {
      console.error(`${err.constructor.name}: ${err.message}`);
    } else {
      console.error(`render failed: ${(err as Error).message}`);
    }
    return 2;
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("cli.ts")) {
  process.exit(main(process.argv.slice(2)));
}
