#!/usr/bin/env node
/**
 * plot <kind> --in <csv...> --out <svg> [--labels <name...>]
 *
 * Renders one figure from simulator run logs. Comparison kinds accept
 * several input CSVs (one per variant); labels default to the file stems.
 */

import { writeFileSync } from "fs";
import { basename } from "path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { loadRunCsv } from "./csv.js";
import { KINDS, Kind, render } from "./kinds.js";

export function main(argv: string[]): number {
  const args = yargs(argv)
    .command("$0 <kind>", "render a figure from run CSV logs", (y) =>
      y.positional("kind", { choices: KINDS, demandOption: true, type: "string" }),
    )
    .option("in", { type: "string", array: true, demandOption: true, describe: "input CSV file(s)" })
    .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
    .option("labels", { type: "string", array: true, describe: "legend labels, one per input" })
    .strict()
    .exitProcess(false)
    .parseSync();

  const inputs = args.in as string[];
  const labels =
    (args.labels as string[] | undefined) ?? inputs.map((p) => basename(p).replace(/\.csv$/, ""));
  if (labels.length !== inputs.length) {
    console.error(`error: ${inputs.length} inputs but ${labels.length} labels`);
    return 2;
  }
  try {
    const logs = inputs.map((p) => loadRunCsv(p));
    const svg = render(args.kind as Kind, logs, labels);
    writeFileSync(args.out as string, svg);
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
  console.error(`wrote ${args.out}`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(basename(process.argv[1]));
if (invokedDirectly) {
  process.exit(main(hideBin(process.argv)));
}
