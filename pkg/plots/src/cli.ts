#!/usr/bin/env node
import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { EmptyData, parseBenchCsv, SchemaMismatch } from "./csv.js";
import { GroupFamily, renderSvg } from "./chart.js";

const USAGE =
    "usage: plots --csv <bench.csv> --group-by <rho|clusters|custom> --out <chart.svg>";

function parseArgs(argv: string[]): { csv: string; groupBy: GroupFamily; out: string } {
    const opts = new Map<string, string>();
    for (let i = 0; i < argv.length; i += 2) {
        const flag = argv[i];
        const value = argv[i + 1];
        if (!flag.startsWith("--") || value === undefined) {
            throw new Error(USAGE);
        }
        opts.set(flag.slice(2), value);
    }
    const csv = opts.get("csv");
    const groupBy = opts.get("group-by");
    const out = opts.get("out");
    if (!csv || !groupBy || !out) {
        throw new Error(USAGE);
    }
    if (groupBy !== "rho" && groupBy !== "clusters" && groupBy !== "custom") {
        throw new Error(`unknown scenario family "${groupBy}"; ${USAGE}`);
    }
    if (out.endsWith(".png")) {
        throw new Error(
            "png output is not supported in this build (no rasterizer); use .svg");
    }
    return { csv, groupBy, out };
}

export function run(argv: string[]): number {
    let parsed;
    try {
        parsed = parseArgs(argv);
    } catch (err) {
        console.error(`plots: ${(err as Error).message}`);
        return 2;
    }
    try {
        const rows = parseBenchCsv(readFileSync(parsed.csv, "utf8"));
        const svg = renderSvg(rows, parsed.groupBy, { title: parsed.csv });
        writeFileSync(parsed.out, svg + "\n");
        console.error(`plots: wrote ${parsed.out}`);
        return 0;
    } catch (err) {
        if (err instanceof SchemaMismatch) {
            console.error(`plots: schema mismatch: ${err.message}`);
            return 3;
        }
        if (err instanceof EmptyData) {
            console.error(`plots: empty data: ${err.message}`);
            return 4;
        }
        console.error(`plots: ${(err as Error).message}`);
        return 1;
    }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
    process.exit(run(process.argv.slice(2)));
}
