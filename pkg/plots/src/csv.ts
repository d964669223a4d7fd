import Papa from "papaparse";

export const BENCH_HEADER = [
    "scenario", "algo", "trial", "seed", "delta", "chosen", "true_best",
    "correct", "total_queries", "rounds", "flag", "wall_ms",
] as const;

export interface BenchRow {
    scenario: string;
    algo: string;
    trial: number;
    correct: number;
    total_queries: number;
}

export class SchemaMismatch extends Error { }
export class EmptyData extends Error { }

/** Parse a bench CSV; the header must match the bench schema exactly. */
export function parseBenchCsv(text: string): BenchRow[] {
    const parsed = Papa.parse<Record<string, string>>(text.trim(), {
        header: true,
        skipEmptyLines: true,
    });
    const fields = parsed.meta.fields ?? [];
    if (fields.length !== BENCH_HEADER.length
        || BENCH_HEADER.some((name, i) => fields[i] !== name)) {
        throw new SchemaMismatch(
            `expected header "${BENCH_HEADER.join(",")}", got "${fields.join(",")}"`);
    }
    if (parsed.errors.length > 0) {
        throw new SchemaMismatch(`unparseable CSV: ${parsed.errors[0].message}`);
    }
    const rows = parsed.data.map((raw) => {
        const row: BenchRow = {
            scenario: raw.scenario,
            algo: raw.algo,
            trial: Number(raw.trial),
            correct: Number(raw.correct),
            total_queries: Number(raw.total_queries),
        };
        if (!row.scenario || !row.algo
            || !Number.isFinite(row.total_queries) || !Number.isFinite(row.correct)) {
            throw new SchemaMismatch(`bad row: ${JSON.stringify(raw)}`);
        }
        return row;
    });
    if (rows.length === 0) {
        throw new EmptyData("CSV has a valid header but no data rows");
    }
    return rows;
}
