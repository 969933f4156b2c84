/* tslint:disable */
/* eslint-disable */

/**
 * Seed used by the page until the user changes it.
 */
export function defaultSeed(): number;

/**
 * Sweeps `kind` (binomial-p, normal-sd, uniform-lo, bias or group-size)
 * over comma-separated `values`. Returns the sweep JSON array.
 */
export function runSweep(kind_name: string, values: string, m: number, bias: number, trials: number, seed: number): string;

/**
 * Runs `trials` synthetic cohorts with one parameter set to `value`.
 * `kind` names the parameter as in [`run_sweep`]; the rest keep the
 * defaults (binomial marks with p = 0.7, 10 questions, α = β = 0.1).
 */
export function simulatePoint(kind_name: string, value: number, m: number, bias: number, trials: number, seed: number): string;

/**
 * Solves a grade matrix given as CSV (row i holds the grades agent i
 * received). An empty `mask_csv` means every grade was given. `beta` of
 * zero selects the basic rule.
 */
export function solveMatrix(matrix_csv: string, mask_csv: string, alpha: number, beta: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly defaultSeed: () => number;
    readonly runSweep: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly simulatePoint: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly solveMatrix: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
