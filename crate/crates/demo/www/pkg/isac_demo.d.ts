/* tslint:disable */
/* eslint-disable */

/**
 * DR in dB over an input-SNR grid, flattened as `[snr, mf, rf, wf]` rows.
 */
export function dr_sweep(family: string, order: number, n: number, m: number, start_db: number, stop_db: number, step_db: number): Float64Array;

/**
 * Expected zero-Doppler slice (dB relative to the peak) for a target at
 * delay bin 0, with unit noise.
 */
export function expected_profile(family: string, order: number, filter: string, n: number, m: number, snr_db: number): Float64Array;

/**
 * Shapes 64-QAM for a sensing budget placed `fraction` of the way from
 * the sensing-best to the sensing-worst MSE. Returns a JSON object with
 * the points, probabilities, AIR and MSE.
 */
export function shape_constellation(filter: string, snr_db: number, comm_snr_db: number, fraction: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly dr_sweep: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
    readonly expected_profile: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
    readonly shape_constellation: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
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
