/* tslint:disable */
/* eslint-disable */

/**
 * The series differenced 0..=max_d times, each with its ADF result, and
 * the smallest order that tests stationary.
 */
export function difference_explorer(values: Float64Array, max_d: number): string;

/**
 * Optimal DTW alignment of two sequences.
 */
export function dtw_align(a: Float64Array, b: Float64Array): string;

/**
 * Meta-tasks for one support-selection strategy (`successive`, `random`,
 * `shuffle`, `dtw`, `es`).
 */
export function partition_preview(values: Float64Array, input_len: number, k: number, n: number, strategy: string, seed: bigint): string;

/**
 * Trend + season + AR noise series.
 */
export function synth_series(length: number, slope: number, amplitude: number, period: number, ar: number, sigma: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly difference_explorer: (a: number, b: number, c: number) => [number, number, number, number];
    readonly dtw_align: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly partition_preview: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number, number];
    readonly synth_series: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
