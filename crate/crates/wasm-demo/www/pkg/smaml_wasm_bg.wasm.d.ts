/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const difference_explorer: (a: number, b: number, c: number) => [number, number, number, number];
export const dtw_align: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const partition_preview: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number, number];
export const synth_series: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
