/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_reconstruction_free: (a: number, b: number) => void;
export const evidenceProfile: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number, number];
export const haarDenoise: (a: number, b: number, c: number) => [number, number, number, number];
export const reconstructSpikes: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: bigint) => [number, number, number];
export const reconstruction_errorBars: (a: number) => [number, number];
export const reconstruction_estimate: (a: number) => [number, number];
export const reconstruction_modelSize: (a: number) => number;
export const reconstruction_original: (a: number) => [number, number];
export const reconstruction_reconError: (a: number) => number;
export const reconstruction_sigma2: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
