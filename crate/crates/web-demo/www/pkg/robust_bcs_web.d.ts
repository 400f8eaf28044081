/* tslint:disable */
/* eslint-disable */

/**
 * Outcome of [`reconstruct_spikes`].
 */
export class Reconstruction {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly errorBars: Float64Array;
    readonly estimate: Float64Array;
    readonly modelSize: number;
    readonly original: Float64Array;
    readonly reconError: number;
    readonly sigma2: number;
}

/**
 * Fit the spike problem with the SO* variant, then evaluate the log evidence
 * of the fitted prior precisions at `points` log-spaced noise variances
 * spanning six decades either side of the fitted one. Returns interleaved
 * `[sigma2, log_evidence, ...]` pairs.
 */
export function evidenceProfile(n: number, spikes: number, k: number, noise_pct: number, seed: bigint, points: number): Float64Array;

/**
 * Zero every Haar coefficient of `values` smaller than `tau` in magnitude.
 * The result holds the denoised signal followed by one extra entry, the
 * number of coefficients that survived.
 */
export function haarDenoise(values: Float64Array, tau: number): Float64Array;

/**
 * Draw `spikes` spikes of the given kind (`uniform` or `gaussian`) in a
 * length-`n` signal, observe it through `k` random projections with relative
 * noise `noise_pct`, and reconstruct it with `variant`.
 */
export function reconstructSpikes(n: number, spikes: number, kind: string, k: number, noise_pct: number, variant: string, seed: bigint): Reconstruction;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_reconstruction_free: (a: number, b: number) => void;
    readonly evidenceProfile: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number, number];
    readonly haarDenoise: (a: number, b: number, c: number) => [number, number, number, number];
    readonly reconstructSpikes: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: bigint) => [number, number, number];
    readonly reconstruction_errorBars: (a: number) => [number, number];
    readonly reconstruction_estimate: (a: number) => [number, number];
    readonly reconstruction_modelSize: (a: number) => number;
    readonly reconstruction_original: (a: number) => [number, number];
    readonly reconstruction_reconError: (a: number) => number;
    readonly reconstruction_sigma2: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
