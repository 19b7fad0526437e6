/* tslint:disable */
/* eslint-disable */

/**
 * One preset scene with a movable receiver.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Power over the grid with the surface aimed at grid point `(i, j)`.
     */
    footprint(i: number, j: number): Heatmap;
    /**
     * Moves the receiver onto grid point `(i, j)`.
     */
    move_receiver(i: number, j: number): void;
    constructor(preset: string);
    /**
     * Switch states (1 = pi) of the surface aimed at `(i, j)`, as a raster
     * of `pattern_width` x `pattern_height` seen from the front, top row
     * first.
     */
    pattern(i: number, j: number): Uint8Array;
    /**
     * Predicted received power in dBm at `(i, j)` when aimed there.
     */
    predicted_dbm(i: number, j: number): number;
    /**
     * Grid cell nearest to the receiver.
     */
    receiver_cell(): Uint32Array;
    /**
     * Power at the receiver with the surface aimed at each grid point in turn.
     */
    target_sweep(): Heatmap;
    readonly grid_height: number;
    readonly grid_width: number;
    readonly pattern_height: number;
    readonly pattern_width: number;
    readonly spacing_m: number;
}

/**
 * A power map flattened row by row (`j` outer, `i` inner), ready for an
 * `ImageData` of `width` x `height` pixels.
 */
export class Heatmap {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * dBm per cell; floor cells hold -200.
     */
    values(): Float64Array;
    readonly height: number;
    readonly peak_dbm: number;
    readonly peak_i: number;
    readonly peak_j: number;
    readonly width: number;
}

/**
 * Names accepted by [`Demo::new`].
 */
export function preset_names(): string[];

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly __wbg_heatmap_free: (a: number, b: number) => void;
    readonly demo_footprint: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_grid_height: (a: number) => number;
    readonly demo_grid_width: (a: number) => number;
    readonly demo_move_receiver: (a: number, b: number, c: number) => [number, number];
    readonly demo_new: (a: number, b: number) => [number, number, number];
    readonly demo_pattern: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_pattern_height: (a: number) => number;
    readonly demo_pattern_width: (a: number) => number;
    readonly demo_predicted_dbm: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_receiver_cell: (a: number) => [number, number];
    readonly demo_spacing_m: (a: number) => number;
    readonly demo_target_sweep: (a: number) => [number, number, number];
    readonly heatmap_height: (a: number) => number;
    readonly heatmap_peak_dbm: (a: number) => number;
    readonly heatmap_peak_i: (a: number) => number;
    readonly heatmap_peak_j: (a: number) => number;
    readonly heatmap_values: (a: number) => [number, number];
    readonly heatmap_width: (a: number) => number;
    readonly preset_names: () => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
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
