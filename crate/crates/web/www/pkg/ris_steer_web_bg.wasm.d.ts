/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const __wbg_heatmap_free: (a: number, b: number) => void;
export const demo_footprint: (a: number, b: number, c: number) => [number, number, number];
export const demo_grid_height: (a: number) => number;
export const demo_grid_width: (a: number) => number;
export const demo_move_receiver: (a: number, b: number, c: number) => [number, number];
export const demo_new: (a: number, b: number) => [number, number, number];
export const demo_pattern: (a: number, b: number, c: number) => [number, number, number, number];
export const demo_pattern_height: (a: number) => number;
export const demo_pattern_width: (a: number) => number;
export const demo_predicted_dbm: (a: number, b: number, c: number) => [number, number, number];
export const demo_receiver_cell: (a: number) => [number, number];
export const demo_spacing_m: (a: number) => number;
export const demo_target_sweep: (a: number) => [number, number, number];
export const heatmap_height: (a: number) => number;
export const heatmap_peak_dbm: (a: number) => number;
export const heatmap_peak_i: (a: number) => number;
export const heatmap_peak_j: (a: number) => number;
export const heatmap_values: (a: number) => [number, number];
export const heatmap_width: (a: number) => number;
export const preset_names: () => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_start: () => void;
