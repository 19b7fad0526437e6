//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Grid positions are passed as cell indices `(i, j)` of the preset's
//! measurement grid.

use ris_steer::{channel, fieldmap, io, optimizer, presets, PowerMap, RisConfig, Scene};
use wasm_bindgen::prelude::*;

/// A power map flattened row by row (`j` outer, `i` inner), ready for an
/// `ImageData` of `width` x `height` pixels.
#[wasm_bindgen]
pub struct Heatmap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    peak_dbm: f64,
    peak_i: usize,
    peak_j: usize,
}

#[wasm_bindgen]
impl Heatmap {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }

    /// dBm per cell; floor cells hold -200.
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn peak_dbm(&self) -> f64 {
        self.peak_dbm
    }

    #[wasm_bindgen(getter)]
    pub fn peak_i(&self) -> usize {
        self.peak_i
    }

    #[wasm_bindgen(getter)]
    pub fn peak_j(&self) -> usize {
        self.peak_j
    }
}

impl Heatmap {
    fn from_map(map: &PowerMap) -> Result<Heatmap, String> {
        let (peak_i, peak_j, peak_dbm) = map.argmax().ok_or("every cell is at the floor")?;
        let g = map.grid;
        let values = (0..g.count_v)
            .flat_map(|j| (0..g.count_u).map(move |i| (i, j)))
            .map(|(i, j)| map.get(i, j))
            .collect();
        Ok(Heatmap {
            width: g.count_u,
            height: g.count_v,
            values,
            peak_dbm,
            peak_i,
            peak_j,
        })
    }
}

/// Names accepted by [`Demo::new`].
#[wasm_bindgen]
pub fn preset_names() -> Vec<String> {
    presets::PRESET_NAMES
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// One preset scene with a movable receiver.
#[wasm_bindgen]
pub struct Demo {
    scene: Scene,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(preset: &str) -> Result<Demo, String> {
        let text = presets::preset(preset).ok_or_else(|| format!("unknown preset `{preset}`"))?;
        let scenario = io::parse_scenario(text).map_err(|e| e.to_string())?;
        let scene = Scene::new(scenario).map_err(|e| e.to_string())?;
        Ok(Demo { scene })
    }

    #[wasm_bindgen(getter)]
    pub fn grid_width(&self) -> usize {
        self.scene.scenario.grid.count_u
    }

    #[wasm_bindgen(getter)]
    pub fn grid_height(&self) -> usize {
        self.scene.scenario.grid.count_v
    }

    #[wasm_bindgen(getter)]
    pub fn spacing_m(&self) -> f64 {
        self.scene.scenario.grid.spacing
    }

    /// Grid cell nearest to the receiver.
    pub fn receiver_cell(&self) -> Vec<usize> {
        let (i, j) = self
            .scene
            .scenario
            .grid
            .nearest_cell(self.scene.scenario.rx);
        vec![i, j]
    }

    /// Moves the receiver onto grid point `(i, j)`.
    pub fn move_receiver(&mut self, i: usize, j: usize) -> Result<(), String> {
        let mut scenario = self.scene.scenario.clone();
        scenario.rx = self.point(i, j)?;
        self.scene = Scene::new(scenario).map_err(|e| e.to_string())?;
        Ok(())
    }

    /// Power at the receiver with the surface aimed at each grid point in turn.
    pub fn target_sweep(&self) -> Result<Heatmap, String> {
        let map = fieldmap::sweep_targets(&self.scene, 1).map_err(|e| e.to_string())?;
        Heatmap::from_map(&map)
    }

    /// Power over the grid with the surface aimed at grid point `(i, j)`.
    pub fn footprint(&self, i: usize, j: usize) -> Result<Heatmap, String> {
        let config = self.aim(i, j)?;
        let map = fieldmap::sweep_receivers(&self.scene, &config, 1).map_err(|e| e.to_string())?;
        Heatmap::from_map(&map)
    }

    /// Switch states (1 = pi) of the surface aimed at `(i, j)`, as a raster
    /// of `pattern_width` x `pattern_height` seen from the front, top row
    /// first.
    pub fn pattern(&self, i: usize, j: usize) -> Result<Vec<u8>, String> {
        let config = self.aim(i, j)?;
        let layout = &self.scene.scenario.layout;
        let n = layout.cells_per_module_side;
        let cols = layout.columns();
        let mut raster = vec![0u8; config.len()];
        for (k, s) in config.states.iter().enumerate() {
            let cell_col = k % n;
            let cell_row = k / n % n;
            let module_col = k / (n * n) % layout.modules_across;
            let module_row = k / (n * n * layout.modules_across);
            raster[(module_row * n + cell_row) * cols + module_col * n + cell_col] = s.bit() as u8;
        }
        Ok(raster)
    }

    #[wasm_bindgen(getter)]
    pub fn pattern_width(&self) -> usize {
        self.scene.scenario.layout.columns()
    }

    #[wasm_bindgen(getter)]
    pub fn pattern_height(&self) -> usize {
        self.scene.scenario.layout.rows()
    }

    /// Predicted received power in dBm at `(i, j)` when aimed there.
    pub fn predicted_dbm(&self, i: usize, j: usize) -> Result<f64, String> {
        let config = self.aim(i, j)?;
        let casc = self
            .scene
            .cascade_to(self.point(i, j)?)
            .map_err(|e| e.to_string())?;
        let h = channel::effective_channel(
            &casc,
            &config.states,
            self.scene.rf(),
            self.scene.amplitude(),
        )
        .map_err(|e| e.to_string())?;
        Ok(channel::received_power_dbm(h, self.scene.rf()))
    }
}

impl Demo {
    fn point(&self, i: usize, j: usize) -> Result<ris_steer::Vec3, String> {
        let g = &self.scene.scenario.grid;
        if i >= g.count_u || j >= g.count_v {
            return Err(format!(
                "cell ({i}, {j}) is outside the {}x{} grid",
                g.count_u, g.count_v
            ));
        }
        Ok(g.point(i, j))
    }

    fn aim(&self, i: usize, j: usize) -> Result<RisConfig, String> {
        optimizer::optimize_config(&self.scene, self.point(i, j)?).map_err(|e| e.to_string())
    }
}
