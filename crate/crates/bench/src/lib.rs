//! Synthetic workloads for the engine benchmarks.

use std::collections::BTreeMap;

use mempix_core::harness::{DeviceSchedule, ScenarioSpec};
use mempix_core::{Datum, DeviceId, DeviceInput, Engine, EngineConfig, EngineParams, Intensity, RootScreenDef};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct Workload {
    pub devices: u32,
    pub capacity: usize,
    pub ticks: u64,
    /// Number of distinct data values devices draw from.
    pub alphabet: u32,
    /// Probability that a device emits on a given ingest tick.
    pub density: f64,
    pub decay_period: u64,
    pub seed: u64,
}

impl Default for Workload {
    fn default() -> Self {
        Workload { devices: 8, capacity: 256, ticks: 1_000, alphabet: 32, density: 0.5, decay_period: 4, seed: 1 }
    }
}

pub fn datum(i: u32) -> Datum {
    Datum::new(format!("d{i:04}")).expect("non-empty")
}

pub fn config(w: &Workload) -> EngineConfig {
    EngineConfig {
        params: EngineParams {
            capacity: w.capacity,
            i_max: Intensity::from_whole(5),
            i_known: Intensity::from_whole(3),
            r: Intensity::from_milli(500),
            decay_period: w.decay_period,
            ingest_period: 1,
        },
        roots: vec![RootScreenDef { trigger: Some(datum(0)), pixels: vec![(DeviceId(w.devices), datum(1))] }],
    }
}

pub fn scenario(w: &Workload) -> ScenarioSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(w.seed);
    let devices = (0..w.devices)
        .map(|id| {
            let mut schedule = BTreeMap::new();
            for t in 0..w.ticks {
                if rng.gen_bool(w.density) {
                    schedule.insert(t, datum(rng.gen_range(0..w.alphabet)));
                }
            }
            DeviceSchedule { device_id: DeviceId(id), schedule }
        })
        .collect();
    ScenarioSpec { config: config(w), devices, run_ticks: w.ticks }
}

/// One tick's worth of inputs, one per device.
pub fn inputs(rng: &mut ChaCha8Rng, w: &Workload) -> Vec<DeviceInput> {
    (0..w.devices)
        .map(|id| DeviceInput { device_id: DeviceId(id), datum: datum(rng.gen_range(0..w.alphabet)) })
        .collect()
}

/// An engine after `ticks` busy ticks, each device emitting every tick.
pub fn warmed(w: &Workload, ticks: u64) -> Engine {
    let mut engine = Engine::new(&config(w)).expect("valid config");
    let mut rng = ChaCha8Rng::seed_from_u64(w.seed);
    for _ in 0..ticks {
        let batch = inputs(&mut rng, w);
        engine.tick(|_| batch).expect("engine invariants hold");
    }
    engine
}
