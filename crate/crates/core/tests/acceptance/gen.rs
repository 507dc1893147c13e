//! Seeded random scenarios. Small alphabets so data repeat, colors collide
//! and the pixel pool runs dry.

use std::collections::BTreeMap;

use mempix_core::harness::{DeviceSchedule, ScenarioSpec};
use mempix_core::{Datum, DeviceId, EngineConfig, EngineParams, Intensity, RootScreenDef};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct Limits {
    pub max_devices: usize,
    pub max_capacity: usize,
    pub max_ticks: u64,
}

const WORDS: &[&str] = &["HOT", "COLD", "A", "B", "C", "AB", "BUZZ", "LAMP", "z"];

fn word(rng: &mut ChaCha8Rng, alphabet: &[&str]) -> Datum {
    Datum::try_from(*alphabet.choose(rng).unwrap()).unwrap()
}

pub fn scenario(rng: &mut ChaCha8Rng, lim: &Limits) -> ScenarioSpec {
    let alphabet: Vec<&str> = {
        let mut w = WORDS.to_vec();
        w.shuffle(rng);
        w.truncate(rng.gen_range(2..=WORDS.len()));
        w
    };

    let i_max = if rng.gen_bool(0.5) { rng.gen_range(2..=6) * 1000 } else { rng.gen_range(2..=6000) };
    let params = EngineParams {
        capacity: rng.gen_range(1..=lim.max_capacity),
        i_max: Intensity::from_milli(i_max),
        i_known: Intensity::from_milli(rng.gen_range(1..i_max)),
        r: Intensity::from_milli(if rng.gen_bool(0.5) {
            [250, 500, 750][rng.gen_range(0..3)]
        } else {
            rng.gen_range(1..1000)
        }),
        decay_period: rng.gen_range(1..=8),
        ingest_period: rng.gen_range(1..=3),
    };

    let roots = (0..rng.gen_range(0..=2))
        .map(|_| RootScreenDef {
            trigger: rng.gen_bool(0.6).then(|| word(rng, &alphabet)),
            pixels: (0..rng.gen_range(1..=3)).map(|_| (DeviceId(rng.gen_range(0..12)), word(rng, &alphabet))).collect(),
        })
        .collect();

    let run_ticks = rng.gen_range(1..=lim.max_ticks);
    let mut ids: Vec<u32> = (0..12).collect();
    ids.shuffle(rng);
    let mut devices = ids[..rng.gen_range(1..=lim.max_devices)]
        .iter()
        .map(|&id| {
            let rate = rng.gen_range(0.1..0.95);
            let mut schedule = BTreeMap::new();
            for t in (0..run_ticks).step_by(params.ingest_period as usize) {
                if rng.gen_bool(rate) {
                    schedule.insert(t, word(rng, &alphabet));
                }
            }
            DeviceSchedule { device_id: DeviceId(id), schedule }
        })
        .collect::<Vec<_>>();
    devices.sort_by_key(|d| d.device_id);

    let config = EngineConfig { params, roots };
    config.validate().expect("generated config is valid");
    ScenarioSpec { config, devices, run_ticks }
}
