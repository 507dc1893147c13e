//! Scripted peripheral devices, scenario execution and log statistics.

mod device;
mod scenario;
mod stats;

pub use device::{Ack, PeripheralDevice, RecordingActuator, ScriptedDevice};
pub use scenario::{load_scenario, parse_scenario, DeviceSchedule, ScenarioError, ScenarioSpec};
pub use stats::{LogStats, ScreenLifetime};

use std::collections::BTreeMap;

use crate::engine::{DeviceInput, Engine, EngineError, TickReport};
use crate::event::{render_log, Event};
use crate::model::{Datum, DeviceId};

/// Drives an engine tick by tick against scripted devices.
pub struct Runner {
    engine: Engine,
    devices: Vec<ScriptedDevice>,
    /// Actuators for command targets that are not scripted devices.
    extra_actuators: BTreeMap<DeviceId, RecordingActuator>,
    /// Every delivered command, in delivery order.
    transcript: Vec<(u64, DeviceId, Datum)>,
    events: Vec<Event>,
    run_ticks: u64,
}

impl Runner {
    pub fn new(spec: &ScenarioSpec) -> Result<Self, ScenarioError> {
        Ok(Self::with_engine(Engine::new(&spec.config)?, spec))
    }

    /// Uses an already constructed engine, e.g. one with a custom colorizer.
    pub fn with_engine(engine: Engine, spec: &ScenarioSpec) -> Self {
        let devices = spec.devices.iter().map(|d| ScriptedDevice::new(d.device_id, d.schedule.clone())).collect();
        Runner {
            engine,
            devices,
            extra_actuators: BTreeMap::new(),
            transcript: Vec::new(),
            events: Vec::new(),
            run_ticks: spec.run_ticks,
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn is_finished(&self) -> bool {
        self.engine.current_tick() >= self.run_ticks
    }

    /// Runs one engine tick and delivers its commands.
    pub fn step(&mut self) -> Result<TickReport, EngineError> {
        let devices = &mut self.devices;
        let report = self.engine.tick(|tick| {
            devices
                .iter_mut()
                .filter_map(|d| d.poll(tick).map(|datum| DeviceInput { device_id: d.device_id(), datum }))
                .collect()
        })?;
        for cmd in &report.commands {
            match self.devices.iter_mut().find(|d| d.device_id() == cmd.device_id) {
                Some(d) => d.actuate(report.tick, cmd),
                None => self
                    .extra_actuators
                    .entry(cmd.device_id)
                    .or_insert_with(|| RecordingActuator::new(cmd.device_id))
                    .record(report.tick, cmd),
            };
            self.transcript.push((report.tick, cmd.device_id, cmd.payload.clone()));
        }
        self.events.extend(report.events.iter().cloned());
        Ok(report)
    }

    pub fn run_to_end(&mut self) -> Result<(), EngineError> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(())
    }

    /// Per-device actuator records, including devices that only received commands.
    pub fn actuators(&self) -> BTreeMap<DeviceId, RecordingActuator> {
        let mut out: BTreeMap<DeviceId, RecordingActuator> =
            self.devices.iter().map(|d| (d.device_id(), d.actuator().clone())).collect();
        out.extend(self.extra_actuators.iter().map(|(k, v)| (*k, v.clone())));
        out
    }

    pub fn transcript(&self) -> &[(u64, DeviceId, Datum)] {
        &self.transcript
    }

    pub fn finish(self) -> RunOutput {
        RunOutput {
            snapshot: self.engine.snapshot(),
            log: render_log(&self.events),
            actuators: self.actuators(),
            transcript: self.transcript,
            events: self.events,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub snapshot: String,
    /// Rendered event log, one record per line.
    pub log: String,
    pub events: Vec<Event>,
    pub actuators: BTreeMap<DeviceId, RecordingActuator>,
    pub transcript: Vec<(u64, DeviceId, Datum)>,
}

/// Runs a scenario from tick 0 to `run_ticks - 1`.
pub fn run(spec: &ScenarioSpec) -> Result<RunOutput, RunError> {
    let mut runner = Runner::new(spec)?;
    runner.run_to_end()?;
    Ok(runner.finish())
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}
