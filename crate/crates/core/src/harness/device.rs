use std::collections::BTreeMap;

use crate::decision::ActionCommand;
use crate::model::{Datum, DeviceId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ack;

/// A sense organ and actuator. Polled once per ingest tick in ascending id
/// order; `actuate` must not block.
pub trait PeripheralDevice {
    fn device_id(&self) -> DeviceId;
    fn poll(&mut self, tick: u64) -> Option<Datum>;
    fn actuate(&mut self, tick: u64, command: &ActionCommand) -> Ack;
}

/// Append-only record of commands delivered to one device.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordingActuator {
    pub device_id: DeviceId,
    pub received: Vec<(u64, Datum)>,
}

impl RecordingActuator {
    pub fn new(device_id: DeviceId) -> Self {
        RecordingActuator { device_id, received: Vec::new() }
    }

    pub fn record(&mut self, tick: u64, command: &ActionCommand) -> Ack {
        self.received.push((tick, command.payload.clone()));
        Ack
    }
}

/// Emits a fixed schedule and records what it is asked to do.
#[derive(Debug, Clone)]
pub struct ScriptedDevice {
    schedule: BTreeMap<u64, Datum>,
    actuator: RecordingActuator,
}

impl ScriptedDevice {
    pub fn new(device_id: DeviceId, schedule: BTreeMap<u64, Datum>) -> Self {
        ScriptedDevice { schedule, actuator: RecordingActuator::new(device_id) }
    }

    pub fn actuator(&self) -> &RecordingActuator {
        &self.actuator
    }
}

impl PeripheralDevice for ScriptedDevice {
    fn device_id(&self) -> DeviceId {
        self.actuator.device_id
    }

    fn poll(&mut self, tick: u64) -> Option<Datum> {
        self.schedule.get(&tick).cloned()
    }

    fn actuate(&mut self, tick: u64, command: &ActionCommand) -> Ack {
        self.actuator.record(tick, command)
    }
}
