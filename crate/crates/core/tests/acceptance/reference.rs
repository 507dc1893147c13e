//! A deliberately naive second implementation of the memory model, used as
//! an oracle. Plain vectors, linear scans, one eviction at a time. It shares
//! nothing with the engine except the scenario input types.

use std::collections::BTreeMap;

use mempix_core::harness::ScenarioSpec;
use mempix_core::Engine;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pixel {
    pub color: u64,
    pub intensity: i64,
    pub device: u32,
    pub datum: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Screen {
    pub seq: u64,
    pub tick: u64,
    pub color: u64,
    pub datum: Vec<u8>,
    pub root: bool,
    pub pixels: Vec<Pixel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub color: u64,
    pub seq: u64,
    pub datum: Vec<u8>,
}

/// Everything observable between ticks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub tick: u64,
    pub next_seq: u64,
    pub next_color: u64,
    pub free: usize,
    pub screens: Vec<Screen>,
    pub table: Vec<Entry>,
}

/// (device, payload, source screen)
pub type Command = (u32, Vec<u8>, u64);

pub struct Reference {
    i_max: i64,
    i_known: i64,
    r: i64,
    w: u64,
    p: u64,
    devices: Vec<(u32, BTreeMap<u64, Vec<u8>>)>,
    pub state: State,
}

const FORGET: i64 = -1000;

impl Reference {
    pub fn new(spec: &ScenarioSpec) -> Self {
        let p = &spec.config.params;
        let mut devices: Vec<(u32, BTreeMap<u64, Vec<u8>>)> = spec
            .devices
            .iter()
            .map(|d| (d.device_id.0, d.schedule.iter().map(|(t, v)| (*t, v.as_bytes().to_vec())).collect()))
            .collect();
        devices.sort_by_key(|d| d.0);
        let mut me = Reference {
            i_max: p.i_max.milli(),
            i_known: p.i_known.milli(),
            r: p.r.milli(),
            w: p.decay_period,
            p: p.ingest_period,
            devices,
            state: State {
                tick: 0,
                next_seq: 0,
                next_color: 0,
                free: p.capacity,
                screens: Vec::new(),
                table: Vec::new(),
            },
        };
        for root in &spec.config.roots {
            let pairs: Vec<(u32, Vec<u8>)> = root.pixels.iter().map(|(d, v)| (d.0, v.as_bytes().to_vec())).collect();
            let pairs = stable_sort_by_device(pairs);
            let trigger = match &root.trigger {
                Some(t) => t.as_bytes().to_vec(),
                None => mode(pairs.iter().map(|(_, v)| v)),
            };
            let seq = me.state.next_seq;
            me.state.next_seq += 1;
            let (color, _) = me.colorize(&trigger, seq);
            let pixels =
                pairs.into_iter().map(|(device, datum)| Pixel { color, intensity: me.i_max, device, datum }).collect();
            me.state.screens.push(Screen { seq, tick: 0, color, datum: trigger, root: true, pixels });
        }
        me
    }

    fn colorize(&mut self, datum: &[u8], seq: u64) -> (u64, i64) {
        for e in &self.state.table {
            if e.datum == datum {
                return (e.color, self.i_known);
            }
        }
        let color = self.state.next_color;
        self.state.next_color += 1;
        self.state.table.push(Entry { color, seq, datum: datum.to_vec() });
        (color, self.i_max)
    }

    /// Runs one tick and returns the commands it issued.
    pub fn tick(&mut self) -> Vec<Command> {
        let t = self.state.tick;
        let mut commands = Vec::new();
        if t > 0 && t % self.w == 0 {
            self.sweep();
        }
        if t % self.p == 0 {
            let inputs: Vec<(u32, Vec<u8>)> =
                self.devices.iter().filter_map(|(id, s)| s.get(&t).map(|v| (*id, v.clone()))).collect();
            if !inputs.is_empty() {
                commands = self.ingest(inputs);
            }
        }
        self.state.tick += 1;
        commands
    }

    fn sweep(&mut self) {
        let mut i = 0;
        while i < self.state.screens.len() {
            if self.state.screens[i].root {
                i += 1;
                continue;
            }
            let seq = self.state.screens[i].seq;
            let referenced = self.state.table.iter().any(|e| e.seq == seq);
            let delta = if referenced { self.r - 1000 } else { -1000 };
            let before = self.state.screens[i].pixels.len();
            for p in &mut self.state.screens[i].pixels {
                p.intensity += delta;
            }
            self.state.screens[i].pixels.retain(|p| p.intensity > FORGET);
            self.state.free += before - self.state.screens[i].pixels.len();
            if self.state.screens[i].pixels.is_empty() {
                self.drop_screen(i);
            } else {
                i += 1;
            }
        }
    }

    fn drop_screen(&mut self, index: usize) {
        let gone = self.state.screens.remove(index);
        self.state.free += gone.pixels.len();
        self.state.table.retain(|e| e.seq != gone.seq);
    }

    /// Removes the single weakest dynamic pixel. False if there is none.
    fn evict_one(&mut self) -> bool {
        let mut best: Option<(i64, u64, usize, usize)> = None;
        for (si, s) in self.state.screens.iter().enumerate() {
            if s.root {
                continue;
            }
            for (pi, p) in s.pixels.iter().enumerate() {
                let key = (p.intensity, s.seq, pi, si);
                if best.map_or(true, |b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                    best = Some(key);
                }
            }
        }
        let Some((_, _, pi, si)) = best else {
            return false;
        };
        self.state.screens[si].pixels.remove(pi);
        self.state.free += 1;
        if self.state.screens[si].pixels.is_empty() {
            self.drop_screen(si);
        }
        true
    }

    fn ingest(&mut self, inputs: Vec<(u32, Vec<u8>)>) -> Vec<Command> {
        let wanted = inputs.len();
        while self.state.free < wanted && self.evict_one() {}
        let take = wanted.min(self.state.free);
        if take == 0 {
            return Vec::new();
        }
        self.state.free -= take;
        let seq = self.state.next_seq;
        self.state.next_seq += 1;
        let mut pixels = Vec::new();
        for (device, datum) in inputs.into_iter().take(take) {
            let (color, intensity) = self.colorize(&datum, seq);
            pixels.push(Pixel { color, intensity, device, datum });
        }
        let color = majority(&pixels);
        let datum = mode(pixels.iter().map(|p| &p.datum));
        self.state.screens.push(Screen { seq, tick: self.state.tick, color, datum, root: false, pixels });
        self.decide(seq)
    }

    fn screen(&self, seq: u64) -> &Screen {
        self.state.screens.iter().find(|s| s.seq == seq).expect("screen exists")
    }

    fn decide(&mut self, seq: u64) -> Vec<Command> {
        let screen = self.screen(seq).clone();
        // Colors by descending count, ties by ascending id.
        let mut colors: Vec<(u64, usize)> = Vec::new();
        for p in &screen.pixels {
            match colors.iter_mut().find(|(c, _)| *c == p.color) {
                Some(slot) => slot.1 += 1,
                None => colors.push((p.color, 1)),
            }
        }
        colors.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

        for (color, _) in colors {
            let datum = if color == screen.color {
                screen.datum.clone()
            } else {
                mode(screen.pixels.iter().filter(|p| p.color == color).map(|p| &p.datum))
            };
            if let Some(e) = self.state.table.iter().find(|e| e.color == color && e.datum == datum) {
                let target = e.seq;
                return self.screen(target).pixels.iter().map(|p| (p.device, p.datum.clone(), target)).collect();
            }
            if let Some(e) = self.state.table.iter().find(|e| e.color == color) {
                let from = e.seq;
                let copies: Vec<Pixel> =
                    self.screen(from).pixels.iter().filter(|p| p.color == color).cloned().collect();
                for px in copies {
                    if self.state.free == 0 {
                        break;
                    }
                    self.state.free -= 1;
                    let into = self.state.screens.iter_mut().find(|s| s.seq == seq).expect("new screen");
                    let mut at = into.pixels.len();
                    while at > 0 && into.pixels[at - 1].device > px.device {
                        at -= 1;
                    }
                    into.pixels.insert(at, px);
                }
                return Vec::new();
            }
        }
        Vec::new()
    }
}

fn stable_sort_by_device(mut v: Vec<(u32, Vec<u8>)>) -> Vec<(u32, Vec<u8>)> {
    // Insertion sort: stable by construction.
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1].0 > v[j].0 {
            v.swap(j - 1, j);
            j -= 1;
        }
    }
    v
}

fn majority(pixels: &[Pixel]) -> u64 {
    let mut best: Option<(u64, usize)> = None;
    for p in pixels {
        let n = pixels.iter().filter(|q| q.color == p.color).count();
        best = match best {
            Some((c, m)) if m > n || (m == n && c <= p.color) => Some((c, m)),
            _ => Some((p.color, n)),
        };
    }
    best.expect("non-empty").0
}

fn mode<'a>(data: impl Iterator<Item = &'a Vec<u8>>) -> Vec<u8> {
    let all: Vec<&Vec<u8>> = data.collect();
    let mut best: Option<(&Vec<u8>, usize)> = None;
    for d in &all {
        let n = all.iter().filter(|e| e == &d).count();
        best = match best {
            Some((b, m)) if m > n || (m == n && b <= *d) => Some((b, m)),
            _ => Some((*d, n)),
        };
    }
    best.expect("non-empty").0.clone()
}

/// The engine's state in the reference's terms.
pub fn observe(engine: &Engine) -> State {
    let st = engine.state();
    State {
        tick: st.tick(),
        next_seq: st.next_seq().0,
        next_color: st.next_color().0,
        free: st.pixel_pool().free_count(),
        screens: st
            .screen_pool()
            .iter()
            .map(|s| Screen {
                seq: s.seq.0,
                tick: s.tick,
                color: s.color.0,
                datum: s.datum.as_bytes().to_vec(),
                root: s.is_root,
                pixels: s
                    .pixels
                    .iter()
                    .map(|p| Pixel {
                        color: p.color.0,
                        intensity: p.intensity.milli(),
                        device: p.device_id.0,
                        datum: p.datum.as_bytes().to_vec(),
                    })
                    .collect(),
            })
            .collect(),
        table: st
            .color_table()
            .iter()
            .map(|e| Entry { color: e.color.0, seq: e.screen_no.0, datum: e.datum.as_bytes().to_vec() })
            .collect(),
    }
}
