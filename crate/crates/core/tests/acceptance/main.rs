//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.
//!
//! Set `MEMPIX_BLESS=1` to rewrite the golden files under `tests/golden/`.

mod gen;
mod reference;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use mempix_core::harness::{load_scenario, parse_scenario, run, Runner, ScenarioError, ScenarioSpec};
use mempix_core::{Datum, DeviceId, Engine, EventKind, OutcomeKind, RemovalCause, SeqNo};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gen::Limits;
use reference::Reference;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const TIME_BUDGET: Duration = Duration::from_secs(10);

fn main() {
    let criteria: [Criterion; 8] = [
        ("forgetting exactness", forgetting_exactness),
        ("reinforced longevity", reinforced_longevity),
        ("conservation fuzz", conservation_fuzz),
        ("referential integrity fuzz", referential_integrity_fuzz),
        ("oracle equivalence", oracle_equivalence),
        ("reflex end-to-end", reflex_end_to_end),
        ("determinism", determinism),
        ("bound rejection", bound_rejection),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(_) if took > TIME_BUDGET => Err(format!("took {took:?}, budget {TIME_BUDGET:?}")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {} ms)", i + 1, took.as_millis()),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn d(s: &str) -> Datum {
    Datum::try_from(s).unwrap()
}

fn pixel_intensities(runner: &Runner, seq: SeqNo) -> Option<Vec<i64>> {
    let screen = runner.engine().state().screen_pool().get(seq)?;
    Some(screen.pixels.iter().map(|p| p.intensity.milli()).collect())
}

/// Steps until screen `seq` is gone; returns the decay sweeps it lived
/// through (counting the one that removed it) and the per-sweep intensities.
fn sweeps_until_gone(engine: &mut Engine, seq: SeqNo, limit: u64) -> Result<(u64, Vec<i64>), String> {
    let mut sweeps = 0;
    let mut trace = Vec::new();
    for _ in 0..limit {
        let report = engine.tick(|_| Vec::new()).map_err(|e| e.to_string())?;
        sweeps += u64::from(report.swept);
        match engine.state().screen_pool().get(seq) {
            Some(s) => trace.push(s.pixels[0].intensity.milli()),
            None => {
                let removed = report.events.iter().any(
                    |e| matches!(e.kind, EventKind::ScreenRemoved { seq: s, cause: RemovalCause::Decay } if s == seq),
                );
                ensure!(removed, "screen {seq} vanished without a decay removal record");
                return Ok((sweeps, trace));
            }
        }
    }
    Err(format!("screen {seq} still present after {limit} ticks"))
}

fn forgetting_exactness() -> Outcome {
    let spec = parse_scenario(
        r#"
run_ticks = 2
[config]
i_known = 3
decay_period = 1
[[roots]]
trigger = "S"
pixels = [{ device = 9, datum = "ACT" }]
[[devices]]
id = 1
schedule = [{ tick = 1, datum = "S" }]
"#,
    )
    .map_err(|e| e.to_string())?;
    let mut runner = Runner::new(&spec).map_err(|e| e.to_string())?;
    runner.run_to_end().map_err(|e| e.to_string())?;

    let seq = SeqNo(1);
    ensure!(pixel_intensities(&runner, seq) == Some(vec![3000]), "stimulus pixel not stored at I_known");
    let table_before: Vec<_> = runner.engine().state().color_table().iter().collect();
    ensure!(
        table_before.iter().all(|e| e.screen_no == SeqNo(0)),
        "stimulus screen is referenced by the table: {table_before:?}"
    );

    let mut engine = Engine::restore(&runner.engine().snapshot()).map_err(|e| e.to_string())?;
    let (sweeps, trace) = sweeps_until_gone(&mut engine, seq, 50)?;
    ensure!(trace == [2000, 1000, 0], "intensity trace {trace:?}, expected [2000, 1000, 0]");
    ensure!(sweeps == 4, "removed at sweep {sweeps}, expected 4");
    ensure!(engine.current_tick() == 6, "removed during tick {}, expected 5", engine.current_tick() - 1);
    let table_after: Vec<_> = engine.state().color_table().iter().collect();
    ensure!(table_after == table_before, "table changed: {table_after:?}");
    Ok("3 -> 2 -> 1 -> 0 -> -1, removed at sweep 4 (tick 5)".into())
}

fn reinforced_longevity() -> Outcome {
    let spec = parse_scenario(
        r#"
run_ticks = 2
[config]
i_max = 5
r = 0.5
decay_period = 1
[[devices]]
id = 1
schedule = [{ tick = 1, datum = "N" }]
"#,
    )
    .map_err(|e| e.to_string())?;
    let mut runner = Runner::new(&spec).map_err(|e| e.to_string())?;
    runner.run_to_end().map_err(|e| e.to_string())?;
    let seq = SeqNo(0);
    ensure!(pixel_intensities(&runner, seq) == Some(vec![5000]), "first occurrence not stored at I_max");
    ensure!(runner.engine().state().color_table().references(seq), "first occurrence is not in the table");
    let blob = runner.engine().snapshot();

    let mut referenced = Engine::restore(&blob).map_err(|e| e.to_string())?;
    let (with_r, _) = sweeps_until_gone(&mut referenced, seq, 100)?;

    // Same state with the table entry dropped: no reinforcement applies.
    let mut doc: serde_json::Value =
        serde_json::from_str(blob.split_once('\n').unwrap().1).map_err(|e| e.to_string())?;
    doc["color_table"].as_array_mut().unwrap().retain(|e| e["screen"] != seq.0);
    let edited = format!("{}\n{}", mempix_core::engine::SNAPSHOT_HEADER, serde_json::to_string_pretty(&doc).unwrap());
    let mut unreferenced = Engine::restore(&edited).map_err(|e| e.to_string())?;
    let (without_r, _) = sweeps_until_gone(&mut unreferenced, seq, 100)?;

    ensure!(with_r == 12, "referenced screen lived {with_r} sweeps, expected 12");
    ensure!(without_r == 6, "unreferenced screen lived {without_r} sweeps, expected 6");
    Ok(format!("{with_r} sweeps referenced vs {without_r} unreferenced"))
}

fn fuzz_scenarios() -> Vec<ScenarioSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d656d706978);
    let lim = Limits { max_devices: 8, max_capacity: 64, max_ticks: 300 };
    (0..200).map(|_| gen::scenario(&mut rng, &lim)).collect()
}

/// Runs every fuzz scenario, calling `check` after every tick.
fn fuzz(mut check: impl FnMut(&Engine) -> Option<String>) -> Result<(usize, u64, Coverage), String> {
    let mut violations = 0;
    let mut ticks = 0;
    let mut cov = Coverage::default();
    for (i, spec) in fuzz_scenarios().iter().enumerate() {
        let mut runner = Runner::new(spec).map_err(|e| e.to_string())?;
        if let Some(v) = check(runner.engine()) {
            return Err(format!("scenario {i} at init: {v}"));
        }
        while !runner.is_finished() {
            let report = runner.step().map_err(|e| format!("scenario {i}: {e}"))?;
            ticks += 1;
            cov.add(&report.events);
            if let Some(v) = check(runner.engine()) {
                violations += 1;
                if violations == 1 {
                    eprintln!("scenario {i} tick {}: {v}", report.tick);
                }
            }
        }
    }
    Ok((violations, ticks, cov))
}

#[derive(Default)]
struct Coverage {
    evicted: usize,
    dropped: usize,
    actions: usize,
    associated: usize,
    forgotten: usize,
}

impl Coverage {
    fn add(&mut self, events: &[mempix_core::Event]) {
        for e in events {
            match &e.kind {
                EventKind::Evicted { .. } => self.evicted += 1,
                EventKind::DroppedInput { .. } => self.dropped += 1,
                EventKind::PixelRemoved { .. } => self.forgotten += 1,
                EventKind::Decision { outcome: OutcomeKind::Action, .. } => self.actions += 1,
                EventKind::Decision { outcome: OutcomeKind::Associated, .. } => self.associated += 1,
                _ => {}
            }
        }
    }
}

impl std::fmt::Display for Coverage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} evicted, {} dropped, {} forgotten, {} actions, {} associations",
            self.evicted, self.dropped, self.forgotten, self.actions, self.associated
        )
    }
}

fn conservation_fuzz() -> Outcome {
    let (violations, ticks, cov) = fuzz(|engine| {
        let st = engine.state();
        let dynamic: usize = st.screen_pool().iter().filter(|s| !s.is_root).map(|s| s.pixels.len()).sum();
        let free = st.pixel_pool().free_count();
        let cap = engine.params().capacity;
        (free + dynamic != cap).then(|| format!("free {free} + dynamic {dynamic} != C {cap}"))
    })?;
    ensure!(violations == 0, "{violations} violations over {ticks} ticks");
    Ok(format!("200 scenarios, {ticks} ticks, 0 violations; {cov}"))
}

fn referential_integrity_fuzz() -> Outcome {
    let (violations, ticks, _) = fuzz(|engine| {
        let st = engine.state();
        let live: BTreeSet<SeqNo> = st.screen_pool().iter().map(|s| s.seq).collect();
        st.color_table()
            .iter()
            .find(|e| !live.contains(&e.screen_no))
            .map(|e| format!("entry {} -> missing screen {}", e.datum.to_hex(), e.screen_no))
    })?;
    ensure!(violations == 0, "{violations} violations over {ticks} ticks");
    Ok(format!("200 scenarios, {ticks} ticks, 0 violations"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a11ce);
    let lim = Limits { max_devices: 4, max_capacity: 32, max_ticks: 100 };
    let mut ticks = 0;
    let mut cov = Coverage::default();
    for i in 0..50 {
        let spec = gen::scenario(&mut rng, &lim);
        let mut runner = Runner::new(&spec).map_err(|e| e.to_string())?;
        let mut oracle = Reference::new(&spec);
        ensure!(reference::observe(runner.engine()) == oracle.state, "scenario {i}: initial states differ");
        while !runner.is_finished() {
            let report = runner.step().map_err(|e| e.to_string())?;
            cov.add(&report.events);
            let expected = oracle.tick();
            let got: Vec<reference::Command> = report
                .commands
                .iter()
                .map(|c| (c.device_id.0, c.payload.as_bytes().to_vec(), c.source_seq.0))
                .collect();
            ensure!(got == expected, "scenario {i} tick {}: commands {got:?} != {expected:?}", report.tick);
            let state = reference::observe(runner.engine());
            ensure!(
                state == oracle.state,
                "scenario {i} tick {}: states diverge\nengine:    {state:?}\nreference: {:?}",
                report.tick,
                oracle.state
            );
            ticks += 1;
        }
    }
    Ok(format!("50 scenarios, {ticks} ticks, 0 divergences; {cov}"))
}

fn reflex_end_to_end() -> Outcome {
    let spec = load_scenario(workspace_root().join("scenarios/reflex.toml")).map_err(|e| e.to_string())?;
    let out = run(&spec).map_err(|e| e.to_string())?;
    let got = &out.actuators[&DeviceId(9)].received;
    ensure!(*got == vec![(2, d("BUZZ"))], "device 9 received {got:?}");
    let decided = out.events.iter().any(|e| {
        e.tick == 2
            && matches!(&e.kind, EventKind::Decision { outcome: OutcomeKind::Action, target: Some(SeqNo(0)), .. })
    });
    ensure!(decided, "no full match against the root screen at tick 2");
    Ok("device 9 received BUZZ at tick 2".into())
}

fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("MEMPIX_BLESS").is_some() {
        std::fs::write(&path, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    ensure!(expected == actual, "{name} differs from golden copy");
    Ok(())
}

fn determinism() -> Outcome {
    let mut specs = Vec::new();
    for name in ["reflex", "mixed"] {
        let spec = load_scenario(workspace_root().join(format!("scenarios/{name}.toml"))).map_err(|e| e.to_string())?;
        specs.push((name.to_string(), spec));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lim = Limits { max_devices: 8, max_capacity: 64, max_ticks: 300 };
    specs.extend((0..20).map(|i| (format!("random-{i}"), gen::scenario(&mut rng, &lim))));

    for (name, spec) in &specs {
        let a = run(spec).map_err(|e| e.to_string())?;
        let b = run(spec).map_err(|e| e.to_string())?;
        ensure!(a.log == b.log, "{name}: logs differ between runs");
        ensure!(a.snapshot == b.snapshot, "{name}: snapshots differ between runs");
        if !name.starts_with("random") {
            check_golden(&format!("{name}.log"), &a.log)?;
            check_golden(&format!("{name}.snap"), &a.snapshot)?;
        }
    }
    Ok(format!("{} scenarios replayed byte-identically; 2 match golden files", specs.len()))
}

fn bound_rejection() -> Outcome {
    let cases = [
        ("r = 0", "0 < r < 1"),
        ("r = 1", "0 < r < 1"),
        ("r = 0.0", "0 < r < 1"),
        ("r = 1.0", "0 < r < 1"),
        ("i_max = 5\ni_known = 5", "0 < I < I_max"),
        ("i_max = 5\ni_known = 7", "0 < I < I_max"),
        ("decay_period = 0", "w > 0"),
        ("ingest_period = 0", "p > 0"),
    ];
    for (config, bound) in cases {
        let text = format!("run_ticks = 4\n[config]\n{config}\n");
        match parse_scenario(&text) {
            Err(e @ ScenarioError::Validation { .. }) => {
                ensure!(e.to_string().contains(bound), "`{config}` rejected without naming {bound}: {e}")
            }
            other => return Err(format!("`{config}` not rejected: {other:?}")),
        }
    }
    Ok(format!("{} invalid configs rejected, each naming its bound", cases.len()))
}
