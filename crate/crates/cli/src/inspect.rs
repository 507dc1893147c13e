use std::fmt::Write;

use mempix_core::Engine;

/// Plain-text dump of an engine's parameters, pools, table and screens.
pub fn render(engine: &Engine) -> String {
    let p = engine.params();
    let st = engine.state();
    let mut out = String::new();
    let w = &mut out;

    let _ = writeln!(w, "tick {}  next seq {}  next color {}", st.tick(), st.next_seq(), st.next_color());
    let _ = writeln!(
        w,
        "config  C={} I_max={} I={} r={} w={} p={}",
        p.capacity, p.i_max, p.i_known, p.r, p.decay_period, p.ingest_period
    );
    let pool = st.pixel_pool();
    let _ =
        writeln!(w, "pixel pool  {} free of {} ({} in use)", pool.free_count(), pool.capacity(), pool.outstanding());

    let table = st.color_table();
    let _ = writeln!(w, "\ncolor table ({} entries)", table.len());
    for e in table.iter() {
        let _ = writeln!(w, "  {:<6} -> {:<6} {}", e.color.to_string(), e.screen_no.to_string(), e.datum);
    }

    let screens = st.screen_pool();
    let _ = writeln!(w, "\nscreens ({})", screens.len());
    for s in screens.iter() {
        let _ = writeln!(
            w,
            "  {:<6} {:<5} tick {:<6} header {} {}",
            s.seq.to_string(),
            if s.is_root { "root" } else { "" },
            s.tick,
            s.color,
            s.datum
        );
        for px in &s.pixels {
            let _ = writeln!(
                w,
                "           {:<6} {:<5} {:>9}  {}",
                px.device_id.to_string(),
                px.color.to_string(),
                px.intensity.to_string(),
                px.datum
            );
        }
    }
    out
}
