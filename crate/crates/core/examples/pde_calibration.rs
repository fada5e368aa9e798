//! Scans the schedule constant `C` in `ε_N = (C / ln N)^{1/(p+2)}` for the heat
//! and transport equations on the torus with `y0 = sin(2πx)` at `t = 0.25`.
//!
//! For each candidate it prints the `L²` errors over `N ∈ {64, 128, 256, 512}`,
//! whether they decrease strictly and the final relative error.
//!
//! `cargo run --release -p mflab-core --example pde_calibration [heat|transport] [C ...]`

use std::f64::consts::PI;

use mflab_core::pde::{parse_pde, schedule_experiment};

fn main() -> mflab_core::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let which = args.first().map(String::as_str).unwrap_or("heat");
    let (text, default_cs): (&str, Vec<f64>) = match which {
        "transport" => ("dt y = -1 * dx^1 y", vec![1e-4, 3e-4, 1e-3, 3e-3, 1e-2]),
        _ => ("dt y = dx^2 y", vec![1e-6, 3e-6, 1e-5, 3e-5, 1e-4]),
    };
    let cs: Vec<f64> = if args.len() > 1 { args[1..].iter().map(|s| s.parse().expect("C")).collect() } else { default_cs };
    let spec = parse_pde(text)?;
    let y0 = |x: f64| (2.0 * PI * x).sin();
    for c in cs {
        let start = std::time::Instant::now();
        let table = schedule_experiment(&spec, c, &[64, 128, 256, 512], &y0, 0.25, 1e-3)?;
        let errs: Vec<String> = table.rows.iter().map(|r| format!("N={} eps={:.4} dt={:.2e} err={:.3e} rel={:.3e}", r.n, r.eps, r.dt, r.error, r.relative_error)).collect();
        println!("C={c:e}  decreasing={}  final_rel={:.4}  ({:.1}s)", table.strictly_decreasing(), table.final_relative_error().unwrap_or(f64::NAN), start.elapsed().as_secs_f64());
        for e in errs {
            println!("    {e}");
        }
    }
    Ok(())
}
