//! Spatial sweep of the reference scenario: CSV plus grayscale heatmaps.
//!
//! `cargo run --release --example grid_sweep -- [out_dir]`

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use d3m::scenario::Scenario;
use d3m::sweep::{run_sweep, write_heatmap, write_sweep_csv, HeatmapField};
use d3m::system::run_design;

fn main() -> d3m::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("d3m-sweep"), PathBuf::from);
    fs::create_dir_all(&out)?;
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/reference.toml");
    let s = Scenario::load(path)?;
    let bundle = run_design(&s)?;
    let grid = run_sweep(&s, &bundle)?;

    write_sweep_csv(BufWriter::new(File::create(out.join("sweep.csv"))?), &s, &bundle, &grid)?;
    for f in HeatmapField::ALL {
        write_heatmap(&out, &grid, f)?;
    }

    let user = grid.nearest(s.users[0].point());
    let zone = grid.rows.iter().filter(|r| r.zone.all).count();
    let mut sers: Vec<f64> = grid.rows.iter().map(|r| r.d3m.ser).collect();
    sers.sort_by(f64::total_cmp);
    let mean_secrecy = grid.rows.iter().map(|r| r.d3m.secrecy_rate).sum::<f64>() / grid.rows.len() as f64;
    println!(
        "user cell SER {:.2e}; secrecy against a grid eavesdropper {mean_secrecy:.3} bits on average",
        user.d3m.ser
    );
    println!("{zone} of {} cells inside the effective zone", grid.rows.len());
    println!("median SER {:.3}", sers[sers.len() / 2]);
    if let Some(sat) = &user.sat {
        println!("single-array baseline at the user: SER {:.2e}", sat.ser);
    }
    println!("written to {}", out.display());
    Ok(())
}
