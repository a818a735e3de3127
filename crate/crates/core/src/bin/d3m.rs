use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use d3m::geometry::CartesianPoint;
use d3m::scenario::{linear_to_db, watts_to_dbm, Scenario};
use d3m::sweep::{self, CurveKind, HeatmapField};
use d3m::system::{run_design, DesignBundle};
use d3m::{an, Error, Result};

/// Beamformer and artificial-noise design for two-transmitter directional modulation.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML). Built-in defaults when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides `monte_carlo.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Include the single co-located array baseline.
    #[arg(long)]
    sat: bool,
    /// Include the null-space-projection AN baseline.
    #[arg(long)]
    nsp: bool,
    /// Worker threads (all cores by default).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Design beams and AN, write a report and the weights.
    Design(Common),
    /// Evaluate metrics over the scenario grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Skip the grayscale heatmaps.
        #[arg(long)]
        no_heatmaps: bool,
    },
    /// Sweep one parameter: msg_power_vs_snr, an_power_vs_antennas or secrecy_vs_total_power.
    Curve {
        kind: CurveKind,
        #[command(flatten)]
        common: Common,
    },
    /// Received branch values of random symbols at chosen points.
    Constellation {
        #[command(flatten)]
        common: Common,
        /// Receiver location as `x,y` in meters; repeatable. Defaults to the first user.
        #[arg(long = "point", value_parser = parse_point)]
        points: Vec<CartesianPoint>,
        /// Overrides `monte_carlo.symbols`.
        #[arg(long)]
        symbols: Option<usize>,
        #[arg(long, default_value_t = 0)]
        stream: usize,
        /// Add thermal noise (AN is always present).
        #[arg(long)]
        noisy: bool,
    },
}

fn parse_point(s: &str) -> std::result::Result<CartesianPoint, String> {
    let (x, y) = s.split_once(',').ok_or("expected `x,y`")?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok(CartesianPoint::new(num(x)?, num(y)?))
}

impl Common {
    fn scenario(&self) -> Result<Scenario> {
        let mut s = match &self.scenario {
            Some(p) => Scenario::load(p)?,
            None => Scenario::default(),
        };
        if let Some(seed) = self.seed {
            s.monte_carlo.seed = seed;
        }
        s.baselines.sat |= self.sat;
        s.baselines.nsp |= self.nsp;
        s.validate()?;
        Ok(s)
    }

    fn setup(&self) -> Result<Scenario> {
        if let Some(n) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config {
                    key: "--threads".into(),
                    message: e.to_string(),
                })?;
        }
        fs::create_dir_all(&self.out)?;
        self.scenario()
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn design_report(s: &Scenario, b: &DesignBundle) -> Result<String> {
    let mut r = String::new();
    let p = &b.power;
    r += &format!(
        "message power: I {:.6e} W, Q {:.6e} W\nAN power: I {:.6e} W, Q {:.6e} W (scale {})\ntotal: {:.6e} W\n",
        p.message_i,
        p.message_q,
        p.an_i,
        p.an_q,
        p.an_scale,
        p.total()
    );
    for (k, sinr) in b.user_sinrs(s.noise_var())?.iter().enumerate() {
        let st = &b.system.streams[k];
        let resp = b.system.branch_response(st.user, k, s.noise_var())?;
        r += &format!(
            "user {k} at ({}, {}): SINR I {:.4} dB, Q {:.4} dB, message power {:.4} dBm, tau {:.6e} s\n",
            st.user.x,
            st.user.y,
            linear_to_db(sinr.in_phase),
            linear_to_db(sinr.quadrature),
            watts_to_dbm(resp.msg_i_on_i.powi(2)),
            st.sync.tau
        );
    }
    for (name, d, c) in [
        ("I", &b.system.an_i, &b.constraints_i),
        ("Q", &b.system.an_q, &b.constraints_q),
    ] {
        if let Some(c) = c {
            let a = an::audit(d, c);
            r += &format!(
                "AN {name}: {} jamming constraints, equality {:.2e}, inequality {:.2e}, min eigen {:.2e}, tightness {:.9}\n",
                c.jamming.len(),
                a.equality_violation,
                a.inequality_violation,
                a.min_eigen_ratio,
                a.tightness_ratio
            );
        }
    }
    if let Some(t) = &b.sat {
        r += &format!("SAT: message {:.6e} W, AN {:.6e} W\n", t.message_power(), t.an.an_power);
    }
    Ok(r)
}

fn write_beams(out: impl Write, b: &DesignBundle) -> Result<()> {
    let mut out = out;
    writeln!(out, "transmitter,user,element,re,im")?;
    for (k, st) in b.system.streams.iter().enumerate() {
        for (name, w) in [("I", &st.beam_i), ("Q", &st.beam_q)] {
            for (n, c) in w.weights.iter().enumerate() {
                writeln!(out, "{name},{k},{n},{:?},{:?}", c.re, c.im)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Design(c) => {
            let s = c.setup()?;
            let b = run_design(&s)?;
            let report = design_report(&s, &b)?;
            print!("{report}");
            let mut f = create(&c.out, "design.txt")?;
            f.write_all(report.as_bytes())?;
            writeln!(f, "\n# scenario\n{}", s.echo())?;
            f.flush()?;
            write_beams(create(&c.out, "beams.csv")?, &b)?;
        }
        Command::Sweep { common, no_heatmaps } => {
            let s = common.setup()?;
            let b = run_design(&s)?;
            let g = sweep::run_sweep(&s, &b)?;
            sweep::write_sweep_csv(create(&common.out, "sweep.csv")?, &s, &b, &g)?;
            if !no_heatmaps {
                for f in HeatmapField::ALL {
                    sweep::write_heatmap(&common.out, &g, f)?;
                }
            }
            println!(
                "{} grid points written to {}",
                g.rows.len(),
                common.out.join("sweep.csv").display()
            );
        }
        Command::Curve { kind, common } => {
            let s = common.setup()?;
            let t = sweep::run_curves(&s, kind)?;
            let name = format!("{}.csv", kind.name());
            t.write_csv(create(&common.out, &name)?, &s)?;
            println!("{} rows written to {}", t.rows.len(), common.out.join(name).display());
        }
        Command::Constellation {
            common,
            points,
            symbols,
            stream,
            noisy,
        } => {
            let s = common.setup()?;
            let b = run_design(&s)?;
            let points = if points.is_empty() {
                vec![s.users[0].point()]
            } else {
                points
            };
            let n = symbols.unwrap_or(s.monte_carlo.symbols);
            let rows = sweep::run_constellation(&s, &b, &points, stream, n, noisy)?;
            sweep::write_constellation_csv(create(&common.out, "constellation.csv")?, &s, &rows)?;
            println!(
                "{} symbols written to {}",
                rows.len(),
                common.out.join("constellation.csv").display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
