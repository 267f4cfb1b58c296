use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nfmimo::bench::{self, RunOptions, ScenarioConfig, DEFAULT_CONFIG_TOML};
use nfmimo::channel_db::{
    build_db_from_environment, deserialize_db, serialize_db, ChannelDatabase,
};
use nfmimo::estimation::{
    evm_db, MultisinkEstimator, MultisourceEstimator, SearchParams, SearchRegion,
};
use nfmimo::geometry::Environment;
use nfmimo::propagation::ChannelVector;
use nfmimo::snapshot::{deserialize_snapshot, Snapshot};
use nfmimo::{Error, Result};

#[derive(Parser)]
#[command(
    name = "nfmimo",
    version,
    about = "Near-field MIMO channel estimation bench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo experiments
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Channel databases
    #[command(subcommand)]
    Db(DbCommand),
    /// Single-shot estimate from a snapshot file
    Estimate {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Sources extracted by the multisource method
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// Scenario config files
    #[command(subcommand)]
    Scenario(ScenarioCommand),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Run every scenario of a config and write CSV tables and SVG plots
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Overrides `trials`
        #[arg(long)]
        trials: Option<usize>,
        /// Overrides `master_seed`
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (results do not depend on it)
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Subcommand)]
enum DbCommand {
    /// Build the exact database of a config's room
    Build {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Antenna spacing in wavelengths; defaults to the config's first
        #[arg(long)]
        spacing_lambda: Option<f64>,
    },
    /// Print antenna count, sink counts and walls of a database
    Inspect { db: PathBuf },
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Write the default config
    Init {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Multisource,
    Multisink,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })
}

fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Config {
        field: "<root>".into(),
        message: e.to_string(),
    })?;
    ScenarioConfig::from_toml_str(&text)
}

fn bench_run(
    config: &Path,
    out: &Path,
    trials: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    cfg.validate()?;
    if workers == Some(0) {
        return Err(Error::Config {
            field: "workers".into(),
            message: "must be at least 1".into(),
        });
    }
    fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.into(),
        source: e,
    })?;
    let result = bench::run(&cfg, &RunOptions { workers })?;
    let csv = out.join("results.csv");
    bench::emit_csv(&result.table, &csv)?;
    bench::emit_trials_csv(&result.trials, &out.join("trials.csv"))?;
    let plots = bench::emit_plot(&result.table, out)?;
    for r in &result.table.rows {
        println!(
            "{:<16} in {:>6} dB  {:<12} mean {:>8.2} dB",
            r.scenario, r.input_evm_db, r.estimator, r.mean_output_evm_db
        );
    }
    println!("wrote {}", csv.display());
    for p in plots {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn db_build(config: &Path, out: &Path, spacing: Option<f64>) -> Result<()> {
    let cfg = load_config(config)?;
    let spacing = spacing.unwrap_or(cfg.antenna_spacings_lambda[0]);
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Config {
            field: "spacing_lambda".into(),
            message: format!("must be positive, got {spacing}"),
        });
    }
    let array = cfg.array(spacing)?;
    let env = Environment::rectangular_room(
        cfg.room_width_m,
        cfg.room_depth_m,
        cfg.wall_reflection_coefficient,
    )?;
    let db = build_db_from_environment(&array, &env, cfg.max_order, cfg.wavelength_m)?;
    write(out, &serialize_db(&db))?;
    println!(
        "wrote {} ({} antennas, {} sinks)",
        out.display(),
        db.antenna_count(),
        db.sink_counts().iter().sum::<usize>()
    );
    Ok(())
}

fn db_inspect(path: &Path) -> Result<()> {
    let db = deserialize_db(&read(path)?)?;
    println!("format version: {}", db.format_version());
    println!("wavelength: {} m", db.wavelength());
    println!("antennas (M): {}", db.antenna_count());
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for c in db.sink_counts() {
        *histogram.entry(c).or_default() += 1;
    }
    let counts: Vec<String> = histogram
        .iter()
        .map(|(sinks, antennas)| format!("{sinks} sinks on {antennas} antennas"))
        .collect();
    println!("sinks per antenna: {}", counts.join(", "));
    println!("total sinks: {}", db.sink_counts().iter().sum::<usize>());
    println!("walls: {}", db.walls().len());
    for (i, w) in db.walls().iter().enumerate() {
        println!(
            "  [{i}] {} -> {}  reflection {}",
            w.a, w.b, w.reflection_coefficient
        );
    }
    Ok(())
}

/// Room bounds: the walls' bounding box, or the array's when there are none.
fn room_of(db: &ChannelDatabase) -> Result<SearchRegion> {
    let points: Vec<_> = if db.walls().is_empty() {
        db.array_locations().to_vec()
    } else {
        db.walls().iter().flat_map(|w| [w.a, w.b]).collect()
    };
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in &points {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    SearchRegion::new(x0, x1, y0, y1)
}

fn check_snapshot(snap: &Snapshot, db: &ChannelDatabase) -> Result<()> {
    if snap.array_locations != db.array_locations() {
        return Err(Error::Schema {
            path: "arrayLocations".into(),
            message: "snapshot array differs from the database array".into(),
        });
    }
    if snap.wavelength != db.wavelength() {
        return Err(Error::Schema {
            path: "wavelength".into(),
            message: format!(
                "{} differs from the database's {}",
                snap.wavelength,
                db.wavelength()
            ),
        });
    }
    Ok(())
}

fn estimate(db_path: &Path, snapshot: &Path, method: Method, k: usize) -> Result<()> {
    let db = deserialize_db(&read(db_path)?)?;
    let snap = deserialize_snapshot(&read(snapshot)?)?;
    check_snapshot(&snap, &db)?;
    let h = snap.observation();
    let room = room_of(&db)?;
    let params = SearchParams::for_wavelength(db.wavelength());
    let options = Default::default();
    let reconstructed = match method {
        Method::Multisource => {
            if k == 0 {
                return Err(Error::Config {
                    field: "k".into(),
                    message: "at least one source is required".into(),
                });
            }
            let (w, d) = (room.x_max - room.x_min, room.y_max - room.y_min);
            let region = SearchRegion::new(
                room.x_min - w,
                room.x_max + w,
                room.y_min - d,
                room.y_max + d,
            )?;
            let array = db.array()?;
            let r = MultisourceEstimator::new(&array, db.wavelength(), region, params, options)?
                .estimate(&h, k)?;
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            for (i, s) in r.sources.iter().enumerate() {
                println!(
                    "source {i}: location {}  amplitude {:.6e} {:+.6e}j",
                    s.location, s.amplitude.re, s.amplitude.im
                );
            }
            r.reconstructed
        }
        Method::Multisink => {
            let r = MultisinkEstimator::new(&db, room, params, options)?.estimate(&h)?;
            println!("location: {}", r.user_location);
            println!(
                "amplitude: {:.6e} {:+.6e}j",
                r.user_amplitude.re, r.user_amplitude.im
            );
            r.reconstructed
        }
    };
    if let Some(truth) = snap.truth_channel() {
        println!("output EVM: {:.2} dB", evm_db(&reconstructed, &truth)?);
        println!(
            "input EVM: {:.2} dB",
            evm_db(
                &ChannelVector::new(snap.coefficients.clone(), snap.wavelength),
                &truth
            )?
        );
    }
    Ok(())
}

fn scenario_init(out: &Path) -> Result<()> {
    write(out, DEFAULT_CONFIG_TOML.as_bytes())?;
    println!("wrote {}", out.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bench(BenchCommand::Run {
            config,
            out,
            trials,
            seed,
            workers,
        }) => bench_run(&config, &out, trials, seed, workers),
        Command::Db(DbCommand::Build {
            config,
            out,
            spacing_lambda,
        }) => db_build(&config, &out, spacing_lambda),
        Command::Db(DbCommand::Inspect { db }) => db_inspect(&db),
        Command::Estimate {
            db,
            snapshot,
            method,
            k,
        } => estimate(&db, &snapshot, method, k),
        Command::Scenario(ScenarioCommand::Init { out }) => scenario_init(&out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
