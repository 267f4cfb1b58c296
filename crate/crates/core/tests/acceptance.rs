//! Acceptance run: one PASS/FAIL line per criterion. Built with
//! `harness = false`; exits non-zero when any criterion fails.

mod common;

use std::time::Instant;

use nfmimo::bench::{results_csv, run, Estimator, RunOptions, RunOutput, ScenarioConfig};
use nfmimo::channel_db::{deserialize_db, serialize_db, DatabaseInference, InferenceOptions};
use nfmimo::estimation::{add_noise, evm_db, MultisinkEstimator, SearchParams, SearchRegion};
use nfmimo::geometry::{Environment, Location};
use nfmimo::propagation::{channel_from_sources, enumerate_virtual_sources, Steering, Transmitter};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WAVELENGTH: f64 = 0.2;
const ROOM: f64 = 6.4;

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn bench(cfg: ScenarioConfig) -> RunOutput {
    run(&cfg, &RunOptions::default()).expect("bench run")
}

fn mean_of(out: &RunOutput, m: usize, input: f64, e: Estimator) -> f64 {
    out.table
        .rows
        .iter()
        .find(|r| r.antenna_count == m && r.input_evm_db == input && r.estimator == e)
        .unwrap_or_else(|| panic!("no row for M={m} {input} dB {e}"))
        .mean_output_evm_db
}

fn duality() -> Verdict {
    let worst = common::duality_worst(1000, 101);
    verdict(
        worst <= 1e-10,
        format!("1000 scenes, worst relative difference {worst:.2e} (tol 1e-10)"),
    )
}

fn noiseless_floor() -> Verdict {
    let cfg = |final_step_lambda| ScenarioConfig {
        antenna_spacings_lambda: vec![2.0],
        input_evm_sweep_db: vec![f64::NEG_INFINITY],
        estimators: vec![Estimator::Multisink],
        trials: 100,
        final_step_lambda,
        ..ScenarioConfig::default()
    };
    let p95 = |out: &RunOutput| {
        let mut v: Vec<f64> = out
            .trials
            .iter()
            .map(|t| t.outcomes[0].output_evm_db)
            .collect();
        v.sort_by(f64::total_cmp);
        v[94]
    };
    // dense-grid oracle at finalStep/8 for reference; the threshold below is frozen
    let dense = bench(cfg(1.0 / 512.0));
    let out = bench(cfg(1.0 / 64.0));
    let ok = out
        .trials
        .iter()
        .filter(|t| {
            let o = &t.outcomes[0];
            o.output_evm_db <= -25.0 && o.location_error_m.unwrap() <= WAVELENGTH / 32.0
        })
        .count();
    verdict(
        ok >= 95,
        format!(
            "M=64 noiseless: {ok}/100 drops with EVM <= -25 dB and error <= lambda/32 (need 95); p95 EVM {:.1} dB, dense-grid oracle p95 {:.1} dB",
            p95(&out),
            p95(&dense)
        ),
    )
}

fn multisink_advantage() -> Verdict {
    let out = bench(ScenarioConfig {
        antenna_spacings_lambda: vec![2.0],
        input_evm_sweep_db: vec![0.0],
        estimators: vec![Estimator::Multisource, Estimator::Multisink],
        trials: 200,
        ..ScenarioConfig::default()
    });
    let source = mean_of(&out, 64, 0.0, Estimator::Multisource);
    let sink = mean_of(&out, 64, 0.0, Estimator::Multisink);
    verdict(
        source - sink >= 2.0,
        format!("M=64, 0 dB, 200 trials: multisource {source:.2} dB, multisink {sink:.2} dB, advantage {:.2} dB (need 2)", source - sink),
    )
}

fn gain_grows_with_m() -> Verdict {
    let out = bench(ScenarioConfig {
        input_evm_sweep_db: vec![0.0],
        estimators: vec![Estimator::Multisource],
        trials: 200,
        ..ScenarioConfig::default()
    });
    let gain = |m| 0.0 - mean_of(&out, m, 0.0, Estimator::Multisource);
    let (g16, g64, g256) = (gain(16), gain(64), gain(256));
    verdict(
        g256 >= g64 && g64 >= g16 && g256 >= 6.0,
        format!("0 dB, 200 trials: gain M=16 {g16:.2} dB, M=64 {g64:.2} dB, M=256 {g256:.2} dB (need monotone and M=256 >= 6)"),
    )
}

fn high_quality_input() -> Verdict {
    let out = bench(ScenarioConfig {
        antenna_spacings_lambda: vec![2.0],
        input_evm_sweep_db: vec![-30.0],
        estimators: vec![Estimator::Antenna, Estimator::Multisource],
        trials: 20,
        ..ScenarioConfig::default()
    });
    let csv = results_csv(&out.table);
    let row = csv.lines().find(|l| l.contains(",-30,multisource,"));
    let gain = -30.0 - mean_of(&out, 64, -30.0, Estimator::Multisource);
    verdict(
        row.is_some(),
        format!(
            "M=64, -30 dB: row present = {}, observed multisource gain {gain:.2} dB",
            row.is_some()
        ),
    )
}

fn wall_inference() -> Verdict {
    let (line_err, coef_err) = common::wall_identity_worst(1000, 106);
    let env = Environment::rectangular_room(ROOM, ROOM, 1.0).unwrap();
    let array = nfmimo::propagation::AntennaArray::perimeter(ROOM, ROOM, 64).unwrap();
    let steering = Steering::paper(WAVELENGTH).unwrap();
    let room = SearchRegion::room(ROOM, ROOM);
    let inference = DatabaseInference::new(
        &array,
        WAVELENGTH,
        room,
        InferenceOptions::for_wavelength(WAVELENGTH),
    )
    .unwrap()
    .with_coarse_table()
    .unwrap();
    let margin = WAVELENGTH / 2.0;
    let mut good = 0;
    for trial in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1 + trial);
        let ue = Location::planar(
            rng.gen_range(margin..=ROOM - margin),
            rng.gen_range(margin..=ROOM - margin),
        );
        let tx = Transmitter::unit(ue);
        let truth = channel_from_sources(
            &tx,
            &enumerate_virtual_sources(&ue, &env, 1),
            &array,
            &env,
            &steering,
        )
        .unwrap();
        let h = add_noise(&truth, f64::NEG_INFINITY, 0).unwrap();
        let inferred = inference.infer(&h).unwrap();
        let estimate = MultisinkEstimator::new(
            &inferred.db,
            room,
            SearchParams::for_wavelength(WAVELENGTH),
            Default::default(),
        )
        .unwrap()
        .estimate(&h)
        .unwrap();
        if evm_db(&estimate.reconstructed, &truth).unwrap() <= -20.0 {
            good += 1;
        }
    }
    verdict(
        line_err <= 1e-9 && coef_err <= 1e-9 && good >= 45,
        format!(
            "1000 pairs: line {line_err:.1e} m, coefficient {coef_err:.1e} (tol 1e-9); end-to-end {good}/50 drops <= -20 dB (need 45)"
        ),
    )
}

fn visibility_oracles() -> Verdict {
    let crossing = common::crossing_disagreements(10_000, 107);
    let visibility = common::visibility_disagreements(10_000, 108);
    verdict(
        crossing.is_empty() && visibility.is_empty(),
        format!(
            "10^4 cases each: {} crossing and {} visibility disagreements",
            crossing.len(),
            visibility.len()
        ),
    )
}

fn determinism() -> Verdict {
    let cfg = ScenarioConfig {
        antenna_spacings_lambda: vec![8.0, 2.0],
        input_evm_sweep_db: vec![f64::NEG_INFINITY, -10.0, 0.0],
        trials: 6,
        ..ScenarioConfig::default()
    };
    let a = results_csv(&run(&cfg, &RunOptions { workers: Some(1) }).unwrap().table);
    let b = results_csv(&run(&cfg, &RunOptions { workers: Some(4) }).unwrap().table);
    let c = results_csv(&run(&cfg, &RunOptions { workers: Some(1) }).unwrap().table);
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut exact = 0;
    for _ in 0..1000 {
        let db = common::random_db(&mut rng);
        if deserialize_db(&serialize_db(&db)).is_ok_and(|back| common::db_bits_equal(&db, &back)) {
            exact += 1;
        }
    }
    let same = a == b && a == c;
    verdict(
        same && exact == 1000,
        format!("CSV identical across reruns and worker counts: {same}; {exact}/1000 databases bit-exact"),
    )
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("source/sink duality", duality),
        ("noiseless multisink floor", noiseless_floor),
        ("multisink advantage at 0 dB", multisink_advantage),
        ("multisource gain grows with M", gain_grows_with_m),
        ("-30 dB input row", high_quality_input),
        ("wall inference and end-to-end database", wall_inference),
        ("visibility oracles", visibility_oracles),
        ("determinism and persistence", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        println!(
            "{} criterion {} ({name}): {} [{:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
