//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! The experiment criteria run the full pipeline on the bundled MNIST subset
//! (8000 training / 2000 test digits), so load is exercised up to 8000 stored
//! patterns.

use std::path::{Path, PathBuf};
use std::process::Command;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use willshaw::{BitVector, DesCode, Dictionary, NxhConfig, WillshawMemory};
use willshaw_experiments::commands::{self, tagged};
use willshaw_experiments::output::{find, series, Row};
use willshaw_experiments::pipeline::{memory_file, DICTIONARY_FILE, MANIFEST_FILE};
use willshaw_experiments::{Context, Encoded, ExperimentConfig};

const PROPERTY_CASES: usize = 1000;
const PROPERTY_MAX_DIM: usize = 64;
const NXH_CYCLES: usize = 10_000;
const T3_PEAK_FLOOR: f64 = 0.75;
const COMPLETION_P_DEL: f64 = 0.75;
/// Standard errors of the difference tolerated when checking a non-decreasing trend.
const TREND_SIGMAS: f64 = 2.0;
const MIN_CONVERGENCE: f64 = 0.80;
const MIN_RECLASSIFY: f64 = 0.90;
const SEED: u64 = 20230706;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn report(results: &mut Vec<bool>, id: &str, name: &str, o: Outcome) {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("{tag} [{id}] {name}: {}", o.detail);
    results.push(o.pass);
}

fn info(name: &str, detail: impl AsRef<str>) {
    println!("INFO {name}: {}", detail.as_ref());
}

fn bv(bits: &[u8]) -> BitVector {
    BitVector::from_01(bits)
}

fn matrix(mem: &WillshawMemory) -> Vec<String> {
    (0..mem.input_len())
        .map(|i| (0..mem.output_len()).map(|j| if mem.get(i, j) { '1' } else { '0' }).collect())
        .collect()
}

fn auto(patterns: &[BitVector]) -> WillshawMemory {
    let mut m = WillshawMemory::auto(patterns[0].len());
    for p in patterns {
        m.store_auto(p).unwrap();
    }
    m
}

fn worked_example() -> Outcome {
    let x1 = DesCode::concat(vec![("a", bv(&[0, 1])), ("b", bv(&[0, 0, 1, 1]))]).unwrap();
    let x2 = DesCode::concat(vec![("a", bv(&[1, 0])), ("b", bv(&[1, 1, 0, 0]))]).unwrap();
    let w_a = auto(&[x1.extract("a").unwrap(), x2.extract("a").unwrap()]);
    let w_b = auto(&[x1.extract("b").unwrap(), x2.extract("b").unwrap()]);
    let w_ab = auto(&[x1.bits().clone(), x2.bits().clone()]);
    let mut failures = Vec::new();
    if matrix(&w_a) != ["10", "01"] {
        failures.push("W_a");
    }
    if matrix(&w_b) != ["1100", "1100", "0011", "0011"] {
        failures.push("W_b");
    }
    if matrix(&w_ab) != ["101100", "010011", "101100", "101100", "010011", "010011"] {
        failures.push("W_ab");
    }
    let cue1 = x1.mask("b").unwrap();
    let cue2 = x2.mask("a").unwrap();
    if w_ab.retrieve(cue1.bits()).unwrap().output != *x1.bits() {
        failures.push("retrieval of x1");
    }
    if w_ab.retrieve(cue2.bits()).unwrap().output != *x2.bits() {
        failures.push("retrieval of x2");
    }
    if failures.is_empty() {
        outcome(true, "W_a, W_b, W_ab and both completions exact")
    } else {
        outcome(false, format!("mismatch in {}", failures.join(", ")))
    }
}

fn random_bits(rng: &mut ChaCha8Rng, len: usize, p: f64) -> Vec<bool> {
    (0..len).map(|_| rng.random_bool(p)).collect()
}

/// Dense integer oracle of the outer-product rule and the dendritic sums.
fn dense_potentials(pairs: &[(Vec<bool>, Vec<bool>)], m: usize, n: usize, cue: &[bool]) -> Vec<u32> {
    let mut w = vec![vec![0u32; n]; m];
    for (x, y) in pairs {
        for i in 0..m {
            for j in 0..n {
                if x[i] && y[j] {
                    w[i][j] = 1;
                }
            }
        }
    }
    (0..n).map(|j| (0..m).map(|i| w[i][j] * u32::from(cue[i])).sum()).collect()
}

fn property_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut violations: Vec<String> = Vec::new();
    let mut check = |ok: bool, what: &str, case: usize| {
        if !ok && violations.len() < 5 {
            violations.push(format!("{what} (case {case})"));
        }
    };
    for case in 0..PROPERTY_CASES {
        let m = rng.random_range(1..=PROPERTY_MAX_DIM);
        let n = rng.random_range(1..=PROPERTY_MAX_DIM);
        let p = rng.random_range(0.02..0.4);
        let count = rng.random_range(0..12);
        let pairs: Vec<(Vec<bool>, Vec<bool>)> = (0..count)
            .map(|_| (random_bits(&mut rng, m, p), random_bits(&mut rng, n, p)))
            .collect();
        let codes: Vec<(BitVector, BitVector)> = pairs
            .iter()
            .map(|(x, y)| (BitVector::from_bools(x), BitVector::from_bools(y)))
            .collect();

        let mut mem = WillshawMemory::new(m, n);
        for (x, y) in &codes {
            let before = mem.clone();
            mem.store(x, y).unwrap();
            check(mem.covers(&before), "monotonicity", case);
            let once = mem.clone();
            mem.store(x, y).unwrap();
            check(mem.count_ones() == once.count_ones() && once.covers(&mem), "idempotent restorage", case);
        }

        let mut shuffled = codes.clone();
        shuffled.shuffle(&mut rng);
        let mut other = WillshawMemory::new(m, n);
        for (x, y) in &shuffled {
            other.store(x, y).unwrap();
        }
        check(other.covers(&mem) && mem.covers(&other), "order independence", case);

        let cue = random_bits(&mut rng, m, 0.3);
        let got = mem.potentials(&BitVector::from_bools(&cue)).unwrap();
        check(got == dense_potentials(&pairs, m, n, &cue), "brute-force potentials", case);

        let side = m;
        let patterns: Vec<BitVector> = (0..count)
            .map(|_| BitVector::from_bools(&random_bits(&mut rng, side, p)))
            .collect();
        let mut am = WillshawMemory::auto(side);
        for x in &patterns {
            am.store_auto(x).unwrap();
        }
        check(am.is_symmetric(), "symmetry", case);
        for x in patterns.iter().filter(|x| !x.is_zero()) {
            check(x.is_subset_of(&am.retrieve(x).unwrap().output), "superset retrieval", case);
        }
    }
    if violations.is_empty() {
        outcome(
            true,
            format!("{PROPERTY_CASES} random instances up to {PROPERTY_MAX_DIM}x{PROPERTY_MAX_DIM}, no violations"),
        )
    } else {
        outcome(false, violations.join("; "))
    }
}

fn nxh_round_trip() -> Outcome {
    let cfg = NxhConfig {
        classes: 10,
        bits_per_class: 500,
        p_class: 0.5,
        p_rest: 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let failures = (0..NXH_CYCLES)
        .filter(|i| {
            let label = i % cfg.classes;
            let code = cfg.encode(label, &mut rng).unwrap();
            cfg.decode(&code).unwrap().label != label
        })
        .count();
    outcome(failures == 0, format!("{failures} failures in {NXH_CYCLES} cycles"))
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-subset")
}

fn write_config(dir: &Path) -> PathBuf {
    let d = data_dir();
    let text = format!(
        "seed = {SEED}\n\
         data.train_images = {}\n\
         data.train_labels = {}\n\
         data.test_images = {}\n\
         data.test_labels = {}\n\
         noise.p_del = 0.25,0.5,{COMPLETION_P_DEL}\n",
        d.join("train-images-idx3-ubyte.gz").display(),
        d.join("train-labels-idx1-ubyte.gz").display(),
        d.join("t10k-images-idx3-ubyte.gz").display(),
        d.join("t10k-labels-idx1-ubyte.gz").display(),
    );
    let path = dir.join("acceptance.conf");
    std::fs::write(&path, text).unwrap();
    path
}

fn fmt_series(s: &[(usize, f64)]) -> String {
    s.iter().map(|(c, v)| format!("{c}:{v:.4}")).collect::<Vec<_>>().join(" ")
}

fn t1_perfect(rows: &[Row]) -> Outcome {
    let t1 = series(rows, "t1_accuracy");
    let last = t1.last().map_or(0, |p| p.0);
    let pass = !t1.is_empty() && t1.iter().all(|&(_, a)| a == 1.0);
    outcome(pass, format!("through {last} stored patterns: {}", fmt_series(&t1)))
}

fn t3_peak(rows: &[Row]) -> Outcome {
    let t3 = series(rows, "t3_accuracy");
    let Some((k, &(at, peak))) = t3
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
    else {
        return outcome(false, "no measurements");
    };
    let rises = k > 0 && t3[0].1 < peak;
    let declines = k + 1 < t3.len() && t3.last().unwrap().1 < peak;
    let pass = rises && declines && peak >= T3_PEAK_FLOOR;
    outcome(
        pass,
        format!(
            "peak {peak:.4} at {at} (floor {T3_PEAK_FLOOR}), rises: {rises}, declines: {declines}; {}",
            fmt_series(&t3)
        ),
    )
}

fn completion(rows: &[Row], first: usize) -> Outcome {
    let p = COMPLETION_P_DEL;
    let cue_lost = find(rows, first, &tagged("cue_mse_lost", p)).unwrap_or(f64::NAN);
    let mem_lost = find(rows, first, &tagged("mse_lost", p)).unwrap_or(f64::NAN);
    let extra = series(rows, &tagged("mse_extra", p));
    let se = series(rows, &tagged("mse_extra_se", p));
    let drops: Vec<String> = extra
        .windows(2)
        .zip(se.windows(2))
        .filter(|(e, s)| {
            let tol = TREND_SIGMAS * (s[0].1.powi(2) + s[1].1.powi(2)).sqrt();
            e[1].1 < e[0].1 - tol
        })
        .map(|(e, _)| format!("{}->{}", e[0].0, e[1].0))
        .collect();
    let pass = mem_lost < cue_lost && drops.is_empty() && !extra.is_empty();
    outcome(
        pass,
        format!(
            "at {first}: mse_lost {mem_lost:.4} after memory vs {cue_lost:.4} noisy cue; \
             mse_extra {} (significant drops: {})",
            fmt_series(&extra),
            if drops.is_empty() { "none".into() } else { drops.join(", ") }
        ),
    )
}

fn generation(r: &commands::GenerateReport) -> Outcome {
    let n = r.attempts.len();
    let conv: Vec<_> = r.attempts.iter().filter(|a| a.converged()).collect();
    let (lo, hi) = r.interval;
    let inside = conv
        .iter()
        .all(|a| a.visual_bits.is_some_and(|b| lo < b && b < hi));
    let conv_rate = conv.len() as f64 / n.max(1) as f64;
    let recl = conv.iter().filter(|a| a.reclassified == Some(a.label)).count();
    let recl_rate = recl as f64 / conv.len().max(1) as f64;
    let pass = conv_rate >= MIN_CONVERGENCE && inside && recl_rate >= MIN_RECLASSIFY && !conv.is_empty();
    outcome(
        pass,
        format!(
            "interval ({lo}, {hi}) at {}; converged {}/{n} ({conv_rate:.2}, min {MIN_CONVERGENCE}); \
             all inside interval: {inside}; re-classified {recl}/{} ({recl_rate:.2}, min {MIN_RECLASSIFY})",
            r.checkpoint,
            conv.len(),
            conv.len()
        ),
    )
}

fn same_bytes(a: &Path, b: &Path) -> bool {
    match (std::fs::read(a), std::fs::read(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn formats_and_determinism(lib_dir: &Path, cli_dir: &Path, checkpoints: &[usize], cli_ok: bool) -> Outcome {
    let mut problems = Vec::new();
    if !cli_ok {
        problems.push("CLI run failed".to_owned());
    }
    let mut files: Vec<String> = checkpoints.iter().map(|&c| memory_file(c)).collect();
    files.extend(
        [
            DICTIONARY_FILE,
            commands::FINAL_MEMORY_FILE,
            MANIFEST_FILE,
            "generate.csv",
            "generation_trace.csv",
        ]
        .map(String::from),
    );
    for f in &files {
        if !same_bytes(&lib_dir.join(f), &cli_dir.join(f)) {
            problems.push(format!("{f} differs between runs"));
        }
    }
    for c in checkpoints {
        let p = lib_dir.join(memory_file(*c));
        let mem = WillshawMemory::load(&p).unwrap();
        let mut buf = Vec::new();
        mem.write_to(&mut buf).unwrap();
        if buf != std::fs::read(&p).unwrap() || mem.stored_count() != *c as u64 {
            problems.push(format!("{} does not round-trip", memory_file(*c)));
        }
    }
    let p = lib_dir.join(DICTIONARY_FILE);
    let dict = Dictionary::load(&p).unwrap();
    let mut buf = Vec::new();
    dict.write_to(&mut buf).unwrap();
    if buf != std::fs::read(&p).unwrap() {
        problems.push("dictionary does not round-trip".into());
    }
    if problems.is_empty() {
        outcome(
            true,
            format!("{} artifacts byte-identical across library and CLI runs; WAM1/WDC1 round-trip exactly", files.len()),
        )
    } else {
        outcome(false, problems.join("; "))
    }
}

fn main() {
    let mut results = Vec::new();
    report(&mut results, "1", "worked 6x6 example", worked_example());
    report(&mut results, "2", "memory property suite", property_suite());
    report(&mut results, "3", "noisy X-hot round trip", nxh_round_trip());

    let tmp = tempfile::tempdir().unwrap();
    let config_path = write_config(tmp.path());
    let cfg = ExperimentConfig::load(&config_path).unwrap();
    let lib_dir = tmp.path().join("library-run");
    let ctx = Context::new(cfg, &lib_dir).unwrap();
    let train = commands::train(&ctx).unwrap();
    let enc = Encoded::new(&ctx, ctx.load_dictionary().unwrap()).unwrap();

    let classify = commands::classify(&ctx, &enc).unwrap();
    report(&mut results, "4", "T1 description auto-association", t1_perfect(&classify));
    report(&mut results, "5", "T3 unseen-pattern classification", t3_peak(&classify));
    let t2 = series(&classify, "t2_accuracy");
    info("T2 stored-pattern classification", fmt_series(&t2));

    let complete = commands::complete(&ctx, &enc).unwrap();
    report(&mut results, "6", "completion under bit deletion", completion(&complete, train.checkpoints[0]));

    let retrieve = commands::retrieve(&ctx, &enc).unwrap();
    info("retrieved/cue popcount ratio", fmt_series(&series(&retrieve, "bits_ratio")));
    info("retrieval MSE", fmt_series(&series(&retrieve, "retrieved_mse")));
    let superset = series(&retrieve, "superset_fraction");
    info(
        "retrieved popcount >= cue popcount",
        format!("superset fraction {}", fmt_series(&superset)),
    );

    let generated = commands::generate(&ctx, &enc).unwrap();
    report(&mut results, "7", "iterative generation", generation(&generated));
    let min_blob = generated.blob_bits.iter().copied().min().unwrap_or(0);
    info(
        "blob size",
        format!(
            "smallest class blob {min_blob} visual bits vs stored mean {:.1} (x{:.1})",
            generated.stored_visual_mean,
            min_blob as f64 / generated.stored_visual_mean
        ),
    );

    let cli_dir = tmp.path().join("cli-run");
    let bin = env!("CARGO_BIN_EXE_willshaw");
    let cli_ok = ["train", "generate"].iter().all(|cmd| {
        Command::new(bin)
            .args([cmd, "--config"])
            .arg(&config_path)
            .arg("--out")
            .arg(&cli_dir)
            .output()
            .is_ok_and(|o| o.status.success())
    });
    report(
        &mut results,
        "8",
        "format golden files and determinism",
        formats_and_determinism(&lib_dir, &cli_dir, &train.checkpoints, cli_ok),
    );

    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
