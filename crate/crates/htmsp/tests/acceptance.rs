//! Acceptance gate. Prints one `criterion N: PASS|FAIL` line per criterion
//! and exits non-zero if any criterion that ran failed.
//!
//! Criterion 4 needs the ORL face database (40 directories of 10 PGM
//! files). Point `HTMSP_ORL_DIR` at it, or unpack it to `data/orl` in the
//! workspace. Without the data the criterion is reported as FAIL (not run);
//! set `HTMSP_ACCEPTANCE_STRICT=1` to make that fail the process too.

mod common;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use htmsp::bench::{self, EvalOptions, PreparedDataset, SplitPlan, SweepReport};
use htmsp::config::RunConfig;
use htmsp::{cli, store};
use htmsp_core::{
    block_weights, classify, compute_neighborhoods, compute_overlap, connect_synapses,
    encode_image, encode_stages, inhibit_mean, inhibit_percentile, inhibit_region,
    init_connections_rule_based, recent_activity, update_boost, update_time_average, BoostState,
    ConnectionMatrix, GrayImage, InhibitMode, InitMode, Metric, NeighborhoodMap, OverlapVector,
    PermanenceMatrix, PotentialPool, Receptor, Sdr, SpConfig, SpatialPooler, TilingSpec, Topology,
    WeightRule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    /// Criterion could not be evaluated at all.
    not_run: bool,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            not_run: false,
            detail: detail.into(),
        }
    }
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 8] = [
        (1, oracle_equivalence),
        (2, rule_examples),
        (3, determinism),
        (4, orl_directional),
        (5, sweep_order_statistics),
        (6, resubstitution),
        (7, imaging_invariants),
        (8, store_round_trip),
    ];
    let strict = std::env::var_os("HTMSP_ACCEPTANCE_STRICT").is_some_and(|v| v == "1");
    let mut failed = false;
    for (n, run) in criteria {
        let out = run();
        let status = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {n}: {status} {}", out.detail);
        if !out.pass && (!out.not_run || strict) {
            failed = true;
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

// ---------------------------------------------------------------------------
// 1. Brute-force oracles

/// Column grid with at most 16 columns.
fn random_grid(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let rows = rng.gen_range(1..=4);
    let cols = rng.gen_range(1..=16 / rows);
    (rows, cols)
}

/// Neighbors by integer squared distance: `d2 < k`.
fn oracle_neighbors(dims: (usize, usize), k: i64) -> Vec<Vec<usize>> {
    let n = dims.0 * dims.1;
    (0..n)
        .map(|i| {
            let (ri, ci) = ((i / dims.1) as i64, (i % dims.1) as i64);
            (0..n)
                .filter(|&j| {
                    let (rj, cj) = ((j / dims.1) as i64, (j % dims.1) as i64);
                    j != i && (ri - rj).pow(2) + (ci - cj).pow(2) < k
                })
                .collect()
        })
        .collect()
}

fn oracle_percentile(o: &[i64], nbrs: &[Vec<usize>], p: i64, theta: i64) -> Vec<bool> {
    (0..o.len())
        .map(|i| {
            if o[i] < theta {
                return false;
            }
            let mut v: Vec<i64> = nbrs[i].iter().map(|&j| o[j]).collect();
            if v.is_empty() {
                return true;
            }
            v.sort_unstable();
            let n = v.len() as i64;
            let rank = ((100 - p) * n + 99) / 100;
            o[i] >= v[(rank.clamp(1, n) - 1) as usize]
        })
        .collect()
}

fn oracle_mean(o: &[i64], nbrs: &[Vec<usize>]) -> Vec<bool> {
    (0..o.len())
        .map(|i| {
            if nbrs[i].is_empty() {
                o[i] > 0
            } else {
                o[i] * nbrs[i].len() as i64 >= nbrs[i].iter().map(|&j| o[j]).sum::<i64>()
            }
        })
        .collect()
}

fn oracle_region(a: &[i64]) -> Vec<bool> {
    let total: i64 = a.iter().sum();
    a.iter().map(|&x| x * a.len() as i64 > total).collect()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut mismatches = [0usize; 5];
    const TRIALS: usize = 1000;
    for _ in 0..TRIALS {
        let dims = random_grid(&mut rng);
        let n = dims.0 * dims.1;
        let topo = Topology::new((dims.0 * 2, dims.1 * 2), dims).unwrap();
        let k = rng.gen_range(1..=20i64);
        let nbr = compute_neighborhoods(&topo, (k as f64 - 0.5).sqrt()).unwrap();
        let expected = oracle_neighbors(dims, k);
        if (0..n).any(|i| {
            nbr.of(i)
                .iter()
                .map(|&j| j as usize)
                .ne(expected[i].iter().copied())
        }) {
            mismatches[4] += 1;
        }

        // Overlaps in eighths so exact integer comparisons apply.
        let a: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=24)).collect();
        let o = OverlapVector(a.iter().map(|&x| x as f64 / 8.0).collect());
        let p = rng.gen_range(1..=100i64);
        let theta = rng.gen_range(0..=3i64);
        let got = inhibit_percentile(&o, &nbr, dims, p as f64 / 100.0, theta as f64 / 8.0).unwrap();
        if got.bits() != oracle_percentile(&a, &expected, p, theta) {
            mismatches[0] += 1;
        }
        let got = inhibit_mean(&o, &nbr, dims).unwrap();
        if got.bits() != oracle_mean(&a, &expected) {
            mismatches[1] += 1;
        }

        let inputs = rng.gen_range(1..=40);
        let density = rng.gen_range(0.0..1.0);
        let dense: Vec<Vec<bool>> = (0..n)
            .map(|_| (0..inputs).map(|_| rng.gen_bool(density)).collect())
            .collect();
        let z: Vec<bool> = (0..inputs).map(|_| rng.gen_bool(0.5)).collect();
        let beta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..4.0)).collect();
        let conn = ConnectionMatrix::from_rows(
            inputs,
            dense
                .iter()
                .map(|row| (0..inputs as u32).filter(|&j| row[j as usize]).collect())
                .collect(),
        )
        .unwrap();
        let boost = BoostState::from_parts(beta.clone(), vec![0.0; n]).unwrap();
        let got = compute_overlap(&conn, &z, &boost).unwrap();
        let want: Vec<f64> = (0..n)
            .map(|i| {
                let mut count = 0u32;
                for j in 0..inputs {
                    if dense[i][j] && z[j] {
                        count += 1;
                    }
                }
                beta[i] * count as f64
            })
            .collect();
        if got
            .0
            .iter()
            .zip(&want)
            .any(|(g, w)| g.to_bits() != w.to_bits())
        {
            mismatches[2] += 1;
        }

        let blocks = rng.gen_range(1..=16);
        let s: Vec<i64> = (0..blocks).map(|_| rng.gen_range(0..=12)).collect();
        let scalars: Vec<f64> = s.iter().map(|&x| x as f64 / 256.0).collect();
        if inhibit_region(&scalars) != oracle_region(&s) {
            mismatches[3] += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches.iter().all(|&m| m == 0) && elapsed < Duration::from_secs(10);
    Outcome::check(
        pass,
        format!(
            "({TRIALS} instances; mismatches percentile={} mean={} overlap={} region={} neighborhoods={}; {:.2}s)",
            mismatches[0],
            mismatches[1],
            mismatches[2],
            mismatches[3],
            mismatches[4],
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------------------
// 2. Hand-derived examples of each update rule

fn rule_examples() -> Outcome {
    let mut failures = Vec::new();
    let mut expect = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    let dims1 = |n: usize| (1, n);

    // Connection threshold.
    let s = PermanenceMatrix::from_rows(2, vec![vec![(0, 0.3), (1, 0.9)]]).unwrap();
    expect(
        "connect elementwise",
        connect_synapses(&s, 0.5).connected(0) == [1],
    );
    let s = PermanenceMatrix::from_rows(1, vec![vec![(0, 0.5)]]).unwrap();
    expect(
        "connect inclusive",
        connect_synapses(&s, 0.5).connected(0) == [0],
    );
    let s = PermanenceMatrix::from_rows(3, vec![vec![(0, 0.0), (1, 0.2), (2, 1.0)]]).unwrap();
    expect(
        "connect zero threshold",
        connect_synapses(&s, 0.0).count_connected() == 3,
    );

    // Overlap.
    let id = ConnectionMatrix::from_rows(2, vec![vec![0], vec![1]]).unwrap();
    expect(
        "overlap identity",
        compute_overlap(&id, &[true, true], &BoostState::new(2))
            .unwrap()
            .0
            == [1.0, 1.0],
    );
    expect(
        "overlap zero input",
        compute_overlap(&id, &[false, false], &BoostState::new(2))
            .unwrap()
            .is_all_zero(),
    );
    let b = ConnectionMatrix::from_rows(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
    let boost = BoostState::from_parts(vec![2.0, 1.0], vec![0.0, 0.0]).unwrap();
    expect(
        "overlap boosted",
        compute_overlap(&b, &[true, false, true], &boost).unwrap().0 == [2.0, 1.0],
    );

    // Percentile inhibition.
    let o = OverlapVector(vec![1.0, 2.0, 3.0, 4.0]);
    let got = inhibit_percentile(
        &o,
        &NeighborhoodMap::fully_connected(4),
        dims1(4),
        0.25,
        0.0,
    )
    .unwrap();
    expect(
        "percentile nearest rank",
        got.bits() == [false, false, false, true],
    );

    // Time average.
    let alpha = Sdr::from_bits(dims1(3), vec![true, false, true]).unwrap();
    expect(
        "time average window 1",
        update_time_average(&[0.3, 0.6, 0.9], &alpha, 1).unwrap() == [1.0, 0.0, 1.0],
    );
    let one = Sdr::from_bits(dims1(1), vec![true]).unwrap();
    expect(
        "time average substitution",
        update_time_average(&[0.5], &one, 2).unwrap() == [0.75],
    );
    let window = 100;
    let mut abar = vec![0.0];
    for _ in 0..100 * window {
        abar = update_time_average(&abar, &one, window).unwrap();
    }
    expect("time average convergence", (abar[0] - 1.0).abs() <= 1e-6);

    // Recent activity.
    let pair = NeighborhoodMap::fully_connected(2);
    expect(
        "recent activity uniform",
        recent_activity(&[0.4, 0.4], &pair).unwrap() == [0.4, 0.4],
    );
    expect(
        "recent activity neighbor index",
        recent_activity(&[0.0, 1.0], &pair).unwrap() == [1.0, 0.0],
    );
    let chain = NeighborhoodMap::from_lists(vec![vec![1], vec![0, 2], vec![1]]).unwrap();
    expect(
        "recent activity single neighbor",
        recent_activity(&[0.2, 0.7, 0.1], &chain).unwrap()[0] == 0.7,
    );

    // Boost.
    let a = [0.1, 0.5, 0.9];
    expect(
        "boost uniform activity",
        update_boost(&a, &a, 1.0).unwrap() == [1.0; 3],
    );
    expect(
        "boost zero rate",
        update_boost(&a, &[0.3, 0.2, 0.0], 0.0).unwrap() == [1.0; 3],
    );
    let beta = update_boost(&[0.75], &[0.25], 1.0).unwrap()[0];
    expect("boost value", (beta - 0.606_530_66).abs() <= 1e-6);

    // Rule-based connections.
    let pool = PotentialPool::from_lists(3, vec![vec![0, 1, 2]]).unwrap();
    let r = init_connections_rule_based(&pool, &[1.0, 2.0, 9.0]).unwrap();
    expect("rule init hand mean", r.connections.connected(0) == [2]);
    let r = init_connections_rule_based(&pool, &[0.4; 3]).unwrap();
    expect("rule init constant", r.connections.count_connected() == 0);
    let pool = PotentialPool::from_lists(2, vec![vec![0, 1]]).unwrap();
    let r = init_connections_rule_based(&pool, &[3.0, 5.0]).unwrap();
    expect("rule init two inputs", r.connections.connected(0) == [1]);

    // Mean inhibition.
    let full3 = NeighborhoodMap::fully_connected(3);
    let got = inhibit_mean(&OverlapVector(vec![1.0, 2.0, 3.0]), &full3, dims1(3)).unwrap();
    expect(
        "mean inhibition hand means",
        got.bits() == [false, true, true],
    );
    let got = inhibit_mean(&OverlapVector(vec![2.0; 3]), &full3, dims1(3)).unwrap();
    expect("mean inhibition equal", got.active_count() == 3);
    let cfg = SpConfig::builder()
        .init_mode(InitMode::RuleBased)
        .inhibit_mode(InhibitMode::Mean)
        .build()
        .unwrap();
    let mut sp = SpatialPooler::new(Topology::new((8, 8), (4, 4)).unwrap(), cfg).unwrap();
    let out = sp.compute(&[false; 64], false).unwrap();
    expect(
        "mean inhibition zero overlaps flagged",
        out.active_count() == 16 && sp.degenerate_overlaps() == 1,
    );

    let detail = if failures.is_empty() {
        "(connection, overlap, percentile, time average, recent activity, boost, rule init, mean inhibition)".to_string()
    } else {
        format!("(failed: {})", failures.join(", "))
    };
    Outcome::check(failures.is_empty(), detail)
}

// ---------------------------------------------------------------------------
// Shared fixtures

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn small_config() -> RunConfig {
    RunConfig::parse("block_h = 4\nblock_w = 4\nresize_h = 0\nresize_w = 0\ntrials = 4\n").unwrap()
}

fn prepared(root: &Path, cfg: &RunConfig) -> PreparedDataset {
    let ds = bench::load_dataset(root).unwrap();
    bench::prepare(&ds, cfg.resize).unwrap()
}

/// Sweeps over a few synthetic datasets, shared by criteria 3 and 5.
fn synthetic_sweeps() -> Vec<SweepReport> {
    let cfg = small_config();
    let mut reports = Vec::new();
    for seed in [1u64, 2, 3] {
        let dir = tmp();
        common::noisy_prototypes(dir.path(), 4, 6, seed);
        let data = prepared(dir.path(), &cfg);
        let plan = bench::split(&data.dataset, seed);
        let report = bench::sweep(
            &data,
            &plan,
            &cfg,
            &[(1, 1), (2, 2), (4, 4), (8, 8)],
            &[InitMode::RuleBased, InitMode::RandomWeight],
            cfg.trials,
            EvalOptions::default(),
        )
        .unwrap();
        reports.push(report);
    }
    reports
}

// ---------------------------------------------------------------------------
// 3. Determinism

fn determinism() -> Outcome {
    let data = tmp();
    common::noisy_prototypes(data.path(), 5, 4, 9);
    let cfg = small_config();
    let sizes = [(2, 2), (3, 3), (4, 4)];
    let modes = [InitMode::RuleBased, InitMode::RandomWeight];
    let out = tmp();
    let mut csvs = Vec::new();
    for (k, jobs) in [1usize, 4].into_iter().enumerate() {
        let dir = out.path().join(format!("run{k}"));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .unwrap();
        pool.install(|| {
            cli::cmd_sweep(
                data.path(),
                &cfg,
                &sizes,
                &modes,
                EvalOptions::default(),
                &dir,
            )
        })
        .unwrap();
        csvs.push((
            std::fs::read(dir.join("sweep_trials.csv")).unwrap(),
            std::fs::read(dir.join("sweep_summary.csv")).unwrap(),
        ));
    }
    let identical = csvs[0] == csvs[1];

    let reports = synthetic_sweeps();
    let rows = reports.iter().flat_map(|r| &r.rows);
    let rule_draws: u64 = rows
        .clone()
        .filter(|r| r.mode == InitMode::RuleBased)
        .map(|r| r.rng_draws)
        .sum();
    let random_counted = rows
        .filter(|r| r.mode == InitMode::RandomWeight)
        .all(|r| r.rng_draws > 0);
    Outcome::check(
        identical && rule_draws == 0 && random_counted,
        format!(
            "(sweep CSVs identical across runs and worker counts: {identical}; rule-based draws {rule_draws}; random-weight draws counted: {random_counted})"
        ),
    )
}

// ---------------------------------------------------------------------------
// 4. ORL directional reproduction

fn orl_root() -> PathBuf {
    std::env::var_os("HTMSP_ORL_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/orl"))
}

struct Directional {
    rule_mean: f64,
    rule_max: f64,
    random_mean: f64,
    random_max: f64,
    elapsed: Duration,
}

/// Blocks {4, 8, 16} px by regions {2..8} blocks at 64x64. Means pool every
/// row of a mode across the whole grid.
fn directional(data: &PreparedDataset, plan: &SplitPlan, base: &RunConfig) -> Directional {
    let start = Instant::now();
    let regions: Vec<(usize, usize)> = (2..=8).map(|r| (r, r)).collect();
    let mut rule = Vec::new();
    let mut random = Vec::new();
    for block in [4, 8, 16] {
        let cfg = base.with_block((block, block)).unwrap();
        let report = bench::sweep(
            data,
            plan,
            &cfg,
            &regions,
            &[InitMode::RuleBased, InitMode::RandomWeight],
            cfg.trials,
            EvalOptions::default(),
        )
        .unwrap();
        for row in &report.rows {
            match row.mode {
                InitMode::RuleBased => rule.push(row.accuracy()),
                InitMode::RandomWeight => random.push(row.accuracy()),
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Directional {
        rule_mean: mean(&rule),
        rule_max: max(&rule),
        random_mean: mean(&random),
        random_max: max(&random),
        elapsed: start.elapsed(),
    }
}

fn orl_directional() -> Outcome {
    let base = RunConfig::parse("resize_h = 64\nresize_w = 64\ntrials = 10\n").unwrap();
    let root = orl_root();
    let ds = match bench::load_dataset(&root) {
        Ok(ds) => ds,
        Err(e) => {
            let smoke = synthetic_directional(&base);
            return Outcome {
                pass: false,
                not_run: true,
                detail: format!(
                    "(not run: ORL images unavailable: {e}; set HTMSP_ORL_DIR) [{smoke}]"
                ),
            };
        }
    };
    let data = bench::prepare(&ds, base.resize).unwrap();
    let plan = bench::split(&ds, base.sp.seed());
    let d = directional(&data, &plan, &base);
    let gap = d.rule_mean - d.random_mean;
    let pass = ds.classes.len() == 40
        && ds.len() == 400
        && gap >= 0.20
        && d.rule_max >= 0.75
        && d.elapsed <= Duration::from_secs(600);
    Outcome::check(
        pass,
        format!(
            "(rule mean {:.4} max {:.4}; random mean {:.4} max {:.4}; gap {:.1}pp; {:.1}s)",
            d.rule_mean,
            d.rule_max,
            d.random_mean,
            d.random_max,
            gap * 100.0,
            d.elapsed.as_secs_f64()
        ),
    )
}

/// Same grid on a synthetic 40 x 10 set; says nothing about faces, only that
/// the harness runs end to end within the time budget.
fn synthetic_directional(base: &RunConfig) -> String {
    let dir = tmp();
    common::noisy_prototypes(dir.path(), 40, 10, 40);
    let data = prepared(dir.path(), base);
    let plan = bench::split(&data.dataset, base.sp.seed());
    let d = directional(&data, &plan, base);
    format!(
        "synthetic 40x10 stand-in: rule mean {:.4} max {:.4}, random mean {:.4} max {:.4}, {:.1}s",
        d.rule_mean,
        d.rule_max,
        d.random_mean,
        d.random_max,
        d.elapsed.as_secs_f64()
    )
}

// ---------------------------------------------------------------------------
// 5. Sweep order statistics

fn sweep_order_statistics() -> Outcome {
    let mut rule_rows = 0;
    let mut random_rows = 0;
    let mut bad = 0;
    for report in synthetic_sweeps() {
        for s in report.summary() {
            match s.mode {
                InitMode::RuleBased => {
                    rule_rows += 1;
                    bad += (s.mean != s.max || s.trials != 1) as usize;
                }
                InitMode::RandomWeight => {
                    random_rows += 1;
                    bad += (s.mean > s.max) as usize;
                }
            }
        }
    }
    Outcome::check(
        bad == 0,
        format!("({rule_rows} rule-based and {random_rows} random-weight summary rows; violations {bad})"),
    )
}

// ---------------------------------------------------------------------------
// 6. Resubstitution

fn resubstitution() -> Outcome {
    let mut runs = 0;
    let mut worst: f64 = 1.0;
    let datasets: Vec<(tempfile::TempDir, RunConfig)> = {
        let mut v = Vec::new();
        let d = tmp();
        common::squares(d.path(), 4);
        v.push((d, small_config()));
        for seed in [4u64, 5, 6] {
            let d = tmp();
            common::noisy_prototypes(d.path(), 6, 5, seed);
            v.push((d, small_config()));
        }
        let d = tmp();
        common::noisy_prototypes(d.path(), 3, 3, 8);
        v.push((d, RunConfig::default()));
        v
    };
    for (dir, cfg) in &datasets {
        let data = prepared(dir.path(), cfg);
        let plan = SplitPlan::resubstitution(&data.dataset);
        for mode in [InitMode::RuleBased, InitMode::RandomWeight] {
            // A 1x1 region never beats its own mean, so every image encodes
            // to zeros there and all templates tie.
            for region in [(2, 2), (3, 2), (4, 4)] {
                let run = cfg.with_init_mode(mode).with_region(region).unwrap();
                let out = bench::evaluate(&data, &plan, &run, EvalOptions::default()).unwrap();
                worst = worst.min(out.accuracy);
                runs += 1;
            }
        }
    }
    Outcome::check(
        worst == 1.0,
        format!(
            "({runs} runs over {} datasets; lowest accuracy {worst:.4})",
            datasets.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 7. Imaging invariants

/// Pixels on a 1/256 grid so sums, shifts and scalings stay exact.
fn grid_pixels(rng: &mut ChaCha8Rng, n: usize, levels: u32) -> Vec<f64> {
    (0..n)
        .map(|_| rng.gen_range(0..levels) as f64 / 256.0)
        .collect()
}

fn imaging_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    const TRIALS: usize = 200;
    let mut failures = [0usize; 3];
    for _ in 0..TRIALS {
        let b = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let r = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let nb = [1, 3, 5][rng.gen_range(0..3)];
        let tiling = TilingSpec::new(b, r, nb).unwrap();

        // Constant image.
        let (h, w) = (rng.gen_range(1..=20), rng.gen_range(1..=20));
        let c = rng.gen_range(0.0..=1.0);
        let img = GrayImage::filled(h, w, c).unwrap();
        if encode_image(&img, &tiling).unwrap().count_ones() != 0 {
            failures[0] += 1;
        }

        // Per-region contrast: region block scalars times an odd integer
        // over a power of two, and a whole image with each region's pixels
        // scaled by its own power of two.
        let blocks = r.0 * r.1;
        let scalars = grid_pixels(&mut rng, blocks, 64);
        let c = rng.gen_range(0..32) as f64 * 2.0 + 1.0;
        let c = c / f64::powi(2.0, rng.gen_range(0..8));
        let scaled: Vec<f64> = scalars.iter().map(|s| s * c).collect();
        let mut ok = inhibit_region(&scalars) == inhibit_region(&scaled);
        let grid = (rng.gen_range(1..=2), rng.gen_range(1..=2));
        let (h, w) = (grid.0 * r.0 * b.0, grid.1 * r.1 * b.1);
        let px = grid_pixels(&mut rng, h * w, 256);
        let shifts: Vec<i32> = (0..grid.0 * grid.1).map(|_| rng.gen_range(0..4)).collect();
        let scaled_px: Vec<f64> = (0..h * w)
            .map(|p| {
                let region = (p / w) / (r.0 * b.0) * grid.1 + (p % w) / (r.1 * b.1);
                px[p] / f64::powi(2.0, shifts[region])
            })
            .collect();
        let a = encode_image(&GrayImage::new(h, w, px.clone()).unwrap(), &tiling).unwrap();
        let z = encode_image(&GrayImage::new(h, w, scaled_px).unwrap(), &tiling).unwrap();
        ok &= a == z;
        if !ok {
            failures[1] += 1;
        }

        // Per-block brightness shift leaves the weights of every block alone.
        let block = grid_pixels(&mut rng, b.0 * b.1, 128);
        let shift = rng.gen_range(0..128) as f64 / 256.0;
        let shifted: Vec<f64> = block.iter().map(|v| v + shift).collect();
        let mut ok = block_weights(&block, b, nb, WeightRule::Inclusive)
            == block_weights(&shifted, b, nb, WeightRule::Inclusive);
        let px: Vec<f64> = px.iter().map(|v| v / 2.0).collect();
        let (gr, gc) = (h / b.0, w / b.1);
        let target = rng.gen_range(0..gr * gc);
        let bumped: Vec<f64> = (0..h * w)
            .map(|p| {
                let k = (p / w) / b.0 * gc + (p % w) / b.1;
                if k == target {
                    px[p] + shift
                } else {
                    px[p]
                }
            })
            .collect();
        let receptor = Receptor::RuleBased(WeightRule::Inclusive);
        let before = encode_stages(&GrayImage::new(h, w, px).unwrap(), &tiling, &receptor).unwrap();
        let after =
            encode_stages(&GrayImage::new(h, w, bumped).unwrap(), &tiling, &receptor).unwrap();
        ok &= before.weights == after.weights;
        if !ok {
            failures[2] += 1;
        }
    }
    Outcome::check(
        failures.iter().all(|&f| f == 0),
        format!(
            "({TRIALS} trials; failures constant={} contrast={} brightness={})",
            failures[0], failures[1], failures[2]
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. Store round trip

fn store_round_trip() -> Outcome {
    let data = tmp();
    common::squares(data.path(), 5);
    let mut mismatches = 0;
    let mut queries = 0;
    for mode in [InitMode::RuleBased, InitMode::RandomWeight] {
        let cfg = small_config().with_init_mode(mode);
        let prepared = prepared(data.path(), &cfg);
        let encoded = bench::encode_dataset(&prepared, &cfg, WeightRule::Inclusive).unwrap();
        let plan = bench::split(&prepared.dataset, 1);
        let original = bench::build_store(&prepared.dataset, &encoded, &plan, &cfg).unwrap();
        let dir = tmp();
        store::save(&original, dir.path()).unwrap();
        let loaded = store::load(dir.path()).unwrap();
        if loaded != original {
            mismatches += 1;
        }
        for q in encoded.encodings.iter().flatten() {
            for metric in [Metric::Hamming, Metric::Cosine] {
                let a = classify(q, &original, metric).unwrap();
                let b = classify(q, &loaded, metric).unwrap();
                let same_bits = a.per_class.len() == b.per_class.len()
                    && a.per_class
                        .iter()
                        .zip(&b.per_class)
                        .all(|(x, y)| x.0 == y.0 && x.1.to_bits() == y.1.to_bits());
                if a.label != b.label || a.score.to_bits() != b.score.to_bits() || !same_bits {
                    mismatches += 1;
                }
                queries += 1;
            }
        }
    }
    Outcome::check(
        mismatches == 0,
        format!("(10-image set, both modes, {queries} classifications; mismatches {mismatches})"),
    )
}
