//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use clap::Parser;
use dadc_core::centers::NOISE;
use dadc_core::density::density_order;
use dadc_core::ensemble::{crossover_degree, density_similarity_of_means, fusion_degree, self_ensemble};
use dadc_core::evaluation::{accuracy_on, clustering_accuracy};
use dadc_core::synth::presets;
use dadc_core::{
    compute_profile, inject_noise, load_csv, run_cfsfdp, run_dadc, BaselineParams, DadcParams, Dataset,
    DistanceMatrix, DistanceSource, NeighborIndex, NoiseSpec,
};
use dadc_cli::{execute, Cli, RunConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/worked_example.csv");
const DENSITY_TOL: f64 = 0.005;
const EXACT_TOL: f64 = 1e-9;
const PROPERTY_CASES: u32 = 1000;
const SEEDS: u64 = 20;
const REQUIRED: usize = 18;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn timed(label: &str, budget: Option<Duration>, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = f();
    let took = start.elapsed();
    let in_budget = budget.is_none_or(|b| took <= b);
    let pass = v.pass && in_budget;
    let budget_note = match budget {
        Some(b) if !in_budget => format!(", over budget {:.0?}", b),
        _ => String::new(),
    };
    println!(
        "[{}] {label} ({:.2?}{budget_note}): {}",
        if pass { "PASS" } else { "FAIL" },
        took,
        v.detail
    );
    pass
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn worked_example() -> Verdict {
    // Matrix injection of the five quoted neighbor distances.
    let quoted = [8.05, 8.05, 8.70, 8.79, 12.58];
    let mut rows = vec![vec![0.0; 6]; 6];
    for (j, &d) in quoted.iter().enumerate() {
        rows[0][j + 1] = d;
        rows[j + 1][0] = d;
    }
    for i in 1..6 {
        for j in 1..6 {
            if i != j {
                rows[i][j] = 20.0;
            }
        }
    }
    let m = DistanceMatrix::from_rows(rows).expect("valid matrix");
    let (_, p) = compute_profile(&DistanceSource::Matrix(&m), 5).expect("profile");
    let inject_ok = near(p.kdist[0], 9.23, 0.01) && near(p.kden[0], 0.11, 0.005);
    let mut notes = vec![format!("kdist {:.4} kden {:.4}", p.kdist[0], p.kden[0])];

    let ds: Dataset<f64> = load_csv(fs::File::open(FIXTURE).expect("fixture file")).expect("fixture csv");
    let matrix = DistanceMatrix::from_dataset(&ds);
    let mut fixture_ok = true;
    for (mode, src) in [
        ("matrix", DistanceSource::Matrix(&matrix)),
        ("metric", DistanceSource::Metric(&ds)),
    ] {
        let (_, p) = compute_profile(&src, 5).expect("profile");
        let id = |one_based: usize| one_based - 1;
        let targets = [(7, 0.16), (6, 0.15), (8, 0.15), (3, 0.12), (12, 0.09), (13, 0.12)];
        let mut misses = Vec::new();
        for &(i, t) in &targets {
            let v = p.domain_density[id(i)];
            if !near(v, t, DENSITY_TOL) {
                misses.push(format!("d{i}={v:.4} want {t}"));
            }
        }
        let d12 = matrix.get(id(1), id(2));
        let d732 = matrix.get(id(7), id(32));
        let delta_ok = p.delta_witness[id(1)] == Some(id(2))
            && near(p.delta[id(1)], d12, EXACT_TOL)
            && near(d12, 7.52, EXACT_TOL)
            && p.delta_witness[id(7)].is_none()
            && near(p.delta[id(7)], d732, EXACT_TOL)
            && near(d732, 103.92, EXACT_TOL);
        if !delta_ok {
            misses.push(format!("delta1={:.4} delta7={:.4}", p.delta[id(1)], p.delta[id(7)]));
        }
        fixture_ok &= misses.is_empty();
        notes.push(if misses.is_empty() {
            format!("{mode}: all targets")
        } else {
            format!("{mode}: {}", misses.join(" "))
        });
    }
    verdict(inject_ok && fixture_ok, notes.join("; "))
}

fn vdd_recovery() -> Verdict {
    let (mut dadc_hits, mut base_hits) = (0, 0);
    for seed in 0..SEEDS {
        let ds: Dataset<f64> = presets::heartshapes(seed).expect("heartshapes");
        let src = DistanceSource::Metric(&ds);
        let r = run_dadc(&src, &DadcParams::default()).expect("dadc");
        let ca = accuracy_on(r.labels(), &ds).expect("ca").ca;
        if r.n_centers() == 3 && r.n_clusters() == 3 && ca == 1.0 {
            dadc_hits += 1;
        }
        let b = run_cfsfdp(&src, &BaselineParams::default()).expect("cfsfdp");
        if b.n_centers() == 1 {
            base_hits += 1;
        }
    }
    verdict(
        dadc_hits >= REQUIRED && base_hits >= REQUIRED,
        format!("dadc 3 centers/3 clusters/CA 100% in {dadc_hits}/{SEEDS}, cfsfdp single center in {base_hits}/{SEEDS}"),
    )
}

fn ed_defragmentation() -> Verdict {
    let mut hits = 0;
    let mut initial = Vec::new();
    for seed in 0..SEEDS {
        let ds: Dataset<f64> = presets::ed_disk_ring(seed).expect("ed");
        let r = run_dadc(&DistanceSource::Metric(&ds), &DadcParams::default()).expect("dadc");
        initial.push(r.initial.n_clusters());
        if r.initial.n_clusters() > 2 && r.n_clusters() == 2 {
            hits += 1;
        }
    }
    let (lo, hi) = (initial.iter().min().unwrap(), initial.iter().max().unwrap());
    verdict(
        hits >= REQUIRED,
        format!("{hits}/{SEEDS} seeds with >2 initial and 2 final clusters (initial {lo}..{hi})"),
    )
}

fn mddm_defragmentation() -> Verdict {
    let mut hits = 0;
    for seed in 0..SEEDS {
        let ds: Dataset<f64> = presets::g2(seed).expect("g2");
        let r = run_dadc(&DistanceSource::Metric(&ds), &DadcParams::default()).expect("dadc");
        let ca = accuracy_on(r.labels(), &ds).expect("ca").ca;
        if r.n_clusters() == 2 && ca >= 0.99 {
            hits += 1;
        }
    }
    verdict(hits >= REQUIRED, format!("{hits}/{SEEDS} seeds with 2 clusters and CA >= 99%"))
}

fn knn_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    for trial in 0..50 {
        let n = rng.random_range(20..=2000);
        let dim = rng.random_range(2..=4);
        let k = rng.random_range(1..=12.min(n - 1));
        // Every fifth dataset lies on a coarse integer grid to force distance ties.
        let grid = trial % 5 == 0;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        if grid {
                            rng.random_range(0..12) as f64
                        } else {
                            rng.random_range(-100.0..100.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let ds = Dataset::from_rows(rows, None).expect("dataset");
        let src = DistanceSource::Metric(&ds);
        let fast = NeighborIndex::build(&src, k).expect("kd-tree");
        let slow = NeighborIndex::brute_force(&src, k).expect("brute force");
        if fast != slow {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("{mismatches}/50 datasets differ"))
}

fn runner() -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases: PROPERTY_CASES,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn check<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner().run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn blob_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..5, 12usize..40, any::<u64>()).prop_map(|(blobs, per, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for b in 0..blobs {
            let (cx, cy) = (rng.random_range(-300.0..300.0), rng.random_range(-300.0..300.0));
            let spread = rng.random_range(5.0..40.0) * (1.0 + b as f64);
            for _ in 0..per {
                rows.push(vec![
                    cx + rng.random_range(-spread..spread),
                    cy + rng.random_range(-spread..spread),
                ]);
            }
        }
        rows
    })
}

fn properties() -> Verdict {
    let mut failures = Vec::new();
    let mut record = |r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(e);
        }
    };

    record(check(
        "ids",
        (1e-6f64..1e3, prop_oneof![Just(0.0f64), 1e-3f64..10.0]),
        |(u, r)| {
            let v = u * (1.0 + r);
            let s = density_similarity_of_means(u, v);
            prop_assert_eq!(s, density_similarity_of_means(v, u));
            prop_assert!(s > 0.0 && s <= 1.0);
            prop_assert_eq!(s == 1.0, u == v);
            Ok(())
        },
    ));

    record(check("crossover", (0usize..30, 0usize..30), |(own, other)| {
        match crossover_degree::<f64>(own, other) {
            None => prop_assert!(own == 0 || other == 0),
            Some(c) => {
                prop_assert!(own > 0 && other > 0);
                prop_assert!(c > 0.0 && c <= 1.0);
                prop_assert_eq!(c == 1.0, own == other);
            }
        }
        Ok(())
    }));

    record(check(
        "fusion degree",
        (0.0f64..10.0, 0.0f64..10.0, 0.0f64..10.0, 0.01f64..100.0),
        |(a, b, c, t)| {
            let f = fusion_degree(a, b, c);
            let tol = 1e-12 * (1.0 + f.abs());
            for g in [
                fusion_degree(a, c, b),
                fusion_degree(b, a, c),
                fusion_degree(b, c, a),
                fusion_degree(c, a, b),
                fusion_degree(c, b, a),
            ] {
                prop_assert!((g - f).abs() <= tol);
            }
            let scaled = fusion_degree(t * a, t * b, t * c);
            prop_assert!((scaled - t * t * f).abs() <= 1e-12 * (1.0 + scaled.abs()));
            Ok(())
        },
    ));

    record(check(
        "ca renaming",
        (
            prop::collection::vec((-1i64..6, 0i64..5), 1..200),
            Just(()).prop_perturb(|_, mut rng| {
                let mut p: Vec<i64> = (0..6).collect();
                for i in (1..p.len()).rev() {
                    p.swap(i, rng.random_range(0..=i));
                }
                let mut q: Vec<i64> = (0..5).map(|x| x * 7 + 3).collect();
                for i in (1..q.len()).rev() {
                    q.swap(i, rng.random_range(0..=i));
                }
                (p, q)
            }),
        ),
        |(pairs, (p, q))| {
            let labels: Vec<i64> = pairs.iter().map(|x| x.0).collect();
            let truth: Vec<Option<i64>> = pairs.iter().map(|x| Some(x.1)).collect();
            let ids: Vec<usize> = (0..labels.len()).collect();
            let base = clustering_accuracy(&labels, &truth, &ids).unwrap().ca;
            let relabeled: Vec<i64> = labels.iter().map(|&l| if l == NOISE { NOISE } else { p[l as usize] }).collect();
            let retruth: Vec<Option<i64>> = truth.iter().map(|t| t.map(|t| q[t as usize])).collect();
            let ca = clustering_accuracy(&relabeled, &retruth, &ids).unwrap().ca;
            prop_assert!((0.0..=1.0).contains(&base));
            prop_assert_eq!(base, ca);
            Ok(())
        },
    ));

    record(check("ensemble", blob_rows(), |rows| {
        let ds = Dataset::from_rows(rows, None).unwrap();
        let params = DadcParams::default();
        let r = run_dadc(&DistanceSource::Metric(&ds), &params).unwrap();
        let m = r.initial.n_clusters();
        prop_assert!(r.ensemble.merges < m.max(1));
        let again = self_ensemble(
            &r.ensemble.clustering,
            &r.profile,
            r.index.as_ref().unwrap(),
            params.fusion_threshold,
        )
        .unwrap();
        prop_assert_eq!(again.merges, 0);
        prop_assert_eq!(&again.clustering, &r.ensemble.clustering);
        Ok(())
    }));

    // Powers of two scale every distance exactly, so any rank change is the formula's.
    // Every case is counted instead of stopping at the first counterexample.
    let changes = std::cell::RefCell::new([0usize; 3]);
    runner()
        .run(&(blob_rows(), -3i32..=3), |(rows, e)| {
            let c = 2f64.powi(if e == 0 { 1 } else { e });
            let ds = Dataset::from_rows(rows, None).unwrap();
            let (_, a) = compute_profile(&DistanceSource::Metric(&ds), 5).unwrap();
            let (_, b) = compute_profile(&DistanceSource::Metric(&ds.scaled(c)), 5).unwrap();
            let same = [
                density_order(&a.kden) == density_order(&b.kden),
                density_order(&a.domain_density) == density_order(&b.domain_density),
                density_order(&a.adaptive_density) == density_order(&b.adaptive_density),
            ];
            for (slot, ok) in changes.borrow_mut().iter_mut().zip(same) {
                *slot += usize::from(!ok);
            }
            Ok(())
        })
        .expect("scale cases run");
    let sf = changes.into_inner();
    if sf.iter().any(|&c| c > 0) {
        failures.push(format!(
            "scale invariance: rank order changed in kden {}/{PROPERTY_CASES}, domain {}/{PROPERTY_CASES}, adaptive {}/{PROPERTY_CASES} cases",
            sf[0], sf[1], sf[2]
        ));
    }

    let detail = if failures.is_empty() {
        format!("6 suites x {PROPERTY_CASES} cases")
    } else {
        let short: Vec<String> = failures
            .iter()
            .map(|f| f.lines().next().unwrap_or_default().chars().take(160).collect())
            .collect();
        format!("{}/6 suites pass; {}", 6 - failures.len(), short.join(" | "))
    };
    verdict(failures.is_empty(), detail)
}

fn robustness() -> Verdict {
    let levels = [0.01, 0.05, 0.10, 0.15];
    let suite: [(&str, Dataset<f64>); 2] = [
        ("heartshapes", presets::heartshapes(0).expect("heart")),
        (
            "twin-rings",
            dadc_core::generate_vdd(&presets::twin_rings_regions(150), 0).expect("rings"),
        ),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, ds) in &suite {
        let evaluated = ds.labeled_ids();
        let mut cells = Vec::new();
        for &level in &levels {
            let (mut sd, mut sb) = (0.0, 0.0);
            for seed in 0..10 {
                let noisy = inject_noise(ds, &NoiseSpec::for_dataset(ds, level, seed)).expect("noise");
                let truth = noisy.truth_labels();
                let src = DistanceSource::Metric(&noisy);
                let d = run_dadc(&src, &DadcParams::default()).expect("dadc");
                let b = run_cfsfdp(&src, &BaselineParams::default()).expect("cfsfdp");
                sd += clustering_accuracy(d.labels(), &truth, &evaluated).unwrap().ca;
                sb += clustering_accuracy(b.labels(), &truth, &evaluated).unwrap().ca;
            }
            let (md, mb) = (sd / 10.0, sb / 10.0);
            ok &= md >= mb;
            cells.push(format!("{:.0}%:{md:.3}/{mb:.3}", level * 100.0));
        }
        notes.push(format!("{name} dadc/cfsfdp {}", cells.join(" ")));
    }
    verdict(ok, notes.join("; "))
}

fn run_cli(argv: &[&str]) -> Result<(), String> {
    let cli = Cli::try_parse_from(std::iter::once("dadc").chain(argv.iter().copied())).map_err(|e| e.to_string())?;
    let (task, args) = cli.command.split();
    let cfg = RunConfig::resolve_with_env(task, args, None).map_err(|e| e.to_string())?;
    execute(&cfg).map(|_| ()).map_err(|e| e.to_string())
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .map(|rd| {
            rd.filter_map(|e| e.ok())
                .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
                .collect()
        })
        .unwrap_or_default();
    out.sort();
    out
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().expect("tempdir");
    let input = tmp.path().join("input");
    if let Err(e) = run_cli(&["generate", "--generate", "twin-rings:count=60", "--seed", "4", "--out", input.to_str().unwrap()]) {
        return verdict(false, format!("setup: {e}"));
    }
    let data = input.join("dataset.csv");
    let data = data.to_str().unwrap();
    let commands: [(&str, Vec<&str>); 6] = [
        ("generate", vec!["generate", "--generate", "heartshapes", "--seed", "7"]),
        (
            "cluster",
            vec!["cluster", "--input", data, "--emit", "labels,graph-csv,graph-svg,plot,trace", "--baseline", "cfsfdp"],
        ),
        ("cluster-generated", vec!["cluster", "--generate", "ed", "--seed", "2", "--emit", "labels,trace"]),
        ("decision-graph", vec!["decision-graph", "--input", data, "--emit", "graph-csv,graph-svg"]),
        (
            "evaluate",
            vec!["evaluate", "--input", data, "--noise-level", "0.05", "--seed", "3", "--baseline", "cfsfdp", "--emit", "labels"],
        ),
        ("sweep", vec!["sweep", "--input", data, "--noise-level", "0.01,0.1", "--seeds", "3"]),
    ];
    let mut bad = Vec::new();
    for (name, argv) in &commands {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = tmp.path().join(format!("{name}-{run}"));
            let mut full = argv.clone();
            full.extend(["--out", out.to_str().unwrap()]);
            if let Err(e) = run_cli(&full) {
                bad.push(format!("{name}: {e}"));
            }
            outputs.push(dir_bytes(&out));
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            bad.push(format!("{name}: artifacts differ or missing"));
        }
    }
    verdict(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} invocations byte-identical", commands.len())
        } else {
            bad.join("; ")
        },
    )
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        timed("1 worked example", Some(secs(1)), worked_example),
        timed("2 VDD sparse-cluster recovery", Some(secs(10)), vdd_recovery),
        timed("3 ED defragmentation", Some(secs(10)), ed_defragmentation),
        timed("4 MDDM defragmentation", Some(secs(30)), mddm_defragmentation),
        timed("5 KNN oracle equivalence", Some(secs(60)), knn_oracle),
        timed("6 property suites", None, properties),
        timed("7 robustness ordering", Some(secs(120)), robustness),
        timed("8 determinism", None, determinism),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
