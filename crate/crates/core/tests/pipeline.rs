use std::time::Instant;

use noma_core::baselines::{ath_frame, zz_frame};
use noma_core::exact::{opt_bruteforce_frame, opt_matching_m1, OracleGuard};
use noma_core::harness::{
    emit_report, load_results_csv, run_experiment, Algorithm, ExperimentSpec, Sweep, SweepAxis,
};
use noma_core::learning::LearnerConfig;
use noma_core::model::{count_served, validate_schedule, FrameAssignment, Schedule};
use noma_core::online::{bms, ranking_m1, selfish_frame};
use noma_core::{generate_instance, ScenarioParams};

fn valid(inst: &noma_core::Instance, a: &FrameAssignment) -> usize {
    let s = Schedule::from_assignments(inst, [a]);
    assert!(validate_schedule(inst, &s).unwrap().is_empty());
    count_served(&s)
}

#[test]
fn oracle_dominates_every_heuristic() {
    for seed in 0..150u64 {
        let m = 2 + (seed as usize % 7);
        let n = 1 + (seed as usize % 4);
        let cap = 1 + (seed as usize % 3).min(m - 1);
        let inst = generate_instance(&ScenarioParams::new(m, n, 1, cap).with_seed(seed)).unwrap();
        let opt =
            opt_bruteforce_frame(&inst, 0, &inst.full_budgets(), &OracleGuard::default()).unwrap();
        let best = valid(&inst, &opt.assignment);
        assert_eq!(best, opt.served);
        let mut heuristics = vec![
            bms(&inst, 0, &inst.full_budgets()).unwrap(),
            ath_frame(&inst, 0),
            selfish_frame(&inst, 0),
        ];
        if cap == 2 {
            heuristics.push(zz_frame(&inst, 0).unwrap());
        }
        if cap == 1 {
            let rank: Vec<usize> = (0..m).rev().collect();
            heuristics.push(ranking_m1(&inst, 0, &rank).unwrap());
            assert_eq!(valid(&inst, &opt_matching_m1(&inst, 0).unwrap()), best);
        }
        for h in &heuristics {
            assert!(valid(&inst, h) <= best, "seed {seed}");
        }
    }
}

fn spec(dir: &std::path::Path) -> ExperimentSpec {
    let mut scenario = ScenarioParams::new(8, 4, 1, 2).with_seed(5);
    scenario.power_level = 1;
    ExperimentSpec {
        name: "small".into(),
        scenario,
        algorithms: vec![
            Algorithm::Bms,
            Algorithm::Ath,
            Algorithm::Zz,
            Algorithm::Opt,
        ],
        sweep: Sweep {
            axis: SweepAxis::Devices,
            values: vec![4.0, 8.0],
        },
        seeds: (0..4).collect(),
        learner: LearnerConfig::default(),
        guard: OracleGuard::default(),
        record_timing: false,
        output_dir: Some(dir.to_path_buf()),
    }
}

#[test]
fn experiment_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(dir.path());
    let a = run_experiment(&s, Some(1)).unwrap();
    let r1 = emit_report(&a, dir.path().join("a")).unwrap();
    let b = run_experiment(&s, Some(3)).unwrap();
    let r2 = emit_report(&b, dir.path().join("b")).unwrap();
    assert_eq!(
        std::fs::read(&r1.csv).unwrap(),
        std::fs::read(&r2.csv).unwrap()
    );
    assert_eq!(
        std::fs::read(&r1.svg).unwrap(),
        std::fs::read(&r2.svg).unwrap()
    );
    assert_eq!(load_results_csv(&r1.csv).unwrap(), a.rows);
    assert_eq!(a.rows.len(), 2 * 4 * 4);
    for v in [4.0, 8.0] {
        let (opt, _) = a.summary(Algorithm::Opt, v).unwrap();
        for alg in [Algorithm::Bms, Algorithm::Ath, Algorithm::Zz] {
            assert!(a.summary(alg, v).unwrap().0 <= opt);
        }
    }
}

#[test]
fn spec_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(dir.path());
    let text = serde_json::to_string(&s).unwrap();
    let back = ExperimentSpec::from_json(&text, std::path::Path::new("inline")).unwrap();
    assert_eq!(back, s);
    let bad = text.replace("\"name\"", "\"nmae\"");
    assert!(ExperimentSpec::from_json(&bad, std::path::Path::new("inline")).is_err());
}

fn bms_seconds(m: usize) -> f64 {
    let inst = generate_instance(&ScenarioParams::new(m, 20, 1, 20).with_seed(m as u64)).unwrap();
    let budgets = inst.full_budgets();
    (0..5)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(bms(&inst, 0, &budgets).unwrap());
            start.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn bms_runtime_grows_subquadratically() {
    let t: Vec<f64> = [500, 1000, 2000].into_iter().map(bms_seconds).collect();
    // Quadrupling m would multiply a quadratic cost by 16.
    assert!(t[2] / t[0] < 10.0, "{t:?}");
}
