//! Acceptance gate: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them on success).
//!
//! Criteria 3 and 10 score the statlog credit file and expect it at
//! `data/german.data` under the repository root; they fail with a pointer
//! when it is absent rather than silently skipping.

use std::path::{Path, PathBuf};
use std::process::Command;

use accord_core::correction::{correct, weight};
use accord_core::dataio::CsvOptions;
use accord_core::error::Error;
use accord_core::experiment::{run, DataSource, ExperimentSpec, Method};
use accord_core::learners::LearnerKind;
use accord_core::metrics::{combined, jsd, welch_t};
use accord_core::neural::{grad_check, Activation, DenseNet};
use accord_core::synthdata::{FeatureCount, SynthConfig, SynthForm};
use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pass(criterion: u32, detail: &str) {
    println!("criterion {criterion}: PASS — {detail}");
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("repository root")
}

fn credit_file() -> PathBuf {
    repo_root().join("data/german.data")
}

fn credit_spec(methods: Vec<Method>) -> ExperimentSpec {
    let source = DataSource::Credit { path: credit_file() };
    let mut spec = ExperimentSpec::new(source, LearnerKind::Logistic, PathBuf::new());
    spec.methods = methods;
    spec.repetitions = 20;
    spec.base_seed = 1;
    spec
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn combined_of(records: &[accord_core::experiment::RunRecord], method: Method) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.method == method)
        .map(|r| r.combined)
        .collect()
}

#[test]
fn criterion_01_combined_matches_published_judgment_rows() {
    let financial = combined(0.675, 1.0).unwrap();
    assert!(
        (financial - 0.806).abs() <= 0.0005,
        "combined(0.675, 1.0) = {financial}, expected 0.806 +/- 0.0005"
    );
    let it = combined(0.684, 1.0).unwrap();
    assert!(
        (it - 0.8124).abs() <= 0.001,
        "combined(0.684, 1.0) = {it}, expected 0.8124 +/- 0.001"
    );
    pass(1, &format!("combined(0.675,1)={financial:.6}, combined(0.684,1)={it:.6}"));
}

#[test]
fn criterion_02_combined_matches_published_full_row() {
    let value = combined(0.736, 0.907).unwrap();
    assert!(
        (value - 0.8126).abs() <= 0.001,
        "combined(0.736, 0.907) = {value}, expected 0.8126 +/- 0.001"
    );
    pass(2, &format!("combined(0.736,0.907)={value:.6}"));
}

#[test]
fn criterion_03_credit_corrected_beats_plain_model() {
    let file = credit_file();
    assert!(
        file.exists(),
        "criterion 3 needs the statlog credit file at {} (1000 space-separated rows); \
         it is not distributable with this repository and no network source is reachable \
         from this environment",
        file.display()
    );
    let outcome = run(&credit_spec(vec![Method::Sl, Method::OursEjGan])).unwrap();
    assert!(outcome.failures.is_empty(), "failures: {:?}", outcome.failures);
    let ours = combined_of(&outcome.records, Method::OursEjGan);
    let sl = combined_of(&outcome.records, Method::Sl);
    assert_eq!(ours.len(), 20);
    let gap = mean(&ours) - mean(&sl);
    let welch = welch_t(&ours, &sl).unwrap();
    assert!(
        gap >= 0.01,
        "mean combined gap = {gap:.4} (ours {:.4}, sl {:.4}); need >= 0.01",
        mean(&ours),
        mean(&sl)
    );
    assert!(welch.p < 0.05, "Welch p = {:.4}; need < 0.05", welch.p);
    pass(3, &format!("gap={gap:.4}, welch p={:.4} over 20 re-splits", welch.p));
}

#[test]
fn criterion_04_correction_gap_grows_with_forced_holdout() {
    let run_at_k = |k_percent: f64| {
        let source = DataSource::Synthetic(SynthConfig {
            n: 1000,
            m: FeatureCount::Sampled,
            form: SynthForm::ExpW1x,
            seed: 0,
            holdout_k_percent: k_percent,
            feature_half_width: None,
        });
        let mut spec =
            ExperimentSpec::new(source, LearnerKind::GradientBoosting, PathBuf::new());
        spec.methods = vec![Method::Sl, Method::OursEjGan];
        spec.repetitions = 100;
        spec.base_seed = 60;
        let outcome = run(&spec).unwrap();
        let ours = combined_of(&outcome.records, Method::OursEjGan);
        let sl = combined_of(&outcome.records, Method::Sl);
        (mean(&ours), mean(&sl), outcome.failures.len())
    };

    let (ours_1, sl_1, failed_1) = run_at_k(1.0);
    let (ours_9, sl_9, failed_9) = run_at_k(9.0);
    let gap_1 = ours_1 - sl_1;
    let gap_9 = ours_9 - sl_9;
    assert!(
        ours_9 >= sl_9,
        "at k=9%: corrected mean combined {ours_9:.4} < plain {sl_9:.4}"
    );
    assert!(
        gap_9 > gap_1,
        "gap did not grow with k: k=1% gap {gap_1:.4}, k=9% gap {gap_9:.4}"
    );
    pass(
        4,
        &format!(
            "gap k=1%: {gap_1:+.4}, k=9%: {gap_9:+.4} (ours {ours_9:.4} vs sl {sl_9:.4}; {failed_1}+{failed_9} failed reps)"
        ),
    );
}

#[test]
fn criterion_05_judgment_only_closeness_is_exactly_one_everywhere() {
    let mut checked = 0usize;
    for form in SynthForm::ALL {
        let source = DataSource::Synthetic(SynthConfig {
            n: 200,
            m: FeatureCount::Sampled,
            form,
            seed: 0,
            holdout_k_percent: 5.0,
            feature_half_width: None,
        });
        let mut spec = ExperimentSpec::new(source, LearnerKind::Logistic, PathBuf::new());
        spec.methods = vec![Method::JudgmentOnly];
        spec.repetitions = 5;
        spec.base_seed = 7;
        let outcome = run(&spec).unwrap();
        assert!(outcome.failures.is_empty());
        for record in &outcome.records {
            assert_eq!(
                record.closeness, 1.0,
                "{form:?} seed {}: closeness {} != 1.0",
                record.seed, record.closeness
            );
            checked += 1;
        }
    }

    // A fixed csv source exercises the uniform re-split path too.
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let mut text = String::from("a,z,label\n");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..80 {
        let a: f64 = rng.gen();
        let z: f64 = rng.gen();
        text.push_str(&format!("{a},{z},{}\n", u8::from(a > 0.5)));
    }
    std::fs::write(&csv, text).unwrap();
    let source = DataSource::Csv {
        path: csv,
        label_column: "label".into(),
        judgment_column: "z".into(),
        judgment_name: "it_price".into(),
        options: CsvOptions::default(),
    };
    let mut spec = ExperimentSpec::new(source, LearnerKind::Logistic, PathBuf::new());
    spec.methods = vec![Method::JudgmentOnly];
    spec.repetitions = 5;
    spec.base_seed = 3;
    let outcome = run(&spec).unwrap();
    assert!(outcome.failures.is_empty());
    for record in &outcome.records {
        assert_eq!(record.closeness, 1.0);
        checked += 1;
    }
    pass(5, &format!("closeness exactly 1.0 on all {checked} runs"));
}

/// Smallest |pre-activation| over every ReLU unit for this input. Central
/// finite differences are only a valid gradient oracle when no ReLU sits
/// within the probe step of its kink, so the harness resamples inputs that
/// land too close.
fn min_relu_margin(net: &DenseNet, input: &[f64]) -> f64 {
    let mut x = input.to_vec();
    let mut margin = f64::INFINITY;
    for layer in net.layers() {
        let mut next = Vec::with_capacity(layer.out_dim);
        for o in 0..layer.out_dim {
            let mut pre = layer.biases()[o];
            for i in 0..layer.in_dim {
                pre += layer.weights()[o * layer.in_dim + i] * x[i];
            }
            if layer.activation == Activation::Relu {
                margin = margin.min(pre.abs());
            }
            next.push(layer.activation.apply(pre));
        }
        x = next;
    }
    margin
}

#[test]
fn criterion_06_analytic_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let activations = [Activation::Relu, Activation::Sigmoid, Activation::Identity];
    let mut worst_overall: f64 = 0.0;
    for config in 0..100 {
        let depth = rng.gen_range(1..=4);
        let mut dims = vec![rng.gen_range(1..=6usize)];
        for _ in 0..depth {
            dims.push(rng.gen_range(1..=8usize));
        }
        let acts: Vec<Activation> = (0..depth)
            .map(|_| activations[rng.gen_range(0..activations.len())])
            .collect();
        // A dead relu layer can pin a downstream pre-activation exactly at a
        // kink (zero bias), where no input ever clears the margin; cap the
        // rejection sampling and reweight the net when that happens.
        let (net, input) = 'weights: {
            for reseed in 0..u64::MAX {
                let net =
                    DenseNet::new(&dims, &acts, 0.0, config as u64 + 100 * reseed).unwrap();
                for _ in 0..200 {
                    let candidate: Vec<f64> =
                        (0..dims[0]).map(|_| rng.gen_range(-2.0..2.0)).collect();
                    if min_relu_margin(&net, &candidate) > 1e-3 {
                        break 'weights (net, candidate);
                    }
                }
            }
            unreachable!("some weight draw admits a kink-free input");
        };
        let mut net = net;
        let targets: Vec<f64> = (0..*dims.last().unwrap())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let t = targets.clone();
        let loss = move |out: &[f64]| {
            out.iter().zip(&t).map(|(o, t)| 0.5 * (o - t).powi(2)).sum::<f64>()
        };
        let t = targets.clone();
        let loss_grad = move |out: &[f64]| out.iter().zip(&t).map(|(o, t)| o - t).collect();
        let worst = grad_check(&mut net, &input, loss, loss_grad).unwrap();
        assert!(
            worst < 1e-4,
            "config {config} (dims {dims:?}, acts {acts:?}): relative error {worst:.2e}"
        );
        worst_overall = worst_overall.max(worst);
    }
    pass(6, &format!("100 random networks, worst relative error {worst_overall:.2e}"));
}

#[test]
fn criterion_07_weight_is_tanh_of_half_alpha_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let ks = Uniform::new(0.0f64, 3.0);
    let alphas = Uniform::new(0.1f64, 8.0);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let k = ks.sample(&mut rng);
        let alpha = alphas.sample(&mut rng);
        let w = weight(k, alpha).unwrap();
        let oracle = (alpha * k / 2.0).tanh();
        let gap = (w - oracle).abs();
        assert!(gap <= 1e-12, "w({k}, {alpha}) = {w} vs tanh = {oracle}");
        worst = worst.max(gap);
    }
    for _ in 0..100 {
        let alpha = alphas.sample(&mut rng);
        assert_eq!(weight(0.0, alpha).unwrap(), 0.0, "w(0, {alpha}) != 0");
    }
    // Pairwise strict growth in k below 64-bit saturation.
    for _ in 0..1_000 {
        let alpha = alphas.sample(&mut rng);
        let a = ks.sample(&mut rng);
        let b = ks.sample(&mut rng);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if lo == hi {
            continue;
        }
        assert!(
            weight(hi, alpha).unwrap() > weight(lo, alpha).unwrap(),
            "w not strictly increasing: k {lo} vs {hi} at alpha {alpha}"
        );
    }
    pass(7, &format!("tanh identity within {worst:.2e} over 10^4 pairs; zero at k=0; strictly increasing"));
}

#[test]
fn criterion_08_corrected_prediction_stays_between_its_parents() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let unit = Uniform::new_inclusive(0.0f64, 1.0);
    let ks = Uniform::new(0.0f64, 5.0);
    let alphas = Uniform::new(0.1f64, 10.0);
    let mut violations = 0usize;
    for _ in 0..100_000 {
        let y_hat = unit.sample(&mut rng);
        let g = unit.sample(&mut rng);
        let k = ks.sample(&mut rng);
        let alpha = alphas.sample(&mut rng);
        let c = correct(y_hat, g, k, alpha).unwrap();
        if c.y_final < y_hat.min(g) || c.y_final > y_hat.max(g) {
            violations += 1;
        }
    }
    assert_eq!(violations, 0, "{violations} out-of-bounds corrections in 10^5 draws");
    pass(8, "0 bound violations over 10^5 random corrections");
}

#[test]
fn criterion_09_divergence_is_symmetric_bounded_and_calibrated() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for trial in 0..500 {
        let len = rng.gen_range(2..=8usize);
        let p: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1.0)).collect();
        let q: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1.0)).collect();
        let pq = jsd(&p, &q).unwrap();
        let qp = jsd(&q, &p).unwrap();
        assert!(
            (pq - qp).abs() <= 1e-15,
            "trial {trial}: jsd(p,q)={pq} vs jsd(q,p)={qp}"
        );
        assert!((0.0..=1.0).contains(&pq), "trial {trial}: jsd={pq} outside [0,1]");
    }
    let reference = jsd(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
    assert!(
        (reference - 0.311278).abs() <= 1e-6,
        "jsd([.5,.5],[1,0]) = {reference}, expected 0.311278 +/- 1e-6"
    );
    pass(9, &format!("symmetric, in range over 500 pairs; reference jsd={reference:.9}"));
}

#[test]
fn criterion_10_adversarial_estimator_leads_the_mean_ablation_on_credit() {
    let file = credit_file();
    assert!(
        file.exists(),
        "criterion 10 needs the statlog credit file at {} (1000 space-separated rows); \
         it is not distributable with this repository and no network source is reachable \
         from this environment",
        file.display()
    );
    let outcome = run(&credit_spec(vec![Method::OursEjGan, Method::OursMean])).unwrap();
    assert!(outcome.failures.is_empty(), "failures: {:?}", outcome.failures);
    let gan = combined_of(&outcome.records, Method::OursEjGan);
    let flat = combined_of(&outcome.records, Method::OursMean);
    assert_eq!(gan.len(), 20);
    let gap = mean(&gan) - mean(&flat);
    assert!(
        gap >= -0.005,
        "adversarial estimator mean combined {:.4} trails constant-mean {:.4} by more than 0.005",
        mean(&gan),
        mean(&flat)
    );
    pass(10, &format!("estimator-swap gap {gap:+.4} over 20 re-splits (tie tolerance 0.005)"));
}

#[test]
fn criterion_11_machine_readable_output_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["one", "two"] {
        let output = Command::new(env!("CARGO_BIN_EXE_accord"))
            .current_dir(dir.path())
            .args([
                "report", "--n", "120", "--m", "5", "--form", "exp_w1x",
                "--methods", "judgment_only,sl,ws,er,ours_ejgan,ours_mean",
                "--repetitions", "3", "--base-seed", "21",
                "--gan-epochs", "60", "--epochs", "80", "--out", out,
            ])
            .output()
            .expect("binary runs");
        assert!(
            output.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    let read = |rel: &str| std::fs::read(dir.path().join(rel)).unwrap();
    assert_eq!(
        read("one/results.csv"),
        read("two/results.csv"),
        "results.csv differs between identical invocations"
    );
    assert_eq!(
        read("one/profiles.tsv"),
        read("two/profiles.tsv"),
        "profiles.tsv differs between identical invocations"
    );
    let bytes = read("one/results.csv").len();
    pass(11, &format!("two invocations, identical results.csv ({bytes} bytes) and profiles.tsv"));
}

/// Not a criterion: guards the expectations above against silent API drift
/// by ensuring the error type distinguishes the exit classes the binary maps.
#[test]
fn exit_code_classes_are_distinct() {
    assert_eq!(Error::Config(String::new()).exit_code(), 1);
    assert_eq!(Error::Data(String::new()).exit_code(), 2);
    assert_eq!(Error::Divergence(String::new()).exit_code(), 3);
}
