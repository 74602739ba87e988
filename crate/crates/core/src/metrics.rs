//! Evaluation metrics for judgment-corrected classifiers.
//!
//! The centerpiece is a pair of *bucket profiles*: predictions and judgment
//! scores are grouped into `q` equal-width buckets over the judgment scale,
//! and the per-bucket means form two discrete distributions. Their
//! Jensen-Shannon divergence (base 2, so it lives in `[0, 1]`) measures how
//! far the model strays from the judgment curve; `1 - JSD` is reported as
//! *closeness*. Accuracy and closeness fuse into a single score via their
//! harmonic mean, and Welch's t-test compares metric samples across
//! repetitions without assuming equal variances.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Additive smoothing applied to every distribution entry before
/// normalization, so empty buckets never produce infinite log-ratios.
const JSD_EPSILON: f64 = 1e-12;

/// Per-bucket summary of one value series over a shared judgment grid.
///
/// `means[i]` is `None` when bucket `i` received no rows; an empty bucket is
/// *absent*, never zero, so downstream divergences skip it instead of
/// treating it as mass at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketProfile {
    /// Ascending bucket edges; `edges.len() == q + 1`.
    pub edges: Vec<f64>,
    /// Mean of the profiled values per bucket, `None` for empty buckets.
    pub means: Vec<Option<f64>>,
    /// Number of rows that landed in each bucket.
    pub counts: Vec<usize>,
}

impl BucketProfile {
    /// Number of buckets in the profile.
    pub fn q(&self) -> usize {
        self.means.len()
    }

    /// Midpoints of each bucket, handy as plot abscissae.
    pub fn centers(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    /// True when both profiles share the same bucket grid.
    fn same_grid(&self, other: &BucketProfile) -> bool {
        self.edges == other.edges
    }
}

/// Outcome of Welch's unequal-variance t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchT {
    /// Test statistic; infinite when only the means differ but neither
    /// sample varies.
    pub t: f64,
    /// Welch-Satterthwaite degrees of freedom.
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

/// Full evaluation of one prediction set against labels and judgment.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    /// Fraction of rows where thresholding the prediction at 0.5 matches the
    /// label.
    pub accuracy: f64,
    /// `1 - divergence`; 1.0 means the model tracks the judgment curve
    /// exactly on every shared bucket.
    pub closeness: f64,
    /// Smoothed Jensen-Shannon divergence between the two profiles over
    /// their shared occupied buckets, kept alongside `closeness` so the raw
    /// value stays inspectable.
    pub divergence: f64,
    /// Harmonic mean of accuracy and closeness.
    pub combined: f64,
    /// Per-bucket mean model prediction over the judgment grid.
    pub model_profile: BucketProfile,
    /// Per-bucket mean judgment value over the same grid.
    pub judgment_profile: BucketProfile,
}

/// Fraction of predictions whose 0.5-threshold class equals the label.
///
/// Errors: empty input, length mismatch, non-finite prediction, label > 1.
pub fn accuracy(predictions: &[f64], labels: &[u8]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::Data("accuracy of an empty sample".into()));
    }
    if predictions.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut hits = 0usize;
    for (p, &y) in predictions.iter().zip(labels) {
        if !p.is_finite() {
            return Err(Error::Data("non-finite prediction".into()));
        }
        if y > 1 {
            return Err(Error::Data(format!("label {y} is not binary")));
        }
        let class = u8::from(*p >= 0.5);
        hits += usize::from(class == y);
    }
    Ok(hits as f64 / predictions.len() as f64)
}

/// Groups `values` into `q` equal-width buckets of the judgment scale.
///
/// Bucket index is `floor(q * (z - lo) / (hi - lo))` clamped into
/// `[0, q-1]`, so `z == hi` lands in the last bucket and out-of-range
/// scores stick to the nearest edge bucket. A collapsed range (`lo == hi`)
/// degenerates to a single bucket holding every row.
pub fn bucketize(
    judgment_scores: &[f64],
    values: &[f64],
    q: usize,
    range: (f64, f64),
) -> Result<BucketProfile> {
    if q == 0 {
        return Err(Error::Config("bucket count must be at least 1".into()));
    }
    if judgment_scores.is_empty() {
        return Err(Error::Data("bucketize of an empty sample".into()));
    }
    if judgment_scores.len() != values.len() {
        return Err(Error::Shape(format!(
            "{} judgment scores vs {} values",
            judgment_scores.len(),
            values.len()
        )));
    }
    let (lo, hi) = range;
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::Domain(format!("invalid bucket range [{lo}, {hi}]")));
    }
    // Collapsed judgment range: every score is identical, one bucket.
    let q = if lo == hi { 1 } else { q };

    let edges: Vec<f64> = (0..=q)
        .map(|i| lo + (hi - lo) * (i as f64 / q as f64))
        .collect();
    let mut sums = vec![0.0; q];
    let mut counts = vec![0usize; q];
    for (&z, &v) in judgment_scores.iter().zip(values) {
        if !z.is_finite() || !v.is_finite() {
            return Err(Error::Data("non-finite value in bucketize".into()));
        }
        let idx = if lo == hi {
            0
        } else {
            let raw = (q as f64 * (z - lo) / (hi - lo)).floor();
            (raw as isize).clamp(0, q as isize - 1) as usize
        };
        sums[idx] += v;
        counts[idx] += 1;
    }
    let means = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
        .collect();
    Ok(BucketProfile {
        edges,
        means,
        counts,
    })
}

/// Smoothed Jensen-Shannon divergence in base 2, bounded by `[0, 1]`.
///
/// Inputs are arbitrary non-negative weight vectors; each is shifted by
/// `JSD_EPSILON` and normalized internally, so callers may pass raw bucket
/// means without pre-normalizing.
pub fn jsd(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::Shape("jsd of empty distributions".into()));
    }
    if p.len() != q.len() {
        return Err(Error::Shape(format!(
            "jsd over {} vs {} entries",
            p.len(),
            q.len()
        )));
    }
    let normalize = |v: &[f64]| -> Result<Vec<f64>> {
        let mut total = 0.0;
        for &x in v {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::Domain(format!("jsd entry {x} is not a weight")));
            }
            total += x;
        }
        if total <= 0.0 {
            return Err(Error::Domain("jsd of an all-zero distribution".into()));
        }
        let denom = total + JSD_EPSILON * v.len() as f64;
        Ok(v.iter().map(|&x| (x + JSD_EPSILON) / denom).collect())
    };
    let p = normalize(p)?;
    let q = normalize(q)?;
    let mut div = 0.0;
    for (&a, &b) in p.iter().zip(&q) {
        let m = 0.5 * (a + b);
        // Smoothing guarantees a, b, m > 0, so the logs stay finite.
        div += 0.5 * a * (a / m).log2() + 0.5 * b * (b / m).log2();
    }
    // Clamp away the negative rounding dust a zero divergence can leave.
    Ok(div.clamp(0.0, 1.0))
}

/// Divergence between two profiles over the buckets both occupy.
///
/// Buckets empty on *either* side are dropped pairwise before comparing; if
/// no bucket is occupied on both sides the metric is undefined.
pub fn profile_divergence(model: &BucketProfile, judgment: &BucketProfile) -> Result<f64> {
    if !model.same_grid(judgment) {
        return Err(Error::Shape(
            "bucket profiles were built on different grids".into(),
        ));
    }
    let mut f = Vec::with_capacity(model.q());
    let mut g = Vec::with_capacity(model.q());
    for (a, b) in model.means.iter().zip(&judgment.means) {
        if let (Some(a), Some(b)) = (a, b) {
            f.push(*a);
            g.push(*b);
        }
    }
    if f.is_empty() {
        return Err(Error::UndefinedMetric(
            "profiles share no occupied bucket".into(),
        ));
    }
    jsd(&f, &g)
}

/// Closeness between a model profile and the judgment profile: one minus
/// their shared-bucket divergence.
pub fn closeness(model: &BucketProfile, judgment: &BucketProfile) -> Result<f64> {
    Ok(1.0 - profile_divergence(model, judgment)?)
}

/// Harmonic mean of accuracy and closeness; 0 when both are 0.
pub fn combined(accuracy: f64, closeness: f64) -> Result<f64> {
    for (name, v) in [("accuracy", accuracy), ("closeness", closeness)] {
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("{name} {v} is outside [0, 1]")));
        }
    }
    if accuracy == 0.0 && closeness == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * accuracy * closeness / (accuracy + closeness))
}

/// Welch's two-sided unequal-variance t-test.
///
/// Degrees of freedom follow Welch-Satterthwaite. When neither sample
/// varies the test degenerates: equal means give `p = 1`, unequal means
/// `p = 0`, by convention.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<WelchT> {
    for (name, s) in [("first", a), ("second", b)] {
        if s.len() < 2 {
            return Err(Error::UndefinedMetric(format!(
                "{name} sample has {} observations; need at least 2",
                s.len()
            )));
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::Data(format!("non-finite value in {name} sample")));
        }
    }
    let stats = |s: &[f64]| {
        let n = s.len() as f64;
        let mean = s.iter().sum::<f64>() / n;
        let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (n, mean, var)
    };
    let (na, ma, va) = stats(a);
    let (nb, mb, vb) = stats(b);
    if va == 0.0 && vb == 0.0 {
        let df = na + nb - 2.0;
        return Ok(if ma == mb {
            WelchT { t: 0.0, df, p: 1.0 }
        } else {
            WelchT {
                t: (ma - mb).signum() * f64::INFINITY,
                df,
                p: 0.0,
            }
        });
    }
    let sa = va / na;
    let sb = vb / nb;
    let se2 = sa + sb;
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::Domain(format!("t-distribution with df {df}: {e}")))?;
    // Two-sided p from the lower tail at -|t|; this side never cancels.
    let p = 2.0 * dist.cdf(-t.abs());
    Ok(WelchT { t, df, p })
}

/// Builds the full report for one prediction set.
///
/// Both profiles bucket rows by `judgment_scores`; the model profile
/// averages `predictions` per bucket while the judgment profile averages
/// `judgment_values` (the judgment scores mapped onto the label scale).
/// `range` should span the judgment scores of the *entire* dataset so that
/// reports from different splits share one grid.
pub fn evaluate(
    predictions: &[f64],
    labels: &[u8],
    judgment_scores: &[f64],
    judgment_values: &[f64],
    q: usize,
    range: (f64, f64),
) -> Result<MetricsReport> {
    let acc = accuracy(predictions, labels)?;
    let model_profile = bucketize(judgment_scores, predictions, q, range)?;
    let judgment_profile = bucketize(judgment_scores, judgment_values, q, range)?;
    let divergence = profile_divergence(&model_profile, &judgment_profile)?;
    let clo = 1.0 - divergence;
    let comb = combined(acc, clo)?;
    Ok(MetricsReport {
        accuracy: acc,
        closeness: clo,
        divergence,
        combined: comb,
        model_profile,
        judgment_profile,
    })
}

/// Renders profiles as tab-separated text ready for plotting: bucket
/// center, model mean, judgment mean, and optionally a corrected-model
/// mean. Empty buckets print `NA`.
pub fn profile_table(
    model: &BucketProfile,
    judgment: &BucketProfile,
    corrected: Option<&BucketProfile>,
) -> Result<String> {
    if !model.same_grid(judgment) || corrected.is_some_and(|c| !model.same_grid(c)) {
        return Err(Error::Shape(
            "profile table requires profiles on one grid".into(),
        ));
    }
    let cell = |m: &Option<f64>| m.map_or_else(|| "NA".to_string(), |v| format!("{v}"));
    let mut out = String::from("bucket_center\tmodel_mean\tjudgment_mean");
    if corrected.is_some() {
        out.push_str("\tcorrected_mean");
    }
    out.push('\n');
    for (i, center) in model.centers().iter().enumerate() {
        out.push_str(&format!(
            "{center}\t{}\t{}",
            cell(&model.means[i]),
            cell(&judgment.means[i])
        ));
        if let Some(c) = corrected {
            out.push_str(&format!("\t{}", cell(&c.means[i])));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::distributions::{Distribution, Uniform};
    use rand::seq::SliceRandom;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn accuracy_counts_half_threshold_agreements() {
        let acc = accuracy(&[0.9, 0.4, 0.2], &[1, 1, 1]).unwrap();
        assert_abs_diff_eq!(acc, 1.0 / 3.0, epsilon = 1e-15);
        // 0.5 itself classifies as the positive class.
        assert_abs_diff_eq!(accuracy(&[0.5], &[1]).unwrap(), 1.0);
        assert_abs_diff_eq!(accuracy(&[0.5], &[0]).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_rejects_bad_inputs() {
        assert!(matches!(accuracy(&[], &[]), Err(Error::Data(_))));
        assert!(matches!(accuracy(&[0.5], &[0, 1]), Err(Error::Shape(_))));
        assert!(matches!(accuracy(&[f64::NAN], &[0]), Err(Error::Data(_))));
        assert!(matches!(accuracy(&[0.5], &[2]), Err(Error::Data(_))));
    }

    #[test]
    fn bucketize_assigns_by_floor_and_clamps_the_top_edge() {
        let z = [0.0, 0.99, 1.0, 2.5, 3.0];
        let v = [10.0, 20.0, 30.0, 40.0, 50.0];
        let prof = bucketize(&z, &v, 3, (0.0, 3.0)).unwrap();
        assert_eq!(prof.counts, vec![2, 1, 2]);
        // z == hi lands in the last bucket, not a phantom q-th one.
        assert_abs_diff_eq!(prof.means[0].unwrap(), 15.0);
        assert_abs_diff_eq!(prof.means[1].unwrap(), 30.0);
        assert_abs_diff_eq!(prof.means[2].unwrap(), 45.0);
        assert_eq!(prof.edges, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(prof.centers(), vec![0.5, 1.5, 2.5]);
    }

    #[test]
    fn bucketize_collapsed_range_degenerates_to_one_bucket() {
        let prof = bucketize(&[2.0, 2.0, 2.0], &[1.0, 2.0, 6.0], 12, (2.0, 2.0)).unwrap();
        assert_eq!(prof.q(), 1);
        assert_eq!(prof.counts, vec![3]);
        assert_abs_diff_eq!(prof.means[0].unwrap(), 3.0);
    }

    #[test]
    fn empty_buckets_are_flagged_absent_not_zero() {
        // Binary judgment scores under a 12-bucket grid occupy exactly the
        // two edge buckets; the other ten must be absent, not zero-mean.
        let z = [0.0, 0.0, 1.0, 1.0, 1.0];
        let v = [0.2, 0.4, 0.9, 0.8, 1.0];
        let prof = bucketize(&z, &v, 12, (0.0, 1.0)).unwrap();
        assert_eq!(prof.counts[0], 2);
        assert_eq!(prof.counts[11], 3);
        assert_abs_diff_eq!(prof.means[0].unwrap(), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(prof.means[11].unwrap(), 0.9, epsilon = 1e-15);
        for i in 1..11 {
            assert_eq!(prof.counts[i], 0);
            assert!(prof.means[i].is_none());
        }
    }

    #[test]
    fn bucketize_rejects_bad_inputs() {
        assert!(matches!(
            bucketize(&[], &[], 3, (0.0, 1.0)),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            bucketize(&[0.0], &[1.0, 2.0], 3, (0.0, 1.0)),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            bucketize(&[0.0], &[1.0], 0, (0.0, 1.0)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            bucketize(&[0.0], &[1.0], 3, (1.0, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            bucketize(&[f64::NAN], &[1.0], 3, (0.0, 1.0)),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn jsd_matches_reference_values() {
        // Identical distributions diverge by exactly zero.
        assert_eq!(jsd(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        // Disjoint point masses saturate the base-2 bound (up to smoothing).
        assert_abs_diff_eq!(
            jsd(&[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            1.0,
            epsilon = 1e-9
        );
        // Uniform vs point mass, computed independently at high precision.
        assert_abs_diff_eq!(
            jsd(&[0.5, 0.5], &[1.0, 0.0]).unwrap(),
            0.31127812443927243,
            epsilon = 1e-12
        );
    }

    #[test]
    fn jsd_is_symmetric_bounded_and_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let unit = Uniform::new(0.0f64, 1.0);
        for _ in 0..50 {
            let dim = rng.gen_range(2..=8);
            let p: Vec<f64> = (0..dim).map(|_| unit.sample(&mut rng)).collect();
            let q: Vec<f64> = (0..dim).map(|_| unit.sample(&mut rng)).collect();
            let forward = jsd(&p, &q).unwrap();
            let backward = jsd(&q, &p).unwrap();
            assert_abs_diff_eq!(forward, backward, epsilon = 1e-12);
            assert!((0.0..=1.0).contains(&forward));
            // Internal normalization makes overall mass irrelevant.
            let p5: Vec<f64> = p.iter().map(|x| 5.0 * x).collect();
            let q5: Vec<f64> = q.iter().map(|x| 5.0 * x).collect();
            assert_abs_diff_eq!(jsd(&p5, &q5).unwrap(), forward, epsilon = 1e-9);
        }
    }

    #[test]
    fn jsd_rejects_bad_inputs() {
        assert!(matches!(jsd(&[], &[]), Err(Error::Shape(_))));
        assert!(matches!(jsd(&[1.0], &[0.5, 0.5]), Err(Error::Shape(_))));
        assert!(matches!(jsd(&[-0.1, 1.1], &[0.5, 0.5]), Err(Error::Domain(_))));
        assert!(matches!(jsd(&[0.0, 0.0], &[0.5, 0.5]), Err(Error::Domain(_))));
    }

    fn profile(means: Vec<Option<f64>>) -> BucketProfile {
        let q = means.len();
        let edges = (0..=q).map(|i| i as f64 / q as f64).collect();
        let counts = means.iter().map(|m| usize::from(m.is_some())).collect();
        BucketProfile {
            edges,
            means,
            counts,
        }
    }

    #[test]
    fn closeness_of_identical_profiles_is_exactly_one() {
        let p = profile(vec![Some(0.2), Some(0.9), None, Some(0.4)]);
        assert_eq!(closeness(&p, &p.clone()).unwrap(), 1.0);
    }

    #[test]
    fn closeness_matches_the_reference_complement() {
        let model = profile(vec![Some(0.5), Some(0.5)]);
        let judgment = profile(vec![Some(1.0), Some(0.0)]);
        assert_abs_diff_eq!(
            closeness(&model, &judgment).unwrap(),
            0.68872187556072757,
            epsilon = 1e-12
        );
    }

    #[test]
    fn closeness_drops_empty_buckets_pairwise() {
        // Bucket 1 is empty on the model side, bucket 2 on the judgment
        // side; only buckets 0 and 3 survive, where the profiles agree.
        let model = profile(vec![Some(0.3), None, Some(0.8), Some(0.6)]);
        let judgment = profile(vec![Some(0.3), Some(0.9), None, Some(0.6)]);
        assert_abs_diff_eq!(closeness(&model, &judgment).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn closeness_without_shared_buckets_is_undefined() {
        let model = profile(vec![Some(0.3), None]);
        let judgment = profile(vec![None, Some(0.9)]);
        assert!(matches!(
            closeness(&model, &judgment),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn closeness_requires_one_grid() {
        let model = profile(vec![Some(0.3), Some(0.4)]);
        let mut judgment = profile(vec![Some(0.3), Some(0.4)]);
        judgment.edges[2] = 7.0;
        assert!(matches!(
            closeness(&model, &judgment),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn combined_matches_reference_rows() {
        assert_abs_diff_eq!(
            combined(0.675, 1.0).unwrap(),
            0.80597014925373134,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            combined(0.684, 1.0).unwrap(),
            0.81235154394299287,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            combined(0.736, 0.907).unwrap(),
            0.81260133901399878,
            epsilon = 1e-12
        );
    }

    #[test]
    fn combined_is_a_harmonic_mean_with_a_zero_guard() {
        assert_eq!(combined(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(combined(0.0, 0.9).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let unit = Uniform::new(0.0f64, 1.0);
        for _ in 0..100 {
            let a = unit.sample(&mut rng);
            let c = unit.sample(&mut rng);
            let h = combined(a, c).unwrap();
            let min = a.min(c);
            let max = a.max(c);
            assert!(h <= 2.0 * min + 1e-15);
            assert!(h <= max + 1e-15);
            assert!(h <= 0.5 * (a + c) + 1e-15);
            assert_abs_diff_eq!(h, combined(c, a).unwrap(), epsilon = 1e-15);
        }
        assert!(matches!(combined(1.2, 0.5), Err(Error::Domain(_))));
        assert!(matches!(combined(0.5, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn welch_matches_a_hand_computation() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let r = welch_t(&a, &b).unwrap();
        // Equal variances (2.5) and sizes collapse Welch to the pooled case.
        assert_abs_diff_eq!(r.t, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.df, 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p, 0.34659350708733425, epsilon = 1e-12);
    }

    #[test]
    fn welch_agrees_with_a_permutation_oracle_on_separated_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let noise = Uniform::new(-1.0f64, 1.0);
        let a: Vec<f64> = (0..20).map(|_| noise.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..20).map(|_| 100.0 + noise.sample(&mut rng)).collect();
        let observed = welch_t(&a, &b).unwrap();
        assert!(observed.p < 1e-10, "p = {}", observed.p);
        // No relabeling of the pooled sample should reach the observed |t|.
        let pooled: Vec<f64> = a.iter().chain(&b).copied().collect();
        let mut extreme = 0usize;
        let mut shuffled = pooled.clone();
        for _ in 0..2000 {
            shuffled.shuffle(&mut rng);
            let r = welch_t(&shuffled[..20], &shuffled[20..]).unwrap();
            extreme += usize::from(r.t.abs() >= observed.t.abs());
        }
        assert_eq!(extreme, 0);
    }

    #[test]
    fn welch_handles_degenerate_variances_by_convention() {
        let flat = welch_t(&[3.0, 3.0, 3.0], &[3.0, 3.0]).unwrap();
        assert_eq!(flat.p, 1.0);
        assert_eq!(flat.t, 0.0);
        let split = welch_t(&[3.0, 3.0, 3.0], &[4.0, 4.0]).unwrap();
        assert_eq!(split.p, 0.0);
        assert!(split.t.is_infinite() && split.t < 0.0);
        assert!(matches!(
            welch_t(&[1.0], &[2.0, 3.0]),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(matches!(
            welch_t(&[1.0, f64::NAN], &[2.0, 3.0]),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn evaluate_composes_the_individual_metrics() {
        let predictions = [0.9, 0.8, 0.2, 0.1, 0.7, 0.3];
        let labels = [1, 1, 0, 0, 1, 0];
        let z = [0.9, 0.8, 0.1, 0.0, 0.95, 0.2];
        let g: Vec<f64> = z.to_vec();
        let report = evaluate(&predictions, &labels, &z, &g, 4, (0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(report.accuracy, 1.0);
        assert_eq!(report.model_profile.q(), 4);
        assert_eq!(report.judgment_profile.q(), 4);
        // The stored pieces stay mutually consistent.
        assert_eq!(report.closeness, 1.0 - report.divergence);
        assert_abs_diff_eq!(
            report.combined,
            combined(report.accuracy, report.closeness).unwrap(),
            epsilon = 1e-15
        );
        let again = evaluate(&predictions, &labels, &z, &g, 4, (0.0, 1.0)).unwrap();
        assert_eq!(report.closeness, again.closeness);
    }

    #[test]
    fn profile_table_renders_every_bucket_with_na_gaps() {
        let model = profile(vec![Some(0.25), None, Some(0.75)]);
        let judgment = profile(vec![Some(0.3), None, Some(0.8)]);
        let corrected = profile(vec![Some(0.28), None, Some(0.79)]);
        let table = profile_table(&model, &judgment, Some(&corrected)).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[0],
            "bucket_center\tmodel_mean\tjudgment_mean\tcorrected_mean"
        );
        assert!(lines[2].starts_with("0.5\tNA\tNA\tNA"));
        assert!(lines[3].contains("0.75") && lines[3].contains("0.79"));
        let narrow = profile_table(&model, &judgment, None).unwrap();
        assert!(!narrow.contains("corrected_mean"));
    }
}
