//! Adversarial estimator of the expert's judgment variable.
//!
//! A generator maps the non-judgment features s to an estimate of the
//! normalized judgment value; a discriminator scores (s, z) pairs as real or
//! generated. Training alternates per mini-batch: the generator first
//! descends mean log(1 - D(s, G(s))), then the discriminator descends
//! mean of -log D(s, z) - log(1 - D(s, G(s))) on the same batch. There is no
//! explicit convergence test; the epoch budget is the stopping rule. After
//! training, how far an observed judgment value sits from the generator's
//! estimate (in normalized judgment space) is the trust signal consumed by
//! the correction step.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::neural::{AdamState, Activation, DenseNet, Gradients, TrainConfig};
use crate::{Error, Result};

// Discriminator outputs are clamped into [EPS, 1-EPS] before logs so a
// saturated sigmoid cannot produce infinite losses or gradients.
const EPS: f64 = 1e-12;

/// Min-max scaler fitted on the training judgment column. Values outside the
/// training range map outside [0, 1] on purpose: an unseen judgment regime
/// must register as distant, not get clipped into familiarity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZScaler {
    pub min: f64,
    pub max: f64,
}

impl ZScaler {
    pub fn fit(z: &[f64]) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::Data("cannot fit a judgment scaler on zero rows".into()));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("judgment column contains non-finite values".into()));
        }
        let min = z.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if min == max {
            return Err(Error::DegenerateScale(format!(
                "judgment column is constant at {min}; its scale carries no information"
            )));
        }
        Ok(ZScaler { min, max })
    }

    pub fn normalize(&self, z: f64) -> f64 {
        (z - self.min) / (self.max - self.min)
    }

    pub fn denormalize(&self, u: f64) -> f64 {
        u * (self.max - self.min) + self.min
    }
}

/// Fit a scaler on a training judgment column and return it together with the
/// normalized column.
pub fn normalize_judgment(z_train: &[f64]) -> Result<(ZScaler, Vec<f64>)> {
    let scaler = ZScaler::fit(z_train)?;
    Ok((scaler, z_train.iter().map(|&v| scaler.normalize(v)).collect()))
}

/// Split a full feature row into (context features, judgment value).
pub fn split_judgment(x: &[f64], judgment_index: usize) -> Result<(Vec<f64>, f64)> {
    if judgment_index >= x.len() {
        return Err(Error::Shape(format!(
            "judgment index {judgment_index} out of range for {} features",
            x.len()
        )));
    }
    let mut s = Vec::with_capacity(x.len() - 1);
    s.extend_from_slice(&x[..judgment_index]);
    s.extend_from_slice(&x[judgment_index + 1..]);
    Ok((s, x[judgment_index]))
}

/// Architecture and optimization settings for the adversarial estimator.
#[derive(Clone, Copy, Debug)]
pub struct EjGanConfig {
    pub train: TrainConfig,
    /// Dense layers in the generator, all relu including the output.
    pub generator_layers: usize,
    /// Dense layers in the discriminator: relu hidden, sigmoid output.
    pub discriminator_layers: usize,
    pub learn_rate: f64,
    /// Generator objective. `true` (default) trains the generator by
    /// descending -log D(s, G(s)), which keeps its gradient scale healthy even
    /// while the discriminator is ahead. `false` selects the textbook minimax
    /// form, descending log(1 - D(s, G(s))); under this optimizer budget that
    /// form starves once the discriminator wins and tends to collapse the
    /// generator into the dead-relu region, so it is opt-in only.
    pub non_saturating: bool,
}

impl Default for EjGanConfig {
    fn default() -> Self {
        EjGanConfig {
            train: TrainConfig::default(),
            generator_layers: 2,
            discriminator_layers: 4,
            learn_rate: 0.01,
            non_saturating: true,
        }
    }
}

/// Per-epoch mean adversarial losses, one entry per completed epoch.
#[derive(Clone, Debug)]
pub struct GanTrainLog {
    pub generator_loss: Vec<f64>,
    pub discriminator_loss: Vec<f64>,
    pub batches_per_epoch: usize,
}

/// Trained adversarial judgment estimator.
#[derive(Clone, Debug)]
pub struct EjGan {
    pub(crate) generator: DenseNet,
    pub(crate) discriminator: DenseNet,
    pub(crate) scaler: ZScaler,
    pub(crate) config: EjGanConfig,
}

fn layer_dims(input: usize, hidden: usize, layers: usize) -> Vec<usize> {
    let mut dims = Vec::with_capacity(layers + 1);
    dims.push(input);
    for _ in 0..layers - 1 {
        dims.push(hidden);
    }
    dims.push(1);
    dims
}

impl EjGan {
    /// Train generator and discriminator on context rows `s` and their
    /// judgment column `z`. Rows beyond the last full mini-batch of an epoch
    /// are skipped; each epoch reshuffles, so all rows participate over time.
    pub fn train(s: &[Vec<f64>], z: &[f64], config: EjGanConfig) -> Result<(Self, GanTrainLog)> {
        if s.len() != z.len() {
            return Err(Error::Shape(format!(
                "{} context rows vs {} judgment values",
                s.len(),
                z.len()
            )));
        }
        if s.is_empty() {
            return Err(Error::Data("cannot train on zero rows".into()));
        }
        let s_dim = s[0].len();
        if s_dim == 0 {
            return Err(Error::Config(
                "adversarial estimator needs at least one context feature".into(),
            ));
        }
        if s.iter().any(|row| row.len() != s_dim) {
            return Err(Error::Shape("ragged context rows".into()));
        }
        if s.iter().any(|row| row.iter().any(|v| !v.is_finite())) {
            return Err(Error::Data("context features contain non-finite values".into()));
        }
        if config.generator_layers == 0 || config.discriminator_layers == 0 {
            return Err(Error::Config("layer counts must be positive".into()));
        }
        let tc = config.train;
        if tc.batch_size == 0 || tc.max_epochs == 0 {
            return Err(Error::Config("batch size and epoch budget must be positive".into()));
        }
        if s.len() < tc.batch_size {
            return Err(Error::Config(format!(
                "{} rows cannot fill one mini-batch of {}",
                s.len(),
                tc.batch_size
            )));
        }

        let (scaler, z_norm) = normalize_judgment(z)?;

        let mut master = ChaCha8Rng::seed_from_u64(tc.seed);
        let g_seed: u64 = master.gen();
        let d_seed: u64 = master.gen();
        let g_dims = layer_dims(s_dim, tc.hidden_size, config.generator_layers);
        let g_acts = vec![Activation::Relu; config.generator_layers];
        let mut generator = DenseNet::new(&g_dims, &g_acts, tc.dropout, g_seed)?;
        let d_dims = layer_dims(s_dim + 1, tc.hidden_size, config.discriminator_layers);
        let mut d_acts = vec![Activation::Relu; config.discriminator_layers];
        *d_acts.last_mut().unwrap() = Activation::Sigmoid;
        let mut discriminator = DenseNet::new(&d_dims, &d_acts, tc.dropout, d_seed)?;
        let mut adam_g = AdamState::new(&generator, config.learn_rate);
        let mut adam_d = AdamState::new(&discriminator, config.learn_rate);

        generator.set_training(true);
        discriminator.set_training(true);

        let n = s.len();
        let batches_per_epoch = n / tc.batch_size;
        let mut order: Vec<usize> = (0..n).collect();
        let mut log = GanTrainLog {
            generator_loss: Vec::with_capacity(tc.max_epochs),
            discriminator_loss: Vec::with_capacity(tc.max_epochs),
            batches_per_epoch,
        };
        let inv_m = 1.0 / tc.batch_size as f64;

        for epoch in 0..tc.max_epochs {
            order.shuffle(&mut master);
            let mut epoch_g = 0.0;
            let mut epoch_d = 0.0;
            for batch in order.chunks_exact(tc.batch_size) {
                // Generator step: descend the mean saturating loss
                // log(1 - D(s, G(s))) (or -log D with the non-saturating
                // flag), backpropagating through the discriminator into the
                // generator without touching discriminator parameters.
                let mut g_grads = Gradients::zeros_like(&generator);
                let mut batch_g_loss = 0.0;
                for &i in batch {
                    let g_trace = generator.forward_traced(&s[i])?;
                    let ghat = g_trace.output[0];
                    let mut d_in = s[i].clone();
                    d_in.push(ghat);
                    let d_trace = discriminator.forward_traced(&d_in)?;
                    let d = d_trace.output[0].clamp(EPS, 1.0 - EPS);
                    let (loss, dloss_dd) = if config.non_saturating {
                        (-d.ln(), -1.0 / d)
                    } else {
                        ((1.0 - d).ln_1p_neg(), -1.0 / (1.0 - d))
                    };
                    batch_g_loss += loss;
                    let (_, d_input_grad) = discriminator.backward(&d_trace, &[dloss_dd])?;
                    let dloss_dghat = d_input_grad[s_dim];
                    let (per_sample, _) = generator.backward(&g_trace, &[dloss_dghat])?;
                    g_grads.add_assign(&per_sample);
                }
                g_grads.scale(inv_m);
                adam_g.update(&mut generator, &g_grads)?;
                epoch_g += batch_g_loss * inv_m;

                // Discriminator step on the same batch, with fakes drawn from
                // the just-updated generator.
                let mut d_grads = Gradients::zeros_like(&discriminator);
                let mut batch_d_loss = 0.0;
                for &i in batch {
                    let mut real_in = s[i].clone();
                    real_in.push(z_norm[i]);
                    let real_trace = discriminator.forward_traced(&real_in)?;
                    let d_real = real_trace.output[0].clamp(EPS, 1.0 - EPS);
                    batch_d_loss += -d_real.ln();
                    let (gr, _) = discriminator.backward(&real_trace, &[-1.0 / d_real])?;
                    d_grads.add_assign(&gr);

                    let ghat = generator.forward(&s[i])?[0];
                    let mut fake_in = s[i].clone();
                    fake_in.push(ghat);
                    let fake_trace = discriminator.forward_traced(&fake_in)?;
                    let d_fake = fake_trace.output[0].clamp(EPS, 1.0 - EPS);
                    batch_d_loss += -(1.0 - d_fake).ln();
                    let (gf, _) = discriminator.backward(&fake_trace, &[1.0 / (1.0 - d_fake)])?;
                    d_grads.add_assign(&gf);
                }
                d_grads.scale(inv_m);
                adam_d.update(&mut discriminator, &d_grads)?;
                epoch_d += batch_d_loss * inv_m;
            }
            let mean_g = epoch_g / batches_per_epoch as f64;
            let mean_d = epoch_d / batches_per_epoch as f64;
            if !mean_g.is_finite() || !mean_d.is_finite() {
                return Err(Error::Divergence(format!(
                    "non-finite adversarial loss at epoch {epoch}"
                )));
            }
            log.generator_loss.push(mean_g);
            log.discriminator_loss.push(mean_d);
        }

        generator.set_training(false);
        discriminator.set_training(false);
        Ok((EjGan { generator, discriminator, scaler, config }, log))
    }

    /// Expected judgment value for a context row, in original units.
    pub fn estimate(&self, s: &[f64]) -> Result<f64> {
        Ok(self.scaler.denormalize(self.normalized_estimate(s)?))
    }

    /// Generator output for a context row: the expected judgment value in
    /// normalized space. Non-negative by the final relu.
    pub fn normalized_estimate(&self, s: &[f64]) -> Result<f64> {
        Ok(self.generator.infer(s)?[0])
    }

    /// Distance between the observed judgment value inside `x` and its
    /// estimate from the remaining features, measured in normalized space.
    pub fn distance_k(&self, x: &[f64], judgment_index: usize) -> Result<f64> {
        let (s, z) = split_judgment(x, judgment_index)?;
        let expected = self.normalized_estimate(&s)?;
        Ok((expected - self.scaler.normalize(z)).abs())
    }

    pub fn scaler(&self) -> ZScaler {
        self.scaler
    }

    pub fn config(&self) -> &EjGanConfig {
        &self.config
    }

    pub fn context_dim(&self) -> usize {
        self.generator.input_dim()
    }
}

// ln(1 - d) written as ln_1p(-d) for precision near d = 0.
trait Ln1pNeg {
    fn ln_1p_neg(self) -> f64;
}

impl Ln1pNeg for f64 {
    fn ln_1p_neg(self) -> f64 {
        // self is already 1 - d; plain ln is fine because d is clamped away
        // from 1, but route tiny arguments through ln_1p for the record.
        if self > 0.5 {
            (self - 1.0).ln_1p()
        } else {
            self.ln()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Layer;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn constant_generator_gan(s_dim: usize, constant_norm: f64, scaler: ZScaler) -> EjGan {
        // Zero weights throughout; the final bias carries the constant. The
        // relu output leaves a non-negative constant untouched.
        let hidden = 4;
        let l0 = Layer {
            in_dim: s_dim,
            out_dim: hidden,
            activation: Activation::Relu,
            weights: vec![0.0; s_dim * hidden],
            biases: vec![0.0; hidden],
        };
        let l1 = Layer {
            in_dim: hidden,
            out_dim: 1,
            activation: Activation::Relu,
            weights: vec![0.0; hidden],
            biases: vec![constant_norm],
        };
        let generator = DenseNet::from_layers(vec![l0, l1], 0.0, 0);
        let d0 = Layer {
            in_dim: s_dim + 1,
            out_dim: 1,
            activation: Activation::Sigmoid,
            weights: vec![0.0; s_dim + 1],
            biases: vec![0.0],
        };
        let discriminator = DenseNet::from_layers(vec![d0], 0.0, 0);
        EjGan {
            generator,
            discriminator,
            scaler,
            config: EjGanConfig::default(),
        }
    }

    #[test]
    fn scaler_maps_endpoints_and_extrapolates() {
        let (scaler, z_norm) = normalize_judgment(&[2.0, 6.0, 4.0]).unwrap();
        assert_eq!(z_norm, vec![0.0, 1.0, 0.5]);
        // Values above the training maximum map above 1 by design.
        assert_relative_eq!(scaler.normalize(8.0), 1.5, epsilon = 1e-12);
        assert_relative_eq!(scaler.denormalize(1.5), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn scaler_rejects_constant_column() {
        assert!(matches!(ZScaler::fit(&[3.0, 3.0, 3.0]), Err(Error::DegenerateScale(_))));
    }

    #[test]
    fn split_judgment_extracts_column() {
        let (s, z) = split_judgment(&[1.0, 2.0, 3.0], 1).unwrap();
        assert_eq!(s, vec![1.0, 3.0]);
        assert_eq!(z, 2.0);
        assert!(split_judgment(&[1.0], 1).is_err());
    }

    #[test]
    fn estimate_denormalizes_generator_output() {
        let gan = constant_generator_gan(3, 0.25, ZScaler { min: 0.0, max: 40.0 });
        assert_relative_eq!(gan.estimate(&[9.0, 9.0, 9.0]).unwrap(), 10.0, epsilon = 1e-12);
        let lo = constant_generator_gan(3, 0.0, ZScaler { min: 2.0, max: 5.0 });
        assert_relative_eq!(lo.estimate(&[0.0; 3]).unwrap(), 2.0, epsilon = 1e-12);
        let hi = constant_generator_gan(3, 1.0, ZScaler { min: 2.0, max: 5.0 });
        assert_relative_eq!(hi.estimate(&[0.0; 3]).unwrap(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn distance_k_is_normalized_gap() {
        let gan = constant_generator_gan(2, 0.25, ZScaler { min: 0.0, max: 40.0 });
        // Row judgment 30 normalizes to 0.75; |0.25 - 0.75| = 0.5.
        let k = gan.distance_k(&[1.0, 30.0, 2.0], 1).unwrap();
        assert_relative_eq!(k, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn train_validates_inputs() {
        let cfg = EjGanConfig { train: TrainConfig { max_epochs: 1, ..Default::default() }, ..Default::default() };
        let rows = vec![vec![0.0_f64]; 4];
        let z = vec![0.0, 1.0, 0.5, 0.25];
        // Fewer rows than one mini-batch.
        assert!(matches!(EjGan::train(&rows, &z, cfg), Err(Error::Config(_))));
        // Mismatched lengths.
        let cfg8 = EjGanConfig {
            train: TrainConfig { max_epochs: 1, batch_size: 2, ..Default::default() },
            ..Default::default()
        };
        assert!(matches!(EjGan::train(&rows, &z[..3], cfg8), Err(Error::Shape(_))));
        // Constant judgment column.
        assert!(matches!(
            EjGan::train(&rows, &[2.0, 2.0, 2.0, 2.0], cfg8),
            Err(Error::DegenerateScale(_))
        ));
        // Zero-width context rows.
        let empty_rows = vec![vec![]; 4];
        assert!(matches!(EjGan::train(&empty_rows, &z, cfg8), Err(Error::Config(_))));
    }

    #[test]
    fn epoch_log_lengths_and_batch_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 800;
        let s: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let z: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let cfg = EjGanConfig {
            train: TrainConfig { max_epochs: 3, hidden_size: 4, ..Default::default() },
            ..Default::default()
        };
        let (_, log) = EjGan::train(&s, &z, cfg).unwrap();
        assert_eq!(log.batches_per_epoch, 100);
        assert_eq!(log.generator_loss.len(), 3);
        assert_eq!(log.discriminator_loss.len(), 3);
        assert!(log.generator_loss.iter().all(|l| l.is_finite()));
        assert!(log.discriminator_loss.iter().all(|l| l.is_finite()));
    }

    #[test]
    fn training_is_seed_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s: Vec<Vec<f64>> = (0..64).map(|_| vec![rng.gen::<f64>(); 3]).collect();
        let z: Vec<f64> = (0..64).map(|_| rng.gen::<f64>()).collect();
        let cfg = EjGanConfig {
            train: TrainConfig { max_epochs: 5, hidden_size: 4, seed: 77, ..Default::default() },
            ..Default::default()
        };
        let (a, log_a) = EjGan::train(&s, &z, cfg).unwrap();
        let (b, log_b) = EjGan::train(&s, &z, cfg).unwrap();
        assert_eq!(a.generator.layers(), b.generator.layers());
        assert_eq!(a.discriminator.layers(), b.discriminator.layers());
        assert_eq!(log_a.generator_loss, log_b.generator_loss);
    }

    #[test]
    fn outputs_respect_activation_ranges_after_training() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s: Vec<Vec<f64>> = (0..64)
            .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let z: Vec<f64> = (0..64).map(|_| rng.gen::<f64>()).collect();
        let cfg = EjGanConfig {
            train: TrainConfig { max_epochs: 20, hidden_size: 8, seed: 3, ..Default::default() },
            ..Default::default()
        };
        let (gan, _) = EjGan::train(&s, &z, cfg).unwrap();
        for _ in 0..50 {
            let probe: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let g = gan.normalized_estimate(&probe).unwrap();
            assert!(g >= 0.0 && g.is_finite());
            let mut d_in = probe.clone();
            d_in.push(rng.gen::<f64>());
            let d = gan.discriminator.infer(&d_in).unwrap()[0];
            assert!(d > 0.0 && d < 1.0);
        }
    }

    #[test]
    fn minimax_objective_stays_finite() {
        // The opt-in log(1 - D) generator objective must train without
        // numerical blowups and produce a distinct model from the default.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let s: Vec<Vec<f64>> = (0..64).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let z: Vec<f64> = s.iter().map(|r| (r[0] + r[1]) / 2.0).collect();
        let tc = TrainConfig { max_epochs: 10, hidden_size: 4, seed: 21, ..Default::default() };
        let cfg = EjGanConfig { train: tc, non_saturating: false, ..Default::default() };
        let (gan, log) = EjGan::train(&s, &z, cfg).unwrap();
        assert_eq!(log.generator_loss.len(), 10);
        assert!(log.generator_loss.iter().all(|l| l.is_finite()));
        assert!(gan.normalized_estimate(&[0.5, 0.5]).unwrap().is_finite());

        let default_cfg = EjGanConfig { train: tc, ..Default::default() };
        let (gan2, _) = EjGan::train(&s, &z, default_cfg).unwrap();
        assert_ne!(
            gan.normalized_estimate(&[0.25, 0.75]).unwrap(),
            gan2.normalized_estimate(&[0.25, 0.75]).unwrap(),
            "objective flag had no effect on training"
        );
    }

    // Small dense linear solver used only as a test oracle.
    fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
            a.swap(col, pivot);
            b.swap(col, pivot);
            let p = a[col][col];
            for row in col + 1..n {
                let f = a[row][col] / p;
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut acc = b[row];
            for k in row + 1..n {
                acc -= a[row][k] * x[k];
            }
            x[row] = acc / a[row][row];
        }
        x
    }

    fn ols_residual(s: &[Vec<f64>], t: &[f64]) -> f64 {
        // Least squares with intercept; returns mean absolute residual.
        let n = s.len();
        let m = s[0].len() + 1;
        let row = |i: usize| -> Vec<f64> {
            let mut r = vec![1.0];
            r.extend_from_slice(&s[i]);
            r
        };
        let mut xtx = vec![vec![0.0; m]; m];
        let mut xty = vec![0.0; m];
        for i in 0..n {
            let r = row(i);
            for a in 0..m {
                for b in 0..m {
                    xtx[a][b] += r[a] * r[b];
                }
                xty[a] += r[a] * t[i];
            }
        }
        let beta = solve(xtx, xty);
        let mut err = 0.0;
        for i in 0..n {
            let pred: f64 = row(i).iter().zip(&beta).map(|(a, b)| a * b).sum();
            err += (pred - t[i]).abs();
        }
        err / n as f64
    }

    #[test]
    fn recovers_deterministic_judgment_relation() {
        // z is exactly the mean of four uniform context features. A least
        // squares oracle certifies the task is linearly solvable to machine
        // precision; the adversarial estimator must get within 0.1 mean
        // absolute error in normalized space on held-out rows.
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let total = 600;
        let rows: Vec<Vec<f64>> =
            (0..total).map(|_| (0..4).map(|_| rng.gen::<f64>()).collect()).collect();
        let z: Vec<f64> = rows.iter().map(|r| r.iter().sum::<f64>() / 4.0).collect();
        let (train_s, test_s) = rows.split_at(500);
        let (train_z, test_z) = z.split_at(500);

        let scaler = ZScaler::fit(train_z).unwrap();
        let test_norm: Vec<f64> = test_z.iter().map(|&v| scaler.normalize(v)).collect();
        let oracle = ols_residual(
            &train_s.to_vec(),
            &train_z.iter().map(|&v| scaler.normalize(v)).collect::<Vec<_>>(),
        );
        assert!(oracle < 1e-10, "oracle residual {oracle}");

        let cfg = EjGanConfig {
            train: TrainConfig { seed: 4242, ..Default::default() },
            ..Default::default()
        };
        let (gan, _) = EjGan::train(&train_s.to_vec(), train_z, cfg).unwrap();
        let mut err = 0.0;
        for (srow, &target) in test_s.iter().zip(&test_norm) {
            err += (gan.normalized_estimate(srow).unwrap() - target).abs();
        }
        err /= test_s.len() as f64;
        assert!(err < 0.1, "held-out mean absolute error {err}");

        // The trained estimator must also beat the constant mean predictor.
        let mean_norm =
            train_z.iter().map(|&v| scaler.normalize(v)).sum::<f64>() / train_z.len() as f64;
        let mut mse_gan = 0.0;
        let mut mse_mean = 0.0;
        for (srow, &target) in test_s.iter().zip(&test_norm) {
            let g = gan.normalized_estimate(srow).unwrap();
            mse_gan += (g - target) * (g - target);
            mse_mean += (mean_norm - target) * (mean_norm - target);
        }
        assert!(mse_gan < mse_mean, "generator mse {mse_gan} vs mean mse {mse_mean}");
    }

    #[test]
    fn independent_noise_stays_inside_judgment_band() {
        // With z independent of s there is no signal to extract. A generator
        // whose training-time samples match the uniform judgment marginal has
        // expected |G(s) - 0.5| of 0.25; one that collapses to a constant at
        // an edge of the range sits at 0.5. Averaged over seeds the gap must
        // stay clearly below the collapse level, and every estimate must stay
        // finite and non-negative.
        let mut gap_sum = 0.0;
        let seeds = 10;
        for seed in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
            let n = 100;
            let s: Vec<Vec<f64>> =
                (0..n).map(|_| (0..4).map(|_| rng.gen::<f64>()).collect()).collect();
            let z: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let cfg = EjGanConfig {
                train: TrainConfig { seed: 7000 + seed, ..Default::default() },
                ..Default::default()
            };
            let (gan, _) = EjGan::train(&s, &z, cfg).unwrap();
            let mut gap = 0.0;
            for row in &s {
                let g = gan.normalized_estimate(row).unwrap();
                assert!(g.is_finite() && g >= 0.0);
                gap += (g - 0.5).abs();
            }
            gap_sum += gap / n as f64;
        }
        let mean_gap = gap_sum / seeds as f64;
        assert!(mean_gap < 0.4, "mean |G(s) - 0.5| over seeds = {mean_gap}");
    }
}
