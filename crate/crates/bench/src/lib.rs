//! Shared fixtures for the criterion benches: deterministic datasets,
//! networks, and prediction columns sized like the experiment hot paths.

use accord_core::{
    generate, Activation, DenseNet, FeatureCount, SynthConfig, SynthDataset, SynthForm,
};

/// Sigmoid-form dataset with a fixed feature count; seeds every draw.
pub fn dataset(n: usize, m: usize, seed: u64) -> SynthDataset {
    generate(&SynthConfig {
        n,
        m: FeatureCount::Fixed(m),
        form: SynthForm::SigmoidW1x,
        seed,
        holdout_k_percent: 5.0,
        feature_half_width: None,
    })
    .expect("bench dataset generates")
}

/// Relu-hidden, sigmoid-output network of the discriminator's shape.
pub fn discriminator_shape_net(input_dim: usize, seed: u64) -> DenseNet {
    let dims = [input_dim, 16, 16, 16, 1];
    let acts = [
        Activation::Relu,
        Activation::Relu,
        Activation::Relu,
        Activation::Sigmoid,
    ];
    DenseNet::new(&dims, &acts, 0.0, seed).expect("bench net builds")
}

/// Deterministic pseudo-prediction columns: probabilities, labels, a
/// judgment column in [0, 1], and judgment-function values.
pub fn prediction_columns(n: usize) -> (Vec<f64>, Vec<u8>, Vec<f64>, Vec<f64>) {
    let mut predictions = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for i in 0..n {
        let u = (i as f64 + 0.5) / n as f64;
        let wobble = (i as f64 * 0.7).sin() * 0.2;
        predictions.push((u + wobble).clamp(0.0, 1.0));
        labels.push(u8::from(u > 0.5));
        z.push(u);
        g.push(1.0 - u);
    }
    (predictions, labels, z, g)
}
