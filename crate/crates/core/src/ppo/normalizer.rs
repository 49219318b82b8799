//! Running per-feature observation statistics.

use serde::{Deserialize, Serialize};

/// Normalized features are clipped to this magnitude.
pub const CLIP: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningNorm {
    pub count: f64,
    pub mean: Vec<f64>,
    /// Sum of squared deviations from the mean.
    pub m2: Vec<f64>,
    pub enabled: bool,
}

impl RunningNorm {
    pub fn new(dim: usize, enabled: bool) -> Self {
        Self {
            count: 0.0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
            enabled,
        }
    }

    pub fn std(&self) -> Vec<f64> {
        if self.count < 2.0 {
            return vec![1.0; self.mean.len()];
        }
        self.m2.iter().map(|m| (m / self.count).sqrt()).collect()
    }

    /// Merges a batch using the parallel-variance update.
    pub fn update(&mut self, batch: &[Vec<f64>]) {
        if !self.enabled || batch.is_empty() {
            return;
        }
        let n = batch.len() as f64;
        let dim = self.mean.len();
        let mut bmean = vec![0.0; dim];
        for x in batch {
            for j in 0..dim {
                bmean[j] += x[j] / n;
            }
        }
        let mut bm2 = vec![0.0; dim];
        for x in batch {
            for j in 0..dim {
                bm2[j] += (x[j] - bmean[j]).powi(2);
            }
        }
        let total = self.count + n;
        for j in 0..dim {
            let delta = bmean[j] - self.mean[j];
            self.mean[j] += delta * n / total;
            self.m2[j] += bm2[j] + delta * delta * self.count * n / total;
        }
        self.count = total;
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        if !self.enabled {
            return x.to_vec();
        }
        let std = self.std();
        x.iter()
            .zip(&self.mean)
            .zip(&std)
            .map(|((v, m), s)| ((v - m) / (s + 1e-8)).clamp(-CLIP, CLIP))
            .collect()
    }
}
