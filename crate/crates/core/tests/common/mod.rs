//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use colav::guidance::PathSpec;
use colav::ppo::PolicyParams;
use nalgebra::Vector2;

/// Sensor-sector pooling written straight from the pseudocode: every sorted
/// index is visited, duplicates included.
pub fn feasibility_oracle(x: &[f64], theta: f64, width: f64) -> f64 {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap());
    for &i in &idx {
        let d = theta * x[i];
        let mut y = d / 2.0;
        let mut found = false;
        for j in 0..x.len() {
            if x[j] > x[i] {
                y += d;
                if y > width {
                    found = true;
                    break;
                }
            } else {
                y += d / 2.0;
                if y > width {
                    found = true;
                    break;
                }
                y = 0.0;
            }
        }
        if !found {
            return x[i];
        }
    }
    x.iter().cloned().fold(f64::MIN, f64::max)
}

/// Minimum distance from `p` to `path` over `n` evenly spaced samples, then
/// golden-section refinement around the best sample.
pub fn grid_min_distance(path: &PathSpec, p: &Vector2<f64>, n: usize) -> f64 {
    let len = path.length();
    let d = |w: f64| (p - path.position(w)).norm();
    let h = len / (n - 1) as f64;
    let (mut best_w, mut best) = (0.0, f64::INFINITY);
    for k in 0..n {
        let w = k as f64 * h;
        let v = d(w);
        if v < best {
            best = v;
            best_w = w;
        }
    }
    let (mut a, mut b) = ((best_w - h).max(0.0), (best_w + h).min(len));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let e = a + g * (b - a);
        if d(c) < d(e) {
            b = e;
        } else {
            a = c;
        }
    }
    best.min(d(0.5 * (a + b)))
}

/// Advantages as explicit discounted sums of TD residuals, truncated at the
/// first episode end.
pub fn gae_oracle(
    r: &[f64],
    v: &[f64],
    done: &[bool],
    last: f64,
    gamma: f64,
    lambda: f64,
) -> Vec<f64> {
    let n = r.len();
    let value_after = |t: usize| {
        if done[t] {
            0.0
        } else if t + 1 < n {
            v[t + 1]
        } else {
            last
        }
    };
    (0..n)
        .map(|t| {
            let mut sum = 0.0;
            let mut w = 1.0;
            for l in t..n {
                let delta = r[l] + gamma * value_after(l) - v[l];
                sum += w * delta;
                if done[l] {
                    break;
                }
                w *= gamma * lambda;
            }
            sum
        })
        .collect()
}

/// Central finite-difference gradient of `f` at `params`.
pub fn numeric_grad(params: &PolicyParams, h: f64, f: impl Fn(&PolicyParams) -> f64) -> Vec<f64> {
    let base = params.to_flat();
    let mut p = params.clone();
    (0..base.len())
        .map(|i| {
            let mut x = base.clone();
            x[i] = base[i] + h;
            p.set_flat(&x);
            let up = f(&p);
            x[i] = base[i] - h;
            p.set_flat(&x);
            let down = f(&p);
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}
