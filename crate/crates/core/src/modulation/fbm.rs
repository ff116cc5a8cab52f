//! Fractional Brownian motion by circulant embedding of fractional Gaussian
//! noise, with an exact Cholesky factorization for short paths.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use super::ModulationPath;
use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;

/// Paths with at most this many increments use the Cholesky factorization.
const CHOLESKY_MAX: usize = 64;

/// Autocovariance of unit-spacing fractional Gaussian noise at lag `k`.
fn fgn_autocov(k: usize, hurst: f64) -> f64 {
    let k = k as f64;
    let e = 2.0 * hurst;
    0.5 * ((k - 1.0).abs().powf(e) - 2.0 * k.powf(e) + (k + 1.0).powf(e))
}

/// Samples an fBm path with Hurst index `hurst` at `sample_count` uniform nodes
/// on `[0, horizon]`. The output is a deterministic function of all arguments.
pub fn generate_fbm(
    hurst: f64,
    horizon: f64,
    sample_count: usize,
    seed: u64,
) -> Result<ModulationPath> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return invalid(format!("Hurst index must lie in (0, 1), got {hurst}"));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return invalid(format!("horizon must be positive and finite, got {horizon}"));
    }
    if sample_count < 2 {
        return invalid(format!("need at least 2 samples, got {sample_count}"));
    }
    let m = sample_count - 1;
    let mut rng = rng_from_seed(seed);
    let noise = if m <= CHOLESKY_MAX {
        cholesky_fgn(m, hurst, &mut rng)
    } else {
        circulant_fgn(m, hurst, &mut rng).unwrap_or_else(|| cholesky_fgn(m, hurst, &mut rng))
    };
    let scale = (horizon / m as f64).powf(hurst);
    let mut values = Vec::with_capacity(sample_count);
    let mut acc = 0.0;
    values.push(0.0);
    for x in noise {
        acc += scale * x;
        values.push(acc);
    }
    ModulationPath::from_samples(&values, horizon)
}

/// Davies–Harte synthesis. Returns `None` if the embedding has a clearly
/// negative eigenvalue.
fn circulant_fgn<R: Rng>(m: usize, hurst: f64, rng: &mut R) -> Option<Vec<f64>> {
    let size = 2 * m;
    let mut row: Vec<C64> = (0..size)
        .map(|j| {
            let lag = if j <= m { j } else { size - j };
            C64::new(fgn_autocov(lag, hurst), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(size);
    fft.process(&mut row);
    let max = row.iter().map(|z| z.re).fold(0.0, f64::max);
    if row.iter().any(|z| z.re < -1e-10 * max) {
        return None;
    }
    let mut spec: Vec<C64> = row
        .iter()
        .map(|lam| {
            let amp = (lam.re.max(0.0) / size as f64).sqrt();
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            C64::new(a, b) * amp
        })
        .collect();
    fft.process(&mut spec);
    Some(spec[..m].iter().map(|z| z.re).collect())
}

fn cholesky_fgn<R: Rng>(m: usize, hurst: f64, rng: &mut R) -> Vec<f64> {
    // Lower-triangular factor of the Toeplitz covariance, row-major.
    let mut l = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let mut sum = fgn_autocov(i - j, hurst);
            for k in 0..j {
                sum -= l[i * m + k] * l[j * m + k];
            }
            l[i * m + j] = if i == j {
                sum.max(0.0).sqrt()
            } else if l[j * m + j] > 0.0 {
                sum / l[j * m + j]
            } else {
                0.0
            };
        }
    }
    let z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    (0..m)
        .map(|i| (0..=i).map(|k| l[i * m + k] * z[k]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_arguments() {
        assert!(generate_fbm(0.0, 1.0, 10, 1).is_err());
        assert!(generate_fbm(1.0, 1.0, 10, 1).is_err());
        assert!(generate_fbm(0.5, 0.0, 10, 1).is_err());
        assert!(generate_fbm(0.5, 1.0, 1, 1).is_err());
    }

    #[test]
    fn deterministic_in_seed() {
        let a = generate_fbm(0.3, 1.0, 1025, 7).unwrap();
        let b = generate_fbm(0.3, 1.0, 1025, 7).unwrap();
        let c = generate_fbm(0.3, 1.0, 1025, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.values()[0], 0.0);
    }

    #[test]
    fn autocov_at_zero_is_one() {
        for h in [0.1, 0.5, 0.9] {
            assert!((fgn_autocov(0, h) - 1.0).abs() < 1e-15);
        }
        assert!(fgn_autocov(3, 0.5).abs() < 1e-15);
    }

    fn terminal_variance(hurst: f64, samples: usize, paths: u64) -> f64 {
        let mut acc = 0.0;
        for seed in 0..paths {
            let p = generate_fbm(hurst, 1.0, samples, seed).unwrap();
            let v = p.values()[samples - 1];
            acc += v * v;
        }
        acc / paths as f64
    }

    #[test]
    fn both_generators_have_unit_terminal_variance() {
        // Var w(1) = 1 for every H; 4000 paths give a ~2.2% standard error.
        let chol = terminal_variance(0.3, 33, 4000);
        let circ = terminal_variance(0.3, 257, 4000);
        assert!((chol - 1.0).abs() < 0.1, "cholesky {chol}");
        assert!((circ - 1.0).abs() < 0.1, "circulant {circ}");
    }
}
