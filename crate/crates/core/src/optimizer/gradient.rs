use rand::RngExt;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::objective::{CostEstimate, Objective};
use crate::error::{Error, Result};
use crate::rng::{self, domain};

/// A direction drawn uniformly from the unit sphere in `R^dim`.
pub fn sample_unit_vector(dim: usize, seed: u64) -> Result<Vec<f64>> {
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "direction dimension must be >= 1".into(),
        ));
    }
    let mut rng = rng::rng_from_seed(seed);
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return Ok(v.into_iter().map(|x| x / norm).collect());
        }
    }
}

/// Random directions for one gradient estimate.
pub fn sample_directions(dim: usize, n_dirs: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    (0..n_dirs as u64)
        .map(|i| sample_unit_vector(dim, rng::mix(seed, &[domain::DIRECTION, i])))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub gradient: Vec<f64>,
    /// Objective at the unperturbed point.
    pub baseline: CostEstimate,
    pub perturbed: Vec<CostEstimate>,
}

/// Seed used to evaluate the unperturbed point of an estimate seeded with
/// `seed`. Perturbed points share it when common random numbers are on.
pub fn baseline_seed(seed: u64) -> u64 {
    rng::mix(seed, &[domain::EVALUATION])
}

fn point_seed(seed: u64, j: usize, common: bool) -> u64 {
    if common {
        baseline_seed(seed)
    } else {
        rng::mix(seed, &[domain::EVALUATION, j as u64])
    }
}

/// Forward-difference estimate along explicit directions:
/// `dim / (delta * n) * sum_i (l(z + delta v_i) - l(z)) v_i`.
pub fn estimate_along<O: Objective + ?Sized>(
    objective: &O,
    z: &[f64],
    directions: &[Vec<f64>],
    delta: f64,
    seed: u64,
    common_random_numbers: bool,
) -> Result<GradientEstimate> {
    let dim = objective.dim();
    if z.len() != dim {
        return Err(Error::Shape {
            expected: dim,
            actual: z.len(),
        });
    }
    if directions.is_empty() {
        return Err(Error::InvalidArgument("n_dirs must be >= 1".into()));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if let Some(v) = directions.iter().find(|v| v.len() != dim) {
        return Err(Error::Shape {
            expected: dim,
            actual: v.len(),
        });
    }
    let mut jobs = Vec::with_capacity(directions.len() + 1);
    jobs.push((z.to_vec(), baseline_seed(seed)));
    for (j, v) in directions.iter().enumerate() {
        let zp = z.iter().zip(v).map(|(a, b)| a + delta * b).collect();
        jobs.push((zp, point_seed(seed, j + 1, common_random_numbers)));
    }
    let mut values = objective.evaluate_many(&jobs)?;
    let baseline = values.remove(0);
    let scale = dim as f64 / (delta * directions.len() as f64);
    let mut gradient = vec![0.0; dim];
    for (v, l) in directions.iter().zip(&values) {
        let diff = l.mean - baseline.mean;
        for (g, x) in gradient.iter_mut().zip(v) {
            *g += scale * diff * x;
        }
    }
    if gradient.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient estimate"));
    }
    Ok(GradientEstimate {
        gradient,
        baseline,
        perturbed: values,
    })
}

/// Zeroth-order gradient estimate at `z` with `n_dirs` fresh random
/// directions derived from `seed`.
pub fn estimate_gradient<O: Objective + ?Sized>(
    objective: &O,
    z: &[f64],
    n_dirs: usize,
    delta: f64,
    seed: u64,
    common_random_numbers: bool,
) -> Result<GradientEstimate> {
    let dirs = sample_directions(objective.dim(), n_dirs, seed)?;
    estimate_along(objective, z, &dirs, delta, seed, common_random_numbers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::QuadraticHook;

    #[test]
    fn unit_vectors() {
        for dim in [1, 2, 7, 59] {
            let v = sample_unit_vector(dim, 3).unwrap();
            let n: f64 = v.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
            assert_eq!(v, sample_unit_vector(dim, 3).unwrap());
        }
        assert_ne!(
            sample_unit_vector(5, 1).unwrap(),
            sample_unit_vector(5, 2).unwrap()
        );
        assert!(sample_unit_vector(0, 1).is_err());
    }

    #[test]
    fn antithetic_pair_recovers_quadratic_gradient() {
        // Directions e and -e: the forward differences sum to delta^2, the
        // linear terms cancel exactly.
        let q = QuadraticHook { dim: 3 };
        let z = [0.5, -1.0, 2.0];
        let e = sample_unit_vector(3, 11).unwrap();
        let neg: Vec<f64> = e.iter().map(|x| -x).collect();
        let est = estimate_along(&q, &z, &[e.clone(), neg], 1e-3, 0, true).unwrap();
        let dot: f64 = z.iter().zip(&e).map(|(a, b)| a * b).sum();
        for (g, x) in est.gradient.iter().zip(&e) {
            assert!((g - 3.0 * dot * x).abs() < 1e-9, "{g} vs {}", 3.0 * dot * x);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let q = QuadraticHook { dim: 2 };
        assert!(estimate_gradient(&q, &[0.0; 3], 4, 0.01, 0, true).is_err());
        assert!(estimate_gradient(&q, &[0.0; 2], 0, 0.01, 0, true).is_err());
        assert!(estimate_gradient(&q, &[0.0; 2], 4, 0.0, 0, true).is_err());
        assert!(estimate_gradient(&q, &[f64::NAN, 0.0], 4, 0.01, 0, true).is_err());
    }
}
