use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Largest sample size for which [`PValueMethod::Exact`] enumerates all
/// permutations.
pub const MAX_EXACT_N: usize = 9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueMethod {
    /// Two-sided Student t approximation with `n - 2` degrees of freedom.
    #[default]
    TApprox,
    /// Two-sided permutation p-value over all `n!` orderings.
    Exact,
}

/// 1-based ranks with ties replaced by their average rank.
pub fn average_ranks(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::NonFinite("rank input"));
    }
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && xs[order[j]] == xs[order[i]] {
            j += 1;
        }
        // Positions i..j (0-based) share ranks i+1..=j.
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    Ok(ranks)
}

/// Pearson correlation; errors if either input is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_lengths(xs, ys, 2)?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("first sample"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("second sample"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn check_lengths(xs: &[f64], ys: &[f64], min: usize) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::Shape {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < min {
        return Err(Error::InvalidArgument(format!(
            "need at least {min} paired observations, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sample"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub rho: f64,
    pub p_value: f64,
}

/// Spearman rank correlation with the default t-approximation p-value.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<Correlation> {
    spearman_rho_with(xs, ys, PValueMethod::TApprox)
}

pub fn spearman_rho_with(xs: &[f64], ys: &[f64], method: PValueMethod) -> Result<Correlation> {
    check_lengths(xs, ys, 3)?;
    let rx = average_ranks(xs)?;
    let ry = average_ranks(ys)?;
    let rho = pearson(&rx, &ry)?;
    let p_value = match method {
        PValueMethod::TApprox => t_approx_p(rho, xs.len()),
        PValueMethod::Exact => permutation_p(&rx, &ry, rho)?,
    };
    Ok(Correlation { rho, p_value })
}

fn t_approx_p(rho: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    two_sided(t, df)
}

fn two_sided(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

fn permutation_p(rx: &[f64], ry: &[f64], rho: f64) -> Result<f64> {
    let n = rx.len();
    if n > MAX_EXACT_N {
        return Err(Error::InvalidArgument(format!(
            "exact p-value supports n <= {MAX_EXACT_N}, got {n}"
        )));
    }
    let target = rho.abs() - 1e-12;
    let mut perm: Vec<usize> = (0..n).collect();
    let (mut hits, mut total) = (0u64, 0u64);
    let mut permuted = vec![0.0; n];
    loop {
        for (dst, &i) in permuted.iter_mut().zip(&perm) {
            *dst = ry[i];
        }
        if pearson(rx, &permuted)?.abs() >= target {
            hits += 1;
        }
        total += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(hits as f64 / total as f64)
}

fn next_permutation(a: &mut [usize]) -> bool {
    let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else {
        return false;
    };
    let j = (i..a.len())
        .rev()
        .find(|&j| a[j] > a[i - 1])
        .expect("exists");
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

/// Welch's unequal-variance two-sample t-test, two-sided.
pub fn two_sample_t_test(xs: &[f64], ys: &[f64]) -> Result<TTest> {
    for s in [xs, ys] {
        if s.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "each sample needs at least 2 values, got {}",
                s.len()
            )));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sample"));
        }
    }
    let moments = |s: &[f64]| {
        let n = s.len() as f64;
        let m = s.iter().sum::<f64>() / n;
        let var = s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (n, m, var)
    };
    let (nx, mx, vx) = moments(xs);
    let (ny, my, vy) = moments(ys);
    let (ax, ay) = (vx / nx, vy / ny);
    let se2 = ax + ay;
    if se2 == 0.0 {
        return Err(Error::ZeroVariance("both samples"));
    }
    let t = (mx - my) / se2.sqrt();
    let df = se2 * se2 / (ax * ax / (nx - 1.0) + ay * ay / (ny - 1.0));
    Ok(TTest {
        t,
        df,
        p_value: two_sided(t, df),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 20.0, 5.0]).unwrap(),
            vec![2.0, 3.5, 3.5, 1.0]
        );
        assert_eq!(average_ranks(&[1.0, 1.0, 1.0]).unwrap(), vec![2.0; 3]);
        assert!(average_ranks(&[f64::NAN]).is_err());
    }

    #[test]
    fn spearman_extremes() {
        let up = spearman_rho(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap();
        assert!((up.rho - 1.0).abs() < 1e-12);
        let down = spearman_rho(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert!((down.rho + 1.0).abs() < 1e-12);
        assert!(spearman_rho(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(spearman_rho(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
        assert!(matches!(
            spearman_rho(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]),
            Err(Error::ZeroVariance(_))
        ));
    }

    #[test]
    fn exact_permutation_small_n() {
        // n = 4, perfect agreement: 2 of 24 orderings reach |rho| = 1.
        let c = spearman_rho_with(
            &[1.0, 2.0, 3.0, 4.0],
            &[1.0, 2.0, 3.0, 4.0],
            PValueMethod::Exact,
        )
        .unwrap();
        assert!((c.p_value - 2.0 / 24.0).abs() < 1e-15);
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        assert!(spearman_rho_with(&xs, &xs, PValueMethod::Exact).is_err());
    }

    #[test]
    fn welch_basics() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let same = two_sample_t_test(&xs, &xs).unwrap();
        assert_eq!(same.t, 0.0);
        assert_eq!(same.p_value, 1.0);
        let ys: Vec<f64> = xs.iter().map(|x| x + 1.5).collect();
        let a = two_sample_t_test(&xs, &ys).unwrap();
        let b = two_sample_t_test(&ys, &xs).unwrap();
        assert_eq!(a.t, -b.t);
        assert_eq!(a.p_value, b.p_value);
        assert!(two_sample_t_test(&[1.0, 1.0], &[2.0, 2.0]).is_err());
        assert!(two_sample_t_test(&[1.0], &[2.0, 3.0]).is_err());
    }
}
