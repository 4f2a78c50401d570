#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_symmetric<R: Rng>(p: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    let g = gaussian_matrix(p, p, rng);
    (&g + g.transpose()) * (0.5 * scale)
}

pub fn random_psd<R: Rng>(p: usize, rng: &mut R) -> DMatrix<f64> {
    let g = gaussian_matrix(p + 3, p, rng);
    g.transpose() * g
}

pub fn random_orthogonal<R: Rng>(p: usize, rng: &mut R) -> DMatrix<f64> {
    gaussian_matrix(p, p, rng).qr().q()
}

/// A random point of the Fantope: random basis, eigenvalues uniform on the simplex.
pub fn random_fantope_point<R: Rng>(p: usize, rng: &mut R) -> DMatrix<f64> {
    let q = random_orthogonal(p, rng);
    let raw: Vec<f64> = (0..p).map(|_| -rng.gen::<f64>().ln()).collect();
    let total: f64 = raw.iter().sum();
    let d = DVector::from_iterator(p, raw.iter().map(|v| v / total));
    &q * DMatrix::from_diagonal(&d) * q.transpose()
}

/// Clipped sum `Σ min(max(λ − γ, 0), 1)` is piecewise linear in `γ`; walk
/// its breakpoints and interpolate the level-one crossing exactly.
pub fn water_fill(values: &[f64]) -> f64 {
    let g = |gamma: f64| {
        values
            .iter()
            .map(|&l| (l - gamma).clamp(0.0, 1.0))
            .sum::<f64>()
    };
    let mut knots: Vec<f64> = values.iter().flat_map(|&l| [l, l - 1.0]).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    // g is non-increasing; find consecutive knots with g(a) >= 1 >= g(b).
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ga, gb) = (g(a), g(b));
        if ga >= 1.0 && gb <= 1.0 {
            if ga == gb {
                return a;
            }
            return a + (ga - 1.0) * (b - a) / (ga - gb);
        }
    }
    unreachable!("the clipped sum runs from p down to 0 across the knots")
}

pub fn fantope_oracle(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(a.clone());
    let gamma = water_fill(eig.eigenvalues.as_slice());
    let d = eig.eigenvalues.map(|l| (l - gamma).clamp(0.0, 1.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Composite Simpson rule with `panels` (even) panels. The end values are
/// one-sided limits, so a jump at an endpoint does not leak in.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels.is_multiple_of(2));
    let h = (b - a) / panels as f64;
    let nudge = 1e-12 * (b - a);
    let mut sum = f(a + nudge) + f(b - nudge);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `E[g(Z)]` by Simpson integration on `[-14, 14]` split at `breaks`.
pub fn gaussian_expectation<F: Fn(f64) -> f64>(g: F, breaks: &[f64]) -> f64 {
    let mut edges = vec![-14.0];
    edges.extend(breaks.iter().copied());
    edges.push(14.0);
    edges
        .windows(2)
        .map(|w| simpson(|z| g(z) * std_normal_pdf(z), w[0], w[1], 20_000))
        .sum()
}

/// Ordinary least squares `y ≈ a + b x`; returns `(a, b, R²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    (intercept, slope, sxy * sxy / (sxx * syy))
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len() / 2;
    if s.len() % 2 == 1 {
        s[k]
    } else {
        0.5 * (s[k - 1] + s[k])
    }
}
