//! Dense complex polynomials in ascending-degree coefficient form.
//!
//! Root finding is simultaneous (Aberth–Ehrlich) with a companion-matrix
//! eigenvalue fallback for the rare cases where the iteration stalls.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("root finder did not converge in {iterations} iterations (degree {degree})")]
    NoConvergence { degree: usize, iterations: usize },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
}

/// Horner evaluation.
pub fn eval(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Value and first derivative in one pass.
pub fn eval_with_derivative(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect()
}

/// Drops trailing coefficients with modulus `<= tol * max|c|`.
pub fn trim(coeffs: &[C64], rel_tol: f64) -> Vec<C64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut out = coeffs.to_vec();
    while let Some(last) = out.last() {
        if last.norm() <= rel_tol * scale || last.norm() == 0.0 {
            out.pop();
        } else {
            break;
        }
    }
    out
}

pub fn degree(coeffs: &[C64]) -> Option<usize> {
    coeffs.iter().rposition(|c| c.norm() != 0.0)
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or_default() + b.get(k).copied().unwrap_or_default())
        .collect()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|&c| c * s).collect()
}

/// Coefficients of `p(z + center)`, i.e. the Taylor expansion at `center`.
pub fn taylor_shift(coeffs: &[C64], center: C64) -> Vec<C64> {
    let mut c = coeffs.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let upper = c[j + 1];
            c[j] += center * upper;
        }
    }
    c
}

/// All complex roots of a polynomial, with multiplicity.
///
/// Trailing (leading-degree) zeros are ignored; a constant nonzero
/// polynomial has no roots.
pub fn roots(coeffs: &[C64]) -> Result<Vec<C64>, RootError> {
    roots_with_guess(coeffs, None)
}

/// Root finding warm-started from an approximation of the roots. The guess is
/// used only when its length matches the degree.
pub fn roots_with_guess(coeffs: &[C64], guess: Option<&[C64]>) -> Result<Vec<C64>, RootError> {
    let Some(deg) = degree(coeffs) else {
        return Err(RootError::ZeroPolynomial);
    };
    let coeffs = &coeffs[..=deg];
    // zero roots factor out exactly
    let zeros = coeffs.iter().position(|c| c.norm() != 0.0).unwrap_or(0);
    let reduced = &coeffs[zeros..];
    let mut out = vec![C64::new(0.0, 0.0); zeros];
    let rdeg = reduced.len() - 1;
    match rdeg {
        0 => {}
        1 => out.push(-reduced[0] / reduced[1]),
        _ => {
            let lead = reduced[rdeg];
            let monic: Vec<C64> = reduced.iter().map(|&c| c / lead).collect();
            let guess = guess.filter(|g| g.len() == deg && zeros == 0);
            let found = match aberth(&monic, guess, 500) {
                Some(r) => r,
                None => companion_roots(&monic)
                    .map(|r| polish(&monic, r))
                    .ok_or(RootError::NoConvergence {
                        degree: deg,
                        iterations: 500,
                    })?,
            };
            out.extend(found);
        }
    }
    Ok(out)
}

fn cauchy_bound(monic: &[C64]) -> f64 {
    let n = monic.len() - 1;
    1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn aberth(monic: &[C64], guess: Option<&[C64]>, max_iter: usize) -> Option<Vec<C64>> {
    let n = monic.len() - 1;
    let mut z: Vec<C64> = match guess {
        Some(g) => perturb_duplicates(g),
        None => {
            // Initial points on a circle of the geometric-mean root radius,
            // rotated off the real axis to break symmetry.
            let r = monic[0].norm().powf(1.0 / n as f64).max(1e-3).min(cauchy_bound(monic));
            (0..n)
                .map(|k| {
                    let ang = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
                    C64::from_polar(r, ang)
                })
                .collect()
        }
    };
    let deriv = derivative(monic);
    for _ in 0..max_iter {
        let mut max_corr: f64 = 0.0;
        let mut converged = true;
        for k in 0..n {
            let p = eval(monic, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let dp = eval(&deriv, z[k]);
            let ratio = p / dp;
            let mut sum = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    sum += (z[k] - z[j]).inv();
                }
            }
            let denom = C64::new(1.0, 0.0) - ratio * sum;
            let corr = if denom.norm() > 0.0 && denom.is_finite() {
                ratio / denom
            } else {
                ratio
            };
            if !corr.is_finite() {
                return None;
            }
            z[k] -= corr;
            let rel = corr.norm() / (1.0 + z[k].norm());
            max_corr = max_corr.max(rel);
            if rel > 1e-15 {
                converged = false;
            }
        }
        if converged || max_corr < 4.0 * f64::EPSILON {
            return Some(z);
        }
    }
    // Accept if the residuals are already at rounding level.
    let ok = z.iter().all(|&r| residual_ok(monic, r));
    ok.then_some(z)
}

fn perturb_duplicates(g: &[C64]) -> Vec<C64> {
    let mut z = g.to_vec();
    for i in 0..z.len() {
        for j in 0..i {
            if (z[i] - z[j]).norm() < 1e-12 * (1.0 + z[i].norm()) {
                let bump = C64::new(1e-8, 1e-8) * (1.0 + z[i].norm()) * (i as f64 + 1.0);
                z[i] += bump;
            }
        }
    }
    z
}

fn residual_ok(monic: &[C64], r: C64) -> bool {
    let scale: f64 = monic
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm() * r.norm().powi(k as i32))
        .sum();
    eval(monic, r).norm() <= 1e-11 * scale.max(1.0)
}

fn companion_roots(monic: &[C64]) -> Option<Vec<C64>> {
    let n = monic.len() - 1;
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -monic[i];
    }
    let eig = m.schur().eigenvalues()?;
    Some(eig.iter().copied().collect())
}

fn polish(monic: &[C64], roots: Vec<C64>) -> Vec<C64> {
    roots
        .into_iter()
        .map(|mut r| {
            for _ in 0..3 {
                let (p, dp) = eval_with_derivative(monic, r);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                if !step.is_finite() {
                    break;
                }
                r -= step;
            }
            r
        })
        .collect()
}

/// Groups roots lying within `tol * (1 + |z|)` of each other and returns
/// `(mean position, multiplicity)` pairs.
pub fn cluster_roots(roots: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    let mut members: Vec<Vec<C64>> = Vec::new();
    for &r in roots {
        match clusters
            .iter()
            .position(|(c, _)| (*c - r).norm() <= tol * (1.0 + r.norm()))
        {
            Some(i) => {
                members[i].push(r);
                let n = members[i].len();
                clusters[i] = (members[i].iter().sum::<C64>() / n as f64, n);
            }
            None => {
                clusters.push((r, 1));
                members.push(vec![r]);
            }
        }
    }
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn quadratic_roots() {
        // z^2 - 1
        let mut r = roots(&[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((r[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_roots_are_exact() {
        // z^3 - 3 z
        let r = roots(&[c(0.0, 0.0), c(-3.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(r.iter().any(|z| z.norm() == 0.0));
        assert!(r.iter().any(|z| (z - c(3f64.sqrt(), 0.0)).norm() < 1e-13));
    }

    #[test]
    fn cubic_roots_of_unity_with_guess() {
        let p = [c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let guess = [c(1.1, 0.0), c(-0.4, 0.9), c(-0.4, -0.9)];
        let r = roots_with_guess(&p, Some(&guess)).unwrap();
        for z in r {
            assert!((z.powu(3) - 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn companion_fallback_agrees() {
        let p = [c(2.0, 1.0), c(-1.0, 0.5), c(0.3, 0.0), c(1.0, 0.0)];
        let a = roots(&p).unwrap();
        let b = companion_roots(&p).unwrap();
        for z in &a {
            assert!(b.iter().any(|w| (w - z).norm() < 1e-9));
        }
    }

    #[test]
    fn taylor_shift_matches_evaluation() {
        let p = [c(1.0, 0.0), c(2.0, -1.0), c(0.5, 0.0), c(0.0, 3.0)];
        let center = c(0.7, -0.2);
        let q = taylor_shift(&p, center);
        let h = c(0.1, 0.3);
        assert!((eval(&q, h) - eval(&p, center + h)).norm() < 1e-13);
    }

    #[test]
    fn clusters_double_root() {
        let r = roots(&[c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)]).unwrap();
        let cl = cluster_roots(&r, 1e-6);
        assert_eq!(cl.len(), 1);
        assert_eq!(cl[0].1, 2);
    }

    #[test]
    fn zero_polynomial_is_an_error() {
        assert_eq!(roots(&[c(0.0, 0.0)]), Err(RootError::ZeroPolynomial));
    }
}
