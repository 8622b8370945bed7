//! Total variation and Kullback-Leibler divergence between probability
//! vectors. Logs are natural.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// `½ Σ |p(x) − q(x)|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

pub fn tv_distance_exact(p: &[Rational], q: &[Rational]) -> Result<Rational> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    let total = p
        .iter()
        .zip(q)
        .fold(Rational::zero(), |acc, (a, b)| acc + num_traits::Signed::abs(&(a - b)));
    Ok(total / Rational::from_integer(2.into()))
}

/// `Σ p(x) log(p(x)/q(x))` with `0·log 0 = 0`; `+∞` when `q(x) = 0 < p(x)`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(f64::INFINITY);
            }
            total += a * (a / b).ln();
        }
    }
    // round-off can leave a tiny negative value for p == q
    Ok(total.max(0.0))
}

/// Binary KL divergence between Bernoulli(`p`) and Bernoulli(`q`).
pub fn kl_bernoulli(p: f64, q: f64) -> f64 {
    kl_divergence(&[p, 1.0 - p], &[q, 1.0 - q]).unwrap()
}
