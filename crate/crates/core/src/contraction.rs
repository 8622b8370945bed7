//! Prediction matrices between pairs of agents and their Dobrushin
//! coefficients.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::divergence;
use crate::error::{Error, Result};
use crate::infostructure::InfoStructure;
use crate::rational::{self, Rational};

/// Row `x` is the law of agent `to`'s signal given agent `from` saw `x`,
/// under `state`.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionMatrix {
    pub state: usize,
    pub from: usize,
    pub to: usize,
    rows: Vec<Vec<Rational>>,
    rows_f64: Vec<Vec<f64>>,
    lambda: Rational,
}

impl PredictionMatrix {
    /// Wraps explicit rows, which must be exactly row-stochastic and
    /// nonnegative.
    pub fn from_rows(state: usize, from: usize, to: usize, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let lambda = dobrushin_coefficient(&rows)?;
        let rows_f64 = rows.iter().map(|r| r.iter().map(rational::to_f64).collect()).collect();
        Ok(PredictionMatrix {
            state,
            from,
            to,
            rows,
            rows_f64,
            lambda,
        })
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn rows_f64(&self) -> &[Vec<f64>] {
        &self.rows_f64
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn lambda_f64(&self) -> f64 {
        rational::to_f64(&self.lambda)
    }
}

pub fn prediction_matrix(info: &InfoStructure, state: usize, from: usize, to: usize) -> Result<PredictionMatrix> {
    let pair = info.pairwise_marginal(state, from, to)?;
    let rows = pair
        .into_iter()
        .enumerate()
        .map(|(x, row)| {
            let phi = rational::sum(&row);
            if !phi.is_positive() {
                return Err(Error::NotStochastic(format!(
                    "agent {} never sees signal {x} in state {}",
                    from + 1,
                    info.state_label(state)
                )));
            }
            Ok(row.into_iter().map(|p| p / &phi).collect())
        })
        .collect::<Result<Vec<Vec<Rational>>>>()?;
    PredictionMatrix::from_rows(state, from, to, rows)
}

/// `φᵀ M`.
pub fn predict_counterparty(phi: &[f64], m: &PredictionMatrix) -> Result<Vec<f64>> {
    if phi.len() != m.rows.len() {
        return Err(Error::LengthMismatch(phi.len(), m.rows.len()));
    }
    let k = m.rows_f64.first().map_or(0, Vec::len);
    let mut out = vec![0.0; k];
    for (p, row) in phi.iter().zip(&m.rows_f64) {
        for (o, r) in out.iter_mut().zip(row) {
            *o += p * r;
        }
    }
    Ok(out)
}

pub fn predict_counterparty_exact(phi: &[Rational], m: &PredictionMatrix) -> Result<Vec<Rational>> {
    if phi.len() != m.rows.len() {
        return Err(Error::LengthMismatch(phi.len(), m.rows.len()));
    }
    let k = m.rows.first().map_or(0, Vec::len);
    let mut out = vec![Rational::zero(); k];
    for (p, row) in phi.iter().zip(&m.rows) {
        for (o, r) in out.iter_mut().zip(row) {
            *o += p * r;
        }
    }
    Ok(out)
}

fn check_stochastic(rows: &[Vec<Rational>]) -> Result<()> {
    let k = rows.first().map_or(0, Vec::len);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != k {
            return Err(Error::NotStochastic(format!("row {i} has {} entries, expected {k}", row.len())));
        }
        if row.iter().any(|p| p.is_negative()) {
            return Err(Error::NotStochastic(format!("row {i} has a negative entry")));
        }
        if !rational::sum(row).is_one() {
            return Err(Error::NotStochastic(format!("row {i} does not sum to 1")));
        }
    }
    Ok(())
}

/// Largest TV distance between two rows; 0 for a single row.
pub fn dobrushin_coefficient(rows: &[Vec<Rational>]) -> Result<Rational> {
    check_stochastic(rows)?;
    let mut best = Rational::zero();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let d = divergence::tv_distance_exact(&rows[i], &rows[j])?;
            if d > best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// Floating version; rows must sum to 1 within 1e-12.
pub fn dobrushin_coefficient_f64(rows: &[Vec<f64>]) -> Result<f64> {
    for (i, row) in rows.iter().enumerate() {
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-12 || row.iter().any(|&p| p < 0.0) {
            return Err(Error::NotStochastic(format!("row {i} sums to {s}")));
        }
    }
    let mut best = 0.0f64;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            best = best.max(divergence::tv_distance(&rows[i], &rows[j])?);
        }
    }
    Ok(best)
}

/// All prediction matrices, ordered by (from, to, state).
pub fn all_matrices(info: &InfoStructure) -> Result<Vec<PredictionMatrix>> {
    let mut out = Vec::new();
    for from in 0..info.num_agents() {
        for to in 0..info.num_agents() {
            if from != to {
                for s in 0..info.num_states() {
                    out.push(prediction_matrix(info, s, from, to)?);
                }
            }
        }
    }
    Ok(out)
}

/// `max` of the coefficient over states and ordered agent pairs.
pub fn global_contraction_coefficient(info: &InfoStructure) -> Result<Rational> {
    Ok(all_matrices(info)?
        .into_iter()
        .map(|m| m.lambda)
        .max()
        .unwrap_or_else(Rational::zero))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `‖φᵀM − φ'ᵀM‖_TV ≤ λ ‖φ − φ'‖_TV`, up to 1e-12.
pub fn verify_contraction(m: &PredictionMatrix, phi: &[f64], phi2: &[f64]) -> Result<ContractionCheck> {
    let lhs = divergence::tv_distance(&predict_counterparty(phi, m)?, &predict_counterparty(phi2, m)?)?;
    let rhs = m.lambda_f64() * divergence::tv_distance(phi, phi2)?;
    Ok(ContractionCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

/// Two simplex vertices `(e_i, e_j)` at which the contraction bound is an
/// equality; `None` for a single-row matrix.
pub fn tightness_witness(m: &PredictionMatrix) -> Option<(usize, usize)> {
    let n = m.rows.len();
    for i in 0..n {
        for j in i + 1..n {
            if divergence::tv_distance_exact(&m.rows[i], &m.rows[j]).ok()? == m.lambda {
                return Some((i, j));
            }
        }
    }
    None
}

pub fn vertex(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalConsistency {
    pub state: usize,
    pub from: usize,
    pub to: usize,
    pub holds: bool,
    /// `φ_fromᵀ M − φ_to` as rational strings.
    pub deviation: Vec<String>,
}

/// Exact check of `φ_fromᵀ M = φ_to` for one matrix against given marginals.
pub fn check_marginal_consistency(m: &PredictionMatrix, from: &[Rational], to: &[Rational]) -> Result<MarginalConsistency> {
    let pred = predict_counterparty_exact(from, m)?;
    if pred.len() != to.len() {
        return Err(Error::LengthMismatch(pred.len(), to.len()));
    }
    let dev: Vec<Rational> = pred.iter().zip(to).map(|(a, b)| a - b).collect();
    Ok(MarginalConsistency {
        state: m.state,
        from: m.from,
        to: m.to,
        holds: dev.iter().all(Zero::is_zero),
        deviation: dev.iter().map(rational::format).collect(),
    })
}

/// One entry per state and ordered agent pair.
pub fn verify_marginal_consistency(info: &InfoStructure) -> Result<Vec<MarginalConsistency>> {
    all_matrices(info)?
        .iter()
        .map(|m| {
            check_marginal_consistency(
                m,
                info.marginal(m.state, m.from)?,
                info.marginal(m.state, m.to)?,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example1::{self, THETA1, THETA2, THETA3, THETA4};
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn product_structure() -> InfoStructure {
        // agent 1 ~ (1/3, 2/3), agent 2 ~ (1/4, 3/4), independent
        let a = [ratio(1, 3), ratio(2, 3)];
        let b = [ratio(1, 4), ratio(3, 4)];
        let joint = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        InfoStructure::new(vec!["s".into()], vec![Rational::one()], vec![2, 2], vec![joint]).unwrap()
    }

    #[test]
    fn example_matrices() {
        let info = example1::structure();
        let m1 = prediction_matrix(&info, THETA1, 0, 1).unwrap();
        assert_eq!(m1.rows(), &[vec![ratio(3, 4), ratio(1, 4)], vec![ratio(1, 4), ratio(3, 4)]]);
        let m2 = prediction_matrix(&info, THETA2, 0, 1).unwrap();
        assert_eq!(m2.rows(), &[vec![ratio(5, 6), ratio(1, 6)], vec![ratio(1, 2), ratio(1, 2)]]);
        let lambdas: Vec<Rational> = [THETA1, THETA2, THETA3, THETA4]
            .iter()
            .map(|&s| prediction_matrix(&info, s, 0, 1).unwrap().lambda().clone())
            .collect();
        assert_eq!(lambdas, vec![ratio(1, 2), ratio(1, 3), ratio(3, 8), ratio(1, 6)]);
        let back: Vec<Rational> = [THETA1, THETA2, THETA3, THETA4]
            .iter()
            .map(|&s| prediction_matrix(&info, s, 1, 0).unwrap().lambda().clone())
            .collect();
        assert_eq!(back, vec![ratio(1, 2), ratio(3, 8), ratio(1, 3), ratio(1, 6)]);
        assert_eq!(global_contraction_coefficient(&info).unwrap(), ratio(1, 2));
        assert!(matches!(prediction_matrix(&info, 0, 1, 1), Err(Error::SameAgent(1))));
    }

    #[test]
    fn product_structure_has_identical_rows() {
        let info = product_structure();
        let m = prediction_matrix(&info, 0, 0, 1).unwrap();
        assert!(m.rows().iter().all(|r| r == &vec![ratio(1, 4), ratio(3, 4)]));
        assert_eq!(global_contraction_coefficient(&info).unwrap(), Rational::zero());
        assert!(verify_marginal_consistency(&info).unwrap().iter().all(|c| c.holds));
    }

    #[test]
    fn near_correlated_is_below_one() {
        let j = [ratio(49, 100), ratio(1, 100), ratio(1, 100), ratio(49, 100)];
        let info = InfoStructure::new(vec!["s".into()], vec![Rational::one()], vec![2, 2], vec![j.to_vec()]).unwrap();
        let l = global_contraction_coefficient(&info).unwrap();
        assert_eq!(l, ratio(24, 25));
    }

    #[test]
    fn single_row_and_bad_rows() {
        assert_eq!(dobrushin_coefficient(&[vec![ratio(1, 2), ratio(1, 2)]]).unwrap(), Rational::zero());
        assert!(matches!(
            dobrushin_coefficient(&[vec![ratio(1, 2), ratio(1, 3)]]),
            Err(Error::NotStochastic(_))
        ));
        assert!(dobrushin_coefficient_f64(&[vec![0.5, 0.6]]).is_err());
        assert_eq!(dobrushin_coefficient_f64(&[vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap(), 0.5);
    }

    #[test]
    fn predictions_and_marginals() {
        let info = example1::structure();
        let m1 = prediction_matrix(&info, THETA1, 0, 1).unwrap();
        let m2 = prediction_matrix(&info, THETA2, 0, 1).unwrap();
        for nu in [0.0, 0.01, 0.05] {
            let phi = [0.5 + nu, 0.5 - nu];
            let p1 = predict_counterparty(&phi, &m1).unwrap();
            let p2 = predict_counterparty(&phi, &m2).unwrap();
            assert!((p1[0] - (1.0 + nu) / 2.0).abs() < 1e-12 && (p1[1] - (1.0 - nu) / 2.0).abs() < 1e-12);
            assert!((p2[0] - (2.0 + nu) / 3.0).abs() < 1e-12 && (p2[1] - (1.0 - nu) / 3.0).abs() < 1e-12);
        }
        let checks = verify_marginal_consistency(&info).unwrap();
        assert_eq!(checks.len(), 8);
        assert!(checks.iter().all(|c| c.holds));
        assert!(predict_counterparty(&[1.0], &m1).is_err());
    }

    #[test]
    fn corrupted_matrix_is_flagged() {
        let info = example1::structure();
        let bad = PredictionMatrix::from_rows(
            THETA1,
            0,
            1,
            vec![vec![ratio(2, 3), ratio(1, 3)], vec![ratio(1, 4), ratio(3, 4)]],
        )
        .unwrap();
        let c = check_marginal_consistency(&bad, info.marginal(THETA1, 0).unwrap(), info.marginal(THETA1, 1).unwrap())
            .unwrap();
        assert!(!c.holds);
        assert_eq!(c.deviation, vec!["-1/24", "1/24"]);
    }

    #[test]
    fn contraction_is_tight_at_vertices() {
        let info = example1::structure();
        for m in all_matrices(&info).unwrap() {
            let (i, j) = tightness_witness(&m).expect("two rows");
            let c = verify_contraction(&m, &vertex(2, i), &vertex(2, j)).unwrap();
            assert!((c.lhs - c.rhs).abs() < 1e-15 && c.holds);
        }
        let m1 = prediction_matrix(&info, THETA1, 0, 1).unwrap();
        let c = verify_contraction(&m1, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.5, 0.5));
        let c = verify_contraction(&m1, &[0.3, 0.7], &[0.3, 0.7]).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
    }

    proptest! {
        #[test]
        fn contraction_and_triangle_chain(
            x in 0.0f64..=1.0, y in 0.0f64..=1.0, z in 0.0f64..=1.0,
            s in 0usize..4, dir in any::<bool>(),
        ) {
            let info = example1::structure();
            let (from, to) = if dir { (0, 1) } else { (1, 0) };
            let m = prediction_matrix(&info, s, from, to).unwrap();
            let phi = [x, 1.0 - x];
            let c = verify_contraction(&m, &phi, &[y, 1.0 - y]).unwrap();
            prop_assert!(c.holds, "{c:?}");
            // ‖φ̂' − φ_to‖ ≤ ‖φ̂' − φ̂ᵀM‖ + λ‖φ̂ − φ_from‖
            let other = [z, 1.0 - z];
            let lhs = divergence::tv_distance(&other, info.marginal_f64(s, to)).unwrap();
            let pred = predict_counterparty(&phi, &m).unwrap();
            let rhs = divergence::tv_distance(&other, &pred).unwrap()
                + m.lambda_f64() * divergence::tv_distance(&phi, info.marginal_f64(s, from)).unwrap();
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }
}
