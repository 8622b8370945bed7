//! Golden checks on the bundled structure, run by `reproduce-example1`.

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::contraction;
use crate::counts::CountSpace;
use crate::engine::{self, EngineConfig};
use crate::error::Result;
use crate::example1::{THETA1, THETA2, THETA4};
use crate::infostructure::InfoStructure;
use crate::operators::{self, CommonBeliefRule, Horizon};
use crate::partition::{common_identification, identification_partition, Partition};
use crate::rational::{self, ratio, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenReport {
    pub passed: bool,
    pub items: Vec<GoldenItem>,
}

fn item(name: &str, passed: bool, detail: String) -> GoldenItem {
    GoldenItem {
        name: name.into(),
        passed,
        detail,
    }
}

fn cells(v: &[&[usize]]) -> Partition {
    Partition::new(4, v.iter().map(|c| c.to_vec()).collect()).expect("valid cells")
}

fn partitions(info: &InfoStructure) -> Result<GoldenItem> {
    let q1 = identification_partition(info, 0)?;
    let q2 = identification_partition(info, 1)?;
    let join = common_identification(info)?;
    let ok = q1 == cells(&[&[0, 1], &[2], &[3]])
        && q2 == cells(&[&[0, 2], &[1], &[3]])
        && join == cells(&[&[0, 1, 2], &[3]]);
    let l = info.states();
    Ok(item(
        "partitions",
        ok,
        format!("Q1 = {}, Q2 = {}, join = {}", q1.display_with(l), q2.display_with(l), join.display_with(l)),
    ))
}

fn nu_calculations(info: &InfoStructure) -> Result<Vec<GoldenItem>> {
    let m1 = contraction::prediction_matrix(info, THETA1, 0, 1)?;
    let m2 = contraction::prediction_matrix(info, THETA2, 0, 1)?;
    let mut out = Vec::new();
    for (label, nu) in [("0", ratio(0, 1)), ("0.01", ratio(1, 100)), ("0.05", ratio(1, 20))] {
        let half = ratio(1, 2);
        let phi = vec![&half + &nu, &half - &nu];
        let p1 = contraction::predict_counterparty_exact(&phi, &m1)?;
        let p2 = contraction::predict_counterparty_exact(&phi, &m2)?;
        let one = ratio(1, 1);
        let w1 = vec![(&one + &nu) / ratio(2, 1), (&one - &nu) / ratio(2, 1)];
        let w2 = vec![(ratio(2, 1) + &nu) / ratio(3, 1), (&one - &nu) / ratio(3, 1)];
        let show = |v: &[Rational]| v.iter().map(rational::format).collect::<Vec<_>>().join(", ");
        out.push(item(
            &format!("prediction nu={label}"),
            p1 == w1 && p2 == w2,
            format!("θ1: ({}), θ2: ({})", show(&p1), show(&p2)),
        ));
    }
    Ok(out)
}

fn marginal_consistency(info: &InfoStructure) -> Result<GoldenItem> {
    let checks = contraction::verify_marginal_consistency(info)?;
    let bad = checks.iter().filter(|c| !c.holds).count();
    Ok(item(
        "marginal consistency",
        bad == 0,
        format!("{} of {} (state, pair) identities hold exactly", checks.len() - bad, checks.len()),
    ))
}

fn lambda_table(info: &InfoStructure) -> Result<GoldenItem> {
    let want = [ratio(1, 2), ratio(1, 3), ratio(3, 8), ratio(1, 6)];
    let got: Vec<Rational> = (0..4)
        .map(|s| contraction::prediction_matrix(info, s, 0, 1).map(|m| m.lambda().clone()))
        .collect::<Result<_>>()?;
    let global = contraction::global_contraction_coefficient(info)?;
    Ok(item(
        "contraction 1→2",
        got == want && global == ratio(1, 2),
        format!(
            "λ = {}; global λ = {}",
            got.iter().map(rational::format).collect::<Vec<_>>().join(", "),
            rational::format(&global)
        ),
    ))
}

/// One point of the plotting grid for two binary agents: zero counts `a`
/// and `b` with ball memberships per state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub a: u32,
    pub b: u32,
    pub theta1: bool,
    pub theta2: bool,
    pub theta3: bool,
    pub theta4: bool,
}

pub fn region_table(info: &InfoStructure, t: u32, epsilon: f64) -> Result<Vec<RegionRow>> {
    let balls: Vec<Vec<Vec<bool>>> = (0..info.num_states())
        .map(|s| operators::ball_sets(info, t, epsilon, s))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for a in 0..=t as usize {
        for b in 0..=t as usize {
            let m = |s: usize| balls[s][0][a] && balls[s][1][b];
            rows.push(RegionRow {
                a: a as u32,
                b: b as u32,
                theta1: m(0),
                theta2: m(1),
                theta3: m(2),
                theta4: m(3),
            });
        }
    }
    Ok(rows)
}

fn region(info: &InfoStructure) -> Result<GoldenItem> {
    let sets = operators::ball_sets(info, 60, 0.05, THETA4)?;
    let zeros: Vec<u32> = (0..=60).filter(|&a| sets[0][a as usize]).collect();
    let rows = region_table(info, 60, 0.05)?;
    let inside = rows.iter().filter(|r| r.theta4).count();
    Ok(item(
        "region t=60 eps=0.05",
        zeros == (33..=39).collect::<Vec<_>>() && inside == 49,
        format!("agent 1 zero counts {:?}..{:?}; {inside} profiles in I(θ4)", zeros.first(), zeros.last()),
    ))
}

fn sanov(info: &InfoStructure) -> Result<GoldenItem> {
    let mut bad = Vec::new();
    for eps in [0.05, 0.1, 0.2] {
        let alpha = bounds::sanov_exponent(info, 0, THETA1, eps)?;
        for t in 1..=200 {
            let p = bounds::own_ball_probability(info, 0, THETA1, eps, t)?;
            let (lo, hi) = bounds::sanov_bounds_of(alpha, 2, t);
            if !(lo <= p && p <= hi) {
                bad.push(format!("eps={eps} t={t}"));
            }
        }
    }
    Ok(item("sanov sandwich", bad.is_empty(), format!("{} violations {bad:?}", bad.len())))
}

fn floor(info: &InfoStructure) -> Result<GoldenItem> {
    let eps = 0.02;
    let eps_q = operators::epsilon_exact(eps)?;
    let b = bounds::global_kl_gap(info, eps)?;
    let mut worst = f64::INFINITY;
    let mut ok = b.value > 0.0;
    for t in [25u32, 50, 100, 200] {
        let fl = bounds::posterior_floor(info, THETA4, eps, t)?;
        for c in CountSpace::new(t, 2).vectors() {
            if operators::in_ball(c, info.marginal(THETA4, 0)?, &eps_q) {
                let p = rational::to_f64(&engine::posterior_set_exact(info, 0, c, &[THETA4])?);
                worst = worst.min(p - fl);
                ok &= p >= fl;
            }
        }
    }
    Ok(item(
        "posterior floor",
        ok,
        format!("b(0.02) = {:.6}; least margin over the floor {worst:.4}", b.value),
    ))
}

fn necessity(info: &InfoStructure) -> Result<GoldenItem> {
    let mut ok = true;
    for t in [10u32, 50, 100, 200] {
        let h = Horizon::new(info, t, EngineConfig::default())?;
        let f = h.state_event(&[THETA1])?;
        let c = h.common_belief_event(0.5 + 1e-9, &f, CommonBeliefRule::Literal)?;
        ok &= h.event_probability(&c.event, Some(THETA1))? == 0.0;
        ok &= CountSpace::new(t, 2)
            .vectors()
            .iter()
            .all(|c| engine::posterior(info, 0, c).map(|p| p[THETA1] <= 0.5 + 1e-12).unwrap_or(false));
    }
    Ok(item(
        "necessity {θ1}",
        ok,
        "agent 1 never puts more than 1/2 on θ1; common belief in {θ1} has probability 0".into(),
    ))
}

fn beta(_: &InfoStructure) -> Result<GoldenItem> {
    let b = bounds::beta_for(0.9, 2)?;
    let closed = ((1.0 + 8.2f64.sqrt()) / 4.0).ln() / 0.9f64.ln();
    Ok(item(
        "beta*(0.9, 2)",
        (b - closed).abs() <= 1e-6,
        format!("{b:.8} vs closed form {closed:.8}"),
    ))
}

fn gap_signs(info: &InfoStructure) -> Result<GoldenItem> {
    let ok = bounds::global_kl_gap(info, 0.02)?.value > 0.0 && bounds::global_kl_gap(info, 0.05)?.value <= 0.0;
    let r = bounds::max_epsilon(info)?;
    Ok(item(
        "kl gap",
        ok && (r.value - 0.033).abs() < 1e-3,
        format!("b(0.02) > 0, b(0.05) ≤ 0, radius ≈ {:.6}", r.value),
    ))
}

pub fn reproduce(info: &InfoStructure) -> Result<GoldenReport> {
    let mut items = vec![partitions(info)?];
    items.extend(nu_calculations(info)?);
    for f in [marginal_consistency, lambda_table, region, sanov, floor, gap_signs, necessity, beta] {
        items.push(f(info)?);
    }
    Ok(GoldenReport {
        passed: items.iter().all(|i| i.passed),
        items,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example1;

    #[test]
    fn golden_suite_passes() {
        let r = reproduce(&example1::structure()).unwrap();
        for i in &r.items {
            assert!(i.passed, "{i:?}");
        }
        assert!(r.passed);
    }
}
