//! Browser bindings. Each exported function takes a scenario as JSON (an
//! empty string selects the bundled example) and returns JSON; errors come
//! back as a thrown string.
//!
//! The plain `*_json` functions hold the logic so they can be tested
//! natively.

use common_learning::contraction;
use common_learning::engine::{self, EngineConfig};
use common_learning::operators;
use common_learning::rational;
use common_learning::{
    common_identification, identification_partition, CommonBeliefRule, CountVector, Horizon, InfoStructure, Scenario,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest horizon the region map accepts; the page redraws on every input.
pub const REGION_CAP: u32 = 400;

fn load(scenario: &str) -> Result<InfoStructure, String> {
    let s = if scenario.trim().is_empty() {
        common_learning::example1::scenario()
    } else {
        Scenario::parse_valid(scenario).map_err(|e| e.to_string())?
    };
    s.info.ensure_valid().map_err(|e| e.to_string())?;
    Ok(s.info)
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn state_list(info: &InfoStructure, labels: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for l in labels.split(',').map(str::trim).filter(|l| !l.is_empty()) {
        out.push(info.state_index(l).ok_or_else(|| format!("unknown state {l:?}"))?);
    }
    if out.is_empty() {
        return Err("no states selected".into());
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Identification partitions, their join and every contraction coefficient.
pub fn summary_json(scenario: &str) -> Result<String, String> {
    let info = load(scenario)?;
    let labels = info.states();
    let agents: Vec<Value> = (0..info.num_agents())
        .map(|a| {
            identification_partition(&info, a).map(|p| json!({ "agent": a + 1, "cells": p.labelled(labels) }))
        })
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let join = common_identification(&info).map_err(err)?;
    let lambdas: Vec<Value> = contraction::all_matrices(&info)
        .map_err(err)?
        .iter()
        .map(|m| {
            json!({
                "state": info.state_label(m.state),
                "from": m.from + 1,
                "to": m.to + 1,
                "lambda": rational::format(m.lambda()),
                "value": m.lambda_f64(),
            })
        })
        .collect();
    let global = contraction::global_contraction_coefficient(&info).map_err(err)?;
    let out = json!({
        "states": labels,
        "alphabets": info.alphabets(),
        "agents": agents,
        "join": join.labelled(labels),
        "lambda": lambdas,
        "global_lambda": rational::format(&global),
    });
    Ok(out.to_string())
}

/// For two binary agents: over the grid of first-signal counts `(a, b)`,
/// which states' ε-balls contain the profile, and whether `B^q_t(cell)` and
/// `C^q_t(cell)` hold there.
pub fn region_json(scenario: &str, t: u32, epsilon: f64, q: f64, cell: &str) -> Result<String, String> {
    let info = load(scenario)?;
    if info.alphabets() != [2, 2] {
        return Err("the region map needs exactly two agents with two signals each".into());
    }
    if t > REGION_CAP {
        return Err(format!("t is limited to {REGION_CAP} here"));
    }
    let set = state_list(&info, cell)?;
    let h = Horizon::new(&info, t, EngineConfig::default()).map_err(err)?;
    let f = h.state_event(&set).map_err(err)?;
    let believe: Vec<Vec<bool>> = (0..2).map(|a| h.belief_set(a, q, &f)).collect::<Result<_, _>>().map_err(err)?;
    let c = h.common_belief_event(q, &f, CommonBeliefRule::Literal).map_err(err)?;
    let common: Vec<Vec<bool>> = (0..2)
        .map(|a| c.event.own_projection(h.space(), 0, a).ok_or("common belief is not a product set"))
        .collect::<Result<_, _>>()?;
    let balls: Vec<Vec<Vec<bool>>> = (0..info.num_states())
        .map(|s| operators::ball_sets(&info, t, epsilon, s))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    // Own index of "x first signals out of t" for each agent.
    let idx = |agent: usize, x: u32| {
        h.space()
            .agent_space(agent)
            .index_of_counts(&[x, t - x])
            .expect("count in range")
    };
    let n = t as usize + 1;
    let mut ball = vec![vec![Vec::new(); n]; n];
    let mut mutual = vec![vec![false; n]; n];
    let mut cb = vec![vec![false; n]; n];
    for a in 0..=t {
        let (i, ai) = (a as usize, idx(0, a));
        for b in 0..=t {
            let (j, bj) = (b as usize, idx(1, b));
            ball[i][j] = (0..info.num_states())
                .filter(|&s| balls[s][0][ai] && balls[s][1][bj])
                .map(|s| s as u8)
                .collect::<Vec<_>>();
            mutual[i][j] = believe[0][ai] && believe[1][bj];
            cb[i][j] = common[0][ai] && common[1][bj];
        }
    }
    let out = json!({
        "t": t,
        "epsilon": epsilon,
        "q": q,
        "cell": set.iter().map(|&s| info.state_label(s)).collect::<Vec<_>>(),
        "states": info.states(),
        "ball": ball,
        "mutual": mutual,
        "common": cb,
        "iterations": c.iterations,
    });
    Ok(out.to_string())
}

/// Posterior of `agent` (from 1) over states after each prefix of a signal
/// string such as `"0110"`.
pub fn posterior_path_json(scenario: &str, agent: usize, signals: &str) -> Result<String, String> {
    let info = load(scenario)?;
    if agent == 0 || agent > info.num_agents() {
        return Err(format!("agent must be between 1 and {}", info.num_agents()));
    }
    let a = agent - 1;
    let k = info.alphabet(a);
    let mut counts = vec![0u32; k];
    let mut rows = vec![engine::posterior(&info, a, &CountVector::new(counts.clone())).map_err(err)?];
    for ch in signals.chars().filter(|c| !c.is_whitespace() && *c != ',') {
        let x = ch
            .to_digit(10)
            .map(|d| d as usize)
            .filter(|&d| d < k)
            .ok_or_else(|| format!("signal {ch:?} is not in 0..{k}"))?;
        counts[x] += 1;
        rows.push(engine::posterior(&info, a, &CountVector::new(counts.clone())).map_err(err)?);
    }
    Ok(json!({ "agent": agent, "states": info.states(), "counts": counts, "posterior": rows }).to_string())
}

#[wasm_bindgen]
pub fn summary(scenario: &str) -> Result<String, JsValue> {
    summary_json(scenario).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn region(scenario: &str, t: u32, epsilon: f64, q: f64, cell: &str) -> Result<String, JsValue> {
    region_json(scenario, t, epsilon, q, cell).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn posterior_path(scenario: &str, agent: usize, signals: &str) -> Result<String, JsValue> {
    posterior_path_json(scenario, agent, signals).map_err(|e| JsValue::from_str(&e))
}
