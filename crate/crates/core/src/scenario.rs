//! Scenario files: schema-versioned JSON holding an information structure
//! with probabilities written as rational strings.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "states": ["a", "b"],
//!   "prior": ["1/2", "1/2"],
//!   "agents": [{ "label": "1", "signals": ["0", "1"] }, { "label": "2", "signals": ["0", "1"] }],
//!   "joint": [ [["1/4","1/4"],["1/4","1/4"]], [["3/8","1/8"],["1/8","3/8"]] ]
//! }
//! ```
//!
//! `joint[s]` nests one array level per agent, first agent outermost.
//! Decimal numbers are accepted only when `tolerance_mode` is present.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::infostructure::{InfoStructure, PartitionMode};
use crate::rational::{self, Rational};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub info: InfoStructure,
    pub horizon_cap: Option<u32>,
}

fn perr(at: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        at: at.into(),
        message: message.into(),
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        let root: Value = serde_json::from_str(text)
            .map_err(|e| perr(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        Self::from_value(&root)
    }

    pub fn from_value(root: &Value) -> Result<Scenario> {
        let obj = root.as_object().ok_or_else(|| perr("$", "expected an object"))?;
        const KNOWN: [&str; 8] = [
            "schema_version",
            "name",
            "states",
            "prior",
            "agents",
            "joint",
            "tolerance_mode",
            "horizon_cap",
        ];
        if let Some(k) = obj.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(perr(format!("$.{k}"), "unknown field"));
        }
        let field = |k: &str| obj.get(k).ok_or_else(|| perr(format!("$.{k}"), "missing field"));

        match field("schema_version")?.as_u64() {
            Some(SCHEMA_VERSION) => {}
            _ => return Err(perr("$.schema_version", format!("expected {SCHEMA_VERSION}"))),
        }
        let name = match obj.get("name") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(perr("$.name", "expected a string")),
        };
        let mode = match obj.get("tolerance_mode") {
            None | Some(Value::Null) => PartitionMode::Exact,
            Some(Value::Object(m)) => {
                let tau = match m.get("tau") {
                    None => PartitionMode::DEFAULT_TAU,
                    Some(v) => v
                        .as_f64()
                        .filter(|t| *t >= 0.0)
                        .ok_or_else(|| perr("$.tolerance_mode.tau", "expected a nonnegative number"))?,
                };
                PartitionMode::Tolerance { tau }
            }
            Some(_) => return Err(perr("$.tolerance_mode", "expected an object such as {\"tau\": 1e-9}")),
        };
        let horizon_cap = match obj.get("horizon_cap") {
            None | Some(Value::Null) => None,
            Some(v) => Some(
                v.as_u64()
                    .and_then(|n| u32::try_from(n).ok())
                    .ok_or_else(|| perr("$.horizon_cap", "expected a nonnegative integer"))?,
            ),
        };
        let tolerant = matches!(mode, PartitionMode::Tolerance { .. });

        let states = string_array(field("states")?, "$.states")?;
        if states.is_empty() {
            return Err(perr("$.states", "at least one state is required"));
        }
        let prior_v = field("prior")?
            .as_array()
            .ok_or_else(|| perr("$.prior", "expected an array"))?;
        if prior_v.len() != states.len() {
            return Err(perr("$.prior", format!("{} entries for {} states", prior_v.len(), states.len())));
        }
        let prior = prior_v
            .iter()
            .enumerate()
            .map(|(i, v)| probability(v, &format!("$.prior[{i}]"), tolerant))
            .collect::<Result<Vec<_>>>()?;

        let agents_v = field("agents")?
            .as_array()
            .ok_or_else(|| perr("$.agents", "expected an array"))?;
        if agents_v.is_empty() {
            return Err(perr("$.agents", "at least one agent is required"));
        }
        let mut agent_labels = Vec::new();
        let mut signal_labels = Vec::new();
        for (i, a) in agents_v.iter().enumerate() {
            let at = format!("$.agents[{i}]");
            let a = a.as_object().ok_or_else(|| perr(&at, "expected an object"))?;
            let label = match a.get("label") {
                None => (i + 1).to_string(),
                Some(Value::String(s)) => s.clone(),
                Some(_) => return Err(perr(format!("{at}.label"), "expected a string")),
            };
            let signals = match a.get("signals") {
                Some(v) => string_array(v, &format!("{at}.signals"))?,
                None => return Err(perr(format!("{at}.signals"), "missing field")),
            };
            if signals.is_empty() {
                return Err(perr(format!("{at}.signals"), "alphabet must be nonempty"));
            }
            agent_labels.push(label);
            signal_labels.push(signals);
        }
        let alphabets: Vec<usize> = signal_labels.iter().map(Vec::len).collect();

        let joint_v = field("joint")?
            .as_array()
            .ok_or_else(|| perr("$.joint", "expected an array"))?;
        if joint_v.len() != states.len() {
            return Err(perr("$.joint", format!("{} tensors for {} states", joint_v.len(), states.len())));
        }
        let mut joint = Vec::with_capacity(states.len());
        for (s, t) in joint_v.iter().enumerate() {
            let mut flat = Vec::new();
            flatten(t, &alphabets, &format!("$.joint[{s}]"), tolerant, &mut flat)?;
            joint.push(flat);
        }
        let info = InfoStructure::build(
            states,
            prior,
            alphabets,
            joint,
            mode,
            Some(agent_labels),
            Some(signal_labels),
        )
        .map_err(|e| perr("$", e.to_string()))?;
        Ok(Scenario { name, info, horizon_cap })
    }

    /// Parses and additionally requires the structure to validate.
    pub fn parse_valid(text: &str) -> Result<Scenario> {
        let sc = Self::parse(text)?;
        sc.info.ensure_valid()?;
        Ok(sc)
    }

    pub fn from_info(info: InfoStructure) -> Scenario {
        Scenario {
            name: None,
            info,
            horizon_cap: None,
        }
    }

    pub fn to_value(&self) -> Value {
        let info = &self.info;
        let mut obj = Map::new();
        obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
        if let Some(n) = &self.name {
            obj.insert("name".into(), json!(n));
        }
        obj.insert("states".into(), json!(info.states()));
        obj.insert(
            "prior".into(),
            Value::Array(info.prior().iter().map(|p| json!(rational::format(p))).collect()),
        );
        obj.insert(
            "agents".into(),
            Value::Array(
                info.agent_labels()
                    .iter()
                    .zip(info.signal_labels())
                    .map(|(l, s)| json!({ "label": l, "signals": s }))
                    .collect(),
            ),
        );
        obj.insert(
            "joint".into(),
            Value::Array(
                (0..info.num_states())
                    .map(|s| nest(info.joint(s), info.alphabets()))
                    .collect(),
            ),
        );
        if let PartitionMode::Tolerance { tau } = info.mode() {
            obj.insert("tolerance_mode".into(), json!({ "tau": tau }));
        }
        if let Some(cap) = self.horizon_cap {
            obj.insert("horizon_cap".into(), json!(cap));
        }
        Value::Object(obj)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("serializable")
    }

    /// SHA-256 of the canonical serialization (sorted keys, reduced
    /// fractions, no whitespace, `name` omitted), as lowercase hex.
    pub fn digest(&self) -> String {
        let mut value = self.to_value();
        value.as_object_mut().expect("object").remove("name");
        let mut canonical = String::new();
        write_canonical(&value, &mut canonical);
        let hash = Sha256::digest(canonical.as_bytes());
        hex::encode(hash)
    }
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&m[k], out);
            }
            out.push('}');
        }
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(x, out);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

fn string_array(v: &Value, at: &str) -> Result<Vec<String>> {
    let arr = v.as_array().ok_or_else(|| perr(at, "expected an array of strings"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_str()
                .map(str::to_owned)
                .ok_or_else(|| perr(format!("{at}[{i}]"), "expected a string"))
        })
        .collect()
}

fn probability(v: &Value, at: &str, tolerant: bool) -> Result<Rational> {
    match v {
        Value::String(s) if rational::looks_decimal(s) => {
            if !tolerant {
                return Err(perr(at, format!("decimal {s:?} requires tolerance_mode; write a fraction")));
            }
            rational::parse_decimal(s).map_err(|e| perr(at, e.to_string()))
        }
        Value::String(s) => rational::parse_fraction(s).map_err(|e| perr(at, e.to_string())),
        Value::Number(n) => {
            if !tolerant && !n.is_u64() {
                return Err(perr(at, "decimal numbers require tolerance_mode; write a fraction string"));
            }
            rational::parse_decimal(&n.to_string()).map_err(|e| perr(at, e.to_string()))
        }
        _ => Err(perr(at, "expected a probability string such as \"3/8\"")),
    }
}

fn flatten(v: &Value, dims: &[usize], at: &str, tolerant: bool, out: &mut Vec<Rational>) -> Result<()> {
    let Some((&k, rest)) = dims.split_first() else {
        out.push(probability(v, at, tolerant)?);
        return Ok(());
    };
    let arr = v
        .as_array()
        .ok_or_else(|| perr(at, format!("expected an array of length {k}")))?;
    if arr.len() != k {
        return Err(perr(at, format!("expected {k} entries, found {}", arr.len())));
    }
    for (i, x) in arr.iter().enumerate() {
        flatten(x, rest, &format!("{at}[{i}]"), tolerant, out)?;
    }
    Ok(())
}

fn nest(flat: &[Rational], dims: &[usize]) -> Value {
    match dims.split_first() {
        None => json!(rational::format(&flat[0])),
        Some((&k, rest)) => {
            let chunk = flat.len() / k;
            Value::Array((0..k).map(|i| nest(&flat[i * chunk..(i + 1) * chunk], rest)).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example1;

    #[test]
    fn bundled_example_parses_and_validates() {
        let sc = Scenario::parse_valid(example1::SCENARIO_JSON).unwrap();
        assert_eq!(sc.info.num_states(), 4);
        assert_eq!(sc.info.alphabets(), &[2, 2]);
        assert_eq!(sc.name.as_deref(), Some("example1"));
    }

    #[test]
    fn roundtrip_is_exact() {
        let sc = Scenario::parse(example1::SCENARIO_JSON).unwrap();
        let again = Scenario::parse(&sc.to_json_pretty()).unwrap();
        assert_eq!(sc, again);
        assert_eq!(sc.digest(), again.digest());
    }

    #[test]
    fn digest_ignores_layout_but_not_content() {
        let sc = Scenario::parse(example1::SCENARIO_JSON).unwrap();
        let mut v: Value = serde_json::from_str(example1::SCENARIO_JSON).unwrap();
        let compact = serde_json::to_string(&v).unwrap();
        assert_eq!(Scenario::parse(&compact).unwrap().digest(), sc.digest());
        // same value written unreduced
        v["prior"][0] = json!("2/8");
        assert_eq!(Scenario::from_value(&v).unwrap().digest(), sc.digest());
        v["joint"][0][0][0] = json!("1/4");
        v["joint"][0][0][1] = json!("1/4");
        assert_ne!(Scenario::from_value(&v).unwrap().digest(), sc.digest());
    }

    #[test]
    fn errors_carry_positions() {
        let mut v: Value = serde_json::from_str(example1::SCENARIO_JSON).unwrap();
        v["joint"][2][1][0] = json!("1/x");
        match Scenario::from_value(&v) {
            Err(Error::Parse { at, .. }) => assert_eq!(at, "$.joint[2][1][0]"),
            other => panic!("{other:?}"),
        }
        v["joint"][2][1] = json!(["1/12"]);
        match Scenario::from_value(&v) {
            Err(Error::Parse { at, message }) => {
                assert_eq!(at, "$.joint[2][1]");
                assert!(message.contains("expected 2"));
            }
            other => panic!("{other:?}"),
        }
        match Scenario::parse("{\"schema_version\": 1,\n  oops}") {
            Err(Error::Parse { at, .. }) => assert!(at.starts_with("line 2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn decimals_need_tolerance_mode() {
        let mut v: Value = serde_json::from_str(example1::SCENARIO_JSON).unwrap();
        v["prior"] = json!(["0.25", "0.25", "0.25", "0.25"]);
        assert!(matches!(Scenario::from_value(&v), Err(Error::Parse { .. })));
        v["tolerance_mode"] = json!({ "tau": 1e-9 });
        let sc = Scenario::from_value(&v).unwrap();
        assert!(sc.info.is_valid());
        assert_eq!(sc.info.mode(), PartitionMode::Tolerance { tau: 1e-9 });
        let again = Scenario::parse(&sc.to_json_pretty()).unwrap();
        assert_eq!(sc, again);
    }

    #[test]
    fn invalid_structure_still_parses() {
        let mut v: Value = serde_json::from_str(example1::SCENARIO_JSON).unwrap();
        v["joint"][1][0][0] = json!("1/2");
        let sc = Scenario::from_value(&v).unwrap();
        assert!(!sc.info.is_valid());
        assert!(Scenario::parse_valid(&v.to_string()).is_err());
    }
}
