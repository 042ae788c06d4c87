//! Plain-text key-value serialization of angular models, with deterministic
//! field order. Used by the command-line fit/predict round trip.
//!
//! ```text
//! family = husler_reiss
//! d = 3
//! lambda_1_2 = 0.65
//! lambda_1_3 = 0.9
//! lambda_2_3 = 0.98
//! ```
//!
//! Asymmetric logistic blocks use `alpha_<members>` and
//! `beta_<j>_of_<members>` keys with 1-based indices, blocks ordered by size
//! then lexicographically.

use crate::angular::{pair_order, AlBlock, AngularModel, Family};
use crate::error::{Error, Result};

pub fn to_kv(model: &AngularModel) -> String {
    let d = model.d();
    let mut out = String::new();
    out.push_str(&format!("family = {}\n", model.family().name()));
    out.push_str(&format!("d = {d}\n"));
    match model {
        AngularModel::TiltedDirichlet(p) => {
            for (j, a) in p.alpha().iter().enumerate() {
                out.push_str(&format!("alpha_{} = {}\n", j + 1, a));
            }
        }
        AngularModel::PairwiseBeta(p) => {
            for ((i, j), b) in pair_order(d).into_iter().zip(p.beta()) {
                out.push_str(&format!("beta_{}_{} = {}\n", i + 1, j + 1, b));
            }
            out.push_str(&format!("alpha = {}\n", p.alpha()));
        }
        AngularModel::HuslerReiss(p) => {
            for ((i, j), l) in pair_order(d).into_iter().zip(p.lambda_pairs()) {
                out.push_str(&format!("lambda_{}_{} = {}\n", i + 1, j + 1, l));
            }
        }
        AngularModel::ExtremalT(p) => {
            for ((i, j), r) in pair_order(d).into_iter().zip(p.rho_pairs()) {
                out.push_str(&format!("rho_{}_{} = {}\n", i + 1, j + 1, r));
            }
            out.push_str(&format!("nu = {}\n", p.nu()));
        }
        AngularModel::AsymLogistic(p) => {
            for b in p.blocks() {
                let members: Vec<String> =
                    b.members.iter().map(|&m| (m + 1).to_string()).collect();
                let tag = members.join("_");
                if b.members.len() >= 2 {
                    out.push_str(&format!("alpha_{tag} = {}\n", b.alpha));
                }
                for (&j, &beta) in b.members.iter().zip(&b.beta) {
                    out.push_str(&format!("beta_{}_of_{tag} = {}\n", j + 1, beta));
                }
            }
        }
    }
    out
}

fn parse_entries(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Validation(format!("line {}: expected `key = value`", no + 1)));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Validation(format!("key {key}: bad number '{v}'")))
}

pub fn from_kv(text: &str) -> Result<AngularModel> {
    let entries = parse_entries(text)?;
    let get = |key: &str| -> Option<&str> {
        entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    };
    let family = Family::parse(
        get("family").ok_or_else(|| Error::Validation("missing key 'family'".into()))?,
    )?;
    let d: usize = get("d")
        .ok_or_else(|| Error::Validation("missing key 'd'".into()))?
        .parse()
        .map_err(|_| Error::Validation("bad dimension".into()))?;

    let require = |key: String| -> Result<f64> {
        let v = get(&key).ok_or_else(|| Error::Validation(format!("missing key '{key}'")))?;
        parse_f64(&key, v)
    };

    match family {
        Family::TiltedDirichlet => {
            let alpha: Result<Vec<f64>> = (1..=d).map(|j| require(format!("alpha_{j}"))).collect();
            AngularModel::tilted_dirichlet(alpha?)
        }
        Family::PairwiseBeta => {
            let beta: Result<Vec<f64>> = pair_order(d)
                .into_iter()
                .map(|(i, j)| require(format!("beta_{}_{}", i + 1, j + 1)))
                .collect();
            AngularModel::pairwise_beta(d, beta?, require("alpha".into())?)
        }
        Family::HuslerReiss => {
            let lambda: Result<Vec<f64>> = pair_order(d)
                .into_iter()
                .map(|(i, j)| require(format!("lambda_{}_{}", i + 1, j + 1)))
                .collect();
            AngularModel::husler_reiss(d, lambda?)
        }
        Family::ExtremalT => {
            let rho: Result<Vec<f64>> = pair_order(d)
                .into_iter()
                .map(|(i, j)| require(format!("rho_{}_{}", i + 1, j + 1)))
                .collect();
            AngularModel::extremal_t(d, rho?, require("nu".into())?)
        }
        Family::AsymLogistic => {
            // collect blocks from beta keys
            let mut blocks: std::collections::BTreeMap<Vec<usize>, AlBlock> =
                std::collections::BTreeMap::new();
            for (k, v) in &entries {
                if let Some(rest) = k.strip_prefix("beta_") {
                    let Some((j, tag)) = rest.split_once("_of_") else {
                        continue;
                    };
                    let j: usize = j
                        .parse::<usize>()
                        .map_err(|_| Error::Validation(format!("bad key '{k}'")))?
                        - 1;
                    let members: Result<Vec<usize>> = tag
                        .split('_')
                        .map(|s| {
                            s.parse::<usize>()
                                .map(|m| m - 1)
                                .map_err(|_| Error::Validation(format!("bad key '{k}'")))
                        })
                        .collect();
                    let members = members?;
                    let entry = blocks.entry(members.clone()).or_insert_with(|| AlBlock {
                        members: members.clone(),
                        alpha: 1.0,
                        beta: vec![0.0; members.len()],
                    });
                    let pos = entry
                        .members
                        .iter()
                        .position(|&m| m == j)
                        .ok_or_else(|| Error::Validation(format!("key '{k}': {} not in block", j + 1)))?;
                    entry.beta[pos] = parse_f64(k, v)?;
                }
            }
            for (k, v) in &entries {
                if k == "alpha" || !k.starts_with("alpha_") {
                    continue;
                }
                let tag = &k["alpha_".len()..];
                let members: Result<Vec<usize>> = tag
                    .split('_')
                    .map(|s| {
                        s.parse::<usize>()
                            .map(|m| m - 1)
                            .map_err(|_| Error::Validation(format!("bad key '{k}'")))
                    })
                    .collect();
                let members = members?;
                if let Some(b) = blocks.get_mut(&members) {
                    b.alpha = parse_f64(k, v)?;
                }
            }
            AngularModel::asym_logistic(d, blocks.into_values().collect())
        }
    }
}
