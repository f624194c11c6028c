//! Test-only oracles and model generators.
//!
//! The oracles here never call into `rbdkit::analytic`: reliability is
//! recomputed by enumerating every functioning/failed state of the instances
//! and summing the probabilities of the states the structure function accepts.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rbdkit::model::{structure_function, StateAssignment};
use rbdkit::{BlockExpr, Component, InstanceId, SystemModel};

pub const RESERVED: [&str; 4] = ["component", "system", "series", "parallel"];

/// Per-instance reliabilities e^(−λt), with optional overrides.
pub fn instance_probabilities(model: &SystemModel, t: f64, overrides: &[(InstanceId, f64)]) -> Vec<(InstanceId, f64)> {
    model
        .instances()
        .into_iter()
        .map(|id| {
            let p = overrides
                .iter()
                .find(|(o, _)| *o == id)
                .map(|(_, p)| *p)
                .unwrap_or_else(|| (-model.component(&id.component).unwrap().failure_rate * t).exp());
            (id, p)
        })
        .collect()
}

/// Σ over all 2^n states of [system up] × ∏ Bernoulli probabilities.
pub fn enumerate_reliability(model: &SystemModel, t: f64, overrides: &[(InstanceId, f64)]) -> f64 {
    let probs = instance_probabilities(model, t, overrides);
    let n = probs.len();
    assert!(n <= 20, "enumeration oracle is exponential");
    let mut total = 0.0;
    for mask in 0u64..(1 << n) {
        let mut state = StateAssignment::new();
        let mut weight = 1.0;
        for (i, (id, p)) in probs.iter().enumerate() {
            let up = mask >> i & 1 == 1;
            weight *= if up { *p } else { 1.0 - *p };
            state.insert(id.clone(), up);
        }
        if structure_function(model.root(), &state).unwrap() {
            total += weight;
        }
    }
    total
}

/// Forced-state Birnbaum importance via the enumeration oracle.
pub fn enumerate_birnbaum(model: &SystemModel, instance: &InstanceId, t: f64) -> f64 {
    enumerate_reliability(model, t, &[(instance.clone(), 1.0)])
        - enumerate_reliability(model, t, &[(instance.clone(), 0.0)])
}

/// Truth table of `expr` over all 2^n assignments of `instances`
/// (bit i of the row index = state of instance i), built bottom-up with
/// whole-table AND/OR.
pub fn truth_table(expr: &BlockExpr, instances: &[InstanceId]) -> Vec<bool> {
    let rows = 1usize << instances.len();
    match expr {
        BlockExpr::Component(id) => {
            let bit = instances.iter().position(|i| i == id).expect("instance listed");
            (0..rows).map(|r| r >> bit & 1 == 1).collect()
        }
        BlockExpr::Series(cs) => cs.iter().fold(vec![true; rows], |acc, c| {
            acc.iter()
                .zip(truth_table(c, instances))
                .map(|(a, b)| *a && b)
                .collect()
        }),
        BlockExpr::Parallel(cs) => cs.iter().fold(vec![false; rows], |acc, c| {
            acc.iter()
                .zip(truth_table(c, instances))
                .map(|(a, b)| *a || b)
                .collect()
        }),
    }
}

pub fn state_for_row(instances: &[InstanceId], row: usize) -> StateAssignment {
    instances
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), row >> i & 1 == 1))
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct GenOptions {
    pub max_instances: usize,
    pub max_children: usize,
    /// Log-uniform range of failure rates.
    pub rate_range: (f64, f64),
    /// Probability that a component gets λ = 0.
    pub zero_rate: f64,
    /// Probability of wrapping a node in an arity-1 block.
    pub wrap: f64,
    pub series_only: bool,
    /// Random identifiers and arbitrary float rates (for format tests).
    pub exotic: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self {
            max_instances: 10,
            max_children: 4,
            rate_range: (1e-6, 1e-3),
            zero_rate: 0.0,
            wrap: 0.1,
            series_only: false,
            exotic: false,
        }
    }
}

fn random_ident(rng: &mut impl Rng, taken: &[String]) -> String {
    const FIRST: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
    const REST: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_0123456789";
    loop {
        let len = rng.random_range(0..10);
        let mut s = String::new();
        s.push(FIRST[rng.random_range(0..FIRST.len())] as char);
        for _ in 0..len {
            s.push(REST[rng.random_range(0..REST.len())] as char);
        }
        if !RESERVED.contains(&s.as_str()) && !taken.contains(&s) {
            return s;
        }
    }
}

fn random_rate(rng: &mut impl Rng, opts: &GenOptions) -> f64 {
    if rng.random_bool(opts.zero_rate) {
        return 0.0;
    }
    if opts.exotic {
        return match rng.random_range(0..4) {
            0 => rng.random::<f64>() * 10f64.powi(rng.random_range(-12..4)),
            1 => rng.random_range(0..1000) as f64,
            2 => f64::from_bits(rng.random_range(0x0000_0000_0000_0001u64..0x7FEF_FFFF_FFFF_FFFF)),
            _ => 0.0,
        };
    }
    let (lo, hi) = opts.rate_range;
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn build(rng: &mut impl Rng, leaves: &mut Vec<BlockExpr>, opts: &GenOptions, parent_series: Option<bool>) -> BlockExpr {
    let node = if leaves.len() == 1 {
        leaves.pop().unwrap()
    } else {
        let k = rng.random_range(2..=opts.max_children.min(leaves.len()));
        // Random composition of the leaves into k nonempty groups.
        let mut cuts: Vec<usize> = (1..leaves.len()).collect();
        cuts.shuffle(rng);
        let mut cuts: Vec<usize> = cuts[..k - 1].to_vec();
        cuts.sort_unstable();
        let series = opts.series_only
            || match parent_series {
                // Alternate most of the time so both kinds nest.
                Some(p) => rng.random_bool(if p { 0.25 } else { 0.75 }),
                None => rng.random_bool(0.5),
            };
        let mut children = Vec::with_capacity(k);
        let mut rest = std::mem::take(leaves);
        for &cut in cuts.iter().rev() {
            let mut tail = rest.split_off(cut);
            children.push(build(rng, &mut tail, opts, Some(series)));
        }
        children.push(build(rng, &mut rest, opts, Some(series)));
        children.reverse();
        if series {
            BlockExpr::Series(children)
        } else {
            BlockExpr::Parallel(children)
        }
    };
    if rng.random_bool(opts.wrap) {
        if opts.series_only || rng.random_bool(0.5) {
            BlockExpr::Series(vec![node])
        } else {
            BlockExpr::Parallel(vec![node])
        }
    } else {
        node
    }
}

/// A random valid model: every declared component is referenced at least
/// once, repeated references become separate instances.
pub fn random_model(rng: &mut impl Rng, opts: &GenOptions) -> SystemModel {
    let n_instances = rng.random_range(1..=opts.max_instances);
    let n_components = rng.random_range(1..=n_instances);
    let mut names: Vec<String> = Vec::new();
    for i in 0..n_components {
        let name = if opts.exotic {
            random_ident(rng, &names)
        } else {
            format!("c{i}")
        };
        names.push(name);
    }
    let components: Vec<Component> = names
        .iter()
        .map(|n| Component::new(n.clone(), random_rate(rng, opts)))
        .collect();
    let mut refs: Vec<usize> = (0..n_components).collect();
    refs.extend((n_components..n_instances).map(|_| rng.random_range(0..n_components)));
    refs.shuffle(rng);
    let mut leaves: Vec<BlockExpr> = refs.iter().map(|&i| BlockExpr::leaf(names[i].clone())).collect();
    let root = build(rng, &mut leaves, opts, None);
    let name = if opts.exotic {
        random_ident(rng, &[])
    } else {
        "gen".to_string()
    };
    SystemModel::new(name, components, root)
}

/// Every internal node of `expr` paired with the model rooted there.
pub fn submodels(model: &SystemModel) -> Vec<(SystemModel, bool, Vec<SystemModel>)> {
    fn go(model: &SystemModel, e: &BlockExpr, out: &mut Vec<(SystemModel, bool, Vec<SystemModel>)>) {
        let sub = |e: &BlockExpr| SystemModel::from_parts("sub", model.components().to_vec(), e.clone());
        if let BlockExpr::Series(cs) | BlockExpr::Parallel(cs) = e {
            out.push((sub(e), matches!(e, BlockExpr::Series(_)), cs.iter().map(sub).collect()));
            for c in cs {
                go(model, c, out);
            }
        }
    }
    let mut out = Vec::new();
    go(model, model.root(), &mut out);
    out
}

/// Same tree with the children of every block reversed and rotated.
pub fn permute_children(expr: &BlockExpr, shift: usize) -> BlockExpr {
    let perm = |cs: &Vec<BlockExpr>| {
        let mut v: Vec<BlockExpr> = cs.iter().rev().map(|c| permute_children(c, shift + 1)).collect();
        if !v.is_empty() {
            let len = v.len();
            v.rotate_left(shift % len);
        }
        v
    };
    match expr {
        BlockExpr::Component(_) => expr.clone(),
        BlockExpr::Series(cs) => BlockExpr::Series(perm(cs)),
        BlockExpr::Parallel(cs) => BlockExpr::Parallel(perm(cs)),
    }
}

pub fn load(src: &str) -> SystemModel {
    rbdkit::dsl::parse(src).expect("bundled model parses")
}
