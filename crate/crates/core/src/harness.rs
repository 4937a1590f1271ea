//! Empirical equivalence runs: checkers against builders.
//!
//! For each seed the harness generates an instance, runs the relevant
//! no-arbitrage checkers once, then walks every extreme model of the
//! prior family (one kernel choice per interior node) and tries to
//! build and verify a price system for it. The two sides must agree
//! instance by instance: a viable market yields a verified certificate
//! for every extreme model, a failing one yields a builder refusal for
//! every extreme model. Any other combination is recorded as a
//! disagreement together with the instance that produced it.
//!
//! A corruption hook supports fault-injection tests: it tampers with
//! each certificate after the build, and a healthy harness must then
//! report disagreements rather than wave the run through.

use crate::arbitrage::check_na;
use crate::bidask::backward_modify;
use crate::cone_market::{check_efficient_friction, check_nas};
use crate::cps::{construct_cps, verify_cps, verify_iiprime, CpsCertificate, ExtensionCase};
use crate::gen::{gen_instance, GenParams};
use crate::io::{Instance, InstanceFile, Mode};
use crate::rational::Rational;
use crate::scps::{construct_scps, verify_scps, ScpsCertificate};
use crate::tree::{NodeId, ScenarioTree, TreeMeasure};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::ops::Range;

/// Every model picking one listed kernel per interior node, in a fixed
/// order. These are the extreme points of the prior family wherever
/// the per-node hulls are simplices, and always a covering set of
/// representatives for domination checks.
pub fn extreme_measures(tree: &ScenarioTree) -> Vec<TreeMeasure> {
    let interior = tree.interior_nodes();
    let sizes: Vec<usize> =
        interior.iter().map(|n| tree.family(n).expect("interior node").kernels().len()).collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; interior.len()];
    loop {
        let index: BTreeMap<&NodeId, usize> = interior.iter().zip(choice.iter().copied()).collect();
        out.push(TreeMeasure::from_selector(tree, |n| index[n]).expect("choice in range"));
        let mut digit = 0;
        loop {
            if digit == choice.len() {
                return out;
            }
            choice[digit] += 1;
            if choice[digit] < sizes[digit] {
                break;
            }
            choice[digit] = 0;
            digit += 1;
        }
    }
}

#[derive(Clone, Debug)]
pub struct Disagreement {
    pub seed: u64,
    pub detail: String,
    /// The offending instance, ready to be dumped for replay.
    pub instance: InstanceFile,
}

#[derive(Clone, Debug)]
pub struct EquivalenceSummary {
    pub mode: Mode,
    pub agreements: usize,
    pub disagreements: Vec<Disagreement>,
}

impl EquivalenceSummary {
    pub fn ok(&self) -> bool {
        self.disagreements.is_empty()
    }

    pub fn total(&self) -> usize {
        self.agreements + self.disagreements.len()
    }
}

/// Per-seed generation parameters for an equivalence run. Cone
/// instances alternate between two and three assets so both dimensions
/// stay covered in a single run.
pub fn params_for(mode: Mode, seed: u64) -> GenParams {
    match mode {
        Mode::Bidask2d => GenParams::bidask(2),
        Mode::Cones => GenParams::cones(2, 2 + (seed % 2) as usize),
    }
}

/// Runs the checker-builder agreement test over a seed range. With
/// `corrupt` set, certificates are tampered with after each build; the
/// run is then expected to surface disagreements.
pub fn run_equivalence(seeds: Range<u64>, mode: Mode, corrupt: bool) -> EquivalenceSummary {
    let mut summary = EquivalenceSummary { mode, agreements: 0, disagreements: Vec::new() };
    for seed in seeds {
        let instance = gen_instance(seed, &params_for(mode, seed));
        let verdict = match &instance {
            Instance::Bidask { tree, market, .. } => bidask_seed(tree, market, corrupt),
            Instance::Cones { tree, market, .. } => cones_seed(tree, market, corrupt),
        };
        match verdict {
            None => summary.agreements += 1,
            Some(detail) => summary.disagreements.push(Disagreement {
                seed,
                detail,
                instance: instance.to_file(),
            }),
        }
    }
    summary
}

fn bidask_seed(
    tree: &ScenarioTree,
    market: &crate::bidask::BidAskProcess,
    corrupt: bool,
) -> Option<String> {
    let viable = check_na(tree, market).holds();
    let modified = backward_modify(tree, market);
    for (i, p) in extreme_measures(tree).iter().enumerate() {
        match construct_cps(tree, market, p) {
            Err(e) if viable => {
                return Some(format!(
                    "no arbitrage found, yet the builder refused model #{i}: {e}"
                ));
            }
            Err(_) => {}
            Ok(mut cert) => {
                if !viable {
                    return Some(format!(
                        "arbitrage found, yet the builder produced a certificate for model #{i}"
                    ));
                }
                if corrupt {
                    flip_weight(&mut cert);
                }
                let report = verify_cps(tree, market, &cert, p);
                if let Some(v) = report.violations().first() {
                    return Some(format!("certificate for model #{i} fails verification: {v}"));
                }
                let runs = verify_iiprime(tree, &modified, &cert);
                if let Some(v) = runs.violations().first() {
                    return Some(format!("certificate for model #{i} fails the run check: {v}"));
                }
            }
        }
    }
    None
}

fn cones_seed(
    tree: &ScenarioTree,
    market: &crate::cone_market::ConeMarket,
    corrupt: bool,
) -> Option<String> {
    let viable =
        check_nas(tree, market).holds() && check_efficient_friction(tree, market.cones()).holds();
    let models = extreme_measures(tree);
    // The strict builder does not look at the model beyond validating
    // it, so one build serves every extreme model.
    match construct_scps(tree, market, &models[0]) {
        Err(e) => {
            if viable {
                Some(format!("strict checks pass, yet the builder refused: {e}"))
            } else {
                None
            }
        }
        Ok(mut cert) => {
            if !viable {
                return Some("strict checks fail, yet the builder produced a certificate".into());
            }
            if corrupt {
                scale_price(&mut cert);
            }
            for (i, p) in models.iter().enumerate() {
                let report = verify_scps(tree, market, &cert, p);
                if let Some(v) = report.violations().first() {
                    return Some(format!("certificate fails verification for model #{i}: {v}"));
                }
            }
            None
        }
    }
}

/// Corruption hook: forces the recorded weight at the first extension
/// node to the wrong interval end, which the weight-case consistency
/// check is built to catch.
fn flip_weight(cert: &mut CpsCertificate) {
    if let Some((node, case)) = cert.cases.iter().next() {
        let wrong = match case {
            ExtensionCase::AtLower => Rational::one(),
            _ => Rational::zero(),
        };
        let node = node.clone();
        cert.weights.insert(node, wrong);
    }
}

/// Corruption hook for the cone side: doubles the price at the first
/// charged node below the root, which breaks the parent's martingale
/// identity.
fn scale_price(cert: &mut ScpsCertificate) {
    let target = cert.prices.keys().find(|n| !n.is_root() && cert.measure.charges(n)).cloned();
    if let Some(node) = target {
        for v in cert.prices.get_mut(&node).expect("key just found") {
            *v *= Rational::from_integer(2.into());
        }
    }
}
