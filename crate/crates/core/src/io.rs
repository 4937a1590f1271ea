//! JSON formats for instances, results, and certificates.
//!
//! Rationals travel as "p/q" strings so nothing downstream is tempted
//! to round them, node keys are dotted child paths with "root" for the
//! empty path, and every map is ordered, so emission is canonical:
//! parsing a file and emitting it again reproduces it byte for byte.
//! Unknown fields are rejected rather than ignored.
//!
//! Structural decoding and semantic validation are separate steps. The
//! serde layer only checks shapes; `InstanceFile::build` then assembles
//! the typed tree, market, and optional reference measure, reporting
//! the offending JSON path when a rational is malformed, a kernel does
//! not sum to one, or a node dangles outside the tree.

use crate::bidask::BidAskProcess;
use crate::cone::PolyCone;
use crate::cone_market::ConeMarket;
use crate::cps::{CpsCertificate, ExtensionCase};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::scps::ScpsCertificate;
use crate::tree::{Kernel, NodeId, PriorFamily, ScenarioTree, TreeMeasure};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    /// The text is not structurally valid JSON for the schema.
    #[error("json: {0}")]
    Json(String),
    /// The JSON decoded but the content is inconsistent; the path
    /// points at the offending field.
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Invalid { path: path.into(), message: message.into() }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bidask2d,
    Cones,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub mode: Mode,
    pub tree: TreeSpec,
    pub market: MarketSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<BTreeMap<String, Vec<String>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    pub depth: usize,
    pub children: BTreeMap<String, usize>,
    pub families: BTreeMap<String, Vec<Vec<String>>>,
}

/// Exactly one market shape per mode: `quotes` for bidask2d, `dim` and
/// `cones` for cones. Kept as options in one struct so unknown fields
/// stay rejected; `build` enforces the pairing.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct MarketSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotes: Option<BTreeMap<String, QuoteSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cones: Option<BTreeMap<String, Vec<Vec<String>>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct QuoteSpec {
    pub bid: String,
    pub ask: String,
}

/// A parsed and validated instance, ready for the checkers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Bidask { tree: ScenarioTree, market: BidAskProcess, measure: Option<TreeMeasure> },
    Cones { tree: ScenarioTree, market: ConeMarket, measure: Option<TreeMeasure> },
}

impl Instance {
    pub fn mode(&self) -> Mode {
        match self {
            Instance::Bidask { .. } => Mode::Bidask2d,
            Instance::Cones { .. } => Mode::Cones,
        }
    }

    pub fn tree(&self) -> &ScenarioTree {
        match self {
            Instance::Bidask { tree, .. } | Instance::Cones { tree, .. } => tree,
        }
    }

    pub fn measure(&self) -> Option<&TreeMeasure> {
        match self {
            Instance::Bidask { measure, .. } | Instance::Cones { measure, .. } => measure.as_ref(),
        }
    }

    pub fn to_file(&self) -> InstanceFile {
        match self {
            Instance::Bidask { tree, market, measure } => {
                InstanceFile::from_bidask(tree, market, measure.as_ref())
            }
            Instance::Cones { tree, market, measure } => {
                InstanceFile::from_cones(tree, market, measure.as_ref())
            }
        }
    }
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("plain data serializes");
        text.push('\n');
        text
    }

    pub fn from_bidask(
        tree: &ScenarioTree,
        market: &BidAskProcess,
        measure: Option<&TreeMeasure>,
    ) -> Self {
        let quotes = market
            .bids()
            .iter()
            .map(|(node, bid)| {
                let quote =
                    QuoteSpec { bid: format_rational(bid), ask: format_rational(market.ask(node)) };
                (node_key(node), quote)
            })
            .collect();
        InstanceFile {
            version: FORMAT_VERSION,
            mode: Mode::Bidask2d,
            tree: tree_spec(tree),
            market: MarketSpec { quotes: Some(quotes), dim: None, cones: None },
            measure: measure.map(kernel_map_spec),
        }
    }

    pub fn from_cones(
        tree: &ScenarioTree,
        market: &ConeMarket,
        measure: Option<&TreeMeasure>,
    ) -> Self {
        let cones = market
            .cones()
            .iter()
            .map(|(node, cone)| {
                let gens = cone
                    .generators()
                    .iter()
                    .map(|g| g.iter().map(format_rational).collect())
                    .collect();
                (node_key(node), gens)
            })
            .collect();
        InstanceFile {
            version: FORMAT_VERSION,
            mode: Mode::Cones,
            tree: tree_spec(tree),
            market: MarketSpec { quotes: None, dim: Some(market.dim()), cones: Some(cones) },
            measure: measure.map(kernel_map_spec),
        }
    }

    /// Assembles the typed instance, validating as it goes.
    pub fn build(&self) -> Result<Instance, IoError> {
        if self.version != FORMAT_VERSION {
            return Err(invalid("version", format!("unsupported version {}", self.version)));
        }
        let tree = self.build_tree()?;
        let measure = match &self.measure {
            None => None,
            Some(map) => {
                let m = TreeMeasure::new(parse_kernel_map("measure", map)?);
                tree.validate_measure(&m).map_err(|e| invalid("measure", e.to_string()))?;
                Some(m)
            }
        };
        match self.mode {
            Mode::Bidask2d => {
                let Some(quotes) = &self.market.quotes else {
                    return Err(invalid("market", "bidask2d mode needs a quotes table"));
                };
                if self.market.dim.is_some() || self.market.cones.is_some() {
                    return Err(invalid("market", "bidask2d mode takes quotes only"));
                }
                let mut bid = BTreeMap::new();
                let mut ask = BTreeMap::new();
                for (key, quote) in quotes {
                    let path = format!("market.quotes.{key}");
                    let node = parse_node(&path, key)?;
                    bid.insert(node.clone(), parse_rat(&format!("{path}.bid"), &quote.bid)?);
                    ask.insert(node, parse_rat(&format!("{path}.ask"), &quote.ask)?);
                }
                let market = BidAskProcess::new(&tree, bid, ask)
                    .map_err(|e| invalid("market.quotes", e.to_string()))?;
                Ok(Instance::Bidask { tree, market, measure })
            }
            Mode::Cones => {
                let (Some(dim), Some(cones)) = (self.market.dim, &self.market.cones) else {
                    return Err(invalid("market", "cones mode needs dim and a cones table"));
                };
                if self.market.quotes.is_some() {
                    return Err(invalid("market", "cones mode takes generator lists only"));
                }
                let mut parsed = BTreeMap::new();
                for (key, gens) in cones {
                    let path = format!("market.cones.{key}");
                    let node = parse_node(&path, key)?;
                    let mut rows = Vec::new();
                    for (i, gen) in gens.iter().enumerate() {
                        let mut row = Vec::new();
                        for (j, entry) in gen.iter().enumerate() {
                            row.push(parse_rat(&format!("{path}[{i}][{j}]"), entry)?);
                        }
                        rows.push(row);
                    }
                    let cone = PolyCone::from_generators(dim, rows)
                        .map_err(|e| invalid(&path, e.to_string()))?;
                    parsed.insert(node, cone);
                }
                let market = ConeMarket::new(&tree, dim, parsed)
                    .map_err(|e| invalid("market.cones", e.to_string()))?;
                Ok(Instance::Cones { tree, market, measure })
            }
        }
    }

    fn build_tree(&self) -> Result<ScenarioTree, IoError> {
        let mut children = BTreeMap::new();
        for (key, &count) in &self.tree.children {
            let node = parse_node(&format!("tree.children.{key}"), key)?;
            children.insert(node, count);
        }
        let mut families = BTreeMap::new();
        for (key, kernels) in &self.tree.families {
            let path = format!("tree.families.{key}");
            let node = parse_node(&path, key)?;
            let mut parsed = Vec::new();
            for (i, kernel) in kernels.iter().enumerate() {
                parsed.push(parse_kernel(&format!("{path}[{i}]"), kernel)?);
            }
            let family = PriorFamily::new(parsed).map_err(|e| invalid(&path, e.to_string()))?;
            families.insert(node, family);
        }
        ScenarioTree::new(self.tree.depth, children, families)
            .map_err(|e| invalid("tree", e.to_string()))
    }
}

/// Command outcome: a one-word verdict, human-readable diagnostics such
/// as flagged nodes or witness positions, and the certificate when the
/// command built or checked one. Certificates fed back through the
/// verify commands re-verify as they stand.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub command: String,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSpec>,
    pub elapsed_ms: u64,
}

impl ResultFile {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("plain data serializes");
        text.push('\n');
        text
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum CertKind {
    Cps,
    Scps,
}

/// Serialized price system. The interval build uses scalar prices plus
/// weights and case labels; the cone build uses price vectors plus
/// interiority margins. Prices are stored as component lists in both
/// shapes, scalar prices as single-entry lists.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct CertificateSpec {
    pub kind: CertKind,
    pub measure: BTreeMap<String, Vec<String>>,
    pub dominating: BTreeMap<String, Vec<String>>,
    pub prices: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub weights: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cases: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub margins: BTreeMap<String, String>,
}

impl CertificateSpec {
    pub fn from_cps(cert: &CpsCertificate) -> Self {
        CertificateSpec {
            kind: CertKind::Cps,
            measure: kernel_map_spec(&cert.measure),
            dominating: kernel_map_spec(&cert.dominating),
            prices: cert
                .prices
                .iter()
                .map(|(n, p)| (node_key(n), vec![format_rational(p)]))
                .collect(),
            weights: scalar_map_spec(&cert.weights),
            cases: cert.cases.iter().map(|(n, c)| (node_key(n), c.as_str().to_string())).collect(),
            margins: BTreeMap::new(),
        }
    }

    pub fn to_cps(&self) -> Result<CpsCertificate, IoError> {
        if self.kind != CertKind::Cps {
            return Err(invalid("certificate.kind", "expected an interval certificate"));
        }
        let measure = TreeMeasure::new(parse_kernel_map("certificate.measure", &self.measure)?);
        let dominating =
            TreeMeasure::new(parse_kernel_map("certificate.dominating", &self.dominating)?);
        let mut prices = BTreeMap::new();
        for (key, components) in &self.prices {
            let path = format!("certificate.prices.{key}");
            let node = parse_node(&path, key)?;
            let [price] = components.as_slice() else {
                return Err(invalid(&path, "expected a single component"));
            };
            prices.insert(node, parse_rat(&path, price)?);
        }
        let weights = parse_scalar_map("certificate.weights", &self.weights)?;
        let mut cases = BTreeMap::new();
        for (key, label) in &self.cases {
            let path = format!("certificate.cases.{key}");
            let node = parse_node(&path, key)?;
            let case = ExtensionCase::parse(label)
                .ok_or_else(|| invalid(&path, format!("unknown case {label:?}")))?;
            cases.insert(node, case);
        }
        Ok(CpsCertificate { measure, prices, weights, cases, dominating })
    }

    pub fn from_scps(cert: &ScpsCertificate) -> Self {
        CertificateSpec {
            kind: CertKind::Scps,
            measure: kernel_map_spec(&cert.measure),
            dominating: kernel_map_spec(&cert.dominating),
            prices: cert
                .prices
                .iter()
                .map(|(n, z)| (node_key(n), z.iter().map(format_rational).collect()))
                .collect(),
            weights: BTreeMap::new(),
            cases: BTreeMap::new(),
            margins: scalar_map_spec(&cert.slacks),
        }
    }

    pub fn to_scps(&self) -> Result<ScpsCertificate, IoError> {
        if self.kind != CertKind::Scps {
            return Err(invalid("certificate.kind", "expected a strict certificate"));
        }
        let measure = TreeMeasure::new(parse_kernel_map("certificate.measure", &self.measure)?);
        let dominating =
            TreeMeasure::new(parse_kernel_map("certificate.dominating", &self.dominating)?);
        let mut prices = BTreeMap::new();
        for (key, components) in &self.prices {
            let path = format!("certificate.prices.{key}");
            let node = parse_node(&path, key)?;
            let mut z = Vec::new();
            for (j, entry) in components.iter().enumerate() {
                z.push(parse_rat(&format!("{path}[{j}]"), entry)?);
            }
            prices.insert(node, z);
        }
        let slacks = parse_scalar_map("certificate.margins", &self.margins)?;
        Ok(ScpsCertificate { measure, prices, dominating, slacks })
    }
}

/// Parses a standalone measure file: one JSON object mapping node keys
/// to kernel weight lists. Tree-level validation is the caller's job.
pub fn parse_measure_json(text: &str) -> Result<TreeMeasure, IoError> {
    let map: BTreeMap<String, Vec<String>> =
        serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
    Ok(TreeMeasure::new(parse_kernel_map("measure", &map)?))
}

fn node_key(node: &NodeId) -> String {
    node.to_string()
}

fn parse_node(path: &str, key: &str) -> Result<NodeId, IoError> {
    if key == "root" {
        return Ok(NodeId::root());
    }
    let mut steps = Vec::new();
    for part in key.split('.') {
        let step: usize =
            part.parse().map_err(|_| invalid(path, format!("bad node key {key:?}")))?;
        steps.push(step);
    }
    Ok(NodeId::from_path(steps))
}

fn parse_rat(path: &str, s: &str) -> Result<Rational, IoError> {
    parse_rational(s).map_err(|e| invalid(path, e))
}

fn parse_kernel(path: &str, weights: &[String]) -> Result<Kernel, IoError> {
    let mut parsed = Vec::new();
    for (j, w) in weights.iter().enumerate() {
        parsed.push(parse_rat(&format!("{path}[{j}]"), w)?);
    }
    Kernel::new(parsed).map_err(|e| invalid(path, e.to_string()))
}

fn parse_kernel_map(
    prefix: &str,
    map: &BTreeMap<String, Vec<String>>,
) -> Result<BTreeMap<NodeId, Kernel>, IoError> {
    let mut kernels = BTreeMap::new();
    for (key, weights) in map {
        let path = format!("{prefix}.{key}");
        let node = parse_node(&path, key)?;
        kernels.insert(node, parse_kernel(&path, weights)?);
    }
    Ok(kernels)
}

fn parse_scalar_map(
    prefix: &str,
    map: &BTreeMap<String, String>,
) -> Result<BTreeMap<NodeId, Rational>, IoError> {
    let mut out = BTreeMap::new();
    for (key, value) in map {
        let path = format!("{prefix}.{key}");
        let node = parse_node(&path, key)?;
        out.insert(node, parse_rat(&path, value)?);
    }
    Ok(out)
}

fn scalar_map_spec(map: &BTreeMap<NodeId, Rational>) -> BTreeMap<String, String> {
    map.iter().map(|(n, v)| (node_key(n), format_rational(v))).collect()
}

fn kernel_map_spec(measure: &TreeMeasure) -> BTreeMap<String, Vec<String>> {
    measure
        .kernels()
        .iter()
        .map(|(n, k)| (node_key(n), k.weights().iter().map(format_rational).collect()))
        .collect()
}

fn tree_spec(tree: &ScenarioTree) -> TreeSpec {
    let mut children = BTreeMap::new();
    let mut families = BTreeMap::new();
    for node in tree.all_nodes() {
        if tree.is_leaf(&node) {
            continue;
        }
        let key = node_key(&node);
        children.insert(key.clone(), tree.child_count(&node).expect("interior node"));
        let family = tree.family(&node).expect("interior node");
        let kernels = family
            .kernels()
            .iter()
            .map(|k| k.weights().iter().map(format_rational).collect())
            .collect();
        families.insert(key, kernels);
    }
    TreeSpec { depth: tree.depth(), children, families }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cps::{construct_cps, verify_cps};
    use crate::instances;
    use crate::scps::{construct_scps, verify_scps};

    fn delta_measure(tree: &ScenarioTree) -> TreeMeasure {
        TreeMeasure::from_selector(tree, |_| 0).unwrap()
    }

    fn bidask_file(pair: (ScenarioTree, BidAskProcess)) -> (InstanceFile, Instance) {
        let (tree, market) = pair;
        let instance = Instance::Bidask { tree, market, measure: None };
        (instance.to_file(), instance)
    }

    #[test]
    fn instance_files_round_trip_byte_for_byte() {
        let (file, instance) = bidask_file(instances::cross_period_trend());
        let text = file.to_json();
        let reparsed = InstanceFile::from_json(&text).unwrap();
        assert_eq!(reparsed.to_json(), text);
        assert_eq!(reparsed.build().unwrap(), instance);

        let (file, instance) = bidask_file(instances::binary_frictionless());
        let text = file.to_json();
        assert_eq!(InstanceFile::from_json(&text).unwrap().to_json(), text);
        assert_eq!(InstanceFile::from_json(&text).unwrap().build().unwrap(), instance);
    }

    #[test]
    fn cone_market_files_round_trip() {
        let (tree, market) = instances::shifted_spread();
        let cm = ConeMarket::from_bidask(&tree, &market);
        let p = delta_measure(&tree);
        let instance = Instance::Cones { tree, market: cm, measure: Some(p) };
        let text = instance.to_file().to_json();
        let reparsed = InstanceFile::from_json(&text).unwrap();
        assert_eq!(reparsed.to_json(), text);
        assert_eq!(reparsed.build().unwrap(), instance);
    }

    #[test]
    fn bad_kernel_sum_is_reported_with_its_path() {
        let text = r#"{
            "version": 1,
            "mode": "bidask2d",
            "tree": {
                "depth": 1,
                "children": {"root": 3},
                "families": {"root": [["1/3", "1/3", "1/2"]]}
            },
            "market": {"quotes": {
                "root": {"bid": "2", "ask": "3"},
                "0": {"bid": "2", "ask": "3"},
                "1": {"bid": "2", "ask": "3"},
                "2": {"bid": "2", "ask": "3"}
            }}
        }"#;
        let err = InstanceFile::from_json(text).unwrap().build().unwrap_err();
        let message = err.to_string();
        assert!(message.contains("tree.families.root[0]"), "{message}");
        assert!(message.contains("kernel sums to 7/6"), "{message}");
    }

    #[test]
    fn malformed_rational_names_the_field() {
        let text = r#"{
            "version": 1,
            "mode": "bidask2d",
            "tree": {"depth": 0, "children": {}, "families": {}},
            "market": {"quotes": {"root": {"bid": "three", "ask": "4"}}}
        }"#;
        let err = InstanceFile::from_json(text).unwrap().build().unwrap_err();
        let message = err.to_string();
        assert!(message.contains("market.quotes.root.bid"), "{message}");
        assert!(message.contains("not a rational"), "{message}");
    }

    #[test]
    fn dangling_interior_nodes_are_rejected() {
        let text = r#"{
            "version": 1,
            "mode": "bidask2d",
            "tree": {
                "depth": 1,
                "children": {"root": 1, "5": 1},
                "families": {"root": [["1"]], "5": [["1"]]}
            },
            "market": {"quotes": {"root": {"bid": "2", "ask": "3"}, "0": {"bid": "2", "ask": "3"}}}
        }"#;
        let err = InstanceFile::from_json(text).unwrap().build().unwrap_err();
        assert!(err.to_string().starts_with("tree:"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{
            "version": 1,
            "mode": "bidask2d",
            "tree": {"depth": 0, "children": {}, "families": {}},
            "market": {"quotes": {"root": {"bid": "2", "ask": "3"}}},
            "surprise": true
        }"#;
        assert!(matches!(InstanceFile::from_json(text), Err(IoError::Json(_))));
    }

    #[test]
    fn market_shape_must_match_the_mode() {
        let (file, _) = bidask_file(instances::cross_period_trend());
        let mut wrong = file.clone();
        wrong.mode = Mode::Cones;
        let err = wrong.build().unwrap_err();
        assert!(err.to_string().contains("cones mode needs"), "{err}");

        let mut both = file;
        both.market.dim = Some(2);
        let err = both.build().unwrap_err();
        assert!(err.to_string().contains("quotes only"), "{err}");
    }

    #[test]
    fn out_of_hull_measures_are_rejected_at_the_boundary() {
        let (tree, market) = instances::binary_frictionless();
        let mut file = InstanceFile::from_bidask(&tree, &market, None);
        // A fair coin is not a mixture of the two listed point masses
        // if we overwrite the family with a single one first.
        file.tree.families.insert("root".into(), vec![vec!["1".into(), "0".into()]]);
        file.measure = Some(BTreeMap::from([("root".into(), vec!["1/2".into(), "1/2".into()])]));
        let err = file.build().unwrap_err();
        assert!(err.to_string().starts_with("measure:"), "{err}");
    }

    #[test]
    fn interval_certificates_survive_the_round_trip() {
        let (tree, market) = instances::binary_frictionless();
        let p = delta_measure(&tree);
        let cert = construct_cps(&tree, &market, &p).unwrap();
        let spec = CertificateSpec::from_cps(&cert);
        let json = serde_json::to_string_pretty(&spec).unwrap();
        let back = serde_json::from_str::<CertificateSpec>(&json).unwrap().to_cps().unwrap();
        assert_eq!(back, cert);
        assert!(verify_cps(&tree, &market, &back, &p).ok());
    }

    #[test]
    fn strict_certificates_survive_the_round_trip() {
        let (tree, market) = instances::shifted_spread();
        let cm = ConeMarket::from_bidask(&tree, &market);
        let p = delta_measure(&tree);
        let cert = construct_scps(&tree, &cm, &p).unwrap();
        let spec = CertificateSpec::from_scps(&cert);
        let json = serde_json::to_string_pretty(&spec).unwrap();
        let back = serde_json::from_str::<CertificateSpec>(&json).unwrap().to_scps().unwrap();
        assert_eq!(back, cert);
        assert!(verify_scps(&tree, &cm, &back, &p).ok());
    }

    #[test]
    fn certificate_kinds_are_not_interchangeable() {
        let (tree, market) = instances::binary_frictionless();
        let p = delta_measure(&tree);
        let cert = construct_cps(&tree, &market, &p).unwrap();
        let err = CertificateSpec::from_cps(&cert).to_scps().unwrap_err();
        assert!(err.to_string().contains("certificate.kind"), "{err}");
    }

    #[test]
    fn result_files_round_trip() {
        let result = ResultFile {
            command: "check-na".into(),
            verdict: "fails".into(),
            diagnostics: vec!["terminal claim (1/2, 0)".into()],
            certificate: None,
            elapsed_ms: 3,
        };
        let text = result.to_json();
        let back = ResultFile::from_json(&text).unwrap();
        assert_eq!(back, result);
        assert_eq!(back.to_json(), text);
    }
}
