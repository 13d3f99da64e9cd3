//! Extraction of linear-optical schemes from LO-convertible diagrams, and
//! their costs.
//!
//! Wires become dual-rail qubits and Hadamard edges beamsplitters on the two
//! rails. `0->n` spiders are seed generators, `n->1` type-I fusions, `n->0`
//! GHZ analysers (`1->0` a single-qubit X measurement) and `1->1` plain
//! pass-throughs. An edge joining two absorbing ends is a Bell seed; one
//! joining two emitting ends is a Bell analyser.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::devices::{
    boosted, ghz_analyser, kraus_table, required_pnr, success_probability_of, type1_fusion,
    Device, Outcome,
};
use crate::error::{Error, Result};
use crate::exact::Probability;
use crate::fock::{beamsplitter, FockState, ModeUnitary};

use super::{lo_violations, DiagramFile, Endpoint, Role, ZXDiagram, FORMAT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeKind {
    Input { index: usize },
    Output { index: usize },
    Seed { size: usize },
    Pass,
    Fusion { size: usize },
    Analyser { size: usize },
    Measure,
}

impl NodeKind {
    /// `(input ports, output ports)`.
    pub fn ports(&self) -> (usize, usize) {
        match *self {
            NodeKind::Input { .. } => (0, 1),
            NodeKind::Output { .. } => (1, 0),
            NodeKind::Seed { size } => (0, size),
            NodeKind::Pass => (1, 1),
            NodeKind::Fusion { size } => (size, 1),
            NodeKind::Analyser { size } => (size, 0),
            NodeKind::Measure => (1, 0),
        }
    }

    /// Whether the node detects photons.
    pub fn is_measurement(&self) -> bool {
        matches!(
            self,
            NodeKind::Fusion { .. } | NodeKind::Analyser { .. } | NodeKind::Measure
        )
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Input { index } => write!(f, "input {index}"),
            NodeKind::Output { index } => write!(f, "output {index}"),
            NodeKind::Seed { size: 1 } => write!(f, "|+> seed"),
            NodeKind::Seed { size: 2 } => write!(f, "Bell seed"),
            NodeKind::Seed { size } => write!(f, "{size}-GHZ seed"),
            NodeKind::Pass => write!(f, "pass-through"),
            NodeKind::Fusion { size } => write!(f, "type-I {size}-fusion"),
            NodeKind::Analyser { size: 2 } => write!(f, "Bell analyser"),
            NodeKind::Analyser { size } => write!(f, "{size}-GHZ analyser"),
            NodeKind::Measure => write!(f, "X measurement"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub label: String,
    #[serde(flatten)]
    pub kind: NodeKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortRef {
    pub node: usize,
    pub port: usize,
}

/// A dual-rail qubit from an output port to an input port. A Hadamard wire
/// carries a beamsplitter across its rails, applied where it is emitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wire {
    pub from: PortRef,
    pub to: PortRef,
    #[serde(default)]
    pub hadamard: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LOScheme {
    nodes: Vec<Node>,
    wires: Vec<Wire>,
    order: Vec<usize>,
    source: Option<ZXDiagram>,
}

#[derive(Serialize, Deserialize)]
struct SchemeFile {
    format: String,
    nodes: Vec<Node>,
    wires: Vec<Wire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metrics: Option<SchemeMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<DiagramFile>,
}

impl LOScheme {
    /// Checks port coverage and orders the nodes.
    pub fn new(nodes: Vec<Node>, wires: Vec<Wire>, source: Option<ZXDiagram>) -> Result<Self> {
        let mut driven: BTreeSet<PortRef> = BTreeSet::new();
        let mut used: BTreeSet<PortRef> = BTreeSet::new();
        for w in &wires {
            for (p, side, set) in [(w.from, 1, &mut used), (w.to, 0, &mut driven)] {
                let node = nodes
                    .get(p.node)
                    .ok_or_else(|| Error::Parameter(format!("wire names missing node {}", p.node)))?;
                let (ins, outs) = node.kind.ports();
                let limit = if side == 0 { ins } else { outs };
                if p.port >= limit {
                    return Err(Error::Parameter(format!(
                        "node {} has no {} port {}",
                        node.label,
                        if side == 0 { "input" } else { "output" },
                        p.port
                    )));
                }
                if !set.insert(p) {
                    return Err(Error::Parameter(format!(
                        "port {} of node {} is wired twice",
                        p.port, node.label
                    )));
                }
            }
        }
        for (k, n) in nodes.iter().enumerate() {
            let (ins, outs) = n.kind.ports();
            if driven.iter().filter(|p| p.node == k).count() != ins
                || used.iter().filter(|p| p.node == k).count() != outs
            {
                return Err(Error::Parameter(format!("node {} has unwired ports", n.label)));
            }
        }
        let order = topological_order(&nodes, &wires)?;
        Ok(LOScheme {
            nodes,
            wires,
            order,
            source,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    /// Node indices in a topological order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// The diagram the scheme was extracted from, when known.
    pub fn source(&self) -> Option<&ZXDiagram> {
        self.source.as_ref()
    }

    pub fn node_index(&self, label: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.label == label)
    }

    /// Wire indices into `node`, by input port.
    pub fn inputs_of(&self, node: usize) -> Vec<usize> {
        let mut w: Vec<usize> = (0..self.wires.len())
            .filter(|&k| self.wires[k].to.node == node)
            .collect();
        w.sort_by_key(|&k| self.wires[k].to.port);
        w
    }

    /// Wire indices out of `node`, by output port.
    pub fn outputs_of(&self, node: usize) -> Vec<usize> {
        let mut w: Vec<usize> = (0..self.wires.len())
            .filter(|&k| self.wires[k].from.node == node)
            .collect();
        w.sort_by_key(|&k| self.wires[k].from.port);
        w
    }

    pub fn input_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Input { .. }))
            .count()
    }

    pub fn output_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Output { .. }))
            .count()
    }

    pub fn to_json(&self, metrics: Option<&SchemeMetrics>) -> String {
        let file = SchemeFile {
            format: FORMAT.to_string(),
            nodes: self.nodes.clone(),
            wires: self.wires.clone(),
            metrics: metrics.cloned(),
            source: self.source.as_ref().map(DiagramFile::from_diagram),
        };
        serde_json::to_string_pretty(&file).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SchemeFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.format != FORMAT {
            return Err(Error::Parse(format!("unsupported format {:?}", file.format)));
        }
        let source = file.source.map(DiagramFile::into_diagram).transpose()?;
        Self::new(file.nodes, file.wires, source)
    }
}

fn topological_order(nodes: &[Node], wires: &[Wire]) -> Result<Vec<usize>> {
    let mut indegree = vec![0usize; nodes.len()];
    let mut next: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for w in wires {
        indegree[w.to.node] += 1;
        next[w.from.node].push(w.to.node);
    }
    let mut ready: BTreeSet<usize> = (0..nodes.len()).filter(|&k| indegree[k] == 0).collect();
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(k) = ready.pop_first() {
        order.push(k);
        for &m in &next[k] {
            indegree[m] -= 1;
            if indegree[m] == 0 {
                ready.insert(m);
            }
        }
    }
    if order.len() < nodes.len() {
        let stuck: Vec<String> = (0..nodes.len())
            .filter(|&k| indegree[k] > 0)
            .map(|k| nodes[k].label.clone())
            .collect();
        return Err(Error::Conversion(vec![format!(
            "wiring has a cycle through {}",
            stuck.join(", ")
        )]));
    }
    Ok(order)
}

/// Reads an LO-convertible diagram as a scheme.
pub fn extract_scheme(d: &ZXDiagram) -> Result<LOScheme> {
    let violations = lo_violations(d);
    if !violations.is_empty() {
        return Err(Error::Conversion(violations));
    }
    let mut nodes: Vec<Node> = d
        .spiders()
        .iter()
        .map(|s| Node {
            label: s.id.clone(),
            kind: match (s.inputs, s.outputs) {
                (0, n) => NodeKind::Seed { size: n },
                (1, 1) => NodeKind::Pass,
                (n, 1) => NodeKind::Fusion { size: n },
                (1, 0) => NodeKind::Measure,
                (n, _) => NodeKind::Analyser { size: n },
            },
        })
        .collect();
    let mut boundary_node = BTreeMap::new();
    for (index, &b) in d.inputs().iter().enumerate() {
        boundary_node.insert(b, nodes.len());
        nodes.push(Node {
            label: format!("in{index}"),
            kind: NodeKind::Input { index },
        });
    }
    for (index, &b) in d.outputs().iter().enumerate() {
        boundary_node.insert(b, nodes.len());
        nodes.push(Node {
            label: format!("out{index}"),
            kind: NodeKind::Output { index },
        });
    }
    let port_ref = |e: &Endpoint| -> PortRef {
        match e {
            Endpoint::Port { spider, port } => {
                let k = d.spider_index(spider).expect("validated");
                let ins = d.spiders()[k].inputs;
                PortRef {
                    node: k,
                    port: if *port < ins { *port } else { port - ins },
                }
            }
            Endpoint::Boundary { boundary } => PortRef {
                node: boundary_node[boundary],
                port: 0,
            },
        }
    };
    let mut wires = Vec::new();
    let (mut cups, mut caps) = (0, 0);
    for e in d.edges() {
        let (a, b) = (port_ref(&e.a), port_ref(&e.b));
        match (d.role(&e.a), d.role(&e.b)) {
            (Role::Producer, Role::Consumer) => wires.push(Wire {
                from: a,
                to: b,
                hadamard: e.hadamard,
            }),
            (Role::Consumer, Role::Producer) => wires.push(Wire {
                from: b,
                to: a,
                hadamard: e.hadamard,
            }),
            (Role::Consumer, Role::Consumer) => {
                let k = nodes.len();
                nodes.push(Node {
                    label: format!("cup{cups}"),
                    kind: NodeKind::Seed { size: 2 },
                });
                cups += 1;
                wires.push(Wire {
                    from: PortRef { node: k, port: 0 },
                    to: a,
                    hadamard: false,
                });
                wires.push(Wire {
                    from: PortRef { node: k, port: 1 },
                    to: b,
                    hadamard: e.hadamard,
                });
            }
            (Role::Producer, Role::Producer) => {
                let k = nodes.len();
                nodes.push(Node {
                    label: format!("cap{caps}"),
                    kind: NodeKind::Analyser { size: 2 },
                });
                caps += 1;
                wires.push(Wire {
                    from: a,
                    to: PortRef { node: k, port: 0 },
                    hadamard: false,
                });
                wires.push(Wire {
                    from: b,
                    to: PortRef { node: k, port: 1 },
                    hadamard: e.hadamard,
                });
            }
        }
    }
    LOScheme::new(nodes, wires, Some(d.clone()))
}

/// SQA-beta units per analyser node, keyed by node label, listing the
/// boosted qubits (input ports).
pub type Boosting = BTreeMap<String, Vec<usize>>;

/// A measurement node as a concrete network with its success patterns.
#[derive(Debug)]
pub(crate) struct DeviceInfo {
    pub unitary: ModeUnitary,
    pub qubit_rails: Vec<(usize, usize)>,
    pub aux_inputs: Vec<(usize, u8)>,
    pub detected: Vec<usize>,
    pub output_rails: Vec<(usize, usize)>,
    pub probability: Probability,
    /// Success patterns with their probability on a maximally mixed input.
    pub success: FxHashMap<FockState, f64>,
    pub required_pnr: u8,
    pub aux_photons: usize,
}

type DeviceKey = (NodeKind, Vec<usize>);

fn device_cache() -> &'static Mutex<FxHashMap<DeviceKey, Arc<DeviceInfo>>> {
    static CACHE: OnceLock<Mutex<FxHashMap<DeviceKey, Arc<DeviceInfo>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(FxHashMap::default()))
}

fn info_from_device(d: &Device) -> Result<DeviceInfo> {
    let table = kraus_table(d)?;
    let scale = (1u64 << d.qubits()) as f64;
    let mut success = FxHashMap::default();
    for g in table.iter().filter(|g| g.outcome == Outcome::SuccessEntangled) {
        for (p, c) in g.patterns.iter().zip(&g.coefficients) {
            success.insert(p.clone(), c.norm_sqr() / scale);
        }
    }
    Ok(DeviceInfo {
        unitary: d.unitary().clone(),
        qubit_rails: d.qubit_rails().to_vec(),
        aux_inputs: d.aux_inputs().to_vec(),
        detected: d.detected_modes().to_vec(),
        output_rails: d.output_rails().to_vec(),
        probability: success_probability_of(d, &table),
        success,
        required_pnr: required_pnr(&table),
        aux_photons: d.aux_photons(),
    })
}

pub(crate) fn device_info(kind: NodeKind, boost: &[usize]) -> Result<Arc<DeviceInfo>> {
    let key = (kind, boost.to_vec());
    if let Some(hit) = device_cache().lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let info = match kind {
        NodeKind::Fusion { size } if boost.is_empty() => info_from_device(&type1_fusion(size)?)?,
        NodeKind::Analyser { size } => info_from_device(&boosted(&ghz_analyser(size)?, boost)?)?,
        NodeKind::Measure if boost.is_empty() => {
            let mut success = FxHashMap::default();
            success.insert(FockState::new(vec![1, 0]), 0.5);
            success.insert(FockState::new(vec![0, 1]), 0.5);
            DeviceInfo {
                unitary: beamsplitter(0, 1, 2)?,
                qubit_rails: vec![(0, 1)],
                aux_inputs: Vec::new(),
                detected: vec![0, 1],
                output_rails: Vec::new(),
                probability: Probability::one(),
                success,
                required_pnr: 1,
                aux_photons: 0,
            }
        }
        other => {
            return Err(Error::Parameter(format!(
                "{other} cannot carry auxiliary boosting"
            )))
        }
    };
    let info = Arc::new(info);
    device_cache().lock().unwrap().insert(key, info.clone());
    Ok(info)
}

/// Boost list of `node`, checked against its kind.
pub(crate) fn boost_of(s: &LOScheme, boosting: &Boosting, node: usize) -> Vec<usize> {
    boosting.get(&s.nodes[node].label).cloned().unwrap_or_default()
}

fn check_boosting(s: &LOScheme, boosting: &Boosting) -> Result<()> {
    for label in boosting.keys() {
        let k = s
            .node_index(label)
            .ok_or_else(|| Error::Parameter(format!("boosting names unknown node {label}")))?;
        if !matches!(s.nodes[k].kind, NodeKind::Analyser { .. }) {
            return Err(Error::Parameter(format!(
                "boosting applies to analyser nodes only, {label} is a {}",
                s.nodes[k].kind
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeMetrics {
    /// Product of the device success probabilities.
    #[serde(with = "probability_text")]
    pub success_probability: Probability,
    /// Seed count by seed size.
    pub seed_inventory: BTreeMap<usize, usize>,
    /// Measurement device count by description.
    pub device_inventory: BTreeMap<String, usize>,
    /// Seed photons plus auxiliary photons.
    pub photon_count: usize,
    pub aux_photons: usize,
    /// Beamsplitters standing for Hadamard edges.
    pub hadamard_beamsplitters: usize,
    pub fully_loss_detecting: bool,
    /// Largest per-detector photon count any device must resolve.
    pub max_pnr: u8,
}

mod probability_text {
    use super::Probability;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &Probability, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&p.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Probability, D::Error> {
        let text = String::deserialize(d)?;
        let parsed = match text.split_once('/') {
            Some((a, b)) => a
                .trim()
                .parse::<i128>()
                .ok()
                .zip(b.trim().parse::<i128>().ok())
                .filter(|(_, b)| *b != 0)
                .map(|(a, b)| Probability::ratio(a, b)),
            None => text
                .trim()
                .parse::<i128>()
                .map(|a| Probability::ratio(a, 1))
                .ok()
                .or_else(|| text.trim().parse::<f64>().ok().map(Probability::Approx)),
        };
        parsed.ok_or_else(|| serde::de::Error::custom(format!("bad probability {text:?}")))
    }
}

fn device_label(kind: NodeKind, boost: &[usize]) -> String {
    if boost.is_empty() {
        kind.to_string()
    } else {
        format!("{kind} + {} SQA-beta", boost.len())
    }
}

pub fn scheme_metrics(s: &LOScheme, boosting: &Boosting) -> Result<SchemeMetrics> {
    check_boosting(s, boosting)?;
    let mut p = Probability::one();
    let mut seeds = BTreeMap::new();
    let mut devices = BTreeMap::new();
    let (mut photons, mut aux, mut pnr) = (0, 0, 0u8);
    for (k, n) in s.nodes.iter().enumerate() {
        match n.kind {
            NodeKind::Seed { size } => {
                *seeds.entry(size).or_insert(0) += 1;
                photons += size;
            }
            kind if kind.is_measurement() => {
                let boost = boost_of(s, boosting, k);
                let info = device_info(kind, &boost)?;
                p = p * info.probability;
                aux += info.aux_photons;
                pnr = pnr.max(info.required_pnr);
                *devices.entry(device_label(kind, &boost)).or_insert(0) += 1;
            }
            _ => {}
        }
    }
    Ok(SchemeMetrics {
        success_probability: p,
        seed_inventory: seeds,
        device_inventory: devices,
        photon_count: photons + aux,
        aux_photons: aux,
        hadamard_beamsplitters: s.wires.iter().filter(|w| w.hadamard).count(),
        fully_loss_detecting: check_full_loss_detection(s).fully_loss_detecting,
        max_pnr: pnr,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LossDetection {
    pub fully_loss_detecting: bool,
    /// Node labels from a fusion to an output when detection fails.
    pub witness: Option<Vec<String>>,
}

/// Fails when an output can be reached from a type-I fusion output through
/// further fusions or pass-throughs.
pub fn check_full_loss_detection(s: &LOScheme) -> LossDetection {
    for start in 0..s.nodes.len() {
        if !matches!(s.nodes[start].kind, NodeKind::Fusion { .. }) {
            continue;
        }
        let mut prev: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue = VecDeque::from([start]);
        while let Some(k) = queue.pop_front() {
            for w in s.outputs_of(k) {
                let m = s.wires[w].to.node;
                if prev.contains_key(&m) || m == start {
                    continue;
                }
                prev.insert(m, k);
                match s.nodes[m].kind {
                    NodeKind::Output { .. } => {
                        let mut path = vec![m];
                        let mut cur = m;
                        while let Some(&p) = prev.get(&cur) {
                            path.push(p);
                            cur = p;
                            if p == start {
                                break;
                            }
                        }
                        path.reverse();
                        return LossDetection {
                            fully_loss_detecting: false,
                            witness: Some(path.iter().map(|&k| s.nodes[k].label.clone()).collect()),
                        };
                    }
                    NodeKind::Fusion { .. } | NodeKind::Pass => queue.push_back(m),
                    _ => {}
                }
            }
        }
    }
    LossDetection {
        fully_loss_detecting: true,
        witness: None,
    }
}

/// A mode named by the seed or input port whose photon starts in it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhysicalMode {
    pub source: String,
    pub port: usize,
    pub rail: u8,
}

/// The unboosted scheme as a flat optical network: beamsplitters on
/// physical modes and the set of detected modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhysicalNetwork {
    pub beamsplitters: BTreeSet<(PhysicalMode, PhysicalMode)>,
    pub detected: BTreeSet<PhysicalMode>,
}

pub fn physical_network(s: &LOScheme) -> Result<PhysicalNetwork> {
    let mut rails: Vec<Option<(PhysicalMode, PhysicalMode)>> = vec![None; s.wires.len()];
    let mut net = PhysicalNetwork {
        beamsplitters: BTreeSet::new(),
        detected: BTreeSet::new(),
    };
    let add = |net: &mut PhysicalNetwork, a: &PhysicalMode, b: &PhysicalMode| {
        let pair = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        net.beamsplitters.insert(pair);
    };
    for &k in &s.order {
        let node = &s.nodes[k];
        let ins: Vec<(PhysicalMode, PhysicalMode)> = s
            .inputs_of(k)
            .iter()
            .map(|&w| rails[w].clone().expect("topological order"))
            .collect();
        let emitted: Vec<(PhysicalMode, PhysicalMode)> = match node.kind {
            NodeKind::Seed { .. } | NodeKind::Input { .. } => (0..node.kind.ports().1)
                .map(|port| {
                    let m = |rail| PhysicalMode {
                        source: node.label.clone(),
                        port,
                        rail,
                    };
                    (m(0), m(1))
                })
                .collect(),
            NodeKind::Pass => ins.clone(),
            NodeKind::Fusion { size } | NodeKind::Analyser { size } => {
                for i in 1..size {
                    add(&mut net, &ins[i - 1].1, &ins[i].0);
                }
                if let NodeKind::Analyser { .. } = node.kind {
                    add(&mut net, &ins[0].0, &ins[size - 1].1);
                    for (a, b) in &ins {
                        net.detected.insert(a.clone());
                        net.detected.insert(b.clone());
                    }
                    Vec::new()
                } else {
                    for (i, (a, b)) in ins.iter().enumerate() {
                        if i > 0 {
                            net.detected.insert(a.clone());
                        }
                        if i + 1 < size {
                            net.detected.insert(b.clone());
                        }
                    }
                    vec![(ins[0].0.clone(), ins[size - 1].1.clone())]
                }
            }
            NodeKind::Measure => {
                add(&mut net, &ins[0].0, &ins[0].1);
                net.detected.insert(ins[0].0.clone());
                net.detected.insert(ins[0].1.clone());
                Vec::new()
            }
            NodeKind::Output { .. } => Vec::new(),
        };
        for (w, pair) in s.outputs_of(k).into_iter().zip(emitted) {
            if s.wires[w].hadamard {
                add(&mut net, &pair.0, &pair.1);
            }
            rails[w] = Some(pair);
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures;
    use super::*;

    #[test]
    fn empty_diagram_gives_empty_scheme() {
        let s = extract_scheme(&ZXDiagram::empty()).unwrap();
        assert!(s.nodes().is_empty());
        let m = scheme_metrics(&s, &Boosting::new()).unwrap();
        assert_eq!(m.success_probability, Probability::one());
        assert!(m.fully_loss_detecting);
    }

    #[test]
    fn non_convertible_diagram_is_refused() {
        let mut b = super::super::DiagramBuilder::new();
        b.spider("x", 2, 2);
        for i in 0..2 {
            let e = b.input();
            let p = b.inp("x", i);
            b.wire(e, p);
        }
        for j in 0..2 {
            let e = b.output();
            let p = b.out("x", j);
            b.wire(p, e);
        }
        match extract_scheme(&b.build().unwrap()) {
            Err(Error::Conversion(v)) => assert!(v[0].contains("x")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn boosting_a_fusion_is_refused() {
        let s = extract_scheme(&fixtures::ghz4_fusion_tree().unwrap()).unwrap();
        let fusion = s
            .nodes()
            .iter()
            .find(|n| matches!(n.kind, NodeKind::Fusion { .. }))
            .unwrap();
        let boost = Boosting::from([(fusion.label.clone(), vec![0])]);
        assert!(matches!(scheme_metrics(&s, &boost), Err(Error::Parameter(_))));
    }

    #[test]
    fn scheme_json_round_trip() {
        let s = extract_scheme(&fixtures::ghz4_two_seeds().unwrap()).unwrap();
        let m = scheme_metrics(&s, &Boosting::new()).unwrap();
        let text = s.to_json(Some(&m));
        assert!(text.contains("\"success_probability\": \"1/2\""));
        assert_eq!(LOScheme::from_json(&text).unwrap(), s);
    }
}
