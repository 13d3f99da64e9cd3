//! Phase-free ZX diagrams in LO-convertible form: representation, rewrites,
//! contraction, and extraction to linear-optical schemes.
//!
//! Every spider is a phase-free Z spider. Ports `0..inputs` are its inputs
//! and `inputs..inputs + outputs` its outputs. Boundaries are numbered
//! labels listed either as diagram inputs or as diagram outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod fixtures;
pub mod random;
mod rewrite;
mod scheme;
mod simulate;
mod tensor;

pub use rewrite::{
    append_on_output, bend_output_through_input, eliminate_multi_output, spider_fuse,
    spider_unfuse,
};
pub use scheme::{
    check_full_loss_detection, extract_scheme, physical_network, scheme_metrics, Boosting,
    LOScheme, LossDetection, Node, NodeKind, PhysicalMode, PhysicalNetwork, PortRef,
    SchemeMetrics, Wire,
};
pub use simulate::{
    find_pauli_frame, simulate_scheme, simulate_successes, verify_scheme, PauliFrame, SimOptions,
    Simulation, VerifyReport,
};
pub use tensor::{amplitude, canonicalize, equal_up_to_scalar, to_tensor, to_tensor_capped,
    DEFAULT_TENSOR_CAP};

pub const FORMAT: &str = "fockforge/1";

/// A spider port or a boundary label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Endpoint {
    Port { spider: String, port: usize },
    Boundary { boundary: usize },
}

impl Endpoint {
    pub fn port(spider: &str, port: usize) -> Self {
        Endpoint::Port {
            spider: spider.to_string(),
            port,
        }
    }

    pub fn boundary(label: usize) -> Self {
        Endpoint::Boundary { boundary: label }
    }

    pub fn spider(&self) -> Option<&str> {
        match self {
            Endpoint::Port { spider, .. } => Some(spider),
            Endpoint::Boundary { .. } => None,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Port { spider, port } => write!(f, "{spider}:{port}"),
            Endpoint::Boundary { boundary } => write!(f, "b{boundary}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spider {
    pub id: String,
    #[serde(rename = "in")]
    pub inputs: usize,
    #[serde(rename = "out")]
    pub outputs: usize,
}

impl Spider {
    pub fn arity(&self) -> usize {
        self.inputs + self.outputs
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: Endpoint,
    pub b: Endpoint,
    #[serde(default)]
    pub hadamard: bool,
}

/// Whether an endpoint emits a qubit (spider output, diagram input) or
/// absorbs one (spider input, diagram output).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Role {
    Producer,
    Consumer,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZXDiagram {
    spiders: Vec<Spider>,
    edges: Vec<Edge>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct DiagramFile {
    format: String,
    spiders: Vec<Spider>,
    edges: Vec<Edge>,
    #[serde(default)]
    inputs: Vec<Endpoint>,
    outputs: Vec<Endpoint>,
}

fn boundary_labels(list: Vec<Endpoint>, what: &str) -> Result<Vec<usize>> {
    list.into_iter()
        .map(|e| match e {
            Endpoint::Boundary { boundary } => Ok(boundary),
            other => Err(Error::Parse(format!("{what} entry {other} is not a boundary"))),
        })
        .collect()
}

impl DiagramFile {
    pub(crate) fn from_diagram(d: &ZXDiagram) -> Self {
        DiagramFile {
            format: FORMAT.to_string(),
            spiders: d.spiders.clone(),
            edges: d.edges.clone(),
            inputs: d.inputs.iter().map(|&b| Endpoint::boundary(b)).collect(),
            outputs: d.outputs.iter().map(|&b| Endpoint::boundary(b)).collect(),
        }
    }

    pub(crate) fn into_diagram(self) -> Result<ZXDiagram> {
        if self.format != FORMAT {
            return Err(Error::Parse(format!("unsupported format {:?}", self.format)));
        }
        let inputs = boundary_labels(self.inputs, "inputs")?;
        let outputs = boundary_labels(self.outputs, "outputs")?;
        ZXDiagram::new(self.spiders, self.edges, inputs, outputs)
    }
}

impl ZXDiagram {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds and validates a diagram.
    pub fn new(
        spiders: Vec<Spider>,
        edges: Vec<Edge>,
        inputs: Vec<usize>,
        outputs: Vec<usize>,
    ) -> Result<Self> {
        let d = ZXDiagram {
            spiders,
            edges,
            inputs,
            outputs,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn spiders(&self) -> &[Spider] {
        &self.spiders
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Input boundary labels in order.
    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    /// Output boundary labels in order.
    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn spider(&self, id: &str) -> Option<&Spider> {
        self.spiders.iter().find(|s| s.id == id)
    }

    pub(crate) fn spider_index(&self, id: &str) -> Result<usize> {
        self.spiders
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| Error::Index(format!("no spider {id}")))
    }

    /// Index of the edge touching `e`.
    pub fn edge_at(&self, e: &Endpoint) -> Option<usize> {
        self.edges.iter().position(|x| &x.a == e || &x.b == e)
    }

    /// Every port has exactly one edge, every boundary is listed once as an
    /// input or an output and carries exactly one edge.
    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for s in &self.spiders {
            if !ids.insert(s.id.as_str()) {
                return Err(Error::Parameter(format!("duplicate spider id {}", s.id)));
            }
        }
        let mut labels = BTreeSet::new();
        for &b in self.inputs.iter().chain(&self.outputs) {
            if !labels.insert(b) {
                return Err(Error::Parameter(format!("boundary {b} listed twice")));
            }
        }
        let mut seen: BTreeSet<&Endpoint> = BTreeSet::new();
        for e in &self.edges {
            for end in [&e.a, &e.b] {
                match end {
                    Endpoint::Port { spider, port } => {
                        let s = self
                            .spider(spider)
                            .ok_or_else(|| Error::Parameter(format!("edge names unknown spider {spider}")))?;
                        if *port >= s.arity() {
                            return Err(Error::Parameter(format!(
                                "port {port} out of range for spider {spider} with {} ports",
                                s.arity()
                            )));
                        }
                    }
                    Endpoint::Boundary { boundary } => {
                        if !labels.contains(boundary) {
                            return Err(Error::Parameter(format!(
                                "boundary {boundary} is neither an input nor an output"
                            )));
                        }
                    }
                }
                if !seen.insert(end) {
                    return Err(Error::Parameter(format!("{end} has more than one edge")));
                }
            }
        }
        for s in &self.spiders {
            for p in 0..s.arity() {
                if !seen.contains(&Endpoint::port(&s.id, p)) {
                    return Err(Error::Parameter(format!("port {}:{p} has no edge", s.id)));
                }
            }
        }
        for &b in &labels {
            if !seen.contains(&Endpoint::boundary(b)) {
                return Err(Error::Parameter(format!("boundary {b} has no edge")));
            }
        }
        Ok(())
    }

    pub(crate) fn role(&self, e: &Endpoint) -> Role {
        match e {
            Endpoint::Port { spider, port } => {
                let s = self.spider(spider).expect("validated endpoint");
                if *port < s.inputs {
                    Role::Consumer
                } else {
                    Role::Producer
                }
            }
            Endpoint::Boundary { boundary } => {
                if self.inputs.contains(boundary) {
                    Role::Producer
                } else {
                    Role::Consumer
                }
            }
        }
    }

    /// Spider ids not already used, derived from `base`.
    pub(crate) fn fresh_id(&self, base: &str) -> String {
        let taken: BTreeSet<&str> = self.spiders.iter().map(|s| s.id.as_str()).collect();
        if !taken.contains(base) {
            return base.to_string();
        }
        (1..)
            .map(|k| format!("{base}.{k}"))
            .find(|c| !taken.contains(c.as_str()))
            .expect("unbounded search")
    }

    pub(crate) fn fresh_boundary(&self) -> usize {
        self.inputs
            .iter()
            .chain(&self.outputs)
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&DiagramFile::from_diagram(self)).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DiagramFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_diagram()
    }

    /// Counts of spiders by `(inputs, outputs)`.
    pub fn shape_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut out = BTreeMap::new();
        for s in &self.spiders {
            *out.entry((s.inputs, s.outputs)).or_insert(0) += 1;
        }
        out
    }
}

/// Reasons a diagram has no direct linear-optical reading. Empty when the
/// diagram is LO-convertible.
pub fn lo_violations(d: &ZXDiagram) -> Vec<String> {
    d.spiders
        .iter()
        .filter_map(|s| match (s.inputs, s.outputs) {
            (0, 0) => Some(format!("spider {} has no legs", s.id)),
            (0, _) | (_, 0) | (_, 1) => None,
            (n, m) => Some(format!("spider {} is {n}->{m}", s.id)),
        })
        .collect()
}

/// True when every spider is `0->n`, `n->1` or `n->0`.
pub fn is_lo_convertible(d: &ZXDiagram) -> bool {
    lo_violations(d).is_empty()
}

/// Incremental construction for fixtures and tests.
#[derive(Default)]
pub struct DiagramBuilder {
    d: ZXDiagram,
}

impl DiagramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn spider(&mut self, id: &str, inputs: usize, outputs: usize) -> &mut Self {
        self.d.spiders.push(Spider {
            id: id.to_string(),
            inputs,
            outputs,
        });
        self
    }

    /// Appends an input boundary and returns its endpoint.
    pub fn input(&mut self) -> Endpoint {
        let b = self.d.fresh_boundary();
        self.d.inputs.push(b);
        Endpoint::boundary(b)
    }

    /// Appends an output boundary and returns its endpoint.
    pub fn output(&mut self) -> Endpoint {
        let b = self.d.fresh_boundary();
        self.d.outputs.push(b);
        Endpoint::boundary(b)
    }

    /// Output port `j` of spider `id` (declared earlier).
    pub fn out(&self, id: &str, j: usize) -> Endpoint {
        let s = self.d.spider(id).expect("spider declared before use");
        Endpoint::port(id, s.inputs + j)
    }

    pub fn inp(&self, id: &str, i: usize) -> Endpoint {
        Endpoint::port(id, i)
    }

    pub fn wire(&mut self, a: Endpoint, b: Endpoint) -> &mut Self {
        self.d.edges.push(Edge {
            a,
            b,
            hadamard: false,
        });
        self
    }

    pub fn h_wire(&mut self, a: Endpoint, b: Endpoint) -> &mut Self {
        self.d.edges.push(Edge {
            a,
            b,
            hadamard: true,
        });
        self
    }

    pub fn build(self) -> Result<ZXDiagram> {
        self.d.validate()?;
        Ok(self.d)
    }
}

/// The LO-convertible QPC(`n`, `m`) encoder: `n` seeds of `m + 1` qubits,
/// `m` of each sent to the output, the last joined by a Hadamard edge to an
/// `(n + 1)`-input analyser spider that also takes the encoded qubit.
pub fn qpc_encoder_diagram(n: usize, m: usize) -> Result<ZXDiagram> {
    if n == 0 || m == 0 {
        return Err(Error::Parameter("QPC(n, m) needs n, m >= 1".into()));
    }
    let mut b = DiagramBuilder::new();
    let input = b.input();
    b.spider("enc", n + 1, 0);
    let enc0 = b.inp("enc", 0);
    b.wire(input, enc0);
    for block in 0..n {
        let id = format!("block{block}");
        b.spider(&id, 0, m + 1);
        for j in 0..m {
            let o = b.output();
            let p = b.out(&id, j);
            b.wire(p, o);
        }
        let leg = b.out(&id, m);
        let e = b.inp("enc", block + 1);
        b.h_wire(leg, e);
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let d = fixtures::ghz4_bell_seeds().unwrap();
        let text = d.to_json();
        assert!(text.contains("\"format\": \"fockforge/1\""));
        assert_eq!(ZXDiagram::from_json(&text).unwrap(), d);
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(ZXDiagram::from_json("{"), Err(Error::Parse(_))));
        let wrong = r#"{"format":"other","spiders":[],"edges":[],"outputs":[]}"#;
        assert!(matches!(ZXDiagram::from_json(wrong), Err(Error::Parse(_))));
    }

    #[test]
    fn dangling_port_is_rejected() {
        let mut b = DiagramBuilder::new();
        b.spider("s", 0, 2);
        let o = b.output();
        let p = b.out("s", 0);
        b.wire(p, o);
        assert!(matches!(b.build(), Err(Error::Parameter(_))));
    }

    #[test]
    fn convertibility() {
        assert!(is_lo_convertible(&ZXDiagram::empty()));
        assert!(is_lo_convertible(&fixtures::ghz4_bell_seeds().unwrap()));
        let mut b = DiagramBuilder::new();
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
        let d = b.build().unwrap();
        let v = lo_violations(&d);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("spider x"));
    }
}
