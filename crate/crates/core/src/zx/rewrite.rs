//! Tensor-preserving rewrites. Each returns a new diagram.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

use super::{Edge, Endpoint, Spider, ZXDiagram};

/// Replaces every endpoint on the listed spiders through `map`; edges whose
/// index is in `drop` disappear.
fn remap_edges(
    d: &ZXDiagram,
    map: &BTreeMap<(String, usize), Endpoint>,
    drop: &BTreeSet<usize>,
) -> Vec<Edge> {
    let fix = |e: &Endpoint| -> Endpoint {
        match e {
            Endpoint::Port { spider, port } => map
                .get(&(spider.clone(), *port))
                .cloned()
                .unwrap_or_else(|| e.clone()),
            b => b.clone(),
        }
    };
    d.edges
        .iter()
        .enumerate()
        .filter(|(k, _)| !drop.contains(k))
        .map(|(_, e)| Edge {
            a: fix(&e.a),
            b: fix(&e.b),
            hadamard: e.hadamard,
        })
        .collect()
}

fn finish(d: ZXDiagram) -> Result<ZXDiagram> {
    d.validate()?;
    Ok(d)
}

/// Merges the two spiders joined by the plain edge `edge`. Other plain
/// edges between them become self-loops and are dropped; a parallel
/// Hadamard edge would leave a phase and is refused.
pub fn spider_fuse(d: &ZXDiagram, edge: usize) -> Result<ZXDiagram> {
    let e = d
        .edges
        .get(edge)
        .ok_or_else(|| Error::Index(format!("no edge {edge}")))?;
    if e.hadamard {
        return Err(Error::Rewrite("spider fusion needs a plain edge".into()));
    }
    let (s, t) = match (e.a.spider(), e.b.spider()) {
        (Some(s), Some(t)) if s != t => (s.to_string(), t.to_string()),
        _ => return Err(Error::Rewrite("edge does not join two distinct spiders".into())),
    };
    let between = |x: &Edge| {
        let (a, b) = (x.a.spider(), x.b.spider());
        (a == Some(&s) && b == Some(&t)) || (a == Some(&t) && b == Some(&s))
    };
    if d.edges.iter().any(|x| between(x) && x.hadamard) {
        return Err(Error::Rewrite(format!(
            "spiders {s} and {t} also share a Hadamard edge"
        )));
    }
    let drop: BTreeSet<usize> = (0..d.edges.len()).filter(|&k| between(&d.edges[k])).collect();
    let consumed: BTreeSet<(String, usize)> = drop
        .iter()
        .flat_map(|&k| [&d.edges[k].a, &d.edges[k].b])
        .filter_map(|x| match x {
            Endpoint::Port { spider, port } => Some((spider.clone(), *port)),
            _ => None,
        })
        .collect();
    let ss = d.spider(&s).unwrap().clone();
    let ts = d.spider(&t).unwrap().clone();
    let keep = |sp: &Spider, range: std::ops::Range<usize>| -> Vec<(String, usize)> {
        range
            .filter(|p| !consumed.contains(&(sp.id.clone(), *p)))
            .map(|p| (sp.id.clone(), p))
            .collect()
    };
    let ins: Vec<_> = keep(&ss, 0..ss.inputs)
        .into_iter()
        .chain(keep(&ts, 0..ts.inputs))
        .collect();
    let outs: Vec<_> = keep(&ss, ss.inputs..ss.arity())
        .into_iter()
        .chain(keep(&ts, ts.inputs..ts.arity()))
        .collect();
    let mut map = BTreeMap::new();
    for (k, key) in ins.iter().chain(&outs).enumerate() {
        map.insert(key.clone(), Endpoint::port(&s, k));
    }
    let merged = Spider {
        id: s.clone(),
        inputs: ins.len(),
        outputs: outs.len(),
    };
    let spiders = d
        .spiders
        .iter()
        .filter(|x| x.id != t)
        .map(|x| if x.id == s { merged.clone() } else { x.clone() })
        .collect();
    finish(ZXDiagram {
        spiders,
        edges: remap_edges(d, &map, &drop),
        inputs: d.inputs.clone(),
        outputs: d.outputs.clone(),
    })
}

/// Splits spider `id` in two: the first keeps `first_ports` plus a new
/// output, the second takes the remaining ports plus a new input, joined by
/// a plain edge.
pub fn spider_unfuse(d: &ZXDiagram, id: &str, first_ports: &[usize]) -> Result<ZXDiagram> {
    let sp = d
        .spider(id)
        .ok_or_else(|| Error::Index(format!("no spider {id}")))?
        .clone();
    let first: BTreeSet<usize> = first_ports.iter().copied().collect();
    if first.len() != first_ports.len() || first.iter().any(|&p| p >= sp.arity()) {
        return Err(Error::Parameter(format!("bad port list {first_ports:?} for {id}")));
    }
    if first.is_empty() || first.len() == sp.arity() {
        return Err(Error::Parameter("unfusion needs a nontrivial partition".into()));
    }
    let other = d.fresh_id(&format!("{id}'"));
    let (a_in, a_out): (Vec<usize>, Vec<usize>) = first.iter().partition(|&&p| p < sp.inputs);
    let rest: Vec<usize> = (0..sp.arity()).filter(|p| !first.contains(p)).collect();
    let (b_in, b_out): (Vec<usize>, Vec<usize>) = rest.iter().partition(|&&p| p < sp.inputs);
    let mut map = BTreeMap::new();
    for (k, &p) in a_in.iter().chain(&a_out).enumerate() {
        map.insert((id.to_string(), p), Endpoint::port(id, k));
    }
    for (k, &p) in b_in.iter().enumerate() {
        map.insert((id.to_string(), p), Endpoint::port(&other, k));
    }
    for (k, &p) in b_out.iter().enumerate() {
        map.insert((id.to_string(), p), Endpoint::port(&other, b_in.len() + 1 + k));
    }
    let mut edges = remap_edges(d, &map, &BTreeSet::new());
    edges.push(Edge {
        a: Endpoint::port(id, a_in.len() + a_out.len()),
        b: Endpoint::port(&other, b_in.len()),
        hadamard: false,
    });
    let mut spiders: Vec<Spider> = d
        .spiders
        .iter()
        .map(|x| {
            if x.id == id {
                Spider {
                    id: id.to_string(),
                    inputs: a_in.len(),
                    outputs: a_out.len() + 1,
                }
            } else {
                x.clone()
            }
        })
        .collect();
    spiders.push(Spider {
        id: other,
        inputs: b_in.len() + 1,
        outputs: b_out.len(),
    });
    finish(ZXDiagram {
        spiders,
        edges,
        inputs: d.inputs.clone(),
        outputs: d.outputs.clone(),
    })
}

/// Turns the listed outputs of spider `id` into inputs, each fed by a new
/// Bell seed whose other qubit takes over the old connection.
fn bend_outputs(d: &ZXDiagram, id: &str, outputs: &[usize]) -> Result<ZXDiagram> {
    let sp = d
        .spider(id)
        .ok_or_else(|| Error::Index(format!("no spider {id}")))?
        .clone();
    let bent: BTreeSet<usize> = outputs.iter().copied().collect();
    if bent.len() != outputs.len() || bent.iter().any(|&j| j >= sp.outputs) {
        return Err(Error::Parameter(format!("bad output list {outputs:?} for {id}")));
    }
    let kept: Vec<usize> = (0..sp.outputs).filter(|j| !bent.contains(j)).collect();
    let inputs = sp.inputs + bent.len();
    let mut map = BTreeMap::new();
    for (k, &j) in kept.iter().enumerate() {
        map.insert((id.to_string(), sp.inputs + j), Endpoint::port(id, inputs + k));
    }
    let mut drop = BTreeSet::new();
    let mut spiders: Vec<Spider> = d
        .spiders
        .iter()
        .map(|x| {
            if x.id == id {
                Spider {
                    id: id.to_string(),
                    inputs,
                    outputs: kept.len(),
                }
            } else {
                x.clone()
            }
        })
        .collect();
    let mut extra = Vec::new();
    let mut probe = d.clone();
    for (k, &j) in bent.iter().enumerate() {
        let port = Endpoint::port(id, sp.inputs + j);
        let ei = d.edge_at(&port).expect("validated diagram");
        drop.insert(ei);
        let e = &d.edges[ei];
        let far = if e.a == port { e.b.clone() } else { e.a.clone() };
        let far = match &far {
            Endpoint::Port { spider, port: p } if spider == id => {
                if *p >= sp.inputs && bent.contains(&(*p - sp.inputs)) {
                    return Err(Error::Rewrite(format!(
                        "outputs of {id} bent together share an edge"
                    )));
                }
                map.get(&(id.to_string(), *p)).cloned().unwrap_or(far)
            }
            _ => far,
        };
        let bell = probe.fresh_id(&format!("{id}.bell"));
        probe.spiders.push(Spider {
            id: bell.clone(),
            inputs: 0,
            outputs: 2,
        });
        spiders.push(Spider {
            id: bell.clone(),
            inputs: 0,
            outputs: 2,
        });
        extra.push(Edge {
            a: Endpoint::port(&bell, 0),
            b: far,
            hadamard: e.hadamard,
        });
        extra.push(Edge {
            a: Endpoint::port(&bell, 1),
            b: Endpoint::port(id, sp.inputs + k),
            hadamard: false,
        });
    }
    let mut edges = remap_edges(d, &map, &drop);
    edges.extend(extra);
    finish(ZXDiagram {
        spiders,
        edges,
        inputs: d.inputs.clone(),
        outputs: d.outputs.clone(),
    })
}

/// Output `output` of spider `id` becomes an extra input fed by a new Bell
/// seed; the seed's other qubit drives the old destination.
pub fn bend_output_through_input(d: &ZXDiagram, id: &str, output: usize) -> Result<ZXDiagram> {
    bend_outputs(d, id, &[output])
}

/// An `n -> m` spider with `m >= 2` becomes `(n + m - 1) -> 1`, keeping
/// output `keep`; each other output is supplied by a new Bell seed.
pub fn eliminate_multi_output(d: &ZXDiagram, id: &str, keep: usize) -> Result<ZXDiagram> {
    let sp = d
        .spider(id)
        .ok_or_else(|| Error::Index(format!("no spider {id}")))?;
    if sp.outputs < 2 {
        return Err(Error::Rewrite(format!("spider {id} has fewer than two outputs")));
    }
    if keep >= sp.outputs {
        return Err(Error::Parameter(format!("spider {id} has no output {keep}")));
    }
    let others: Vec<usize> = (0..sp.outputs).filter(|&j| j != keep).collect();
    bend_outputs(d, id, &others)
}

/// Plugs a one-input `encoder` into output position `position` of `d`. The
/// encoder's outputs take that position in the output order and its spider
/// ids gain the prefix `prefix`.
pub fn append_on_output(
    d: &ZXDiagram,
    position: usize,
    encoder: &ZXDiagram,
    prefix: &str,
) -> Result<ZXDiagram> {
    if encoder.inputs.len() != 1 {
        return Err(Error::Parameter("encoder must have exactly one input".into()));
    }
    let label = *d
        .outputs
        .get(position)
        .ok_or_else(|| Error::Index(format!("no output {position}")))?;
    let mut out = d.clone();
    let mut rename = BTreeMap::new();
    for s in &encoder.spiders {
        let id = out.fresh_id(&format!("{prefix}{}", s.id));
        rename.insert(s.id.clone(), id.clone());
        out.spiders.push(Spider {
            id,
            inputs: s.inputs,
            outputs: s.outputs,
        });
    }
    let mut relabel = BTreeMap::new();
    let mut next = d.fresh_boundary();
    for &b in &encoder.outputs {
        relabel.insert(b, next);
        next += 1;
    }
    let fix = |e: &Endpoint| -> Endpoint {
        match e {
            Endpoint::Port { spider, port } => Endpoint::port(&rename[spider], *port),
            Endpoint::Boundary { boundary } => match relabel.get(boundary) {
                Some(&b) => Endpoint::boundary(b),
                None => e.clone(),
            },
        }
    };
    let outer_port = Endpoint::boundary(label);
    let outer = d.edge_at(&outer_port).expect("validated diagram");
    let oe = &d.edges[outer];
    let outer_far = if oe.a == outer_port { oe.b.clone() } else { oe.a.clone() };
    let inner_port = Endpoint::boundary(encoder.inputs[0]);
    let mut edges: Vec<Edge> = out
        .edges
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != outer)
        .map(|(_, e)| e.clone())
        .collect();
    for e in &encoder.edges {
        if e.a == inner_port || e.b == inner_port {
            let far = if e.a == inner_port { &e.b } else { &e.a };
            edges.push(Edge {
                a: outer_far.clone(),
                b: fix(far),
                hadamard: oe.hadamard ^ e.hadamard,
            });
        } else {
            edges.push(Edge {
                a: fix(&e.a),
                b: fix(&e.b),
                hadamard: e.hadamard,
            });
        }
    }
    out.edges = edges;
    let new_outs: Vec<usize> = encoder.outputs.iter().map(|b| relabel[b]).collect();
    out.outputs.splice(position..=position, new_outs);
    finish(out)
}

#[cfg(test)]
mod tests {
    use super::super::{fixtures, to_tensor, DiagramBuilder, equal_up_to_scalar};
    use super::*;

    #[test]
    fn unfuse_then_fuse_restores_shape() {
        let d = fixtures::ghz4_bell_seeds().unwrap();
        let u = spider_unfuse(&d, "m", &[0, 1]).unwrap();
        assert_eq!(u.spiders().len(), d.spiders().len() + 1);
        let link = u.edges().len() - 1;
        let f = spider_fuse(&u, link).unwrap();
        assert_eq!(f.shape_counts(), d.shape_counts());
        assert!(equal_up_to_scalar(&to_tensor(&f).unwrap(), &to_tensor(&d).unwrap(), 1e-9));
    }

    #[test]
    fn trivial_partition_is_rejected() {
        let d = fixtures::ghz4_bell_seeds().unwrap();
        assert!(matches!(spider_unfuse(&d, "m", &[]), Err(Error::Parameter(_))));
        assert!(matches!(spider_unfuse(&d, "m", &[0, 1, 2, 3]), Err(Error::Parameter(_))));
    }

    #[test]
    fn hadamard_edge_cannot_be_fused() {
        let mut b = DiagramBuilder::new();
        b.spider("a", 0, 2).spider("c", 1, 1);
        let (o0, o1) = (b.output(), b.output());
        let (a0, a1, c0, c1) = (b.out("a", 0), b.out("a", 1), b.inp("c", 0), b.out("c", 0));
        b.wire(a0, o0).h_wire(a1, c0).wire(c1, o1);
        let d = b.build().unwrap();
        assert!(matches!(spider_fuse(&d, 1), Err(Error::Rewrite(_))));
    }

    #[test]
    fn three_to_zero_split() {
        let mut b = DiagramBuilder::new();
        b.spider("m", 3, 0);
        for i in 0..3 {
            let e = b.input();
            let p = b.inp("m", i);
            b.wire(e, p);
        }
        let d = b.build().unwrap();
        let u = spider_unfuse(&d, "m", &[0, 1]).unwrap();
        assert_eq!(u.spider("m").map(|s| (s.inputs, s.outputs)), Some((2, 1)));
        assert_eq!(u.spider("m'").map(|s| (s.inputs, s.outputs)), Some((2, 0)));
        assert!(equal_up_to_scalar(&to_tensor(&u).unwrap(), &to_tensor(&d).unwrap(), 1e-9));
    }

    #[test]
    fn single_output_is_not_eliminated() {
        let d = fixtures::ghz4_fusion_tree().unwrap();
        let fusion = d.spiders().iter().find(|s| s.outputs == 1 && s.inputs == 2).unwrap();
        assert!(matches!(
            eliminate_multi_output(&d, &fusion.id, 0),
            Err(Error::Rewrite(_))
        ));
    }
}
