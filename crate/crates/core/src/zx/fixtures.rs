//! Named diagrams: the 4-GHZ family, six-qubit rings, the encoded two-chain
//! family and two code encoders. Most are derived from a plain starting
//! diagram by the rewrites in this module, so the tensor is preserved by
//! construction.

use crate::error::{Error, Result};

use super::{
    append_on_output, bend_output_through_input, eliminate_multi_output, qpc_encoder_diagram,
    spider_fuse, spider_unfuse, DiagramBuilder, Endpoint, ZXDiagram,
};

pub type Fixture = fn() -> Result<ZXDiagram>;

/// Every fixture by name.
pub fn all() -> Vec<(&'static str, Fixture)> {
    vec![
        ("ghz4-bell-seeds", ghz4_bell_seeds),
        ("ghz4-fusion-tree", ghz4_fusion_tree),
        ("ghz4-two-seeds", ghz4_two_seeds),
        ("ring6-fusions", ring6_fusions),
        ("ring6-bent", ring6_bent),
        ("ring6-chain", ring6_chain),
        ("ring6-bell-seeds", ring6_bell_seeds),
        ("ring6-encoded", ring6_encoded),
        ("two-chain-encoded", two_chain_encoded),
        ("two-chain-bell-seeds", two_chain_bell_seeds),
        ("two-chain-analysers", two_chain_analysers),
        ("two-chain-fusion-layers", two_chain_fusion_layers),
        ("five-qubit-encoder", five_qubit_encoder),
        ("surface-code-encoder", surface_code_encoder),
    ]
}

pub fn by_name(name: &str) -> Option<Fixture> {
    all().into_iter().find(|(n, _)| *n == name).map(|(_, f)| f)
}

/// Spiders at the two ends of edge `k`, if both are spiders.
fn ends(d: &ZXDiagram, k: usize) -> (Option<&str>, Option<&str>) {
    (d.edges[k].a.spider(), d.edges[k].b.spider())
}

/// Fuses the plain edge between `keep` and `other`; the result keeps the id
/// `keep`.
fn fuse_pair(d: &ZXDiagram, keep: &str, other: &str) -> Result<ZXDiagram> {
    let k = (0..d.edges.len())
        .find(|&k| {
            let (a, b) = ends(d, k);
            !d.edges[k].hadamard
                && ((a == Some(keep) && b == Some(other)) || (a == Some(other) && b == Some(keep)))
        })
        .ok_or_else(|| Error::Rewrite(format!("no plain edge between {keep} and {other}")))?;
    let mut d = d.clone();
    if d.edges[k].a.spider() != Some(keep) {
        let e = &mut d.edges[k];
        std::mem::swap(&mut e.a, &mut e.b);
    }
    spider_fuse(&d, k)
}

/// The spider on the far side of `port` of `id`.
fn far_spider(d: &ZXDiagram, id: &str, port: usize) -> Option<String> {
    let here = Endpoint::port(id, port);
    let e = &d.edges[d.edge_at(&here)?];
    let far = if e.a == here { &e.b } else { &e.a };
    far.spider().map(str::to_string)
}

/// Output index of `id` whose edge leads to spider `to`.
fn output_toward(d: &ZXDiagram, id: &str, to: &str) -> Result<usize> {
    let s = d
        .spider(id)
        .ok_or_else(|| Error::Index(format!("no spider {id}")))?;
    (0..s.outputs)
        .find(|&j| far_spider(d, id, s.inputs + j).as_deref() == Some(to))
        .ok_or_else(|| Error::Index(format!("{id} has no output toward {to}")))
}

/// Input ports of `id` fed by spiders other than `except`.
fn inputs_not_from(d: &ZXDiagram, id: &str, except: &str) -> Vec<usize> {
    let s = d.spider(id).expect("spider exists");
    (0..s.inputs)
        .filter(|&p| far_spider(d, id, p).as_deref() != Some(except))
        .collect()
}

fn seed(id: &str, n: usize) -> Result<ZXDiagram> {
    let mut b = DiagramBuilder::new();
    b.spider(id, 0, n);
    for j in 0..n {
        let o = b.output();
        let p = b.out(id, j);
        b.wire(p, o);
    }
    b.build()
}

/// One `0 -> n` spider: the n-qubit GHZ state.
pub fn ghz_seed(n: usize) -> Result<ZXDiagram> {
    seed("g", n)
}

/// Four Bell seeds into one 4-GHZ analyser `m`.
pub fn ghz4_bell_seeds() -> Result<ZXDiagram> {
    let mut d = seed("m", 4)?;
    for _ in 0..4 {
        d = bend_output_through_input(&d, "m", 0)?;
    }
    Ok(d)
}

/// The analyser of [`ghz4_bell_seeds`] split into two 2-fusions feeding a
/// Bell analyser.
pub fn ghz4_fusion_tree() -> Result<ZXDiagram> {
    let d = spider_unfuse(&ghz4_bell_seeds()?, "m", &[0, 1])?;
    spider_unfuse(&d, "m'", &[0, 1])
}

/// Bell seeds of [`ghz4_fusion_tree`] fused into their fusions: two 3-GHZ
/// seeds and a Bell analyser.
pub fn ghz4_two_seeds() -> Result<ZXDiagram> {
    let mut d = ghz4_fusion_tree()?;
    for fusion in ["m", "m'"] {
        for _ in 0..2 {
            let k = (0..d.edges.len())
                .find(|&k| {
                    let (a, b) = ends(&d, k);
                    let bell = |x: Option<&str>| x.is_some_and(|x| x.contains(".bell"));
                    (a == Some(fusion) && bell(b)) || (b == Some(fusion) && bell(a))
                })
                .ok_or_else(|| Error::Rewrite("no Bell seed left".into()))?;
            let other = match ends(&d, k) {
                (Some(a), Some(b)) if a == fusion => b.to_string(),
                (Some(a), _) => a.to_string(),
                _ => unreachable!(),
            };
            d = fuse_pair(&d, fusion, &other)?;
        }
    }
    Ok(d)
}

/// Six-qubit ring: 3-qubit seeds at odd vertices, 2-fusions with output at
/// even ones, all ring edges Hadamard.
pub fn ring6_fusions() -> Result<ZXDiagram> {
    let mut b = DiagramBuilder::new();
    for v in ["v1", "v2", "v3", "v4", "v5", "v6"] {
        let odd = matches!(v, "v1" | "v3" | "v5");
        if odd {
            b.spider(v, 0, 3);
        } else {
            b.spider(v, 2, 1);
        }
        let o = b.output();
        let p = b.out(v, 0);
        b.wire(p, o);
    }
    for (s, j, t, i) in [
        ("v1", 1, "v2", 0),
        ("v3", 1, "v2", 1),
        ("v3", 2, "v4", 0),
        ("v5", 1, "v4", 1),
        ("v5", 2, "v6", 0),
        ("v1", 2, "v6", 1),
    ] {
        let (a, c) = (b.out(s, j), b.inp(t, i));
        b.h_wire(a, c);
    }
    b.build()
}

/// [`ring6_fusions`] with the fusion outputs bent: three 3-GHZ analysers
/// and three Bell seeds.
pub fn ring6_bent() -> Result<ZXDiagram> {
    let mut d = ring6_fusions()?;
    for v in ["v2", "v4", "v6"] {
        d = bend_output_through_input(&d, v, 0)?;
    }
    Ok(d)
}

/// Six-qubit ring from one 3-qubit seed and five Bell seeds: a chain of
/// 2-fusions on each side closing in a 3-GHZ analyser.
pub fn ring6_chain() -> Result<ZXDiagram> {
    let mut b = DiagramBuilder::new();
    b.spider("v1", 0, 3);
    let o = b.output();
    let p = b.out("v1", 0);
    b.wire(p, o);
    for v in ["v2", "v3", "v4", "v5", "v6"] {
        let bell = format!("{v}.bell");
        b.spider(&bell, 0, 2);
        if v == "v5" {
            b.spider(v, 3, 0);
        } else {
            b.spider(v, 2, 1);
        }
        let o = b.output();
        let (p0, p1, vin) = (b.out(&bell, 0), b.out(&bell, 1), b.inp(v, 0));
        b.wire(p0, o).wire(p1, vin);
    }
    for (s, j, t, i) in [
        ("v1", 1, "v2", 1),
        ("v2", 0, "v3", 1),
        ("v3", 0, "v4", 1),
        ("v4", 0, "v5", 1),
        ("v6", 0, "v5", 2),
        ("v1", 2, "v6", 1),
    ] {
        let (a, c) = (b.out(s, j), b.inp(t, i));
        b.h_wire(a, c);
    }
    b.build()
}

/// [`ring6_chain`] with the 3-qubit seed replaced by Bell seeds.
pub fn ring6_bell_seeds() -> Result<ZXDiagram> {
    let d = ring6_chain()?;
    let keep = output_toward(&d, "v1", "v2")?;
    eliminate_multi_output(&d, "v1", keep)
}

/// [`ring6_chain`] with every qubit QPC(2,2)-encoded, rewritten down to Bell
/// seeds.
pub fn ring6_encoded() -> Result<ZXDiagram> {
    let mut d = ring6_chain()?;
    let encoder = qpc_encoder_diagram(2, 2)?;
    for pos in (0..6).rev() {
        d = append_on_output(&d, pos, &encoder, &format!("q{}.", pos + 1))?;
    }
    for v in 1..=6 {
        let enc = format!("q{v}.enc");
        if v == 1 {
            d = fuse_pair(&d, "v1", &enc)?;
        } else {
            let bell = format!("v{v}.bell");
            d = fuse_pair(&d, &bell, &enc)?;
            d = fuse_pair(&d, &format!("v{v}"), &bell)?;
        }
    }
    let keep = output_toward(&d, "v1", "v2")?;
    d = eliminate_multi_output(&d, "v1", keep)?;
    let v5 = d.spider("v5").expect("v5").clone();
    let first: Vec<usize> = (0..v5.inputs).take(2).collect();
    d = spider_unfuse(&d, "v5", &first)?;
    for v in 1..=6 {
        for block in 0..2 {
            let id = format!("q{v}.block{block}");
            let s = d.spider(&id).expect("block").clone();
            d = eliminate_multi_output(&d, &id, s.outputs - 1)?;
        }
    }
    Ok(d)
}

/// Repetition encoder: one `1 -> n` spider.
fn repetition_encoder(n: usize) -> Result<ZXDiagram> {
    let mut b = DiagramBuilder::new();
    b.spider("rep", 1, n);
    let i = b.input();
    let p = b.inp("rep", 0);
    b.wire(i, p);
    for j in 0..n {
        let o = b.output();
        let p = b.out("rep", j);
        b.wire(p, o);
    }
    b.build()
}

/// Two-qubit graph state under a two-qubit repetition code concatenated with
/// QPC(2,2): eight 3-qubit seeds, a 4-fusion `a` and a 5-GHZ analyser `b`.
pub fn two_chain_encoded() -> Result<ZXDiagram> {
    let mut b = DiagramBuilder::new();
    b.spider("a", 0, 2).spider("b", 1, 1);
    let (oa, ob) = (b.output(), b.output());
    let (a0, a1, b_in, b_out) = (b.out("a", 0), b.out("a", 1), b.inp("b", 0), b.out("b", 0));
    b.wire(a0, oa).h_wire(a1, b_in).wire(b_out, ob);
    let mut d = b.build()?;
    let rep = repetition_encoder(2)?;
    d = append_on_output(&d, 1, &rep, "b.")?;
    d = append_on_output(&d, 0, &rep, "a.")?;
    d = fuse_pair(&d, "a", "a.rep")?;
    d = fuse_pair(&d, "b", "b.rep")?;
    let encoder = qpc_encoder_diagram(2, 2)?;
    let names = ["a0.", "a1.", "b0.", "b1."];
    for pos in (0..4).rev() {
        d = append_on_output(&d, pos, &encoder, names[pos])?;
    }
    for (pos, name) in names.iter().enumerate() {
        let owner = if pos < 2 { "a" } else { "b" };
        d = fuse_pair(&d, owner, &format!("{name}enc"))?;
    }
    Ok(d)
}

fn block_ids() -> Vec<String> {
    ["a0.", "a1.", "b0.", "b1."]
        .iter()
        .flat_map(|n| (0..2).map(move |k| format!("{n}block{k}")))
        .collect()
}

/// [`two_chain_encoded`] on Bell seeds: the 3-qubit seeds become 2-fusions
/// and the 5-GHZ analyser a 4-fusion plus a Bell analyser.
pub fn two_chain_bell_seeds() -> Result<ZXDiagram> {
    let mut d = two_chain_encoded()?;
    for id in block_ids() {
        let s = d.spider(&id).expect("block").clone();
        d = eliminate_multi_output(&d, &id, s.outputs - 1)?;
    }
    let ports = inputs_not_from(&d, "b", "a");
    spider_unfuse(&d, "b", &ports)
}

/// [`two_chain_bell_seeds`] with the Bell analyser absorbed and the output
/// of `a` bent: two 5-GHZ analysers.
pub fn two_chain_analysers() -> Result<ZXDiagram> {
    let d = fuse_pair(&two_chain_bell_seeds()?, "b", "b'")?;
    bend_output_through_input(&d, "a", 0)
}

/// [`two_chain_bell_seeds`] with each 4-fusion split into three 2-fusions.
pub fn two_chain_fusion_layers() -> Result<ZXDiagram> {
    let mut d = two_chain_bell_seeds()?;
    for id in ["a", "b"] {
        d = spider_unfuse(&d, id, &[0, 1])?;
        let rest = format!("{id}'");
        let rest = if id == "b" { format!("{rest}.1") } else { rest };
        d = spider_unfuse(&d, &rest, &[0, 1])?;
    }
    Ok(d)
}

/// Encoder of the five-qubit code as a ring graph code: five vertex
/// spiders, each a 3-fusion fed by Bell seeds, into one analyser that also
/// takes the input qubit.
pub fn five_qubit_encoder() -> Result<ZXDiagram> {
    let mut b = DiagramBuilder::new();
    b.spider("hub", 6, 0);
    let i = b.input();
    let h0 = b.inp("hub", 0);
    b.h_wire(i, h0);
    let vs: Vec<String> = (1..=5).map(|k| format!("v{k}")).collect();
    for v in &vs {
        b.spider(v, 1, 3);
        let o = b.output();
        let p = b.out(v, 0);
        b.wire(p, o);
    }
    for k in 0..5 {
        let (a, c) = (b.out(&vs[k], 1), b.inp(&vs[(k + 1) % 5], 0));
        b.h_wire(a, c);
        let (a, c) = (b.out(&vs[k], 2), b.inp("hub", k + 1));
        b.h_wire(a, c);
    }
    let mut d = b.build()?;
    for v in &vs {
        d = eliminate_multi_output(&d, v, 2)?;
    }
    Ok(d)
}

/// Encoder of the distance-3 rotated surface code on a 3x3 grid, qubits
/// numbered row by row. Three 4-GHZ analysers join one 4-qubit, four
/// 3-qubit and two Bell seeds.
pub fn surface_code_encoder() -> Result<ZXDiagram> {
    let mut b = DiagramBuilder::new();
    // (seed, outputs as grid qubits, analysers fed by Hadamard legs)
    let seeds: [(&str, &[usize], &[&str]); 7] = [
        ("A", &[0, 3], &["S2", "L"]),
        ("B", &[5, 8], &["S1"]),
        ("q1", &[1], &["S1", "L"]),
        ("q2", &[2], &["S1", "L"]),
        ("q4", &[4], &["S1", "S2"]),
        ("q6", &[6], &["S2"]),
        ("q7", &[7], &["S2"]),
    ];
    for a in ["S1", "S2", "L"] {
        b.spider(a, 4, 0);
    }
    let mut outs = vec![None; 9];
    for (id, qubits, legs) in seeds {
        b.spider(id, 0, qubits.len() + legs.len());
    }
    for q in 0..9 {
        outs[q] = Some(b.output());
    }
    let mut fill = std::collections::BTreeMap::from([("S1", 0), ("S2", 0), ("L", 1)]);
    for (id, qubits, legs) in seeds {
        for (j, &q) in qubits.iter().enumerate() {
            let p = b.out(id, j);
            b.wire(p, outs[q].clone().unwrap());
        }
        for (k, &a) in legs.iter().enumerate() {
            let slot = fill.get_mut(a).unwrap();
            let (p, c) = (b.out(id, qubits.len() + k), b.inp(a, *slot));
            *slot += 1;
            b.h_wire(p, c);
        }
    }
    let i = b.input();
    let l0 = b.inp("L", 0);
    b.h_wire(i, l0);
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_builds() {
        for (name, f) in all() {
            assert!(f().is_ok(), "{name}: {:?}", f().err());
        }
    }
}
