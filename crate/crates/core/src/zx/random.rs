//! Random diagrams and random rewrite steps for property checks.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{
    bend_output_through_input, eliminate_multi_output, spider_fuse, spider_unfuse, Edge,
    Endpoint, Spider, ZXDiagram,
};

/// A connected-ish random diagram with at most `max_boundaries` boundary
/// wires and up to six spiders. Edges are plain or Hadamard at random.
pub fn random_diagram<R: Rng>(rng: &mut R, max_boundaries: usize) -> ZXDiagram {
    loop {
        if let Some(d) = attempt(rng, max_boundaries) {
            return d;
        }
    }
}

fn attempt<R: Rng>(rng: &mut R, max_boundaries: usize) -> Option<ZXDiagram> {
    let n = rng.gen_range(1..=6usize);
    let boundaries = rng.gen_range(0..=max_boundaries);
    let mut legs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut links: Vec<(usize, usize, bool)> = Vec::new();
    for k in 1..n {
        links.push((rng.gen_range(0..k), k, rng.gen_bool(0.5)));
    }
    for _ in 0..rng.gen_range(0..=n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            links.push((a.min(b), a.max(b), rng.gen_bool(0.5)));
        }
    }
    let ends: Vec<(usize, bool)> = (0..boundaries)
        .map(|_| (rng.gen_range(0..n), rng.gen_bool(0.3)))
        .collect();
    for (k, &(a, b, _)) in links.iter().enumerate() {
        legs[a].push(k);
        legs[b].push(k);
    }
    let link_count = links.len();
    for (k, &(s, _)) in ends.iter().enumerate() {
        legs[s].push(link_count + k);
    }
    let mut spiders = Vec::new();
    let mut port_of: Vec<Vec<(usize, usize)>> = vec![Vec::new(); link_count + boundaries];
    for (s, slots) in legs.iter_mut().enumerate() {
        slots.shuffle(rng);
        let inputs = rng.gen_range(0..=slots.len());
        spiders.push(Spider {
            id: format!("s{s}"),
            inputs,
            outputs: slots.len() - inputs,
        });
        for (p, &slot) in slots.iter().enumerate() {
            port_of[slot].push((s, p));
        }
    }
    let mut edges = Vec::new();
    let endpoint = |(s, p): (usize, usize)| Endpoint::port(&format!("s{s}"), p);
    for (k, &(_, _, h)) in links.iter().enumerate() {
        edges.push(Edge {
            a: endpoint(port_of[k][0]),
            b: endpoint(port_of[k][1]),
            hadamard: h,
        });
    }
    let (mut inputs, mut outputs) = (Vec::new(), Vec::new());
    for (k, &(_, h)) in ends.iter().enumerate() {
        if rng.gen_bool(0.3) {
            inputs.push(k);
        } else {
            outputs.push(k);
        }
        edges.push(Edge {
            a: endpoint(port_of[link_count + k][0]),
            b: Endpoint::boundary(k),
            hadamard: h,
        });
    }
    ZXDiagram::new(spiders, edges, inputs, outputs).ok()
}

/// Applies one applicable rewrite chosen at random, with its name.
pub fn random_rewrite<R: Rng>(rng: &mut R, d: &ZXDiagram) -> Option<(String, ZXDiagram)> {
    for _ in 0..20 {
        let s = d.spiders.choose(rng)?.clone();
        let result = match rng.gen_range(0..4) {
            0 => {
                let plain: Vec<usize> = (0..d.edges.len())
                    .filter(|&k| {
                        let e = &d.edges[k];
                        !e.hadamard && e.a.spider().is_some() && e.b.spider().is_some()
                            && e.a.spider() != e.b.spider()
                    })
                    .collect();
                let Some(&k) = plain.choose(rng) else {
                    continue;
                };
                spider_fuse(d, k).map(|r| (format!("fuse edge {k}"), r))
            }
            1 if s.arity() >= 2 => {
                let mut ports: Vec<usize> = (0..s.arity()).collect();
                ports.shuffle(rng);
                let take = rng.gen_range(1..s.arity());
                ports.truncate(take);
                spider_unfuse(d, &s.id, &ports).map(|r| (format!("unfuse {} {ports:?}", s.id), r))
            }
            2 if s.outputs >= 2 => {
                let keep = rng.gen_range(0..s.outputs);
                eliminate_multi_output(d, &s.id, keep)
                    .map(|r| (format!("eliminate {} keep {keep}", s.id), r))
            }
            3 if s.outputs >= 1 => {
                let j = rng.gen_range(0..s.outputs);
                bend_output_through_input(d, &s.id, j).map(|r| (format!("bend {} {j}", s.id), r))
            }
            _ => continue,
        };
        if let Ok(r) = result {
            return Some(r);
        }
    }
    None
}
