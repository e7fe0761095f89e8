//! Routing of qubit circuits onto a linear chain.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::{cnot, cx_gate};
use crate::circuit::{entangling_depth, Circuit};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::qudit::{Gate, GateRole, RegisterShape};

const MAX_ROUTED_QUBITS: usize = 8;

/// A circuit on chain positions `0..n` where only neighbours interact.
///
/// `initial[q]` and `final_positions[q]` give the chain position of logical
/// qubit `q` before and after the circuit.
#[derive(Debug, Clone)]
pub struct RoutedCircuit {
    pub circuit: Circuit,
    pub initial: Vec<usize>,
    pub final_positions: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Swap(usize),
    Direct(usize),
    Bridge(usize),
}

#[derive(Debug, Clone)]
struct TwoQ {
    index: usize,
    a: usize,
    b: usize,
    is_cx: bool,
}

fn positions(layout: &[u8]) -> Vec<usize> {
    let mut pos = vec![0; layout.len()];
    for (p, &q) in layout.iter().enumerate() {
        pos[q as usize] = p;
    }
    pos
}

fn step_sites(step: Step, gates: &[TwoQ], layout: &[u8]) -> Vec<[usize; 2]> {
    let pos = positions(layout);
    match step {
        Step::Swap(p) => vec![[p, p + 1]; 3],
        Step::Direct(i) => vec![[pos[gates[i].a], pos[gates[i].b]]],
        Step::Bridge(i) => {
            let (c, t) = (pos[gates[i].a], pos[gates[i].b]);
            let m = (c + t) / 2;
            vec![[m, t], [c, m], [m, t], [c, m]]
        }
    }
}

/// All minimum-cost step sequences starting from `init`, or none when every
/// sequence costs more than `bound`.
fn search(gates: &[TwoQ], init: Vec<u8>, n: usize, bound: usize) -> (usize, Vec<Vec<Step>>) {
    let mut heap = BinaryHeap::new();
    // Parent index and step taken, one entry per pushed node.
    let mut nodes: Vec<(usize, Option<Step>, Vec<u8>)> = vec![(usize::MAX, None, init)];
    heap.push(Reverse((0usize, 0usize, 0usize)));
    let mut dist: HashMap<(usize, Vec<u8>), usize> = HashMap::new();
    let mut best = None;
    let mut found = Vec::new();
    while let Some(Reverse((cost, node, i))) = heap.pop() {
        if cost > bound || best.is_some_and(|b| cost > b) {
            break;
        }
        if i == gates.len() {
            best = Some(cost);
            let mut steps = Vec::new();
            let mut at = node;
            while let (parent, Some(step), _) = &nodes[at] {
                steps.push(*step);
                at = *parent;
            }
            steps.reverse();
            found.push(steps);
            continue;
        }
        let layout = nodes[node].2.clone();
        match dist.get_mut(&(i, layout.clone())) {
            Some(d) if *d < cost => continue,
            Some(d) => *d = cost,
            None => {
                dist.insert((i, layout.clone()), cost);
            }
        }
        let pos = positions(&layout);
        let g = &gates[i];
        let gap = pos[g.a].abs_diff(pos[g.b]);
        let mut push = |extra: usize, next_i: usize, step: Step, lay: Vec<u8>| {
            nodes.push((node, Some(step), lay));
            heap.push(Reverse((cost + extra, nodes.len() - 1, next_i)));
        };
        if gap == 1 {
            push(1, i + 1, Step::Direct(i), layout.clone());
        }
        if gap == 2 && g.is_cx {
            push(4, i + 1, Step::Bridge(i), layout.clone());
        }
        for p in 0..n - 1 {
            let mut l = layout.clone();
            l.swap(p, p + 1);
            push(3, i, Step::Swap(p), l);
        }
    }
    (best.unwrap_or(usize::MAX), found)
}

fn replay_depth(steps: &[Step], gates: &[TwoQ], init: &[u8], n: usize) -> usize {
    let mut layout = init.to_vec();
    let mut sites = Vec::new();
    for &s in steps {
        sites.extend(step_sites(s, gates, &layout));
        if let Step::Swap(p) = s {
            layout.swap(p, p + 1);
        }
    }
    entangling_depth(n, sites.iter().map(|s| s.as_slice()))
}

fn permutations(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur: Vec<u8> = (0..n as u8).collect();
    fn rec(k: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for j in k..cur.len() {
            cur.swap(k, j);
            rec(k + 1, cur, out);
            cur.swap(k, j);
        }
    }
    rec(0, &mut cur, &mut out);
    out.sort();
    out
}

/// Minimum-CNOT routing onto a linear chain with free initial and final placement.
///
/// A CNOT across one intermediate qubit becomes four neighbouring CNOTs; any
/// other distant gate moves its qubits with SWAPs of three CNOTs each. Among
/// routings of equal cost the one with the smallest entangling depth is kept.
pub fn route_linear_chain(circuit: &Circuit) -> Result<RoutedCircuit> {
    let shape = circuit.shape();
    let n = shape.n_sites();
    if shape.dims().iter().any(|&d| d != 2) {
        return Err(Error::Dimension("routing expects a qubit register".into()));
    }
    if n > MAX_ROUTED_QUBITS {
        return Err(Error::Invalid(format!("routing search limited to {MAX_ROUTED_QUBITS} qubits")));
    }
    let cx = cnot();
    let mut twoq = Vec::new();
    for (index, g) in circuit.gates().iter().enumerate() {
        match g.sites.len() {
            1 => {}
            2 => twoq.push(TwoQ {
                index,
                a: g.sites[0],
                b: g.sites[1],
                is_cx: linalg::max_abs(&(&g.matrix - &cx)) < 1e-15,
            }),
            _ => return Err(Error::Invalid(format!("gate {} spans more than two qubits", g.tag))),
        }
    }

    let mut best: Option<(usize, usize, Vec<u8>, Vec<Step>)> = None;
    for init in permutations(n) {
        // A placement and its mirror image route identically.
        if init.iter().rev().lt(init.iter()) {
            continue;
        }
        let bound = best.as_ref().map_or(usize::MAX, |b| b.0);
        let (cost, paths) = search(&twoq, init.clone(), n, bound);
        for steps in paths {
            let depth = replay_depth(&steps, &twoq, &init, n);
            let better = match &best {
                None => true,
                Some((c, d, _, _)) => cost < *c || (cost == *c && depth < *d),
            };
            if better {
                best = Some((cost, depth, init.clone(), steps));
            }
        }
    }
    let (_, _, init, steps) = best.ok_or_else(|| Error::Invalid("no routing found".into()))?;
    build(circuit, &twoq, &init, &steps)
}

fn build(circuit: &Circuit, twoq: &[TwoQ], init: &[u8], steps: &[Step]) -> Result<RoutedCircuit> {
    let n = circuit.shape().n_sites();
    let mut out = Circuit::new(RegisterShape::uniform(n, 2)?, 1)?;
    let mut layout = init.to_vec();
    let mut next_gate = 0;
    let emit_until = |limit: usize, layout: &[u8], out: &mut Circuit, next_gate: &mut usize| -> Result<()> {
        let pos = positions(layout);
        while *next_gate < limit {
            let g = &circuit.gates()[*next_gate];
            let mut h = g.clone();
            h.sites = g.sites.iter().map(|&s| pos[s]).collect();
            out.push(h)?;
            *next_gate += 1;
        }
        Ok(())
    };
    for &s in steps {
        match s {
            Step::Swap(p) => {
                for (a, b) in [(p, p + 1), (p + 1, p), (p, p + 1)] {
                    out.push(cx_gate(a, b, GateRole::Routing))?;
                }
                layout.swap(p, p + 1);
            }
            Step::Direct(i) => emit_until(twoq[i].index + 1, &layout, &mut out, &mut next_gate)?,
            Step::Bridge(i) => {
                emit_until(twoq[i].index, &layout, &mut out, &mut next_gate)?;
                let role = circuit.gates()[twoq[i].index].role;
                for [a, b] in step_sites(s, twoq, &layout) {
                    out.push(cx_gate(a, b, role))?;
                }
                next_gate += 1;
            }
        }
    }
    emit_until(circuit.len(), &layout, &mut out, &mut next_gate)?;
    let routed = RoutedCircuit {
        circuit: out,
        initial: positions(init),
        final_positions: positions(&layout),
    };
    let err = routed.logical_distance(circuit)?;
    if err > 1e-10 {
        return Err(Error::Verification { what: "routed circuit".into(), deviation: err });
    }
    Ok(routed)
}

/// Matrix sending logical basis states to chain basis states under `pos`.
fn placement(pos: &[usize]) -> CMat {
    let n = pos.len();
    let images: Vec<usize> = (0..1usize << n)
        .map(|idx| {
            let mut out = 0;
            for (q, &p) in pos.iter().enumerate() {
                let bit = (idx >> (n - 1 - q)) & 1;
                out |= bit << (n - 1 - p);
            }
            out
        })
        .collect();
    linalg::permutation_matrix(&images)
}

impl RoutedCircuit {
    pub fn cx_count(&self) -> usize {
        self.circuit.entangling_count()
    }

    pub fn depth(&self) -> usize {
        self.circuit.entangling_depth()
    }

    pub fn is_nearest_neighbour(&self) -> bool {
        self.circuit
            .gates()
            .iter()
            .filter(|g: &&Gate| g.is_entangling())
            .all(|g| g.sites[0].abs_diff(g.sites[1]) == 1)
    }

    /// Phase-aligned distance between the routed unitary, with placements
    /// undone, and the unitary of `logical`.
    pub fn logical_distance(&self, logical: &Circuit) -> Result<f64> {
        let u = self.circuit.unitary()?;
        let back = placement(&self.final_positions).adjoint() * u * placement(&self.initial);
        Ok(linalg::phase_aligned_distance(&back, &logical.unitary()?))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{figure_circuit, Variant};
    use super::*;

    #[test]
    fn adjacent_circuit_unchanged() {
        let mut c = Circuit::new(RegisterShape::uniform(3, 2).unwrap(), 1).unwrap();
        c.push(cx_gate(0, 1, GateRole::Other)).unwrap();
        c.push(cx_gate(2, 1, GateRole::Other)).unwrap();
        let r = route_linear_chain(&c).unwrap();
        assert_eq!(r.cx_count(), 2);
        assert!(r.logical_distance(&c).unwrap() < 1e-12);
    }

    #[test]
    fn distant_cnot_is_bridged() {
        let mut c = Circuit::new(RegisterShape::uniform(3, 2).unwrap(), 1).unwrap();
        c.push(cx_gate(0, 2, GateRole::Other)).unwrap();
        c.push(cx_gate(0, 1, GateRole::Other)).unwrap();
        c.push(cx_gate(1, 2, GateRole::Other)).unwrap();
        let r = route_linear_chain(&c).unwrap();
        assert!(r.is_nearest_neighbour());
        assert!(r.logical_distance(&c).unwrap() < 1e-12);
    }

    #[test]
    fn figure_circuits_route_to_table_counts() {
        let a = route_linear_chain(&figure_circuit(0.3, Variant::A).unwrap()).unwrap();
        assert_eq!(a.cx_count(), 42);
        assert_eq!(a.depth(), 31);
        assert!(a.is_nearest_neighbour());
        let b = route_linear_chain(&figure_circuit(0.3, Variant::B).unwrap()).unwrap();
        assert_eq!(b.cx_count(), 30);
        assert!(b.is_nearest_neighbour());
    }
}
