//! Swap-network Trotterization of the two-body term.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hamiltonian::{Basis, NeutrinoSystem};
use crate::linalg;
use crate::qubit::{self, Variant};
use crate::qudit::{Gate, GateRole, QuditState, RegisterShape};
use crate::qutrit::{self, swap9};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Lo,
    Nlo,
    #[serde(rename = "nlo*", alias = "nlostar")]
    NloStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Qutrit,
    QubitA,
    QubitB,
}

impl Backend {
    /// Sites per neutrino.
    pub fn group(self) -> usize {
        match self {
            Backend::Qutrit => 1,
            _ => 2,
        }
    }

    /// Entangling gates per two-body interaction.
    pub fn n_cx(self) -> usize {
        match self {
            Backend::Qutrit => 4,
            Backend::QubitA => 24,
            Backend::QubitB => 18,
        }
    }

    pub fn register(self, n: usize) -> Result<RegisterShape> {
        match self {
            Backend::Qutrit => RegisterShape::uniform(n, 3),
            _ => RegisterShape::uniform(2 * n, 2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrotterPlan {
    pub order: Order,
    pub steps: usize,
    pub backend: Backend,
    pub absorb_swaps: bool,
}

impl TrotterPlan {
    pub fn new(order: Order, steps: usize, backend: Backend) -> Self {
        Self { order, steps, backend, absorb_swaps: true }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Invalid("trotter_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// One pair interaction `e^{−i time·J λ·λ}`, followed by a SWAP of the two
/// slots when `swap` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interaction {
    pub slots: (usize, usize),
    pub logical: (usize, usize),
    pub time: f64,
    pub swap: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    OneBody(f64),
    Layer(Vec<Interaction>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub n: usize,
    pub items: Vec<Item>,
    /// `layout[slot]` is the logical neutrino in `slot` at the end.
    pub layout: Vec<usize>,
}

impl Schedule {
    pub fn interactions(&self) -> impl Iterator<Item = &Interaction> {
        self.items.iter().flat_map(|it| match it {
            Item::Layer(l) => l.as_slice(),
            Item::OneBody(_) => &[],
        })
    }

    pub fn layers(&self) -> impl Iterator<Item = &Vec<Interaction>> {
        self.items.iter().filter_map(|it| match it {
            Item::Layer(l) => Some(l),
            Item::OneBody(_) => None,
        })
    }
}

/// Slot pairs of the `N` brickwork layers; layer `l` couples `(p, p+1)` with `p ≡ l mod 2`.
pub fn swap_network_schedule(n: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if n < 2 {
        return Err(Error::TooFewNeutrinos { min: 2, got: n });
    }
    Ok((0..n)
        .map(|l| (l % 2..n - 1).step_by(2).map(|p| (p, p + 1)).collect())
        .collect())
}

/// One pass of the network at step `dt`, updating `occupancy` (slot → logical).
fn network_pass(network: &[Vec<(usize, usize)>], occupancy: &mut [usize], dt: f64, reverse: bool) -> Vec<Item> {
    let order: Vec<usize> = if reverse { (0..network.len()).rev().collect() } else { (0..network.len()).collect() };
    order
        .into_iter()
        .map(|l| {
            let layer = network[l]
                .iter()
                .map(|&(a, b)| {
                    let inter = Interaction { slots: (a, b), logical: (occupancy[a], occupancy[b]), time: dt, swap: true };
                    occupancy.swap(a, b);
                    inter
                })
                .collect();
            Item::Layer(layer)
        })
        .collect()
}

/// Direction and time step of every pass, with the one-body time preceding each.
fn passes(order: Order, k: usize, t: f64) -> Vec<(bool, f64, Option<f64>)> {
    let dt = t / k as f64;
    match order {
        Order::Lo => (0..k).map(|_| (false, dt, Some(dt))).collect(),
        Order::Nlo | Order::NloStar if k == 1 => vec![(false, t / 2.0, Some(t)), (true, t / 2.0, None)],
        Order::Nlo | Order::NloStar => (0..k).map(|s| (s % 2 == 1, dt, Some(dt))).collect(),
    }
}

fn assemble(n: usize, pass_list: &[(bool, f64, Option<f64>)], merge: bool) -> Result<Schedule> {
    let network = swap_network_schedule(n)?;
    let mut occupancy: Vec<usize> = (0..n).collect();
    let mut items = Vec::new();
    let mut boundaries = Vec::new();
    for (p, &(reverse, dt, one_body)) in pass_list.iter().enumerate() {
        if p > 0 {
            boundaries.push(items.len());
        }
        if let Some(dt1) = one_body {
            items.push(Item::OneBody(dt1));
        }
        items.extend(network_pass(&network, &mut occupancy, dt, reverse));
    }
    if merge {
        items = merge_boundaries(items, &boundaries);
    }
    Ok(Schedule { n, items, layout: occupancy })
}

fn same_pairs(a: &[Interaction], b: &[Interaction]) -> bool {
    let key = |i: &Interaction| {
        let (x, y) = i.logical;
        (i.slots, x.min(y), x.max(y))
    };
    let mut ka: Vec<_> = a.iter().map(key).collect();
    let mut kb: Vec<_> = b.iter().map(key).collect();
    ka.sort_unstable();
    kb.sort_unstable();
    ka == kb
}

/// Fuses the last layer before each pass boundary with the first layer after it.
fn merge_boundaries(items: Vec<Item>, boundaries: &[usize]) -> Vec<Item> {
    let mut out: Vec<Item> = Vec::with_capacity(items.len());
    let mut it = items.into_iter().enumerate().peekable();
    let mut pending_one_body = Vec::new();
    while let Some((idx, item)) = it.next() {
        if !boundaries.contains(&idx) {
            out.push(item);
            continue;
        }
        let mut next = Some(item);
        while let Some(Item::OneBody(dt)) = next {
            pending_one_body.push(dt);
            next = it.next().map(|(_, i)| i);
        }
        let last_layer = out.iter().rposition(|i| matches!(i, Item::Layer(_)));
        match (next, last_layer) {
            (Some(Item::Layer(first)), Some(pos)) => {
                let Item::Layer(prev) = &out[pos] else { unreachable!() };
                if !first.is_empty() && same_pairs(prev, &first) {
                    let fused = prev
                        .iter()
                        .map(|a| {
                            let b = first.iter().find(|b| b.slots == a.slots).expect("same slots");
                            Interaction { time: a.time + b.time, swap: a.swap ^ b.swap, ..*a }
                        })
                        .collect();
                    out[pos] = Item::Layer(fused);
                    out.extend(pending_one_body.drain(..).map(Item::OneBody));
                } else {
                    out.extend(pending_one_body.drain(..).map(Item::OneBody));
                    out.push(Item::Layer(first));
                }
            }
            (Some(other), _) => {
                out.extend(pending_one_body.drain(..).map(Item::OneBody));
                out.push(other);
            }
            (None, _) => out.extend(pending_one_body.drain(..).map(Item::OneBody)),
        }
    }
    out
}

/// Layer schedule of the evolution to time `t`.
pub fn plan_schedule(n: usize, t: f64, plan: &TrotterPlan) -> Result<Schedule> {
    plan.validate()?;
    let merge = plan.order == Order::NloStar && plan.steps >= 2;
    assemble(n, &passes(plan.order, plan.steps, t), merge)
}

/// Schedule with the structure and gate count of the evolution to `t` whose
/// ideal action is the identity.
///
/// First-order plans use zero time. Second-order plans with an even number of
/// passes run the second half with negated time; with an odd number of passes
/// time is zero.
pub fn identity_schedule(n: usize, t: f64, plan: &TrotterPlan) -> Result<Schedule> {
    plan.validate()?;
    let mut list = passes(plan.order, plan.steps, t);
    let m = list.len();
    let flip = plan.order != Order::Lo && m % 2 == 0;
    for (p, entry) in list.iter_mut().enumerate() {
        if !flip {
            entry.1 = 0.0;
            entry.2 = entry.2.map(|_| 0.0);
        } else if p >= m / 2 {
            entry.1 = -entry.1;
            entry.2 = entry.2.map(|x| -x);
        }
    }
    if flip && plan.steps == 1 {
        list[0].2 = Some(0.0);
    }
    let merge = plan.order == Order::NloStar && plan.steps >= 2;
    assemble(n, &list, merge)
}

/// Entangling two-body gates predicted for `k` steps on `n` neutrinos.
pub fn cx_count(plan: &TrotterPlan, n: usize, n_cx: usize) -> usize {
    let k = plan.steps;
    let pairs = n * (n - 1) / 2;
    match plan.order {
        Order::Lo => n_cx * k * pairs,
        Order::Nlo | Order::NloStar if k == 1 => 2 * n_cx * pairs,
        Order::Nlo => n_cx * k * pairs,
        Order::NloStar => n_cx * k * pairs - n_cx * (k / 2) * (n.div_ceil(2) - 1) - n_cx * ((k - 1) / 2) * (n / 2),
    }
}

fn pair_gate(backend: Backend, alpha: f64) -> Result<Circuit> {
    let mut c = match backend {
        Backend::Qutrit => qutrit::two_body_gate_qutrit(alpha)?.0,
        Backend::QubitA => qubit::two_body_gate_qubit(alpha, Variant::A)?,
        Backend::QubitB => qubit::two_body_gate_qubit(alpha, Variant::B)?,
    };
    let mut out = Circuit::new(c.shape().clone(), c.group())?;
    for g in c.gates() {
        let mut h = g.clone();
        h.role = GateRole::TwoBody;
        out.push(h)?;
    }
    std::mem::swap(&mut c, &mut out);
    Ok(c)
}

fn explicit_swap(backend: Backend, a: usize, b: usize) -> Result<Vec<Gate>> {
    match backend {
        Backend::Qutrit => Ok(vec![Gate::new("swap", swap9(), vec![a, b], GateRole::Routing)?]),
        _ => {
            let s = linalg::permutation_matrix(&[0, 2, 1, 3]);
            Ok(vec![
                Gate::new("swap", s.clone(), vec![2 * a, 2 * b], GateRole::Routing)?,
                Gate::new("swap", s, vec![2 * a + 1, 2 * b + 1], GateRole::Routing)?,
            ])
        }
    }
}

fn one_body(sys: &NeutrinoSystem, backend: Backend, dt: f64) -> Result<Circuit> {
    match backend {
        Backend::Qutrit => qutrit::one_body_step_qutrit(sys, dt),
        _ => qubit::one_body_step_qubit(sys, dt),
    }
}

/// Gates of a schedule on the chosen backend.
pub fn build_schedule(sys: &NeutrinoSystem, schedule: &Schedule, plan: &TrotterPlan) -> Result<Circuit> {
    if schedule.n != sys.n {
        return Err(Error::Invalid(format!("schedule for {} neutrinos, system has {}", schedule.n, sys.n)));
    }
    let backend = plan.backend;
    let g = backend.group();
    let mut circ = Circuit::new(backend.register(sys.n)?, g)?;
    for item in &schedule.items {
        match item {
            Item::OneBody(dt) => circ.extend(&one_body(sys, backend, *dt)?)?,
            Item::Layer(layer) => {
                for inter in layer {
                    let (a, b) = inter.slots;
                    let j = sys.coupling(inter.logical.0, inter.logical.1);
                    let absorbed = inter.swap && plan.absorb_swaps;
                    let alpha = inter.time * j + if absorbed { FRAC_PI_4 } else { 0.0 };
                    let pair = pair_gate(backend, alpha)?;
                    let map: Vec<usize> = (0..g).map(|s| g * a + s).chain((0..g).map(|s| g * b + s)).collect();
                    circ.extend_mapped(&pair, &map)?;
                    if inter.swap && !plan.absorb_swaps {
                        for gate in explicit_swap(backend, a, b)? {
                            circ.push(gate)?;
                        }
                    }
                }
            }
        }
    }
    circ.set_layout(schedule.layout.clone())?;
    Ok(circ)
}

pub fn build_evolution(sys: &NeutrinoSystem, t: f64, plan: &TrotterPlan) -> Result<Circuit> {
    build_schedule(sys, &plan_schedule(sys.n, t, plan)?, plan)
}

/// Decoherence-renormalization calibration circuit matching `build_evolution(sys, t, plan)`.
pub fn build_identity(sys: &NeutrinoSystem, t: f64, plan: &TrotterPlan) -> Result<Circuit> {
    build_schedule(sys, &identity_schedule(sys.n, t, plan)?, plan)
}

/// Rotation from the mass basis to the flavor basis before measurement.
pub fn measurement_rotation(sys: &NeutrinoSystem, backend: Backend) -> Result<Circuit> {
    let g = backend.group();
    let mut circ = Circuit::new(backend.register(sys.n)?, g)?;
    if sys.basis == Basis::Flavor {
        return Ok(circ);
    }
    match backend {
        Backend::Qutrit => {
            let pm = qutrit::pmns_circuit(&sys.mixing)?;
            for s in 0..sys.n {
                circ.extend_mapped(&pm, &[s])?;
            }
        }
        _ => {
            let u = qubit::embed_physical(&sys.pmns());
            let gates = qubit::kak::three_cnot_gates(&u, [0, 1], GateRole::BasisChange)?;
            for s in 0..sys.n {
                for gate in &gates {
                    let mut h = gate.clone();
                    h.sites = gate.sites.iter().map(|&q| 2 * s + q).collect();
                    circ.push(h)?;
                }
            }
        }
    }
    Ok(circ)
}

/// Initial state on the backend register.
pub fn backend_initial_state(sys: &NeutrinoSystem, backend: Backend) -> Result<QuditState> {
    match backend {
        Backend::Qutrit => Ok(sys.initial_state()),
        _ => qubit::encode_state(&sys.initial_state()),
    }
}

/// Noiseless circuit evolution, returned as a qutrit state in the system's
/// basis with neutrinos in logical order.
pub fn run_plan(sys: &NeutrinoSystem, t: f64, plan: &TrotterPlan) -> Result<QuditState> {
    let circ = build_evolution(sys, t, plan)?;
    let out = circ.run(&backend_initial_state(sys, plan.backend)?)?;
    let logical = circ.logical_state(&out)?;
    match plan.backend {
        Backend::Qutrit => Ok(logical),
        _ => Ok(qubit::decode_state(&logical)?.0),
    }
}
