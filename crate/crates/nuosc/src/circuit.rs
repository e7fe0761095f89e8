use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ZERO};
use crate::qudit::{Embedding, Gate, GateRole, Kernel, QuditState, RegisterShape};

/// Ordered gate list over a register whose sites are grouped into neutrinos.
///
/// `layout[slot]` names the logical neutrino found in `slot` once the whole
/// circuit has run.
#[derive(Debug, Clone)]
pub struct Circuit {
    shape: RegisterShape,
    group: usize,
    gates: Vec<Gate>,
    layout: Vec<usize>,
}

impl Circuit {
    pub fn new(shape: RegisterShape, group: usize) -> Result<Self> {
        if group == 0 || shape.n_sites() % group != 0 {
            return Err(Error::Register(format!(
                "{} sites cannot be grouped by {group}",
                shape.n_sites()
            )));
        }
        let slots = shape.n_sites() / group;
        Ok(Self { shape, group, gates: Vec::new(), layout: (0..slots).collect() })
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn group(&self) -> usize {
        self.group
    }

    pub fn slots(&self) -> usize {
        self.layout.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn layout(&self) -> &[usize] {
        &self.layout
    }

    pub fn set_layout(&mut self, layout: Vec<usize>) -> Result<()> {
        let mut sorted = layout.clone();
        sorted.sort_unstable();
        if sorted != (0..self.slots()).collect::<Vec<_>>() {
            return Err(Error::Invalid(format!("layout {layout:?} is not a permutation")));
        }
        self.layout = layout;
        Ok(())
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check_against(&self.shape)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends the gates of `other`; the layout of `self` is left untouched.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.shape != self.shape {
            return Err(Error::Dimension("circuits act on different registers".into()));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// Copy of `other`'s gates with sites remapped through `site_map`.
    pub fn extend_mapped(&mut self, other: &Circuit, site_map: &[usize]) -> Result<()> {
        for g in &other.gates {
            let mut h = g.clone();
            h.sites = g.sites.iter().map(|&s| site_map[s]).collect();
            self.push(h)?;
        }
        Ok(())
    }

    pub fn entangling_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_entangling()).count()
    }

    pub fn entangling_count_role(&self, role: GateRole) -> usize {
        self.gates
            .iter()
            .filter(|g| g.is_entangling() && g.role == role)
            .count()
    }

    /// Number of parallel layers of entangling gates, single-site gates ignored.
    pub fn entangling_depth(&self) -> usize {
        entangling_depth(self.shape.n_sites(), self.gates.iter().filter(|g| g.is_entangling()).map(|g| g.sites.as_slice()))
    }

    pub fn inverse(&self) -> Self {
        let mut inv_layout = vec![0; self.slots()];
        for (slot, &logical) in self.layout.iter().enumerate() {
            inv_layout[logical] = slot;
        }
        Self {
            shape: self.shape.clone(),
            group: self.group,
            gates: self.gates.iter().rev().map(Gate::dagger).collect(),
            layout: inv_layout,
        }
    }

    pub fn compile(&self) -> Result<CompiledCircuit> {
        let mut cache: HashMap<Vec<usize>, Arc<Embedding>> = HashMap::new();
        let mut ops = Vec::with_capacity(self.gates.len());
        for (k, g) in self.gates.iter().enumerate() {
            let emb = match cache.get(&g.sites) {
                Some(e) => e.clone(),
                None => {
                    let e = Arc::new(self.shape.embedding(&g.sites)?);
                    cache.insert(g.sites.clone(), e.clone());
                    e
                }
            };
            ops.push(CompiledGate { index: k, embedding: emb, kernel: Kernel::from_matrix(&g.matrix) });
        }
        Ok(CompiledCircuit { shape: self.shape.clone(), ops })
    }

    pub fn run(&self, state: &QuditState) -> Result<QuditState> {
        self.compile()?.run(state)
    }

    /// Dense unitary, column by column.
    pub fn unitary(&self) -> Result<CMat> {
        let d = self.shape.total_dim();
        if d > 4096 {
            return Err(Error::DensityCap { dim: d, cap: 4096 });
        }
        let compiled = self.compile()?;
        let mut u = CMat::zeros(d, d);
        for col in 0..d {
            let mut amps = vec![ZERO; d];
            amps[col] = C64::new(1.0, 0.0);
            compiled.apply_all(&mut amps);
            for (row, a) in amps.iter().enumerate() {
                u[(row, col)] = *a;
            }
        }
        Ok(u)
    }

    /// Reorders outcome probabilities over slots so that group `k` holds logical neutrino `k`.
    pub fn logical_probabilities(&self, probs: &[f64]) -> Result<Vec<f64>> {
        if probs.len() != self.shape.total_dim() {
            return Err(Error::Dimension("probabilities do not match circuit register".into()));
        }
        let g = self.group;
        let mut out = vec![0.0; probs.len()];
        let mut logical = vec![0; self.shape.n_sites()];
        for (idx, &p) in probs.iter().enumerate() {
            let digits = self.shape.digits(idx);
            for (slot, &l) in self.layout.iter().enumerate() {
                logical[l * g..(l + 1) * g].copy_from_slice(&digits[slot * g..(slot + 1) * g]);
            }
            out[self.shape.index(&logical)?] = p;
        }
        Ok(out)
    }

    /// Reorders a final state so that group `k` holds logical neutrino `k`.
    pub fn logical_state(&self, state: &QuditState) -> Result<QuditState> {
        let mut order = vec![0; self.slots()];
        for (slot, &logical) in self.layout.iter().enumerate() {
            order[logical] = slot;
        }
        state.permute_groups(self.group, &order)
    }
}

pub fn entangling_depth<'a>(n_sites: usize, gates: impl Iterator<Item = &'a [usize]>) -> usize {
    let mut level = vec![0usize; n_sites];
    let mut depth = 0;
    for sites in gates {
        let l = sites.iter().map(|&s| level[s]).max().unwrap_or(0) + 1;
        for &s in sites {
            level[s] = l;
        }
        depth = depth.max(l);
    }
    depth
}

#[derive(Debug, Clone)]
pub struct CompiledGate {
    pub index: usize,
    pub embedding: Arc<Embedding>,
    pub kernel: Kernel,
}

/// Circuit with precomputed strided layouts, shared between threads.
#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    pub shape: RegisterShape,
    pub ops: Vec<CompiledGate>,
}

impl CompiledCircuit {
    pub fn apply_all(&self, amps: &mut [C64]) {
        for op in &self.ops {
            op.embedding.apply_kernel(amps, &op.kernel);
        }
    }

    pub fn run(&self, state: &QuditState) -> Result<QuditState> {
        if state.shape() != &self.shape {
            return Err(Error::Dimension("state does not match circuit register".into()));
        }
        let mut out = state.clone();
        self.apply_all(out.amplitudes_mut());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;

    fn h() -> CMat {
        real(&[&[1.0, 1.0], &[1.0, -1.0]]).scale(std::f64::consts::FRAC_1_SQRT_2)
    }

    fn cx() -> CMat {
        real(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
    }

    #[test]
    fn depth_counts_only_entangling_layers() {
        let shape = RegisterShape::uniform(4, 2).unwrap();
        let mut c = Circuit::new(shape, 2).unwrap();
        for (a, b) in [(0, 1), (2, 3), (1, 2), (0, 3)] {
            c.push(Gate::new("cx", cx(), vec![a, b], GateRole::TwoBody).unwrap()).unwrap();
            c.push(Gate::new("h", h(), vec![a], GateRole::Other).unwrap()).unwrap();
        }
        assert_eq!(c.entangling_count(), 4);
        assert_eq!(c.entangling_depth(), 2);
    }

    #[test]
    fn inverse_undoes_circuit() {
        let shape = RegisterShape::uniform(2, 2).unwrap();
        let mut c = Circuit::new(shape.clone(), 1).unwrap();
        c.push(Gate::new("h", h(), vec![0], GateRole::Other).unwrap()).unwrap();
        c.push(Gate::new("cx", cx(), vec![0, 1], GateRole::Other).unwrap()).unwrap();
        let u = c.unitary().unwrap() * c.inverse().unitary().unwrap();
        assert!(crate::linalg::max_abs(&(u - crate::linalg::identity(4))) < 1e-15);
    }

    #[test]
    fn layout_must_be_permutation() {
        let shape = RegisterShape::uniform(4, 2).unwrap();
        let mut c = Circuit::new(shape, 2).unwrap();
        assert!(c.set_layout(vec![0, 0]).is_err());
        assert!(c.set_layout(vec![1, 0]).is_ok());
        assert!(Circuit::new(RegisterShape::uniform(3, 2).unwrap(), 2).is_err());
    }
}
