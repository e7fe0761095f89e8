//! Mixed-radix state vectors and density matrices.
//!
//! Site 0 is the most significant digit of the basis index everywhere in
//! this crate. Gates are applied in place over strided slices; no Kronecker
//! embedding is ever formed outside tests.

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ONE, ZERO};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegisterShape {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl RegisterShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Register("empty register".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d != 2 && d != 3) {
            return Err(Error::Register(format!("local dimension {d} not in {{2, 3}}")));
        }
        let mut strides = vec![1; dims.len()];
        for s in (0..dims.len() - 1).rev() {
            strides[s] = strides[s + 1] * dims[s + 1];
        }
        let total = strides[0] * dims[0];
        Ok(Self { dims, strides, total })
    }

    pub fn uniform(sites: usize, dim: usize) -> Result<Self> {
        Self::new(vec![dim; sites])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.strides[site]) % self.dims[site]
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        (0..self.n_sites()).map(|s| self.digit(index, s)).collect()
    }

    pub fn index(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.n_sites() {
            return Err(Error::Dimension(format!(
                "{} digits for {} sites",
                digits.len(),
                self.n_sites()
            )));
        }
        let mut idx = 0;
        for (s, &d) in digits.iter().enumerate() {
            if d >= self.dims[s] {
                return Err(Error::Dimension(format!("digit {d} at site {s}")));
            }
            idx += d * self.strides[s];
        }
        Ok(idx)
    }

    /// Outcome string such as `"0110"`.
    pub fn label(&self, index: usize) -> String {
        self.digits(index)
            .iter()
            .map(|d| char::from_digit(*d as u32, 10).unwrap())
            .collect()
    }

    pub fn sub_shape(&self, sites: &[usize]) -> Result<Self> {
        Self::new(sites.iter().map(|&s| self.dims[s]).collect())
    }

    fn check_sites(&self, sites: &[usize]) -> Result<()> {
        for (k, &s) in sites.iter().enumerate() {
            if s >= self.n_sites() {
                return Err(Error::Dimension(format!("site {s} outside register")));
            }
            if sites[..k].contains(&s) {
                return Err(Error::Dimension(format!("repeated site {s}")));
            }
        }
        Ok(())
    }

    /// Strided layout of a local operator on `sites`.
    pub fn embedding(&self, sites: &[usize]) -> Result<Embedding> {
        self.check_sites(sites)?;
        let mut offsets = vec![0usize];
        for &s in sites {
            let mut next = Vec::with_capacity(offsets.len() * self.dims[s]);
            for &o in &offsets {
                for d in 0..self.dims[s] {
                    next.push(o + d * self.strides[s]);
                }
            }
            offsets = next;
        }
        let mut bases = vec![0usize];
        for s in 0..self.n_sites() {
            if sites.contains(&s) {
                continue;
            }
            let mut next = Vec::with_capacity(bases.len() * self.dims[s]);
            for &b in &bases {
                for d in 0..self.dims[s] {
                    next.push(b + d * self.strides[s]);
                }
            }
            bases = next;
        }
        let run = sites.iter().map(|&s| self.strides[s]).min().unwrap_or(1);
        let starts = bases.iter().step_by(run).copied().collect();
        Ok(Embedding { offsets, bases, run, starts })
    }
}

#[derive(Debug, Clone)]
pub struct Embedding {
    pub offsets: Vec<usize>,
    pub bases: Vec<usize>,
    /// Length of the contiguous runs that `bases` is made of.
    pub run: usize,
    /// First base of every run.
    pub starts: Vec<usize>,
}

impl Embedding {
    pub fn local_dim(&self) -> usize {
        self.offsets.len()
    }

    /// `amps <- M amps` on the embedded sites; `m` is row-major.
    pub fn apply(&self, amps: &mut [C64], m: &[C64]) {
        match self.offsets.len() {
            2 => return self.apply_fixed::<2>(amps, m),
            3 => return self.apply_fixed::<3>(amps, m),
            4 => return self.apply_fixed::<4>(amps, m),
            9 => return self.apply_fixed::<9>(amps, m),
            _ => {}
        }
        let d = self.offsets.len();
        let mut buf = [ZERO; 32];
        let mut heap;
        let tmp: &mut [C64] = if d <= 32 {
            &mut buf[..d]
        } else {
            heap = vec![ZERO; d];
            &mut heap
        };
        for &b in &self.bases {
            for (j, &o) in self.offsets.iter().enumerate() {
                tmp[j] = amps[b + o];
            }
            for (i, &o) in self.offsets.iter().enumerate() {
                let row = &m[i * d..(i + 1) * d];
                let mut acc = ZERO;
                for j in 0..d {
                    acc += row[j] * tmp[j];
                }
                amps[b + o] = acc;
            }
        }
    }
}

impl Embedding {
    fn apply_fixed<const D: usize>(&self, amps: &mut [C64], m: &[C64]) {
        let offsets: [usize; D] = std::array::from_fn(|j| self.offsets[j]);
        let mat: [[C64; D]; D] = std::array::from_fn(|i| std::array::from_fn(|j| m[i * D + j]));
        self.check_bounds(amps.len());
        let base = amps.as_mut_ptr();
        for &b0 in &self.starts {
            // SAFETY: check_bounds verified every run lies inside `amps`, and
            // distinct offsets address disjoint runs.
            unsafe {
                let ptrs: [*mut C64; D] = std::array::from_fn(|j| base.add(b0 + offsets[j]));
                for lo in 0..self.run {
                    let tmp: [C64; D] = std::array::from_fn(|j| *ptrs[j].add(lo));
                    for i in 0..D {
                        let mut acc = ZERO;
                        for j in 0..D {
                            acc += mat[i][j] * tmp[j];
                        }
                        *ptrs[i].add(lo) = acc;
                    }
                }
            }
        }
    }

    fn apply_monomial_fixed<const D: usize>(&self, amps: &mut [C64], rows: &[(usize, C64)]) {
        let offsets: [usize; D] = std::array::from_fn(|j| self.offsets[j]);
        let rows: [(usize, C64); D] = std::array::from_fn(|i| rows[i]);
        let moved: Vec<usize> = (0..D).filter(|&i| rows[i] != (i, ONE)).collect();
        self.check_bounds(amps.len());
        let base = amps.as_mut_ptr();
        for &b0 in &self.starts {
            // SAFETY: as in apply_fixed.
            unsafe {
                let ptrs: [*mut C64; D] = std::array::from_fn(|j| base.add(b0 + offsets[j]));
                for lo in 0..self.run {
                    let tmp: [C64; D] = std::array::from_fn(|j| *ptrs[j].add(lo));
                    for &i in &moved {
                        *ptrs[i].add(lo) = rows[i].1 * tmp[rows[i].0];
                    }
                }
            }
        }
    }

    fn check_bounds(&self, len: usize) {
        let last = self.starts.last().copied().unwrap_or(0) + self.run;
        let top = last + self.offsets.iter().max().copied().unwrap_or(0);
        assert!(top <= len, "embedding exceeds state length");
        debug_assert_eq!(self.starts.len() * self.run, self.bases.len());
    }
}

/// Local operator in the cheapest form that applies it exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    Dense(Vec<C64>),
    Diagonal(Vec<C64>),
    /// `out[i] = factor_i * in[source_i]`
    Monomial(Vec<(usize, C64)>),
}

impl Kernel {
    pub fn from_matrix(m: &CMat) -> Self {
        let d = m.nrows();
        let mut monomial = Vec::with_capacity(d);
        for i in 0..d {
            let nz: Vec<usize> = (0..d).filter(|&j| m[(i, j)] != ZERO).collect();
            match nz.as_slice() {
                [j] => monomial.push((*j, m[(i, *j)])),
                _ => return Kernel::Dense(row_major(m)),
            }
        }
        if monomial.iter().enumerate().all(|(i, (j, _))| i == *j) {
            Kernel::Diagonal(monomial.into_iter().map(|(_, f)| f).collect())
        } else {
            Kernel::Monomial(monomial)
        }
    }
}

impl Embedding {
    pub fn apply_kernel(&self, amps: &mut [C64], kernel: &Kernel) {
        match kernel {
            Kernel::Dense(m) => self.apply(amps, m),
            Kernel::Diagonal(diag) => {
                for (&o, &f) in self.offsets.iter().zip(diag) {
                    if f == ONE {
                        continue;
                    }
                    for &b in &self.bases {
                        amps[b + o] *= f;
                    }
                }
            }
            Kernel::Monomial(rows) => {
                let d = self.offsets.len();
                match d {
                    2 => return self.apply_monomial_fixed::<2>(amps, rows),
                    3 => return self.apply_monomial_fixed::<3>(amps, rows),
                    4 => return self.apply_monomial_fixed::<4>(amps, rows),
                    9 => return self.apply_monomial_fixed::<9>(amps, rows),
                    _ => {}
                }
                let mut buf = [ZERO; 32];
                let mut heap;
                let tmp: &mut [C64] = if d <= 32 {
                    &mut buf[..d]
                } else {
                    heap = vec![ZERO; d];
                    &mut heap
                };
                for &b in &self.bases {
                    for (j, &o) in self.offsets.iter().enumerate() {
                        tmp[j] = amps[b + o];
                    }
                    for (&o, &(src, f)) in self.offsets.iter().zip(rows) {
                        amps[b + o] = f * tmp[src];
                    }
                }
            }
        }
    }
}

pub fn row_major(m: &CMat) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Role of a gate inside a larger construction, used for accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum GateRole {
    OneBody,
    TwoBody,
    BasisChange,
    Routing,
    Other,
}

#[derive(Debug, Clone)]
pub struct Gate {
    pub tag: String,
    pub matrix: CMat,
    pub sites: Vec<usize>,
    pub role: GateRole,
    entangling: bool,
}

impl Gate {
    pub const UNITARITY_TOL: f64 = 1e-12;

    pub fn new(tag: impl Into<String>, matrix: CMat, sites: Vec<usize>, role: GateRole) -> Result<Self> {
        let defect = crate::linalg::unitarity_defect(&matrix);
        if !matrix.is_square() || defect > Self::UNITARITY_TOL {
            return Err(Error::NotUnitary { defect });
        }
        Self::unchecked(tag, matrix, sites, role)
    }

    /// Skips the unitarity check; used for Kraus operators and numerically
    /// synthesized gates that are re-verified as a whole.
    pub fn unchecked(tag: impl Into<String>, matrix: CMat, sites: Vec<usize>, role: GateRole) -> Result<Self> {
        for (k, s) in sites.iter().enumerate() {
            if sites[..k].contains(s) {
                return Err(Error::Dimension(format!("repeated site {s}")));
            }
        }
        if sites.is_empty() {
            return Err(Error::Dimension("gate without sites".into()));
        }
        let entangling = sites.len() > 1;
        Ok(Self { tag: tag.into(), matrix, sites, role, entangling })
    }

    pub fn is_entangling(&self) -> bool {
        self.entangling
    }

    pub fn dagger(&self) -> Self {
        Self {
            tag: format!("{}_dg", self.tag),
            matrix: self.matrix.adjoint(),
            sites: self.sites.clone(),
            role: self.role,
            entangling: self.entangling,
        }
    }

    pub fn check_against(&self, shape: &RegisterShape) -> Result<()> {
        shape.check_sites(&self.sites)?;
        let dim: usize = self.sites.iter().map(|&s| shape.dims()[s]).product();
        if self.matrix.nrows() != dim {
            return Err(Error::Dimension(format!(
                "gate {} is {}x{} but sites span dimension {dim}",
                self.tag,
                self.matrix.nrows(),
                self.matrix.ncols()
            )));
        }
        let d0 = shape.dims()[self.sites[0]];
        if self.sites.iter().any(|&s| shape.dims()[s] != d0) {
            return Err(Error::Dimension(format!("gate {} spans mixed local dimensions", self.tag)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuditState {
    shape: RegisterShape,
    amps: Vec<C64>,
}

impl QuditState {
    pub fn basis(shape: RegisterShape, digits: &[usize]) -> Result<Self> {
        let idx = shape.index(digits)?;
        let mut amps = vec![ZERO; shape.total_dim()];
        amps[idx] = ONE;
        Ok(Self { shape, amps })
    }

    pub fn from_amplitudes(shape: RegisterShape, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != shape.total_dim() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for dimension {}",
                amps.len(),
                shape.total_dim()
            )));
        }
        Ok(Self { shape, amps })
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.check_against(&self.shape)?;
        let emb = self.shape.embedding(&gate.sites)?;
        emb.apply(&mut self.amps, &row_major(&gate.matrix));
        Ok(())
    }

    /// Applies `m` to `sites` without unitarity bookkeeping.
    pub fn apply_matrix(&mut self, m: &CMat, sites: &[usize]) -> Result<()> {
        let emb = self.shape.embedding(sites)?;
        if emb.local_dim() != m.nrows() {
            return Err(Error::Dimension("operator size does not match sites".into()));
        }
        emb.apply(&mut self.amps, &row_major(m));
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Reduced density matrix over `keep` (in the order given).
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (kept_off, traced_off, sub) = split_offsets(&self.shape, keep)?;
        let d = kept_off.len();
        let mut rho = vec![ZERO; d * d];
        for &t in &traced_off {
            for a in 0..d {
                let pa = self.amps[kept_off[a] + t];
                if pa == ZERO {
                    continue;
                }
                for b in 0..d {
                    rho[a * d + b] += pa * self.amps[kept_off[b] + t].conj();
                }
            }
        }
        Ok(DensityMatrix { shape: sub, data: rho, raw: false })
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.amps.len();
        let mut data = vec![ZERO; d * d];
        for a in 0..d {
            for b in 0..d {
                data[a * d + b] = self.amps[a] * self.amps[b].conj();
            }
        }
        DensityMatrix { shape: self.shape.clone(), data, raw: false }
    }

    /// Reorders site groups: slot `s` of the result holds group `order[s]` of `self`.
    pub fn permute_groups(&self, group: usize, order: &[usize]) -> Result<Self> {
        let n = self.shape.n_sites();
        if group == 0 || order.len() * group != n {
            return Err(Error::Dimension("group permutation does not cover the register".into()));
        }
        let site_map: Vec<usize> = order
            .iter()
            .flat_map(|&g| (0..group).map(move |k| g * group + k))
            .collect();
        let dims: Vec<usize> = site_map.iter().map(|&s| self.shape.dims()[s]).collect();
        let new_shape = RegisterShape::new(dims)?;
        let mut amps = vec![ZERO; self.amps.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            let digits = self.shape.digits(idx);
            let new_digits: Vec<usize> = site_map.iter().map(|&s| digits[s]).collect();
            amps[new_shape.index(&new_digits)?] = *a;
        }
        Ok(Self { shape: new_shape, amps })
    }
}

fn split_offsets(shape: &RegisterShape, keep: &[usize]) -> Result<(Vec<usize>, Vec<usize>, RegisterShape)> {
    if keep.is_empty() {
        return Err(Error::Dimension("empty keep set".into()));
    }
    let kept = shape.embedding(keep)?;
    let sub = shape.sub_shape(keep)?;
    Ok((kept.offsets, kept.bases, sub))
}

/// Dense density matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    shape: RegisterShape,
    data: Vec<C64>,
    raw: bool,
}

impl DensityMatrix {
    pub const DIM_CAP: usize = 4096;

    pub fn from_matrix(shape: RegisterShape, m: &CMat) -> Result<Self> {
        let d = shape.total_dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Dimension(format!("{}x{} matrix for dimension {d}", m.nrows(), m.ncols())));
        }
        Ok(Self { shape, data: row_major(m), raw: false })
    }

    /// Marks an unprojected tomography estimate, which may have negative eigenvalues.
    pub fn flagged_raw(mut self) -> Self {
        self.raw = true;
        self
    }

    pub fn is_raw(&self) -> bool {
        self.raw
    }

    pub fn maximally_mixed(shape: RegisterShape) -> Self {
        let d = shape.total_dim();
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            data[i * d + i] = C64::new(1.0 / d as f64, 0.0);
        }
        Self { shape, data, raw: false }
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.total_dim()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim() + c]
    }

    pub fn to_matrix(&self) -> CMat {
        let d = self.dim();
        CMat::from_fn(d, d, |r, c| self.data[r * d + c])
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i].re).collect()
    }

    fn doubled(&self) -> Result<RegisterShape> {
        let mut dims = self.shape.dims().to_vec();
        dims.extend_from_slice(self.shape.dims());
        RegisterShape::new(dims)
    }

    fn check_cap(&self) -> Result<()> {
        if self.dim() > Self::DIM_CAP {
            return Err(Error::DensityCap { dim: self.dim(), cap: Self::DIM_CAP });
        }
        Ok(())
    }

    /// `rho <- K rho K^†` with `K` acting on `sites`.
    pub fn conjugate_by(&mut self, k: &CMat, sites: &[usize]) -> Result<()> {
        self.check_cap()?;
        let doubled = self.doubled()?;
        let n = self.shape.n_sites();
        let rows = doubled.embedding(sites)?;
        if rows.local_dim() != k.nrows() {
            return Err(Error::Dimension("operator size does not match sites".into()));
        }
        let col_sites: Vec<usize> = sites.iter().map(|s| s + n).collect();
        let cols = doubled.embedding(&col_sites)?;
        rows.apply(&mut self.data, &row_major(k));
        cols.apply(&mut self.data, &row_major(&k.conjugate()));
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.check_against(&self.shape)?;
        self.conjugate_by(&gate.matrix, &gate.sites)
    }

    /// `rho <- sum_k K_k rho K_k^†`
    pub fn apply_kraus(&mut self, kraus: &[CMat], sites: &[usize]) -> Result<()> {
        let mut acc = vec![ZERO; self.data.len()];
        for k in kraus {
            let mut term = self.clone();
            term.conjugate_by(k, sites)?;
            for (a, t) in acc.iter_mut().zip(&term.data) {
                *a += t;
            }
        }
        self.data = acc;
        Ok(())
    }

    /// `rho <- (1 - p) rho + p Tr(rho) I / D`
    pub fn depolarize(&mut self, p: f64) {
        let d = self.dim();
        let tr = self.trace();
        for x in self.data.iter_mut() {
            *x *= 1.0 - p;
        }
        for i in 0..d {
            self.data[i * d + i] += tr * (p / d as f64);
        }
    }

    /// Uniform non-identity Weyl channel of total probability `p` on `sites`,
    /// via `Σ_P P ρ P^† = D (I ⊗ Tr_S ρ)` over the full Weyl basis.
    pub fn depolarize_sites(&mut self, sites: &[usize], p: f64) -> Result<()> {
        let (offsets, bases, _) = split_offsets(&self.shape, sites)?;
        let ds = offsets.len() as f64;
        let a = 1.0 - p - p / (ds * ds - 1.0);
        let b = p * ds / (ds * ds - 1.0);
        let d = self.dim();
        let traced: Vec<C64> = bases
            .iter()
            .flat_map(|&br| bases.iter().map(move |&bc| (br, bc)))
            .map(|(br, bc)| offsets.iter().map(|&o| self.data[(br + o) * d + bc + o]).sum())
            .collect();
        for x in self.data.iter_mut() {
            *x *= a;
        }
        let m = bases.len();
        for (i, &br) in bases.iter().enumerate() {
            for (j, &bc) in bases.iter().enumerate() {
                let add = traced[i * m + j] * b;
                for &o in &offsets {
                    self.data[(br + o) * d + bc + o] += add;
                }
            }
        }
        Ok(())
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (kept_off, traced_off, sub) = split_offsets(&self.shape, keep)?;
        let d = self.dim();
        let k = kept_off.len();
        let mut out = vec![ZERO; k * k];
        for a in 0..k {
            for b in 0..k {
                let mut acc = ZERO;
                for &t in &traced_off {
                    acc += self.data[(kept_off[a] + t) * d + kept_off[b] + t];
                }
                out[a * k + b] = acc;
            }
        }
        Ok(DensityMatrix { shape: sub, data: out, raw: self.raw })
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                worst = worst.max((self.data[r * d + c] - self.data[c * d + r].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        crate::linalg::eigh(&self.to_matrix()).0
    }
}
