//! Finite-volume Hamiltonians, exact Heisenberg and interaction-picture
//! dynamics, and measured commutator norms.
//!
//! Exact unitaries come from one Hermitian eigendecomposition per system.
//! The Hamiltonian is first split into the connected components of its
//! nonzero pattern, which are diagonalised independently; this is exact and
//! keeps larger truncated-oscillator volumes within reach.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LrError, Result};
use crate::geometry::SiteSet;
use crate::interactions::Interaction;
use crate::linalg::{self, c64, CMat};
use crate::observables::{LocalOperator, SiteSpace};
use crate::propagator::{unitary_propagator, GeneratorFamily, Propagator};

/// Default cap on the Hilbert-space dimension of a volume.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Dimension cap, overridable through `LRLAB_MAX_DIM`.
pub fn max_dimension() -> usize {
    std::env::var("LRLAB_MAX_DIM").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MAX_DIM)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }

    /// Groups ordered by their smallest member.
    fn groups(mut self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = self.find(i);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(i);
        }
        out
    }
}

#[derive(Clone, Debug)]
struct Block {
    indices: Vec<usize>,
    values: Vec<f64>,
    vectors: CMat,
}

/// Eigendecomposition of a self-adjoint matrix, organised by the connected
/// components of its sparsity pattern.
#[derive(Clone, Debug)]
pub struct Spectrum {
    dim: usize,
    blocks: Vec<Block>,
}

fn zero() -> c64 {
    c64::new(0.0, 0.0)
}

impl Spectrum {
    pub fn new(h: &CMat) -> Result<Self> {
        let n = h.nrows();
        let mut uf = UnionFind::new(n);
        for j in 0..n {
            for i in 0..j {
                if h[(i, j)] != zero() || h[(j, i)] != zero() {
                    uf.union(i, j);
                }
            }
        }
        let blocks = uf
            .groups()
            .into_iter()
            .map(|indices| {
                let sub = linalg::submatrix(h, &indices, &indices);
                let e = linalg::eigh(&sub)?;
                Ok(Block { indices, values: e.values, vectors: e.vectors })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Spectrum { dim: n, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of independent blocks found in the Hamiltonian.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.blocks.iter().flat_map(|b| b.values.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `V_i† M[I_i, I_j] V_j` for the given list of blocks.
    fn to_eigen(&self, m: &CMat, group: &[usize]) -> CMat {
        let offsets = self.offsets(group);
        let size = *offsets.last().unwrap();
        let mut out = CMat::zeros(size, size);
        for (gi, &bi) in group.iter().enumerate() {
            for (gj, &bj) in group.iter().enumerate() {
                let (a, b) = (&self.blocks[bi], &self.blocks[bj]);
                let sub = linalg::submatrix(m, &a.indices, &b.indices);
                if linalg::max_abs(&sub) == 0.0 {
                    continue;
                }
                let r = a.vectors.adjoint() * &sub * &b.vectors;
                out.submatrix_mut(offsets[gi], offsets[gj], r.nrows(), r.ncols()).copy_from(&r);
            }
        }
        out
    }

    /// Inverse of [`Spectrum::to_eigen`] over all blocks, scattered back into
    /// the original basis.
    fn to_site_basis(&self, m: &CMat) -> CMat {
        let all: Vec<usize> = (0..self.blocks.len()).collect();
        let offsets = self.offsets(&all);
        let mut out = CMat::zeros(self.dim, self.dim);
        for (bi, a) in self.blocks.iter().enumerate() {
            for (bj, b) in self.blocks.iter().enumerate() {
                let sub = m.submatrix(offsets[bi], offsets[bj], a.indices.len(), b.indices.len()).to_owned();
                if linalg::max_abs(&sub) == 0.0 {
                    continue;
                }
                let r = &a.vectors * &sub * b.vectors.adjoint();
                for (ii, &gi) in a.indices.iter().enumerate() {
                    for (jj, &gj) in b.indices.iter().enumerate() {
                        out[(gi, gj)] = r[(ii, jj)];
                    }
                }
            }
        }
        out
    }

    fn offsets(&self, group: &[usize]) -> Vec<usize> {
        let mut o = Vec::with_capacity(group.len() + 1);
        o.push(0);
        for &b in group {
            o.push(o.last().unwrap() + self.blocks[b].indices.len());
        }
        o
    }

    fn group_values(&self, group: &[usize]) -> Vec<f64> {
        group.iter().flat_map(|&b| self.blocks[b].values.iter().copied()).collect()
    }

    /// Blocks grouped so that every matrix in `mats` is block diagonal with
    /// respect to the groups.
    fn coarse_groups(&self, mats: &[&CMat]) -> Vec<Vec<usize>> {
        let nb = self.blocks.len();
        let mut owner = vec![0usize; self.dim];
        for (b, blk) in self.blocks.iter().enumerate() {
            for &i in &blk.indices {
                owner[i] = b;
            }
        }
        let mut uf = UnionFind::new(nb);
        for m in mats {
            for j in 0..self.dim {
                for i in 0..self.dim {
                    if m[(i, j)] != zero() {
                        uf.union(owner[i], owner[j]);
                    }
                }
            }
        }
        uf.groups()
    }

    /// `e^{itH} M e^{-itH}`.
    pub fn evolve(&self, m: &CMat, t: f64) -> CMat {
        if t == 0.0 {
            return m.clone();
        }
        let all: Vec<usize> = (0..self.blocks.len()).collect();
        let hat = self.to_eigen(m, &all);
        let vals = self.group_values(&all);
        let rotated = apply_phases(&hat, &vals, t);
        self.to_site_basis(&rotated)
    }

    /// `e^{-itH}`.
    pub fn propagator(&self, t: f64) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for b in &self.blocks {
            let e = linalg::Eigh { values: b.values.clone(), vectors: b.vectors.clone() };
            let u = e.propagator(t);
            for (ii, &gi) in b.indices.iter().enumerate() {
                for (jj, &gj) in b.indices.iter().enumerate() {
                    out[(gi, gj)] = u[(ii, jj)];
                }
            }
        }
        out
    }
}

/// `M_kl ↦ e^{it(λ_k - λ_l)} M_kl`.
fn apply_phases(m: &CMat, vals: &[f64], t: f64) -> CMat {
    let ph: Vec<c64> = vals.iter().map(|&l| c64::cis(l * t)).collect();
    CMat::from_fn(m.nrows(), m.ncols(), |k, l| m[(k, l)] * ph[k] * ph[l].conj())
}

/// Time grid with one measured value per point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Profile {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `sup_t |self(t) - other(t)|` on a shared grid.
    pub fn sup_distance(&self, other: &Profile) -> Result<f64> {
        if self.times != other.times {
            return Err(LrError::GridMismatch("profiles use different time grids".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

/// `n` uniform points on `[-horizon, horizon]`.
pub fn symmetric_grid(horizon: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|k| -horizon + 2.0 * horizon * k as f64 / (points - 1) as f64).collect(),
    }
}

/// Hamiltonian `H_Λ` of a finite volume with its strictly local part.
#[derive(Debug)]
pub struct VolumeSystem {
    volume: SiteSet,
    space: SiteSpace,
    interaction: Interaction,
    hamiltonian: CMat,
    local_part: CMat,
    spectrum: OnceLock<Spectrum>,
}

impl VolumeSystem {
    /// `H_Λ = Σ_x H_x + Σ_{Z ⊆ Λ} Φ(Z)`; every term of `interaction` must lie in `Λ`.
    pub fn assemble(volume: &SiteSet, space: &SiteSpace, interaction: &Interaction) -> Result<Self> {
        if volume.is_empty() {
            return Err(LrError::InvalidArgument("volume is empty".into()));
        }
        if volume.max().unwrap() >= space.len() {
            return Err(LrError::SupportViolation {
                support: volume.to_string(),
                volume: SiteSet::range(0, space.len()).to_string(),
            });
        }
        for t in interaction.terms() {
            if !t.support().is_subset(volume) {
                return Err(LrError::SupportViolation { support: t.support().to_string(), volume: volume.to_string() });
            }
        }
        let cap = max_dimension();
        let dim = space.dim_of(volume).unwrap_or(usize::MAX);
        if dim > cap {
            return Err(LrError::DimensionCap { dim, cap });
        }
        let mut local_part = linalg::zeros(dim);
        for x in volume.iter() {
            let hx = LocalOperator::on_site(x, space.model(x).hamiltonian().clone(), space)?;
            local_part += hx.embed(volume, space)?.matrix();
        }
        let hamiltonian = &local_part + interaction.total(volume, space)?;
        Ok(VolumeSystem {
            volume: volume.clone(),
            space: space.clone(),
            interaction: interaction.clone(),
            hamiltonian,
            local_part,
            spectrum: OnceLock::new(),
        })
    }

    /// Restricts `interaction` to terms inside `volume`, then assembles.
    pub fn restricted(volume: &SiteSet, space: &SiteSpace, interaction: &Interaction) -> Result<Self> {
        Self::assemble(volume, space, &interaction.restrict(volume))
    }

    pub fn volume(&self) -> &SiteSet {
        &self.volume
    }

    pub fn space(&self) -> &SiteSpace {
        &self.space
    }

    pub fn interaction(&self) -> &Interaction {
        &self.interaction
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMat {
        &self.hamiltonian
    }

    pub fn local_part(&self) -> &CMat {
        &self.local_part
    }

    /// Cached eigendecomposition of `H_Λ`.
    pub fn spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = Spectrum::new(&self.hamiltonian)?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    pub fn embed(&self, a: &LocalOperator) -> Result<LocalOperator> {
        a.embed(&self.volume, &self.space)
    }

    /// `τ_t(A) = e^{itH} A e^{-itH}`.
    pub fn heisenberg_evolve(&self, a: &LocalOperator, t: f64) -> Result<LocalOperator> {
        let ea = self.embed(a)?;
        if t == 0.0 {
            return Ok(ea);
        }
        let m = self.spectrum()?.evolve(ea.matrix(), t);
        Ok(LocalOperator::from_parts(self.volume.clone(), m))
    }

    /// `‖[τ_t(A), B]‖` on every grid point from one eigendecomposition.
    pub fn commutator_norm_profile(&self, a: &LocalOperator, b: &LocalOperator, grid: &[f64]) -> Result<Profile> {
        let ea = self.embed(a)?.into_matrix();
        let eb = self.embed(b)?.into_matrix();
        let spec = self.spectrum()?;
        let groups = spec.coarse_groups(&[&ea, &eb]);
        let parts: Vec<(CMat, CMat, Vec<f64>)> = groups
            .iter()
            .map(|g| (spec.to_eigen(&ea, g), spec.to_eigen(&eb, g), spec.group_values(g)))
            .filter(|(ah, bh, _)| linalg::max_abs(ah) > 0.0 && linalg::max_abs(bh) > 0.0)
            .collect();
        let values = grid
            .par_iter()
            .map(|&t| {
                if t == 0.0 {
                    // exact in the site basis: disjoint supports give an exact zero
                    return linalg::spectral_norm(&linalg::commutator(&ea, &eb));
                }
                let mut best = 0.0f64;
                for (ah, bh, vals) in &parts {
                    let at = apply_phases(ah, vals, t);
                    best = best.max(linalg::spectral_norm(&linalg::commutator(&at, bh))?);
                }
                Ok(best)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Profile { times: grid.to_vec(), values })
    }

    /// Interaction picture with respect to `x ⊆ Λ`.
    pub fn interaction_picture(&self, x: &SiteSet) -> Result<InteractionPicture<'_>> {
        InteractionPicture::new(self, x)
    }
}

/// `‖τ_t^{Λn}(A) - τ_t^{Λm}(A)‖` with the smaller-volume result embedded in `Λn`.
pub fn volume_difference_profile(small: &VolumeSystem, large: &VolumeSystem, a: &LocalOperator, grid: &[f64]) -> Result<Profile> {
    if !small.volume().is_subset(large.volume()) {
        return Err(LrError::SupportViolation { support: small.volume().to_string(), volume: large.volume().to_string() });
    }
    for x in small.volume().iter() {
        if small.space().local_dim(x) != large.space().local_dim(x) {
            return Err(LrError::InvalidArgument(format!("site {x} has different local dimensions in the two systems")));
        }
    }
    let ea_small = small.embed(a)?;
    small.spectrum()?;
    large.spectrum()?;
    let values = grid
        .par_iter()
        .map(|&t| {
            let big = large.heisenberg_evolve(a, t)?;
            let sm = LocalOperator::from_parts(small.volume().clone(), small.spectrum()?.evolve(ea_small.matrix(), t));
            let sm = sm.embed(large.volume(), large.space())?;
            linalg::spectral_norm(&(big.matrix() - sm.matrix()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Profile { times: grid.to_vec(), values })
}

/// Interaction-picture dynamics with `H₀ = Σ_{x∈Λ} H_x + Σ_{Z⊆X} Φ(Z)`.
pub struct InteractionPicture<'a> {
    system: &'a VolumeSystem,
    x: SiteSet,
    h0: CMat,
    h0_spectrum: Spectrum,
    surface_terms: Vec<CMat>,
}

impl<'a> InteractionPicture<'a> {
    pub fn new(system: &'a VolumeSystem, x: &SiteSet) -> Result<Self> {
        let vol = system.volume();
        if !x.is_subset(vol) {
            return Err(LrError::SupportViolation { support: x.to_string(), volume: vol.to_string() });
        }
        let space = system.space();
        let h0 = if x.is_empty() {
            system.local_part().clone()
        } else {
            let inner = system.interaction().restrict(x);
            let mut h = system.local_part().clone();
            for t in inner.terms() {
                h += t.op().embed(vol, space)?.matrix();
            }
            h
        };
        let surface_terms = system
            .interaction()
            .surface_sets(vol, x)?
            .iter()
            .map(|z| Ok(system.interaction().get(z).unwrap().op().embed(vol, space)?.into_matrix()))
            .collect::<Result<Vec<_>>>()?;
        let h0_spectrum = Spectrum::new(&h0)?;
        Ok(InteractionPicture { system, x: x.clone(), h0, h0_spectrum, surface_terms })
    }

    pub fn region(&self) -> &SiteSet {
        &self.x
    }

    pub fn h0(&self) -> &CMat {
        &self.h0
    }

    /// `τ_t^{(0)}(A) = e^{itH₀} A e^{-itH₀}`.
    pub fn free_evolve(&self, a: &LocalOperator, t: f64) -> Result<LocalOperator> {
        let ea = self.system.embed(a)?;
        Ok(LocalOperator::from_parts(self.system.volume().clone(), self.h0_spectrum.evolve(ea.matrix(), t)))
    }

    /// `τ_t^int(A) = e^{itH} e^{-itH₀} A e^{itH₀} e^{-itH}` by exact diagonalisation.
    pub fn evolve(&self, a: &LocalOperator, t: f64) -> Result<LocalOperator> {
        let back = self.free_evolve(a, -t)?;
        self.system.heisenberg_evolve(&back, t)
    }

    /// `H_int(t) = e^{itH₀} (H - H₀) e^{-itH₀}`.
    pub fn interaction_hamiltonian(&self, t: f64) -> CMat {
        self.h0_spectrum.evolve(&(self.system.hamiltonian() - &self.h0), t)
    }

    /// Same conjugation applied to the surface terms `Z ∈ S_Λ(X)` only.
    pub fn surface_hamiltonian(&self, t: f64) -> CMat {
        let mut h = linalg::zeros(self.system.dim());
        for z in &self.surface_terms {
            h += z;
        }
        self.h0_spectrum.evolve(&h, t)
    }

    /// Family `t ↦ H_int(t)` on `window`, with `M = ‖H - H₀‖` (conjugation invariant).
    pub fn generator_family(&self, window: (f64, f64)) -> Result<GeneratorFamily> {
        let spec = self.h0_spectrum.clone();
        let diff = self.system.hamiltonian() - &self.h0;
        let exact = linalg::spectral_norm(&diff)?;
        let fam = GeneratorFamily::hamiltonian(diff.nrows(), window, move |t| linalg::hermitian_part(&spec.evolve(&diff, t)))?;
        fam.with_local_bound(exact)
    }

    /// `W(t, s)` from the Dyson series of `H_int`.
    pub fn w_propagator(&self, t: f64, s: f64, tol: f64) -> Result<Propagator> {
        let fam = self.generator_family((t.min(s), t.max(s)))?;
        unitary_propagator(&fam, s, t, tol)
    }

    /// `W(0,t) A W(t,0)` with both propagators from the Dyson route.
    pub fn evolve_dyson(&self, a: &LocalOperator, t: f64, tol: f64) -> Result<LocalOperator> {
        let ea = self.system.embed(a)?;
        if t == 0.0 {
            return Ok(ea);
        }
        let forward = self.w_propagator(t, 0.0, tol)?;
        let backward = self.w_propagator(0.0, t, tol)?;
        let m = &backward.value * ea.matrix() * &forward.value;
        Ok(LocalOperator::from_parts(self.system.volume().clone(), m))
    }
}
