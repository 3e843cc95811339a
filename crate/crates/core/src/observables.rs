//! Site Hilbert spaces, local operators and their tensor-product embeddings.

use serde::Serialize;

use crate::error::{LrError, Result};
use crate::geometry::{SiteId, SiteSet};
use crate::linalg::{self, c64, CMat};

/// Tolerance for the self-adjointness of user matrices (max-entry norm).
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SiteKind {
    /// `H = hx σx + hy σy + hz σz` with `σ = 2S` in the spin-`(d-1)/2` representation.
    Spin { field: [f64; 3] },
    /// `a†a + 1/2 + λ x⁴` on the first `n_levels` Fock states.
    TruncatedOscillator { n_levels: usize, lambda: f64 },
    Explicit,
}

/// On-site Hilbert space and Hamiltonian `H_x`.
#[derive(Clone, Debug)]
pub struct SiteModel {
    kind: SiteKind,
    onsite: CMat,
}

impl SiteModel {
    pub fn spin(local_dim: usize, field: [f64; 3]) -> Result<Self> {
        if local_dim < 2 {
            return Err(LrError::InvalidArgument(format!("local_dim = {local_dim} must be at least 2")));
        }
        if field.iter().any(|v| !v.is_finite()) {
            return Err(LrError::NonFinite);
        }
        let [sx, sy, sz] = spin_matrices(local_dim);
        let mut h = linalg::zeros(local_dim);
        linalg::axpy(&mut h, c64::new(2.0 * field[0], 0.0), &sx);
        linalg::axpy(&mut h, c64::new(2.0 * field[1], 0.0), &sy);
        linalg::axpy(&mut h, c64::new(2.0 * field[2], 0.0), &sz);
        Ok(SiteModel { kind: SiteKind::Spin { field }, onsite: h })
    }

    /// Arbitrary self-adjoint on-site Hamiltonian.
    pub fn explicit(onsite: CMat) -> Result<Self> {
        let n = onsite.nrows();
        if n < 2 || onsite.ncols() != n {
            return Err(LrError::InvalidArgument(format!(
                "on-site matrix must be square of size >= 2, got {}x{}",
                onsite.nrows(),
                onsite.ncols()
            )));
        }
        if !linalg::is_finite(&onsite) {
            return Err(LrError::NonFinite);
        }
        let defect = linalg::hermiticity_defect(&onsite);
        if defect > HERMITIAN_TOL {
            return Err(LrError::NotSelfAdjoint(defect));
        }
        Ok(SiteModel { kind: SiteKind::Explicit, onsite })
    }

    pub fn kind(&self) -> &SiteKind {
        &self.kind
    }

    pub fn local_dim(&self) -> usize {
        self.onsite.nrows()
    }

    pub fn hamiltonian(&self) -> &CMat {
        &self.onsite
    }
}

/// n-level truncation of `a†a + 1/2 + λ x⁴`, with `x = (a + a†)/√2` built
/// from truncated ladder operators.
pub fn truncate_oscillator(n_levels: usize, lambda: f64) -> Result<SiteModel> {
    if n_levels < 2 {
        return Err(LrError::InvalidArgument(format!("n_levels = {n_levels} must be at least 2")));
    }
    if !lambda.is_finite() {
        return Err(LrError::NonFinite);
    }
    let x = position(n_levels);
    let x2 = &x * &x;
    let x4 = &x2 * &x2;
    let mut h = linalg::from_diag(&(0..n_levels).map(|k| k as f64 + 0.5).collect::<Vec<_>>());
    linalg::axpy(&mut h, c64::new(lambda, 0.0), &x4);
    let defect = linalg::hermiticity_defect(&h);
    if defect > 1e-10 {
        log::warn!("truncated oscillator needed a symmetrization correction of {defect:.3e}");
    }
    let h = linalg::hermitian_part(&h);
    Ok(SiteModel { kind: SiteKind::TruncatedOscillator { n_levels, lambda }, onsite: h })
}

/// Site models for every lattice site, indexed by [`SiteId`].
#[derive(Clone, Debug)]
pub struct SiteSpace {
    models: Vec<SiteModel>,
}

impl SiteSpace {
    pub fn new(models: Vec<SiteModel>) -> Self {
        SiteSpace { models }
    }

    pub fn uniform(model: SiteModel, n_sites: usize) -> Self {
        SiteSpace { models: vec![model; n_sites] }
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn model(&self, x: SiteId) -> &SiteModel {
        &self.models[x]
    }

    pub fn models(&self) -> &[SiteModel] {
        &self.models
    }

    pub fn local_dim(&self, x: SiteId) -> usize {
        self.models[x].local_dim()
    }

    /// Product of local dimensions, or `None` on overflow.
    pub fn dim_of(&self, sites: &SiteSet) -> Option<usize> {
        sites.iter().try_fold(1usize, |acc, x| acc.checked_mul(self.local_dim(x)))
    }

    /// Copy of this space with the on-site model at every site replaced.
    pub fn with_models(&self, f: impl Fn(SiteId, &SiteModel) -> SiteModel) -> Self {
        SiteSpace { models: self.models.iter().enumerate().map(|(x, m)| f(x, m)).collect() }
    }

    fn check_sites(&self, sites: &SiteSet) -> Result<()> {
        match sites.max() {
            Some(m) if m >= self.len() => Err(LrError::SupportViolation {
                support: sites.to_string(),
                volume: SiteSet::range(0, self.len()).to_string(),
            }),
            _ => Ok(()),
        }
    }
}

/// Matrix acting on the tensor product of the spaces of `support`, in
/// ascending site order (the first site is the most significant factor).
#[derive(Clone, Debug)]
pub struct LocalOperator {
    support: SiteSet,
    matrix: CMat,
}

impl LocalOperator {
    pub fn new(support: SiteSet, matrix: CMat, space: &SiteSpace) -> Result<Self> {
        space.check_sites(&support)?;
        let dim = space.dim_of(&support).ok_or(LrError::DimensionCap { dim: usize::MAX, cap: usize::MAX })?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(LrError::DimensionMismatch { expected: dim, found: matrix.nrows().max(matrix.ncols()) });
        }
        if !linalg::is_finite(&matrix) {
            return Err(LrError::NonFinite);
        }
        Ok(LocalOperator { support, matrix })
    }

    /// Operator given with tensor factors in the order of `sites`, which may
    /// be unsorted; the factors are permuted into ascending site order.
    pub fn from_site_order(sites: &[SiteId], matrix: CMat, space: &SiteSpace) -> Result<Self> {
        let support = SiteSet::new(sites.iter().copied());
        if support.len() != sites.len() {
            return Err(LrError::InvalidArgument(format!("repeated site in {sites:?}")));
        }
        space.check_sites(&support)?;
        let dims: Vec<usize> = sites.iter().map(|&x| space.local_dim(x)).collect();
        let dim: usize = dims.iter().product();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(LrError::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        // perm[i] = index in the given layout of sorted-layout basis state i
        let order: Vec<usize> = support.iter().map(|x| sites.iter().position(|&s| s == x).unwrap()).collect();
        let given_strides = strides(&dims);
        let sorted_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
        let perm: Vec<usize> = (0..dim)
            .map(|i| {
                let digits = decompose(i, &sorted_dims);
                digits.iter().zip(&order).map(|(&d, &k)| d * given_strides[k]).sum()
            })
            .collect();
        let m = CMat::from_fn(dim, dim, |i, j| matrix[(perm[i], perm[j])]);
        LocalOperator::new(support, m, space)
    }

    /// Identity on `support`.
    pub fn identity(support: SiteSet, space: &SiteSpace) -> Result<Self> {
        space.check_sites(&support)?;
        let d = space.dim_of(&support).ok_or(LrError::DimensionCap { dim: usize::MAX, cap: usize::MAX })?;
        Ok(LocalOperator { support, matrix: linalg::identity(d) })
    }

    /// Single-site operator.
    pub fn on_site(x: SiteId, matrix: CMat, space: &SiteSpace) -> Result<Self> {
        Self::new(SiteSet::singleton(x), matrix, space)
    }

    pub fn support(&self) -> &SiteSet {
        &self.support
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `A ⊗ 𝟙` on `volume`.
    pub fn embed(&self, volume: &SiteSet, space: &SiteSpace) -> Result<LocalOperator> {
        if !self.support.is_subset(volume) {
            return Err(LrError::SupportViolation { support: self.support.to_string(), volume: volume.to_string() });
        }
        space.check_sites(volume)?;
        if &self.support == volume {
            return Ok(self.clone());
        }
        let matrix = embed_matrix(&self.matrix, &self.support, volume, space);
        Ok(LocalOperator { support: volume.clone(), matrix })
    }

    pub fn adjoint(&self) -> LocalOperator {
        LocalOperator { support: self.support.clone(), matrix: linalg::dagger(&self.matrix) }
    }

    pub fn scaled(&self, k: c64) -> LocalOperator {
        LocalOperator { support: self.support.clone(), matrix: linalg::scale(&self.matrix, k) }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.matrix)
    }

    pub(crate) fn from_parts(support: SiteSet, matrix: CMat) -> LocalOperator {
        LocalOperator { support, matrix }
    }
}

/// Largest singular value of the operator's matrix.
pub fn operator_norm(a: &LocalOperator) -> Result<f64> {
    linalg::spectral_norm(a.matrix())
}

/// `[A, B]` with both operators embedded into `volume`.
pub fn commutator(a: &LocalOperator, b: &LocalOperator, volume: &SiteSet, space: &SiteSpace) -> Result<LocalOperator> {
    let ea = a.embed(volume, space)?;
    let eb = b.embed(volume, space)?;
    Ok(LocalOperator { support: volume.clone(), matrix: linalg::commutator(&ea.matrix, &eb.matrix) })
}

pub fn embed(a: &LocalOperator, volume: &SiteSet, space: &SiteSpace) -> Result<LocalOperator> {
    a.embed(volume, space)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn decompose(mut i: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        digits[k] = i % dims[k];
        i /= dims[k];
    }
    digits
}

/// Index bookkeeping for splitting a volume basis into (support, rest) parts.
pub(crate) struct Split {
    /// support index of each volume basis state
    pub s_of: Vec<usize>,
    /// rest index of each volume basis state
    pub r_of: Vec<usize>,
    /// volume index of `(s, r)`, stored at `s * rest_dim + r`
    pub index: Vec<usize>,
    pub support_dim: usize,
    pub rest_dim: usize,
}

pub(crate) fn split(support: &SiteSet, volume: &SiteSet, space: &SiteSpace) -> Split {
    let dims: Vec<usize> = volume.iter().map(|x| space.local_dim(x)).collect();
    let in_support: Vec<bool> = volume.iter().map(|x| support.contains(x)).collect();
    let sd: Vec<usize> = dims.iter().zip(&in_support).filter(|p| *p.1).map(|p| *p.0).collect();
    let rd: Vec<usize> = dims.iter().zip(&in_support).filter(|p| !*p.1).map(|p| *p.0).collect();
    let (ss, rs) = (strides(&sd), strides(&rd));
    let support_dim: usize = sd.iter().product();
    let rest_dim: usize = rd.iter().product();
    let total = support_dim * rest_dim;
    let mut s_of = vec![0; total];
    let mut r_of = vec![0; total];
    let mut index = vec![0; total];
    let mut digits = vec![0usize; dims.len()];
    for i in 0..total {
        let (mut s, mut r, mut ks, mut kr) = (0, 0, 0, 0);
        for (k, &d) in digits.iter().enumerate() {
            if in_support[k] {
                s += d * ss[ks];
                ks += 1;
            } else {
                r += d * rs[kr];
                kr += 1;
            }
        }
        s_of[i] = s;
        r_of[i] = r;
        index[s * rest_dim + r] = i;
        for k in (0..dims.len()).rev() {
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    Split { s_of, r_of, index, support_dim, rest_dim }
}

fn embed_matrix(a: &CMat, support: &SiteSet, volume: &SiteSet, space: &SiteSpace) -> CMat {
    let sp = split(support, volume, space);
    let total = sp.s_of.len();
    let mut out = CMat::zeros(total, total);
    for j in 0..total {
        let (sj, rj) = (sp.s_of[j], sp.r_of[j]);
        for si in 0..sp.support_dim {
            let v = a[(si, sj)];
            if v != c64::new(0.0, 0.0) {
                out[(sp.index[si * sp.rest_dim + rj], j)] = v;
            }
        }
    }
    out
}

/// `[Sx, Sy, Sz]` for spin `(d-1)/2`, basis ordered by descending `m`.
pub fn spin_matrices(d: usize) -> [CMat; 3] {
    let s = (d as f64 - 1.0) / 2.0;
    let mut sp = linalg::zeros(d);
    for k in 1..d {
        // raises basis state k (m = s - k) to k - 1
        let m = s - k as f64;
        sp[(k - 1, k)] = c64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let sm = linalg::dagger(&sp);
    let sx = linalg::scale_re(&(&sp + &sm), 0.5);
    let sy = linalg::scale(&(&sp - &sm), c64::new(0.0, -0.5));
    let sz = linalg::from_diag(&(0..d).map(|k| s - k as f64).collect::<Vec<_>>());
    [sx, sy, sz]
}

/// Pauli matrix for axis 0, 1, 2 (x, y, z).
pub fn pauli(axis: usize) -> CMat {
    let [sx, sy, sz] = spin_matrices(2);
    let s = match axis {
        0 => sx,
        1 => sy,
        _ => sz,
    };
    linalg::scale_re(&s, 2.0)
}

/// Truncated lowering operator.
pub fn lowering(n: usize) -> CMat {
    let mut a = linalg::zeros(n);
    for k in 1..n {
        a[(k - 1, k)] = c64::new((k as f64).sqrt(), 0.0);
    }
    a
}

/// `(a + a†) / √2` from truncated ladder operators.
pub fn position(n: usize) -> CMat {
    let a = lowering(n);
    linalg::scale_re(&(&a + linalg::dagger(&a)), std::f64::consts::FRAC_1_SQRT_2)
}

pub fn number(n: usize) -> CMat {
    linalg::from_diag(&(0..n).map(|k| k as f64).collect::<Vec<_>>())
}

/// `|0⟩⟨0|`.
pub fn ground_projector(n: usize) -> CMat {
    let mut p = linalg::zeros(n);
    p[(0, 0)] = c64::new(1.0, 0.0);
    p
}

/// `𝟙 - 2|0⟩⟨0|`, a self-adjoint unitary.
pub fn ground_reflection(n: usize) -> CMat {
    let mut r = linalg::identity(n);
    r[(0, 0)] = c64::new(-1.0, 0.0);
    r
}

/// `diag((-1)^k)`.
pub fn parity(n: usize) -> CMat {
    linalg::from_diag(&(0..n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spins(n: usize) -> SiteSpace {
        SiteSpace::uniform(SiteModel::spin(2, [0.0; 3]).unwrap(), n)
    }

    #[test]
    fn harmonic_truncation() {
        let m = truncate_oscillator(2, 0.0).unwrap();
        assert!(linalg::max_abs_diff(m.hamiltonian(), &linalg::from_diag(&[0.5, 1.5])) == 0.0);
        let m = truncate_oscillator(7, 0.0).unwrap();
        let ev = linalg::eigenvalues_hermitian(m.hamiltonian()).unwrap();
        for (k, e) in ev.iter().enumerate() {
            assert!((e - (k as f64 + 0.5)).abs() < 1e-12);
        }
        assert!(truncate_oscillator(1, 0.0).is_err());
    }

    #[test]
    fn embed_first_site_is_most_significant() {
        let sp = spins(2);
        let a = LocalOperator::on_site(0, pauli(0), &sp).unwrap();
        let e = a.embed(&SiteSet::from([0, 1]), &sp).unwrap();
        let expect = linalg::kron(&pauli(0), &linalg::identity(2));
        assert_eq!(linalg::max_abs_diff(e.matrix(), &expect), 0.0);
        let b = LocalOperator::on_site(1, pauli(2), &sp).unwrap();
        let e = b.embed(&SiteSet::from([0, 1]), &sp).unwrap();
        let expect = linalg::kron(&linalg::identity(2), &pauli(2));
        assert_eq!(linalg::max_abs_diff(e.matrix(), &expect), 0.0);
    }

    #[test]
    fn embed_rejects_outside_support() {
        let sp = spins(3);
        let a = LocalOperator::on_site(2, pauli(0), &sp).unwrap();
        assert!(matches!(a.embed(&SiteSet::from([0, 1]), &sp), Err(LrError::SupportViolation { .. })));
    }

    #[test]
    fn reorder_matches_sorted() {
        let sp = SiteSpace::new(vec![
            SiteModel::spin(2, [0.0; 3]).unwrap(),
            truncate_oscillator(3, 0.0).unwrap(),
        ]);
        let a = pauli(0);
        let b = position(3);
        let sorted = LocalOperator::new(SiteSet::from([0, 1]), linalg::kron(&a, &b), &sp).unwrap();
        let swapped = LocalOperator::from_site_order(&[1, 0], linalg::kron(&b, &a), &sp).unwrap();
        assert_eq!(linalg::max_abs_diff(sorted.matrix(), swapped.matrix()), 0.0);
    }

    #[test]
    fn spin_algebra() {
        for d in 2..5 {
            let [sx, sy, sz] = spin_matrices(d);
            let lhs = linalg::commutator(&sx, &sy);
            let rhs = linalg::scale(&sz, c64::new(0.0, 1.0));
            assert!(linalg::max_abs_diff(&lhs, &rhs) < 1e-14);
        }
    }

    #[test]
    fn commutator_of_disjoint_is_zero() {
        let sp = spins(3);
        let a = LocalOperator::on_site(0, pauli(0), &sp).unwrap();
        let b = LocalOperator::on_site(2, pauli(1), &sp).unwrap();
        let c = commutator(&a, &b, &sp_all(3), &sp).unwrap();
        assert_eq!(linalg::max_abs(c.matrix()), 0.0);
    }

    fn sp_all(n: usize) -> SiteSet {
        SiteSet::range(0, n)
    }
}
