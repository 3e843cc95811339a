//! Interactions `Φ`, their `F`-weighted norm, surface sets and boundaries.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{LrError, Result};
use crate::geometry::{DecayFunction, Lattice, SiteId, SiteSet};
use crate::linalg::{self, CMat};
use crate::observables::{operator_norm, LocalOperator, SiteSpace, HERMITIAN_TOL};

/// One stored term `Φ(Z)` with its cached operator norm.
#[derive(Clone, Debug)]
pub struct Term {
    op: LocalOperator,
    norm: f64,
}

impl Term {
    pub fn op(&self) -> &LocalOperator {
        &self.op
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn support(&self) -> &SiteSet {
        self.op.support()
    }
}

/// Finite map `Z ↦ Φ(Z)` of self-adjoint, nonzero terms.
#[derive(Clone, Debug, Default)]
pub struct Interaction {
    terms: BTreeMap<SiteSet, Term>,
}

impl Interaction {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `op` to `Φ(support(op))`. Terms that cancel to zero are removed.
    pub fn insert(&mut self, op: LocalOperator) -> Result<()> {
        if op.support().is_empty() {
            return Err(LrError::InvalidArgument("interaction term with empty support".into()));
        }
        let scale = linalg::max_abs(op.matrix()).max(1.0);
        let defect = op.hermiticity_defect();
        if defect > HERMITIAN_TOL * scale {
            return Err(LrError::NotSelfAdjoint(defect));
        }
        let key = op.support().clone();
        let matrix = match self.terms.remove(&key) {
            Some(old) => old.op.matrix() + op.matrix(),
            None => op.matrix().clone(),
        };
        let matrix = linalg::hermitian_part(&matrix);
        if linalg::max_abs(&matrix) == 0.0 {
            return Ok(());
        }
        let op = LocalOperator::from_parts(key.clone(), matrix);
        let norm = operator_norm(&op)?;
        self.terms.insert(key, Term { op, norm });
        Ok(())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = LocalOperator>) -> Result<Self> {
        let mut phi = Interaction::new();
        for t in terms {
            phi.insert(t)?;
        }
        Ok(phi)
    }

    /// One copy of `bond(x, y)` on every pair at the smallest positive lattice
    /// distance; the matrix acts on `x ⊗ y` with `x < y`.
    pub fn nearest_neighbor_with(
        lattice: &Lattice,
        space: &SiteSpace,
        mut bond: impl FnMut(SiteId, SiteId) -> CMat,
    ) -> Result<Self> {
        let mut phi = Interaction::new();
        let Some(dmin) = lattice.min_positive_distance() else {
            return Ok(phi);
        };
        for x in 0..lattice.len() {
            for y in x + 1..lattice.len() {
                if lattice.distance(x, y) <= dmin * (1.0 + 1e-12) {
                    phi.insert(LocalOperator::new(SiteSet::from([x, y]), bond(x, y), space)?)?;
                }
            }
        }
        Ok(phi)
    }

    pub fn nearest_neighbor(lattice: &Lattice, space: &SiteSpace, bond: &CMat) -> Result<Self> {
        Self::nearest_neighbor_with(lattice, space, |_, _| bond.clone())
    }

    /// For each `(k, M)`: `M` on every `k`-site subset of diameter at most `r`.
    pub fn range_r(lattice: &Lattice, space: &SiteSpace, r: f64, matrices: &[(usize, CMat)]) -> Result<Self> {
        let mut phi = Interaction::new();
        for (k, m) in matrices {
            if *k == 0 {
                return Err(LrError::InvalidArgument("range_r term size must be positive".into()));
            }
            let mut current = Vec::with_capacity(*k);
            let mut found = Vec::new();
            subsets_within(lattice, r, *k, 0, &mut current, &mut found);
            for z in found {
                phi.insert(LocalOperator::new(SiteSet::new(z), m.clone(), space)?)?;
            }
        }
        Ok(phi)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, z: &SiteSet) -> Option<&Term> {
        self.terms.get(z)
    }

    /// Terms in ascending order of their support.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.terms.values()
    }

    /// Keeps only terms with `Z ⊆ volume`.
    pub fn restrict(&self, volume: &SiteSet) -> Interaction {
        Interaction {
            terms: self.terms.iter().filter(|(z, _)| z.is_subset(volume)).map(|(z, t)| (z.clone(), t.clone())).collect(),
        }
    }

    /// Multiplies every term by a real factor.
    pub fn scaled(&self, k: f64) -> Result<Interaction> {
        Interaction::from_terms(self.terms().map(|t| t.op.scaled(linalg::c64::new(k, 0.0))))
    }

    /// Sum of the embedded terms contained in `volume`.
    pub fn total(&self, volume: &SiteSet, space: &SiteSpace) -> Result<CMat> {
        let dim = space.dim_of(volume).unwrap_or(usize::MAX);
        let mut h = linalg::zeros(dim);
        for t in self.terms().filter(|t| t.support().is_subset(volume)) {
            h += t.op.embed(volume, space)?.matrix();
        }
        Ok(h)
    }

    /// `max_{x,y} Σ_{Z ∋ x,y} ‖Φ(Z)‖ / F(d(x,y))`, pairs with `x = y` included.
    pub fn interaction_norm(&self, lattice: &Lattice, f: &DecayFunction) -> f64 {
        let n = lattice.len();
        let mut acc = vec![0.0f64; n * n];
        for t in self.terms() {
            for x in t.support().iter() {
                for y in t.support().iter() {
                    acc[x * n + y] += t.norm;
                }
            }
        }
        let mut best = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                if acc[x * n + y] > 0.0 {
                    best = best.max(acc[x * n + y] / f.evaluate(lattice.distance(x, y)));
                }
            }
        }
        best
    }

    /// `S_Λ(X)`: supports `Z ⊆ Λ` meeting both `X` and `Λ ∖ X`, sorted.
    pub fn surface_sets(&self, volume: &SiteSet, x: &SiteSet) -> Result<Vec<SiteSet>> {
        check_subset(x, volume)?;
        Ok(self.surface_unchecked(volume, x).map(|t| t.support().clone()).collect())
    }

    pub(crate) fn surface_unchecked<'a>(&'a self, volume: &'a SiteSet, x: &'a SiteSet) -> impl Iterator<Item = &'a Term> {
        self.terms
            .iter()
            .filter(move |(z, _)| z.is_subset(volume) && z.intersects(x) && !z.is_subset(x))
            .map(|(_, t)| t)
    }

    /// `∂_Φ X`: sites of `X` touched by a term of `S_Λ(X)`.
    pub fn phi_boundary(&self, volume: &SiteSet, x: &SiteSet) -> Result<SiteSet> {
        check_subset(x, volume)?;
        Ok(SiteSet::new(self.surface_unchecked(volume, x).flat_map(|t| t.support().intersection(x).as_slice().to_vec())))
    }

    /// `D(X, Y)` with boundaries taken in the full lattice.
    pub fn distance_factor(&self, lattice: &Lattice, f: &DecayFunction, x: &SiteSet, y: &SiteSet) -> Result<DistanceFactor> {
        if x.is_empty() || y.is_empty() {
            return Err(LrError::InvalidArgument("distance factor needs nonempty X and Y".into()));
        }
        let all = lattice.sites();
        let bx = self.phi_boundary(&all, x)?;
        let by = self.phi_boundary(&all, y)?;
        let via_y_boundary = crate::geometry::pair_sum(lattice, f, x, &by);
        let via_x_boundary = crate::geometry::pair_sum(lattice, f, &bx, y);
        Ok(DistanceFactor {
            value: via_y_boundary.min(via_x_boundary),
            via_x_boundary,
            via_y_boundary,
            boundary_x: bx,
            boundary_y: by,
        })
    }
}

/// `D(X,Y)` together with both minimands and the boundaries used.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceFactor {
    pub value: f64,
    /// `Σ_{x ∈ ∂X} Σ_{y ∈ Y} F(d(x,y))`
    pub via_x_boundary: f64,
    /// `Σ_{x ∈ X} Σ_{y ∈ ∂Y} F(d(x,y))`
    pub via_y_boundary: f64,
    pub boundary_x: SiteSet,
    pub boundary_y: SiteSet,
}

/// `δ_Y(X)`.
pub fn supports_overlap(x: &SiteSet, y: &SiteSet) -> u8 {
    u8::from(x.intersects(y))
}

fn check_subset(x: &SiteSet, volume: &SiteSet) -> Result<()> {
    if x.is_subset(volume) {
        Ok(())
    } else {
        Err(LrError::SupportViolation { support: x.to_string(), volume: volume.to_string() })
    }
}

fn subsets_within(lattice: &Lattice, r: f64, k: usize, start: SiteId, current: &mut Vec<SiteId>, out: &mut Vec<Vec<SiteId>>) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for s in start..lattice.len() {
        if current.iter().all(|&c| lattice.distance(c, s) <= r) {
            current.push(s);
            subsets_within(lattice, r, k, s + 1, current, out);
            current.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{pauli, SiteModel};

    fn chain(n: usize) -> (Lattice, SiteSpace) {
        (Lattice::chain(n).unwrap(), SiteSpace::uniform(SiteModel::spin(2, [0.0; 3]).unwrap(), n))
    }

    fn zz() -> CMat {
        linalg::kron(&pauli(2), &pauli(2))
    }

    #[test]
    fn surface_and_boundary_on_chain() {
        let (lat, sp) = chain(6);
        let phi = Interaction::nearest_neighbor(&lat, &sp, &zz()).unwrap();
        let all = lat.sites();
        assert_eq!(phi.surface_sets(&SiteSet::range(0, 4), &SiteSet::from([0, 1])).unwrap(), vec![SiteSet::from([1, 2])]);
        assert_eq!(phi.phi_boundary(&all, &SiteSet::from([0, 1, 2])).unwrap(), SiteSet::from([2]));
        assert!(phi.surface_sets(&all, &all).unwrap().is_empty());
        assert!(phi.surface_sets(&all, &SiteSet::empty()).unwrap().is_empty());
        assert!(phi.surface_sets(&SiteSet::range(0, 2), &SiteSet::from([4])).is_err());
    }

    #[test]
    fn cancelling_terms_are_dropped() {
        let (_, sp) = chain(2);
        let z = SiteSet::from([0, 1]);
        let mut phi = Interaction::new();
        phi.insert(LocalOperator::new(z.clone(), zz(), &sp).unwrap()).unwrap();
        phi.insert(LocalOperator::new(z, linalg::scale_re(&zz(), -1.0), &sp).unwrap()).unwrap();
        assert!(phi.is_empty());
    }

    #[test]
    fn rejects_non_hermitian_terms() {
        let (_, sp) = chain(2);
        let m = linalg::kron(&pauli(0), &pauli(0)) + linalg::scale(&linalg::identity(4), linalg::c64::new(0.0, 1.0));
        let op = LocalOperator::new(SiteSet::from([0, 1]), m, &sp).unwrap();
        assert!(matches!(Interaction::new().insert(op), Err(LrError::NotSelfAdjoint(_))));
    }

    #[test]
    fn range_r_counts_subsets() {
        let (lat, sp) = chain(5);
        let phi = Interaction::range_r(&lat, &sp, 2.0, &[(2, zz())]).unwrap();
        // pairs at distance 1 or 2
        assert_eq!(phi.len(), 4 + 3);
    }

    #[test]
    fn overlap_indicator() {
        assert_eq!(supports_overlap(&SiteSet::from([0]), &SiteSet::from([0])), 1);
        assert_eq!(supports_overlap(&SiteSet::from([0]), &SiteSet::from([1])), 0);
        assert_eq!(supports_overlap(&SiteSet::empty(), &SiteSet::from([1])), 0);
    }
}
