//! Analytic right-hand sides: the Lieb-Robinson bound, its exponential form,
//! the `a_n` chain sums, the series bound and the finite-volume convergence
//! bound, plus pointwise certification against measured profiles.

use std::collections::HashMap;

use serde::Serialize;

use crate::dynamics::Profile;
use crate::error::{LrError, Result};
use crate::geometry::{pair_sum, DecayConstants, DecayFunction, Lattice, SiteSet};
use crate::interactions::{supports_overlap, DistanceFactor, Interaction};
use crate::propagator::exp_tail;

/// A measured value may exceed its bound by at most this much.
pub const CERTIFY_TOL: f64 = 1e-9;
/// Largest volume accepted by [`a_n_exact`].
pub const ENUMERATION_MAX_SITES: usize = 8;

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(LrError::InvalidArgument(format!("{name} = {v} must be finite and nonnegative")));
    }
    Ok(())
}

/// `(2‖A‖‖B‖/C)(e^{2‖Φ‖C|t|} - 1) D`. With overlapping supports the trivial
/// bound `2‖A‖‖B‖` is returned instead, since `[A, B]` need not vanish at `t = 0`.
pub fn lr_bound(t: f64, norm_a: f64, norm_b: f64, c: f64, norm_phi: f64, d: f64, overlap: bool) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(LrError::InvalidArgument(format!("convolution constant C = {c} must be positive")));
    }
    for (n, v) in [("norm_a", norm_a), ("norm_b", norm_b), ("norm_phi", norm_phi), ("D", d)] {
        check_nonneg(n, v)?;
    }
    let cap = 2.0 * norm_a * norm_b;
    if overlap {
        return Ok(cap);
    }
    Ok(cap / c * (2.0 * norm_phi * c * t.abs()).exp_m1() * d)
}

/// `(2‖A‖‖B‖/C_a)(e^{2‖Φ‖_a C_a|t|} - 1) min(|∂X|, |∂Y|) ‖F‖ e^{-a d(X,Y)}`.
#[allow(clippy::too_many_arguments)]
pub fn lr_bound_exponential(
    t: f64,
    norm_a: f64,
    norm_b: f64,
    c_a: f64,
    norm_phi_a: f64,
    boundary_sizes: (usize, usize),
    f_norm: f64,
    a: f64,
    d_xy: f64,
) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(LrError::InvalidArgument(format!("exponential rate a = {a} must be positive")));
    }
    if !(c_a > 0.0) {
        return Err(LrError::InvalidArgument(format!("convolution constant C = {c_a} must be positive")));
    }
    for (n, v) in [("norm_a", norm_a), ("norm_b", norm_b), ("norm_phi", norm_phi_a), ("f_norm", f_norm)] {
        check_nonneg(n, v)?;
    }
    if !(d_xy >= 0.0) {
        return Err(LrError::InvalidArgument(format!("distance {d_xy} must be nonnegative")));
    }
    let m = boundary_sizes.0.min(boundary_sizes.1) as f64;
    let decay = if d_xy.is_infinite() { 0.0 } else { (-a * d_xy).exp() };
    Ok(2.0 * norm_a * norm_b / c_a * (2.0 * norm_phi_a * c_a * t.abs()).exp_m1() * m * f_norm * decay)
}

/// `a_n` by explicit enumeration of surface chains `Z₁ ∈ S_Λ(X), Z₂ ∈ S_Λ(Z₁), …`.
pub fn a_n_exact(phi: &Interaction, volume: &SiteSet, x: &SiteSet, y: &SiteSet, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(LrError::InvalidArgument("a_n is defined for n >= 1".into()));
    }
    if volume.len() > ENUMERATION_MAX_SITES {
        return Err(LrError::EnumerationGuard { sites: volume.len(), limit: ENUMERATION_MAX_SITES });
    }
    if !x.is_subset(volume) || !y.is_subset(volume) {
        return Err(LrError::SupportViolation { support: x.union(y).to_string(), volume: volume.to_string() });
    }
    fn walk(phi: &Interaction, volume: &SiteSet, from: &SiteSet, y: &SiteSet, left: usize, weight: f64) -> f64 {
        let mut s = 0.0;
        for t in phi.surface_unchecked(volume, from) {
            let w = weight * t.norm();
            if left == 1 {
                s += w * f64::from(supports_overlap(t.support(), y));
            } else {
                s += walk(phi, volume, t.support(), y, left - 1, w);
            }
        }
        s
    }
    Ok(walk(phi, volume, x, y, n, 1.0))
}

/// `a_1, …, a_{n_max}` by dynamic programming over term supports; agrees
/// with [`a_n_exact`] without enumerating chains.
pub fn a_n_sequence(phi: &Interaction, volume: &SiteSet, x: &SiteSet, y: &SiteSet, n_max: usize) -> Result<Vec<f64>> {
    if !x.is_subset(volume) || !y.is_subset(volume) {
        return Err(LrError::SupportViolation { support: x.union(y).to_string(), volume: volume.to_string() });
    }
    let inner = phi.restrict(volume);
    let supports: Vec<SiteSet> = inner.terms().map(|t| t.support().clone()).collect();
    let index: HashMap<&SiteSet, usize> = supports.iter().enumerate().map(|(i, z)| (z, i)).collect();
    let norms: Vec<f64> = inner.terms().map(|t| t.norm()).collect();
    // successors[i] = surface terms of support i
    let successors: Vec<Vec<usize>> =
        supports.iter().map(|z| inner.surface_unchecked(volume, z).map(|t| index[t.support()]).collect()).collect();
    let start: Vec<usize> = inner.surface_unchecked(volume, x).map(|t| index[t.support()]).collect();
    // g[i] = weighted number of chains of the current length starting after support i
    let mut g: Vec<f64> = supports.iter().map(|z| f64::from(supports_overlap(z, y))).collect();
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        out.push(start.iter().map(|&i| norms[i] * g[i]).sum());
        g = successors.iter().map(|succ| succ.iter().map(|&j| norms[j] * g[j]).sum()).collect();
    }
    Ok(out)
}

/// `‖Φ‖ⁿ C^{n-1} Σ_{y∈Y} Σ_{x∈∂X} F(d(x,y))`.
pub fn a_n_bound(n: usize, norm_phi: f64, c: f64, boundary_sum: f64) -> f64 {
    norm_phi.powi(n as i32) * c.powi(n as i32 - 1) * boundary_sum
}

/// Lattice, decay function and interaction with the derived constants.
#[derive(Clone, Debug)]
pub struct BoundContext {
    lattice: Lattice,
    decay: DecayFunction,
    interaction: Interaction,
    constants: DecayConstants,
    norm_phi: f64,
}

impl BoundContext {
    pub fn new(lattice: &Lattice, decay: &DecayFunction, interaction: &Interaction) -> Result<Self> {
        decay.validate_on(lattice)?;
        for t in interaction.terms() {
            if !lattice.contains_set(t.support()) {
                return Err(LrError::SupportViolation {
                    support: t.support().to_string(),
                    volume: lattice.sites().to_string(),
                });
            }
        }
        Ok(BoundContext {
            lattice: lattice.clone(),
            decay: decay.clone(),
            interaction: interaction.clone(),
            constants: DecayConstants::compute(lattice, decay),
            norm_phi: interaction.interaction_norm(lattice, decay),
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn decay(&self) -> &DecayFunction {
        &self.decay
    }

    pub fn interaction(&self) -> &Interaction {
        &self.interaction
    }

    pub fn f_norm(&self) -> f64 {
        self.constants.f_norm
    }

    pub fn convolution(&self) -> f64 {
        self.constants.convolution
    }

    pub fn norm_phi(&self) -> f64 {
        self.norm_phi
    }

    pub fn distance_factor(&self, x: &SiteSet, y: &SiteSet) -> Result<DistanceFactor> {
        self.interaction.distance_factor(&self.lattice, &self.decay, x, y)
    }

    /// Lieb-Robinson bound for `A ∈ 𝒜_X`, `B ∈ 𝒜_Y`.
    pub fn lr_bound(&self, t: f64, norm_a: f64, norm_b: f64, x: &SiteSet, y: &SiteSet) -> Result<f64> {
        let d = self.distance_factor(x, y)?;
        lr_bound(t, norm_a, norm_b, self.convolution(), self.norm_phi, d.value, x.intersects(y))
    }

    /// Series bound `2‖A‖‖B‖ Σ (2|t|)ⁿ/n! a_n` with `a_n` summed exactly up to
    /// `n_max` and the closed-form tail beyond. Both orientations (`X → Y` and
    /// `Y → X`) are evaluated and the smaller value is returned.
    #[allow(clippy::too_many_arguments)]
    pub fn lr_series_bound(
        &self,
        t: f64,
        norm_a: f64,
        norm_b: f64,
        volume: &SiteSet,
        x: &SiteSet,
        y: &SiteSet,
        n_max: usize,
    ) -> Result<f64> {
        if n_max == 0 {
            return Err(LrError::InvalidArgument("n_max must be at least 1".into()));
        }
        if x.intersects(y) {
            return Ok(2.0 * norm_a * norm_b);
        }
        let d = self.distance_factor(x, y)?;
        let one_side = |from: &SiteSet, to: &SiteSet, boundary_sum: f64| -> Result<f64> {
            let an = a_n_sequence(&self.interaction, volume, from, to, n_max)?;
            let tt = 2.0 * t.abs();
            let mut term = 1.0;
            let mut partial = 0.0;
            for (k, a) in an.iter().enumerate() {
                term *= tt / (k + 1) as f64;
                partial += term * a;
            }
            let c = self.convolution();
            let tail = boundary_sum / c * exp_tail(tt * self.norm_phi * c, n_max);
            Ok(2.0 * norm_a * norm_b * (partial + tail))
        };
        let via_x = one_side(x, y, d.via_x_boundary)?;
        let via_y = one_side(y, x, d.via_y_boundary)?;
        Ok(via_x.min(via_y))
    }

    /// Bound on `‖τ_t^{Λn}(A) - τ_t^{Λm}(A)‖` for `|t| ≤ T`.
    pub fn thermo_limit_bound(&self, horizon: f64, norm_a: f64, x: &SiteSet, small: &SiteSet, large: &SiteSet) -> Result<ThermoBound> {
        thermo_limit_bound(horizon, norm_a, self.norm_phi, self.convolution(), &self.decay, &self.lattice, x, small, large)
    }
}

/// Value of the convergence bound with its two over-counting pieces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThermoBound {
    pub value: f64,
    /// `2T‖A‖‖Φ‖ S`
    pub sigma1: f64,
    /// `2T‖A‖‖Φ‖ e^{2C‖Φ‖T} S`
    pub sigma2: f64,
    /// `S = Σ_{x∈X} Σ_{y∈Λn∖Λm} F(d(x,y))`
    pub pair_sum: f64,
}

/// `2T(1 + e^{2C‖Φ‖T}) ‖A‖ ‖Φ‖ Σ_{x∈X} Σ_{y∈Λn∖Λm} F(d(x,y))`.
#[allow(clippy::too_many_arguments)]
pub fn thermo_limit_bound(
    horizon: f64,
    norm_a: f64,
    norm_phi: f64,
    c: f64,
    f: &DecayFunction,
    lattice: &Lattice,
    x: &SiteSet,
    small: &SiteSet,
    large: &SiteSet,
) -> Result<ThermoBound> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(LrError::InvalidArgument(format!("horizon T = {horizon} must be positive")));
    }
    check_nonneg("norm_a", norm_a)?;
    check_nonneg("norm_phi", norm_phi)?;
    check_nonneg("C", c)?;
    if !x.is_subset(small) || !small.is_subset(large) || !lattice.contains_set(large) {
        return Err(LrError::SupportViolation {
            support: format!("{x} ⊆ {small}"),
            volume: large.to_string(),
        });
    }
    let s = pair_sum(lattice, f, x, &large.difference(small));
    let sigma1 = 2.0 * horizon * norm_a * norm_phi * s;
    let sigma2 = sigma1 * (2.0 * c * norm_phi * horizon).exp();
    log::debug!("thermo bound: S = {s:.6e}, sigma1 = {sigma1:.6e}, sigma2 = {sigma2:.6e}");
    Ok(ThermoBound { value: sigma1 + sigma2, sigma1, sigma2, pair_sum: s })
}

/// Constants recorded alongside a certification.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BoundMetadata {
    pub norm_a: f64,
    pub norm_b: Option<f64>,
    pub norm_phi: f64,
    pub convolution: f64,
    pub f_norm: f64,
    pub distance_factor: Option<DistanceFactor>,
    pub horizon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WorstPoint {
    pub t: f64,
    pub margin: f64,
}

/// Pointwise comparison of a measured profile with its bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub margin: Vec<f64>,
    pub certified: bool,
    /// Grid point with the smallest margin.
    pub worst: Option<WorstPoint>,
    pub metadata: BoundMetadata,
}

impl BoundReport {
    pub fn min_margin(&self) -> f64 {
        self.worst.map_or(f64::INFINITY, |w| w.margin)
    }
}

/// Compares `lhs` with `rhs` on a shared grid.
pub fn certify(lhs: &Profile, rhs: &Profile, metadata: BoundMetadata) -> Result<BoundReport> {
    if lhs.times.len() != rhs.times.len() || lhs.times.iter().zip(&rhs.times).any(|(a, b)| a != b) {
        return Err(LrError::GridMismatch(format!(
            "{} measured points vs {} bound points",
            lhs.times.len(),
            rhs.times.len()
        )));
    }
    let margin: Vec<f64> = rhs.values.iter().zip(&lhs.values).map(|(r, l)| r - l).collect();
    let worst = margin
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &m)| WorstPoint { t: lhs.times[i], margin: m });
    let certified = margin.iter().all(|&m| m >= -CERTIFY_TOL);
    Ok(BoundReport { times: lhs.times.clone(), lhs: lhs.values.clone(), rhs: rhs.values.clone(), margin, certified, worst, metadata })
}

/// [`certify`] with the bound evaluated at each grid time.
pub fn certify_with(lhs: &Profile, rhs: impl Fn(f64) -> Result<f64>, metadata: BoundMetadata) -> Result<BoundReport> {
    let values = lhs.times.iter().map(|&t| rhs(t)).collect::<Result<Vec<_>>>()?;
    certify(lhs, &Profile { times: lhs.times.clone(), values }, metadata)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lr_bound_trivial_cases() {
        assert_eq!(lr_bound(0.0, 1.0, 1.0, 2.0, 3.0, 0.5, false).unwrap(), 0.0);
        assert_eq!(lr_bound(1.5, 1.0, 1.0, 2.0, 3.0, 0.0, false).unwrap(), 0.0);
        assert_eq!(lr_bound(0.0, 1.0, 2.0, 2.0, 3.0, 0.5, true).unwrap(), 4.0);
        assert!(lr_bound(1.0, 1.0, 1.0, 0.0, 1.0, 1.0, false).is_err());
    }

    #[test]
    fn exponential_form_vanishes_far_away() {
        let far = lr_bound_exponential(1.0, 1.0, 1.0, 2.0, 1.0, (1, 1), 3.0, 1.0, 800.0).unwrap();
        assert!(far < 1e-300);
        assert!(lr_bound_exponential(1.0, 1.0, 1.0, 2.0, 1.0, (1, 1), 3.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn certify_flags_violation() {
        let times = vec![-1.0, 0.0, 1.0];
        let lhs = Profile { times: times.clone(), values: vec![0.0, 0.0, 2.0] };
        let rhs = Profile { times: times.clone(), values: vec![1.0, 1.0, 1.0] };
        let rep = certify(&lhs, &rhs, BoundMetadata::default()).unwrap();
        assert!(!rep.certified);
        assert_eq!(rep.worst.unwrap().t, 1.0);
        let zero = Profile { times, values: vec![0.0; 3] };
        assert!(certify(&zero, &rhs, BoundMetadata::default()).unwrap().certified);
        let short = Profile { times: vec![0.0], values: vec![0.0] };
        assert!(matches!(certify(&short, &rhs, BoundMetadata::default()), Err(LrError::GridMismatch(_))));
    }
}
