//! Finite lattices with a metric, site subsets, and decay functions `F`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LrError, Result};

/// Sites are numbered `0..lattice.len()`; the numbering fixes the global
/// tensor-product ordering.
pub type SiteId = usize;

/// Sorted, deduplicated set of sites.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<SiteId>", into = "Vec<SiteId>")]
pub struct SiteSet(Vec<SiteId>);

impl SiteSet {
    pub fn new(sites: impl IntoIterator<Item = SiteId>) -> Self {
        let mut v: Vec<SiteId> = sites.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SiteSet(v)
    }

    pub fn empty() -> Self {
        SiteSet(Vec::new())
    }

    pub fn singleton(x: SiteId) -> Self {
        SiteSet(vec![x])
    }

    /// `{lo, lo+1, ..., hi-1}`.
    pub fn range(lo: SiteId, hi: SiteId) -> Self {
        SiteSet((lo..hi).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: SiteId) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = SiteId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[SiteId] {
        &self.0
    }

    /// Position of `x` inside the sorted set.
    pub fn position(&self, x: SiteId) -> Option<usize> {
        self.0.binary_search(&x).ok()
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.iter().all(|x| other.contains(x))
    }

    pub fn intersects(&self, other: &SiteSet) -> bool {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.iter().any(|x| large.contains(x))
    }

    pub fn union(&self, other: &SiteSet) -> SiteSet {
        SiteSet::new(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &SiteSet) -> SiteSet {
        SiteSet(self.iter().filter(|&x| other.contains(x)).collect())
    }

    pub fn difference(&self, other: &SiteSet) -> SiteSet {
        SiteSet(self.iter().filter(|&x| !other.contains(x)).collect())
    }

    pub fn max(&self) -> Option<SiteId> {
        self.0.last().copied()
    }
}

impl From<Vec<SiteId>> for SiteSet {
    fn from(v: Vec<SiteId>) -> Self {
        SiteSet::new(v)
    }
}

impl From<SiteSet> for Vec<SiteId> {
    fn from(s: SiteSet) -> Self {
        s.0
    }
}

impl<const N: usize> From<[SiteId; N]> for SiteSet {
    fn from(a: [SiteId; N]) -> Self {
        SiteSet::new(a)
    }
}

impl FromIterator<SiteId> for SiteSet {
    fn from_iter<I: IntoIterator<Item = SiteId>>(iter: I) -> Self {
        SiteSet::new(iter)
    }
}

impl fmt::Display for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatticeKind {
    Chain { length: usize },
    Grid2d { width: usize, height: usize },
    Explicit,
}

/// A finite set of sites with a validated metric.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    kind: LatticeKind,
    n: usize,
    dist: Vec<f64>,
}

const METRIC_TOL: f64 = 1e-12;

impl Lattice {
    /// Open chain `0..length` with `d(i,j) = |i-j|`.
    pub fn chain(length: usize) -> Result<Self> {
        if length == 0 {
            return Err(LrError::InvalidLattice("chain length must be positive".into()));
        }
        let dist = (0..length * length)
            .map(|k| (k / length).abs_diff(k % length) as f64)
            .collect();
        Ok(Lattice { kind: LatticeKind::Chain { length }, n: length, dist })
    }

    /// Rectangular grid with the Manhattan metric; site `(x, y)` has id `y * width + x`.
    pub fn grid2d(width: usize, height: usize) -> Result<Self> {
        let n = width * height;
        if n == 0 {
            return Err(LrError::InvalidLattice("grid dimensions must be positive".into()));
        }
        let mut dist = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                let (ax, ay) = (a % width, a / width);
                let (bx, by) = (b % width, b / width);
                dist[a * n + b] = (ax.abs_diff(bx) + ay.abs_diff(by)) as f64;
            }
        }
        Ok(Lattice { kind: LatticeKind::Grid2d { width, height }, n, dist })
    }

    /// Lattice from an explicit distance table, checked against the metric axioms.
    pub fn explicit(table: Vec<Vec<f64>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(LrError::InvalidLattice("distance table is empty".into()));
        }
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(LrError::InvalidLattice(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            dist.extend_from_slice(row);
        }
        let lat = Lattice { kind: LatticeKind::Explicit, n, dist };
        lat.validate()?;
        Ok(lat)
    }

    /// Checks the metric axioms; distinct sites must be at positive distance.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let d = self.distance(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(LrError::InvalidLattice(format!("d({i},{j}) = {d} is not a finite nonnegative number")));
                }
                if i == j && d != 0.0 {
                    return Err(LrError::InvalidLattice(format!("d({i},{i}) = {d} must be zero")));
                }
                if i != j && d == 0.0 {
                    return Err(LrError::InvalidLattice(format!("distinct sites {i} and {j} are at distance zero")));
                }
                if (d - self.distance(j, i)).abs() > METRIC_TOL * (1.0 + d) {
                    return Err(LrError::InvalidLattice(format!("d({i},{j}) != d({j},{i})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lhs = self.distance(i, k);
                    let rhs = self.distance(i, j) + self.distance(j, k);
                    if lhs > rhs + METRIC_TOL * (1.0 + rhs) {
                        return Err(LrError::InvalidLattice(format!(
                            "triangle inequality fails for ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &LatticeKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sites(&self) -> SiteSet {
        SiteSet::range(0, self.n)
    }

    pub fn contains(&self, x: SiteId) -> bool {
        x < self.n
    }

    pub fn contains_set(&self, s: &SiteSet) -> bool {
        s.max().map_or(true, |m| m < self.n)
    }

    #[inline]
    pub fn distance(&self, x: SiteId, y: SiteId) -> f64 {
        self.dist[x * self.n + y]
    }

    /// `min_{x in X, y in Y} d(x, y)`; infinite when either set is empty.
    pub fn set_distance(&self, xs: &SiteSet, ys: &SiteSet) -> f64 {
        let mut m = f64::INFINITY;
        for x in xs.iter() {
            for y in ys.iter() {
                m = m.min(self.distance(x, y));
            }
        }
        m
    }

    /// Largest pairwise distance inside `s` (zero for fewer than two sites).
    pub fn diameter(&self, s: &SiteSet) -> f64 {
        let mut m = 0.0f64;
        for x in s.iter() {
            for y in s.iter() {
                m = m.max(self.distance(x, y));
            }
        }
        m
    }

    /// Smallest distance between distinct sites, if any.
    pub fn min_positive_distance(&self) -> Option<f64> {
        let mut m = f64::INFINITY;
        for i in 0..self.n {
            for j in 0..i {
                m = m.min(self.distance(i, j));
            }
        }
        m.is_finite().then_some(m)
    }

    /// True when `x` lies on the open boundary of a chain or grid.
    /// Explicit lattices carry no notion of an edge and always return false.
    pub fn is_edge_site(&self, x: SiteId) -> bool {
        match self.kind {
            LatticeKind::Chain { length } => x == 0 || x + 1 == length,
            LatticeKind::Grid2d { width, height } => {
                let (cx, cy) = (x % width, x / width);
                cx == 0 || cy == 0 || cx + 1 == width || cy + 1 == height
            }
            LatticeKind::Explicit => false,
        }
    }
}

/// Shape of the decay profile before exponential weighting.
#[derive(Clone)]
pub enum DecayProfile {
    /// `(1 + r)^(-p)`.
    Power { p: f64 },
    Custom { name: String, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl fmt::Debug for DecayProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecayProfile::Power { p } => write!(f, "Power {{ p: {p} }}"),
            DecayProfile::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Positive nonincreasing `F`, optionally weighted as `e^{-a r} F(r)`.
#[derive(Clone, Debug)]
pub struct DecayFunction {
    profile: DecayProfile,
    rate: f64,
}

impl DecayFunction {
    /// `F(r) = (1 + r)^(-p)`.
    pub fn power(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 0.0 {
            return Err(LrError::InvalidDecay(format!("power exponent p = {p} must be finite and >= 0")));
        }
        Ok(DecayFunction { profile: DecayProfile::Power { p }, rate: 0.0 })
    }

    /// `F(r) = e^{-a r} (1 + r)^(-p)`.
    pub fn exp_power(a: f64, p: f64) -> Result<Self> {
        let f = Self::power(p)?;
        if a == 0.0 {
            Ok(f)
        } else {
            f.apply_exponential_weight(a)
        }
    }

    /// User-supplied profile; positivity and monotonicity are spot-checked
    /// on `r in [0, 64]`.
    pub fn custom(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let d = DecayFunction {
            profile: DecayProfile::Custom { name: name.to_string(), f: Arc::new(f) },
            rate: 0.0,
        };
        let grid: Vec<f64> = (0..=1024).map(|k| k as f64 / 16.0).collect();
        d.check_on(&grid)?;
        Ok(d)
    }

    fn check_on(&self, rs: &[f64]) -> Result<()> {
        let mut prev = f64::INFINITY;
        for &r in rs {
            let v = self.evaluate(r);
            if !(v > 0.0) || !v.is_finite() {
                return Err(LrError::InvalidDecay(format!("F({r}) = {v} is not positive and finite")));
            }
            if v > prev * (1.0 + 1e-14) {
                return Err(LrError::InvalidDecay(format!("F increases near r = {r}")));
            }
            prev = v;
        }
        Ok(())
    }

    /// Checks positivity and monotonicity at every distance occurring in `lattice`.
    pub fn validate_on(&self, lattice: &Lattice) -> Result<()> {
        let mut rs: Vec<f64> = (0..lattice.len())
            .flat_map(|i| (0..lattice.len()).map(move |j| (i, j)))
            .map(|(i, j)| lattice.distance(i, j))
            .collect();
        rs.sort_by(f64::total_cmp);
        rs.dedup();
        self.check_on(&rs)
    }

    pub fn evaluate(&self, r: f64) -> f64 {
        let base = match &self.profile {
            DecayProfile::Power { p } => (1.0 + r).powf(-p),
            DecayProfile::Custom { f, .. } => f(r),
        };
        if self.rate == 0.0 {
            base
        } else {
            (-self.rate * r).exp() * base
        }
    }

    /// Returns `F_a(r) = e^{-a r} F(r)`; weights compose additively.
    pub fn apply_exponential_weight(&self, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(LrError::InvalidDecay(format!("exponential rate a = {a} must be positive")));
        }
        Ok(DecayFunction { profile: self.profile.clone(), rate: self.rate + a })
    }

    /// Total exponential rate applied so far.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// The same profile with the exponential weight removed.
    pub fn unweighted(&self) -> Self {
        DecayFunction { profile: self.profile.clone(), rate: 0.0 }
    }

    pub fn profile(&self) -> &DecayProfile {
        &self.profile
    }

    /// `F(d(x, y))` for all site pairs, row-major.
    pub fn table(&self, lattice: &Lattice) -> Vec<f64> {
        let n = lattice.len();
        (0..n * n).map(|k| self.evaluate(lattice.distance(k / n, k % n))).collect()
    }
}

/// `max_x sum_y F(d(x, y))`, the sum including `y = x`.
pub fn f_norm(lattice: &Lattice, f: &DecayFunction) -> f64 {
    let n = lattice.len();
    let tab = f.table(lattice);
    (0..n).map(|x| tab[x * n..(x + 1) * n].iter().sum::<f64>()).fold(0.0, f64::max)
}

/// `max_{x,y} sum_z F(d(x,z)) F(d(z,y)) / F(d(x,y))`.
pub fn convolution_constant(lattice: &Lattice, f: &DecayFunction) -> f64 {
    let n = lattice.len();
    let tab = f.table(lattice);
    let mut best = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            let s: f64 = (0..n).map(|z| tab[x * n + z] * tab[z * n + y]).sum();
            best = best.max(s / tab[x * n + y]);
        }
    }
    best
}

/// `sum_{x in X} sum_{y in Y} F(d(x, y))`.
pub fn pair_sum(lattice: &Lattice, f: &DecayFunction, xs: &SiteSet, ys: &SiteSet) -> f64 {
    let mut s = 0.0;
    for x in xs.iter() {
        for y in ys.iter() {
            s += f.evaluate(lattice.distance(x, y));
        }
    }
    s
}

/// `‖F‖` and `C` for one lattice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayConstants {
    pub f_norm: f64,
    pub convolution: f64,
}

impl DecayConstants {
    pub fn compute(lattice: &Lattice, f: &DecayFunction) -> Self {
        DecayConstants { f_norm: f_norm(lattice, f), convolution: convolution_constant(lattice, f) }
    }
}
