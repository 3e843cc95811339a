//! Dyson-series solvers for `dV/dt = A(t) V`, its inverse `dW/dt = -W A(t)`,
//! unitary propagators and the sourced Heisenberg equation
//! `f' = i[A(t), f] + B(t)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{LrError, Result};
use crate::linalg::{self, c64, CMat};

/// Number of sample points used to estimate the local bound `M`.
pub const BOUND_SAMPLES: usize = 65;
/// Safety factor applied to the sampled maximum norm.
pub const BOUND_SAFETY: f64 = 1.25;

const MIN_PANELS: usize = 4;
const MAX_PANELS: usize = 1 << 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    /// The family is `A(t)` itself.
    General,
    /// The family is a self-adjoint `H(t)`; the generator is `-i H(t)`.
    Hamiltonian,
}

/// Continuous family of square matrices on a time window.
#[derive(Clone)]
pub struct GeneratorFamily {
    dim: usize,
    kind: GeneratorKind,
    f: Arc<dyn Fn(f64) -> CMat + Send + Sync>,
    window: (f64, f64),
    local_bound: f64,
}

impl fmt::Debug for GeneratorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorFamily")
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .field("window", &self.window)
            .field("local_bound", &self.local_bound)
            .finish()
    }
}

impl GeneratorFamily {
    /// Generator `A(t)` for `dV/dt = A(t) V`, valid on `window`.
    pub fn general(dim: usize, window: (f64, f64), f: impl Fn(f64) -> CMat + Send + Sync + 'static) -> Result<Self> {
        Self::build(dim, window, GeneratorKind::General, Arc::new(f))
    }

    /// Self-adjoint `H(t)`; the evolution equation is `dU/dt = -i H(t) U`.
    pub fn hamiltonian(dim: usize, window: (f64, f64), f: impl Fn(f64) -> CMat + Send + Sync + 'static) -> Result<Self> {
        Self::build(dim, window, GeneratorKind::Hamiltonian, Arc::new(f))
    }

    /// Time-independent family valid for all times.
    pub fn constant(matrix: CMat, kind: GeneratorKind) -> Result<Self> {
        let dim = matrix.nrows();
        let window = (f64::NEG_INFINITY, f64::INFINITY);
        let norm = linalg::spectral_norm(&matrix)?;
        let fam = GeneratorFamily { dim, kind, f: Arc::new(move |_| matrix.clone()), window, local_bound: norm };
        fam.check_sample(0.0)?;
        Ok(fam)
    }

    fn build(dim: usize, window: (f64, f64), kind: GeneratorKind, f: Arc<dyn Fn(f64) -> CMat + Send + Sync>) -> Result<Self> {
        let (lo, hi) = window;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(LrError::InvalidArgument(format!("invalid time window [{lo}, {hi}]")));
        }
        let mut fam = GeneratorFamily { dim, kind, f, window, local_bound: 0.0 };
        let samples = fam.sample_points();
        let mut norms = Vec::with_capacity(samples.len());
        for &t in &samples {
            let m = fam.check_sample(t)?;
            norms.push(linalg::spectral_norm(&m)?);
        }
        let max = norms.iter().copied().fold(0.0, f64::max);
        fam.check_continuity(&samples, max)?;
        fam.local_bound = BOUND_SAFETY * max;
        Ok(fam)
    }

    fn sample_points(&self) -> Vec<f64> {
        let (lo, hi) = self.window;
        if lo == hi {
            return vec![lo];
        }
        (0..BOUND_SAMPLES).map(|k| lo + (hi - lo) * k as f64 / (BOUND_SAMPLES - 1) as f64).collect()
    }

    fn check_sample(&self, t: f64) -> Result<CMat> {
        let m = (self.f)(t);
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(LrError::DimensionMismatch { expected: self.dim, found: m.nrows() });
        }
        if !linalg::is_finite(&m) {
            return Err(LrError::NonFinite);
        }
        if self.kind == GeneratorKind::Hamiltonian {
            let defect = linalg::hermiticity_defect(&m);
            if defect > 1e-12 * linalg::max_abs(&m).max(1.0) {
                return Err(LrError::NotSelfAdjoint(defect));
            }
        }
        Ok(m)
    }

    /// Bisects towards the largest sampled jump; a jump that does not shrink
    /// under refinement indicates a discontinuity.
    fn check_continuity(&self, samples: &[f64], max_norm: f64) -> Result<()> {
        if samples.len() < 2 {
            return Ok(());
        }
        let jump = |a: f64, b: f64| linalg::frobenius(&((self.f)(b) - (self.f)(a)));
        let (mut a, mut b, mut j0) = (samples[0], samples[1], 0.0);
        for w in samples.windows(2) {
            let j = jump(w[0], w[1]);
            if j > j0 {
                (a, b, j0) = (w[0], w[1], j);
            }
        }
        let floor = 1e-9 * (1.0 + max_norm) * (self.dim as f64).sqrt();
        if j0 <= floor {
            return Ok(());
        }
        for _ in 0..16 {
            let mid = 0.5 * (a + b);
            if jump(a, mid) >= jump(mid, b) {
                b = mid;
            } else {
                a = mid;
            }
        }
        let last = jump(a, b);
        if last > 0.25 * j0 && last > floor {
            return Err(LrError::Discontinuous(last));
        }
        Ok(())
    }

    /// Replaces the sampled `M` by a caller-supplied bound. The new value
    /// may not undercut the sampled maximum norm.
    pub fn with_local_bound(mut self, m: f64) -> Result<Self> {
        let sampled = self.local_bound / BOUND_SAFETY;
        if !(m >= sampled * (1.0 - 1e-12)) || !m.is_finite() {
            return Err(LrError::InvalidArgument(format!(
                "local bound {m} is below the sampled generator norm {sampled}"
            )));
        }
        self.local_bound = m;
        Ok(self)
    }

    /// The family with every matrix negated (`H ↦ -H`).
    pub fn negated(&self) -> Self {
        let f = self.f.clone();
        GeneratorFamily {
            dim: self.dim,
            kind: self.kind,
            f: Arc::new(move |t| -f(t)),
            window: self.window,
            local_bound: self.local_bound,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.kind == GeneratorKind::Hamiltonian
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// `M`, a bound on the generator norm over the window.
    pub fn local_bound(&self) -> f64 {
        self.local_bound
    }

    /// The stored matrix: `A(t)` or `H(t)`.
    pub fn evaluate(&self, t: f64) -> CMat {
        (self.f)(t)
    }

    /// Right-hand side operator of the linear equation: `A(t)` or `-i H(t)`.
    pub fn generator(&self, t: f64) -> CMat {
        let m = (self.f)(t);
        match self.kind {
            GeneratorKind::General => m,
            GeneratorKind::Hamiltonian => linalg::scale(&m, c64::new(0.0, -1.0)),
        }
    }

    fn check_interval(&self, t0: f64, t: f64) -> Result<()> {
        let (lo, hi) = self.window;
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if !(t0.is_finite() && t.is_finite()) {
            return Err(LrError::NonFinite);
        }
        if t0.min(t) < lo - slack || t0.max(t) > hi + slack {
            return Err(LrError::InvalidArgument(format!(
                "interval [{}, {}] leaves the generator window [{lo}, {hi}]",
                t0.min(t),
                t0.max(t)
            )));
        }
        Ok(())
    }
}

/// Result of a Dyson-series solve.
#[derive(Clone, Debug)]
pub struct Propagator {
    pub value: CMat,
    pub t0: f64,
    pub t: f64,
    /// Largest series order used on any subinterval.
    pub order_used: usize,
    /// Rigorous bound on the truncated series tails, propagated to `t`.
    pub tail_bound: f64,
    pub subintervals: usize,
    /// Largest number of quadrature panels used on any subinterval.
    pub panels: usize,
}

/// Tuning for [`dyson_solve_with`].
#[derive(Clone, Copy, Debug)]
pub struct DysonOptions {
    pub tol: f64,
    /// Extra series terms beyond the order chosen from the tail estimate.
    pub extra_order: usize,
}

impl DysonOptions {
    pub fn new(tol: f64) -> Self {
        DysonOptions { tol, extra_order: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    /// `dV/dt = G V`
    Left,
    /// `dW/dt = -W G`
    Right,
}

/// `Σ_{k > n} x^k / k!` for `x ≥ 0`.
pub fn exp_tail(x: f64, n: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut term = 1.0;
    for k in 1..=n {
        term *= x / k as f64;
    }
    let mut sum = 0.0;
    let mut k = n + 1;
    loop {
        term *= x / k as f64;
        sum += term;
        if term <= 1e-17 * sum || k > n + 400 {
            return sum;
        }
        k += 1;
    }
}

/// Smallest order `n ≥ 1` with `scale · Σ_{k>n} x^k/k! ≤ target`.
fn order_for(x: f64, scale: f64, target: f64) -> usize {
    let mut n = 1;
    while scale * exp_tail(x, n) > target && n < 200 {
        n += 1;
    }
    n
}

/// Truncated Dyson sum on a uniform grid using cumulative trapezoid rules.
fn series_on_grid(gs: &[CMat], h: f64, init: &CMat, side: Side, order: usize) -> CMat {
    let n = gs.len();
    let dim = init.nrows();
    let mut prev: Vec<CMat> = vec![init.clone(); n];
    let mut total = init.clone();
    let half = c64::new(0.5 * h, 0.0);
    for _ in 0..order {
        let prods: Vec<CMat> = match side {
            Side::Left => gs.iter().zip(&prev).map(|(g, p)| g * p).collect(),
            Side::Right => gs.iter().zip(&prev).map(|(g, p)| -(p * g)).collect(),
        };
        let mut cur = Vec::with_capacity(n);
        cur.push(CMat::zeros(dim, init.ncols()));
        for j in 1..n {
            let mut next = cur[j - 1].clone();
            linalg::axpy(&mut next, half, &prods[j - 1]);
            linalg::axpy(&mut next, half, &prods[j]);
            cur.push(next);
        }
        total += &cur[n - 1];
        prev = cur;
    }
    total
}

/// Romberg-refined truncated series on `[a, b]`.
fn dyson_segment(gen: &GeneratorFamily, a: f64, b: f64, init: &CMat, side: Side, order: usize, target: f64) -> Result<(CMat, usize)> {
    let mut m = MIN_PANELS;
    let mut gs: Vec<CMat> = (0..=m).map(|j| gen.generator(a + (b - a) * j as f64 / m as f64)).collect();
    let mut prev_row: Vec<CMat> = Vec::new();
    loop {
        let h = (b - a) / m as f64;
        let mut row = vec![series_on_grid(&gs, h, init, side, order)];
        let mut diff = f64::INFINITY;
        if !prev_row.is_empty() {
            for l in 1..=prev_row.len() {
                let f = 4f64.powi(l as i32) - 1.0;
                let corr = linalg::scale_re(&(&row[l - 1] - &prev_row[l - 1]), 1.0 / f);
                row.push(&row[l - 1] + &corr);
            }
            diff = linalg::frobenius(&(row.last().unwrap() - prev_row.last().unwrap()));
            if !diff.is_finite() {
                return Err(LrError::NonFinite);
            }
            // successive Romberg values cannot agree better than round-off
            let floor = 256.0 * f64::EPSILON * linalg::frobenius(row.last().unwrap());
            if m >= 4 * MIN_PANELS && diff <= (0.5 * target).max(floor) {
                return Ok((row.pop().unwrap(), m));
            }
        }
        if m >= MAX_PANELS {
            return Err(LrError::Quadrature(diff));
        }
        let mut refined = Vec::with_capacity(2 * m + 1);
        for (j, g) in gs[..m].iter().enumerate() {
            refined.push(g.clone());
            refined.push(gen.generator(a + (b - a) * (2 * j + 1) as f64 / (2 * m) as f64));
        }
        refined.push(gs[m].clone());
        gs = refined;
        m *= 2;
        prev_row = row;
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(LrError::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

fn solve(gen: &GeneratorFamily, t0: f64, t: f64, init: &CMat, side: Side, opts: DysonOptions) -> Result<Propagator> {
    check_tol(opts.tol)?;
    gen.check_interval(t0, t)?;
    if init.nrows() != gen.dim() || init.ncols() != gen.dim() {
        return Err(LrError::DimensionMismatch { expected: gen.dim(), found: init.nrows() });
    }
    if !linalg::is_finite(init) {
        return Err(LrError::NonFinite);
    }
    let m = gen.local_bound();
    let len = (t - t0).abs();
    if m == 0.0 || len == 0.0 {
        return Ok(Propagator { value: init.clone(), t0, t, order_used: 0, tail_bound: 0.0, subintervals: 0, panels: 0 });
    }
    let k = ((2.0 * m * len).ceil() as usize).max(1);
    let step = (t - t0) / k as f64;
    let amp = if gen.is_self_adjoint() { 1.0 } else { (m * len).exp() };
    let seg_target = opts.tol / (2.0 * k as f64 * amp);
    let mut value = init.clone();
    let (mut order_used, mut tail_bound, mut panels) = (0, 0.0, 0);
    for i in 0..k {
        let a = t0 + step * i as f64;
        let b = if i + 1 == k { t } else { t0 + step * (i + 1) as f64 };
        let x = m * (b - a).abs();
        let scale = linalg::frobenius(&value);
        let order = order_for(x, scale, seg_target) + opts.extra_order;
        let (v, p) = dyson_segment(gen, a, b, &value, side, order, seg_target)?;
        tail_bound += amp * scale * exp_tail(x, order);
        order_used = order_used.max(order);
        panels = panels.max(p);
        value = v;
    }
    Ok(Propagator { value, t0, t, order_used, tail_bound, subintervals: k, panels })
}

/// Solves `dV/dt = A(t) V`, `V(t0) = V0` by the Dyson series.
pub fn dyson_solve(a: &GeneratorFamily, t0: f64, t: f64, v0: &CMat, tol: f64) -> Result<Propagator> {
    solve(a, t0, t, v0, Side::Left, DysonOptions::new(tol))
}

pub fn dyson_solve_with(a: &GeneratorFamily, t0: f64, t: f64, v0: &CMat, opts: DysonOptions) -> Result<Propagator> {
    solve(a, t0, t, v0, Side::Left, opts)
}

/// Solves `dW/dt = -W A(t)` with `W(t0) = V0⁻¹`, so that `W(t) = V(t)⁻¹`.
pub fn dyson_inverse(a: &GeneratorFamily, t0: f64, t: f64, v0: &CMat, tol: f64) -> Result<Propagator> {
    let w0 = linalg::inverse(v0)?;
    solve(a, t0, t, &w0, Side::Right, DysonOptions::new(tol))
}

/// `U(t, s)` for `dU/dt = -i H(t) U`, `U(s, s) = 𝟙`.
pub fn unitary_propagator(h: &GeneratorFamily, s: f64, t: f64, tol: f64) -> Result<Propagator> {
    if !h.is_self_adjoint() {
        return Err(LrError::InvalidArgument("unitary_propagator needs a self-adjoint family".into()));
    }
    check_tol(tol)?;
    let id = linalg::identity(h.dim());
    if s == t {
        h.check_interval(s, t)?;
        return Ok(Propagator { value: id, t0: s, t, order_used: 0, tail_bound: 0.0, subintervals: 0, panels: 0 });
    }
    dyson_solve(h, s, t, &id, tol)
}

/// Product of exponentials at subinterval midpoints; second order in the step.
pub fn exponential_midpoint_solve(a: &GeneratorFamily, t0: f64, t: f64, v0: &CMat, steps: usize) -> Result<CMat> {
    a.check_interval(t0, t)?;
    if steps == 0 {
        return Err(LrError::InvalidArgument("steps must be positive".into()));
    }
    let h = (t - t0) / steps as f64;
    let mut v = v0.clone();
    for k in 0..steps {
        let mid = t0 + h * (k as f64 + 0.5);
        let e = linalg::expm(&linalg::scale_re(&a.generator(mid), h))?;
        v = &e * &v;
    }
    Ok(v)
}

/// Solution of `f' = i[A(t), f] + B(t)` together with its norm certificate.
#[derive(Clone, Debug)]
pub struct SourcedSolution {
    pub value: CMat,
    /// `‖f(t)‖`
    pub norm: f64,
    /// `∫ ‖B(s)‖ ds` over `[min(t0,t), max(t0,t)]`
    pub source_integral: f64,
    /// `‖f0‖ + ∫ ‖B‖`
    pub bound: f64,
    /// `bound - norm`
    pub slack: f64,
    pub panels: usize,
}

fn romberg_step(prev: &[CMat], first: CMat) -> Vec<CMat> {
    let mut row = vec![first];
    for l in 1..=prev.len() {
        let f = 4f64.powi(l as i32) - 1.0;
        let corr = linalg::scale_re(&(&row[l - 1] - &prev[l - 1]), 1.0 / f);
        row.push(&row[l - 1] + &corr);
    }
    row
}

fn trapezoid<T: Clone>(vals: &[T], h: f64, add: impl Fn(&T, &T) -> T, scale: impl Fn(&T, f64) -> T) -> T {
    let n = vals.len();
    let mut acc = scale(&add(&vals[0], &vals[n - 1]), 0.5);
    for v in &vals[1..n - 1] {
        acc = add(&acc, v);
    }
    scale(&acc, h)
}

/// `f(t) = U(t,t0) (f0 + ∫ U(s,t0)* B(s) U(s,t0) ds) U(t,t0)*`, where `U`
/// solves `dU/dt = i A(t) U`.
pub fn heisenberg_source_solve(
    a: &GeneratorFamily,
    b: &GeneratorFamily,
    f0: &CMat,
    t0: f64,
    t: f64,
    tol: f64,
) -> Result<SourcedSolution> {
    check_tol(tol)?;
    if !a.is_self_adjoint() {
        return Err(LrError::InvalidArgument("heisenberg_source_solve needs a self-adjoint A(t)".into()));
    }
    if b.dim() != a.dim() || f0.nrows() != a.dim() {
        return Err(LrError::DimensionMismatch { expected: a.dim(), found: b.dim().max(f0.nrows()) });
    }
    a.check_interval(t0, t)?;
    b.check_interval(t0, t)?;
    let f0_norm = linalg::spectral_norm(f0)?;
    if t == t0 {
        return Ok(SourcedSolution { value: f0.clone(), norm: f0_norm, source_integral: 0.0, bound: f0_norm, slack: 0.0, panels: 0 });
    }
    // dU/dt = i A U is the unitary equation for H = -A
    let neg = a.negated();
    let id = linalg::identity(a.dim());
    let u_tol = tol * 1e-3;
    let mut m = MIN_PANELS;
    let node = |j: usize, m: usize| t0 + (t - t0) * j as f64 / m as f64;
    let mut us: Vec<CMat> = Vec::with_capacity(m + 1);
    us.push(id.clone());
    for j in 1..=m {
        let p = dyson_solve(&neg, node(j - 1, m), node(j, m), &id, u_tol / m as f64)?;
        us.push(&p.value * &us[j - 1]);
    }
    let integrand = |u: &CMat, s: f64| -> Result<(CMat, f64)> {
        let bs = b.evaluate(s);
        let n = linalg::spectral_norm(&bs)?;
        Ok((u.adjoint() * &bs * u, n))
    };
    let mut gs = Vec::with_capacity(m + 1);
    let mut ns = Vec::with_capacity(m + 1);
    for (j, u) in us.iter().enumerate() {
        let (g, n) = integrand(u, node(j, m))?;
        gs.push(g);
        ns.push(n);
    }
    let mut prev_row: Vec<CMat> = Vec::new();
    let mut prev_scalar: Vec<f64> = Vec::new();
    let (integral, source_integral) = loop {
        let h = (t - t0) / m as f64;
        let first = trapezoid(&gs, h, |x, y| x + y, linalg::scale_re);
        let row = romberg_step(&prev_row, first);
        let s_first = trapezoid(&ns, h.abs(), |x, y| x + y, |x, k| x * k);
        let mut srow = vec![s_first];
        for l in 1..=prev_scalar.len() {
            let f = 4f64.powi(l as i32) - 1.0;
            srow.push(srow[l - 1] + (srow[l - 1] - prev_scalar[l - 1]) / f);
        }
        if !prev_row.is_empty() && m >= 4 * MIN_PANELS {
            let diff = linalg::frobenius(&(row.last().unwrap() - prev_row.last().unwrap()));
            let sdiff = (srow.last().unwrap() - prev_scalar.last().unwrap()).abs();
            let floor = 256.0 * f64::EPSILON * (linalg::frobenius(row.last().unwrap()) + srow.last().unwrap().abs());
            if diff <= (0.25 * tol).max(floor) && sdiff <= (0.25 * tol).max(floor) {
                break (row.last().unwrap().clone(), *srow.last().unwrap());
            }
            if m >= MAX_PANELS {
                return Err(LrError::Quadrature(diff.max(sdiff)));
            }
        }
        // insert midpoints
        let mut new_us = Vec::with_capacity(2 * m + 1);
        let mut new_gs = Vec::with_capacity(2 * m + 1);
        let mut new_ns = Vec::with_capacity(2 * m + 1);
        for j in 0..m {
            let mid = node(2 * j + 1, 2 * m);
            let p = dyson_solve(&neg, node(j, m), mid, &id, u_tol / (2 * m) as f64)?;
            let um = &p.value * &us[j];
            let (g, n) = integrand(&um, mid)?;
            new_us.push(us[j].clone());
            new_gs.push(gs[j].clone());
            new_ns.push(ns[j]);
            new_us.push(um);
            new_gs.push(g);
            new_ns.push(n);
        }
        new_us.push(us[m].clone());
        new_gs.push(gs[m].clone());
        new_ns.push(ns[m]);
        us = new_us;
        gs = new_gs;
        ns = new_ns;
        m *= 2;
        prev_row = row;
        prev_scalar = srow;
    };
    let ut = &us[m];
    let value = ut * &(f0 + &integral) * ut.adjoint();
    let norm = linalg::spectral_norm(&value)?;
    let bound = f0_norm + source_integral;
    Ok(SourcedSolution { value, norm, source_integral, bound, slack: bound - norm, panels: m })
}
