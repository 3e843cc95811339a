//! Turns a parsed [`Config`] into lattice, decay function, site space,
//! interaction and observables.

use lrlab_core::linalg::{self, c64, CMat};
use lrlab_core::observables::{
    ground_projector, ground_reflection, number, parity, pauli, position, spin_matrices,
};
use lrlab_core::{
    operator_norm, truncate_oscillator, BoundContext, DecayFunction, Interaction, Lattice, LocalOperator, SiteModel,
    SiteSet, SiteSpace,
};

use crate::config::{
    Config, DecayKind, DecaySpec, Entry, InteractionSpec, LatticeSpec, MatrixSpec, OpSpec, SitesSpec, TermSpec,
    VolumeSpec,
};
use crate::error::{CliError, CliResult};

/// Everything a bound or simulation needs, built from the config.
pub struct Setup {
    pub lattice: Lattice,
    pub decay: DecayFunction,
    pub space: SiteSpace,
    pub interaction: Interaction,
    pub context: BoundContext,
}

/// An observable together with its operator norm.
pub struct Observable {
    pub op: LocalOperator,
    pub norm: f64,
}

fn require<'a, T>(v: &'a Option<T>, field: &str) -> CliResult<&'a T> {
    v.as_ref().ok_or_else(|| CliError::config(field, "missing"))
}

pub fn lattice(spec: &LatticeSpec) -> CliResult<Lattice> {
    let out = match spec {
        LatticeSpec::Chain { length } => Lattice::chain(*length),
        LatticeSpec::Grid2d { width, height } => Lattice::grid2d(*width, *height),
        LatticeSpec::Explicit { distances } => Lattice::explicit(distances.clone()),
    };
    out.map_err(|e| CliError::building("lattice", e))
}

pub fn decay(spec: &DecaySpec) -> CliResult<DecayFunction> {
    let base = match spec.kind {
        DecayKind::Power => DecayFunction::power(spec.p),
        DecayKind::ExpPower => DecayFunction::exp_power(spec.a, spec.p),
    }
    .map_err(|e| CliError::building("decay", e))?;
    match spec.weight {
        Some(w) => base.apply_exponential_weight(w).map_err(|e| CliError::building("decay.weight", e)),
        None => Ok(base),
    }
}

pub fn matrix(spec: &MatrixSpec, field: &str) -> CliResult<CMat> {
    let n = spec.len();
    if n == 0 || spec.iter().any(|row| row.len() != n) {
        return Err(CliError::config(field, "matrix must be square and nonempty"));
    }
    let m = CMat::from_fn(n, n, |i, j| match spec[i][j] {
        Entry::Real(re) => c64::new(re, 0.0),
        Entry::Complex { re, im } => c64::new(re, im),
    });
    if !linalg::is_finite(&m) {
        return Err(CliError::config(field, "matrix entries must be finite"));
    }
    Ok(m)
}

pub fn site_model(spec: &SitesSpec) -> CliResult<SiteModel> {
    let out = match spec {
        SitesSpec::Spin { local_dim, field } => SiteModel::spin(*local_dim, *field),
        SitesSpec::Oscillator { n_levels, lambda } => truncate_oscillator(*n_levels, *lambda),
        SitesSpec::Explicit { matrix: m } => SiteModel::explicit(matrix(m, "sites.matrix")?),
    };
    out.map_err(|e| CliError::building("sites", e))
}

fn normalized(m: CMat) -> CMat {
    let n = linalg::spectral_norm(&m).unwrap_or(0.0);
    if n > 0.0 {
        linalg::scale_re(&m, 1.0 / n)
    } else {
        m
    }
}

/// Named single-site operator on a site of dimension `d`.
fn named_single(name: &str, d: usize) -> Option<CMat> {
    let spin_axis = |axis: usize| spin_matrices(d)[axis].clone();
    Some(match name {
        "pauli_x" | "pauli_y" | "pauli_z" if d == 2 => pauli(match name {
            "pauli_x" => 0,
            "pauli_y" => 1,
            _ => 2,
        }),
        "spin_x" => spin_axis(0),
        "spin_y" => spin_axis(1),
        "spin_z" => spin_axis(2),
        "identity" => linalg::identity(d),
        "ground_projector" => ground_projector(d),
        "ground_reflection" => ground_reflection(d),
        "parity" => parity(d),
        "number" => number(d),
        "position" => position(d),
        _ => return None,
    })
}

/// Named two-site bond on sites of dimensions `d1`, `d2`, normalized to unit norm.
fn named_bond(name: &str, d1: usize, d2: usize) -> Option<CMat> {
    let (s1, s2) = (spin_matrices(d1), spin_matrices(d2));
    let m = match name {
        "heisenberg" => (0..3).fold(linalg::zeros(d1 * d2), |acc, a| acc + linalg::kron(&s1[a], &s2[a])),
        "xx" => linalg::kron(&s1[0], &s2[0]),
        "zz" => linalg::kron(&s1[2], &s2[2]),
        "ground_density" => linalg::kron(&ground_projector(d1), &ground_projector(d2)),
        _ => return None,
    };
    Some(normalized(m))
}

/// Matrix of `spec` acting on `sites` in the listed order.
pub fn operator_matrix(spec: &OpSpec, sites: &[usize], space: &SiteSpace, field: &str) -> CliResult<CMat> {
    let dims: Vec<usize> = sites.iter().map(|&x| space.local_dim(x)).collect();
    let base = match (&spec.named, &spec.matrix) {
        (Some(name), None) => {
            let m = match dims.as_slice() {
                [d] => named_single(name, *d),
                [d1, d2] => named_bond(name, *d1, *d2),
                _ => None,
            };
            m.ok_or_else(|| {
                CliError::config(format!("{field}.named"), format!("unknown operator `{name}` for local dimensions {dims:?}"))
            })?
        }
        (None, Some(m)) => matrix(m, &format!("{field}.matrix"))?,
        _ => return Err(CliError::config(field, "give exactly one of `named` and `matrix`")),
    };
    if !spec.scale.is_finite() {
        return Err(CliError::config(format!("{field}.scale"), "must be finite"));
    }
    Ok(linalg::scale_re(&base, spec.scale))
}

fn check_sites(sites: &[usize], lattice: &Lattice, field: &str) -> CliResult<()> {
    if sites.is_empty() {
        return Err(CliError::config(field, "support must be nonempty"));
    }
    if let Some(&x) = sites.iter().find(|&&x| !lattice.contains(x)) {
        return Err(CliError::config(field, format!("site {x} is outside the lattice of {} sites", lattice.len())));
    }
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != sites.len() {
        return Err(CliError::config(field, "repeated site"));
    }
    Ok(())
}

pub fn term(spec: &TermSpec, lattice: &Lattice, space: &SiteSpace, field: &str) -> CliResult<LocalOperator> {
    check_sites(&spec.sites, lattice, &format!("{field}.sites"))?;
    let m = operator_matrix(&spec.op, &spec.sites, space, &format!("{field}.op"))?;
    LocalOperator::from_site_order(&spec.sites, m, space).map_err(|e| CliError::building(field, e))
}

pub fn interaction(spec: &InteractionSpec, lattice: &Lattice, space: &SiteSpace) -> CliResult<Interaction> {
    let out = match spec {
        InteractionSpec::NnCoupling { bond, coupling } => {
            if !coupling.is_finite() {
                return Err(CliError::config("interaction.coupling", "must be finite"));
            }
            let mut failure = None;
            let phi = Interaction::nearest_neighbor_with(lattice, space, |x, y| {
                match operator_matrix(bond, &[x, y], space, "interaction.bond") {
                    Ok(m) => linalg::scale_re(&m, *coupling),
                    Err(e) => {
                        failure.get_or_insert(e);
                        linalg::zeros(space.local_dim(x) * space.local_dim(y))
                    }
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            phi
        }
        InteractionSpec::RangeR { r, terms } => {
            let mut mats = Vec::with_capacity(terms.len());
            for (i, t) in terms.iter().enumerate() {
                let field = format!("interaction.terms[{i}]");
                if t.size == 0 || t.size > lattice.len() {
                    return Err(CliError::config(format!("{field}.size"), "size must be between 1 and the lattice size"));
                }
                let sites: Vec<usize> = (0..t.size).collect();
                mats.push((t.size, operator_matrix(&t.op, &sites, space, &format!("{field}.op"))?));
            }
            Interaction::range_r(lattice, space, *r, &mats)
        }
        InteractionSpec::Explicit { terms } => {
            let mut phi = Interaction::new();
            for (i, t) in terms.iter().enumerate() {
                let field = format!("interaction.terms[{i}]");
                let op = term(t, lattice, space, &field)?;
                phi.insert(op).map_err(|e| CliError::building(&field, e))?;
            }
            Ok(phi)
        }
    };
    out.map_err(|e| CliError::building("interaction", e))
}

impl Setup {
    pub fn from_config(cfg: &Config) -> CliResult<Setup> {
        let lattice = lattice(require(&cfg.lattice, "lattice")?)?;
        let decay = decay(require(&cfg.decay, "decay")?)?;
        decay.validate_on(&lattice).map_err(|e| CliError::building("decay", e))?;
        let model = site_model(require(&cfg.sites, "sites")?)?;
        let space = SiteSpace::uniform(model, lattice.len());
        let interaction = interaction(require(&cfg.interaction, "interaction")?, &lattice, &space)?;
        let context =
            BoundContext::new(&lattice, &decay, &interaction).map_err(|e| CliError::building("interaction", e))?;
        Ok(Setup { lattice, decay, space, interaction, context })
    }

    pub fn observable(&self, spec: &TermSpec, field: &str) -> CliResult<Observable> {
        let op = term(spec, &self.lattice, &self.space, field)?;
        let norm = operator_norm(&op).map_err(|e| CliError::building(field, e))?;
        Ok(Observable { op, norm })
    }

    /// Observables `A` and `B`; `B` is required.
    pub fn observable_pair(&self, cfg: &Config) -> CliResult<(Observable, Observable)> {
        let obs = require(&cfg.observables, "observables")?;
        let a = self.observable(&obs.a, "observables.a")?;
        let b = self.observable(require(&obs.b, "observables.b")?, "observables.b")?;
        Ok((a, b))
    }

    pub fn volume(&self, spec: &VolumeSpec, field: &str) -> CliResult<SiteSet> {
        let sites: Vec<usize> = match spec {
            VolumeSpec::Count(n) => (0..*n).collect(),
            VolumeSpec::Sites(s) => s.clone(),
        };
        check_sites(&sites, &self.lattice, field)?;
        Ok(SiteSet::new(sites))
    }

    /// Sites of `set` on the lattice edge, where `∂_Φ` is cut off by finiteness.
    pub fn edge_sites(&self, set: &SiteSet) -> Vec<usize> {
        set.iter().filter(|&x| self.lattice.is_edge_site(x)).collect()
    }
}
