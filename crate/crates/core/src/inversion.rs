//! Noisy data and the steepest-descent Landweber iteration.
//!
//! Each step moves along the adjoint gradient `s = F'(sigma)^* (E^d - F(sigma))`
//! with the stepsize `||s||_G^2 / ||F'(sigma) s||^2`, then clamps the iterate
//! at the conductivity floor. The iteration stops on the discrepancy
//! principle, on the iteration cap, or at a stationary point.

use std::fmt;

use log::{debug, info};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fem::{DomainSpace, InnerProductSpec, DEFAULT_SIGMA_FLOOR};
use crate::field::NodalField;
use crate::forward::{ForwardModel, ForwardState};
use crate::sensitivity::{adjoint_apply, derivative_apply, ResidualField};
use crate::sparse::CsrMatrix;

/// Number of stepsize halvings tried before giving up on a step.
pub const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    Constant(f64),
    Field(NodalField),
}

impl InitialGuess {
    fn resolve(&self, model: &ForwardModel<'_>) -> Result<NodalField> {
        match self {
            InitialGuess::Constant(c) => Ok(NodalField::constant(model.mesh(), *c)),
            InitialGuess::Field(f) => {
                f.check_mesh(model.mesh())?;
                Ok(f.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionConfig {
    /// Discrepancy factor, at least 1.
    pub tau: f64,
    pub delta_rel: f64,
    pub sigma0: InitialGuess,
    pub max_iter: usize,
    pub spec: InnerProductSpec,
    pub sigma_floor: f64,
    pub rng_seed: u64,
    /// Halve the stepsize while a step would increase the residual.
    pub safeguard: bool,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            delta_rel: 0.05,
            sigma0: InitialGuess::Constant(1.5),
            max_iter: 1000,
            spec: InnerProductSpec::default_h2_beta(),
            sigma_floor: DEFAULT_SIGMA_FLOOR,
            rng_seed: 0,
            safeguard: true,
        }
    }
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 1.0) || !self.tau.is_finite() {
            return Err(Error::InvalidArgument(format!("tau must be >= 1, got {}", self.tau)));
        }
        if !(self.delta_rel >= 0.0) || !self.delta_rel.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise level must be >= 0, got {}",
                self.delta_rel
            )));
        }
        if !(self.sigma_floor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "conductivity floor must be positive, got {}",
                self.sigma_floor
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if let InitialGuess::Constant(c) = self.sigma0 {
            if !(c >= self.sigma_floor) {
                return Err(Error::Inadmissible {
                    vertex: 0,
                    value: c,
                    floor: self.sigma_floor,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Discrepancy,
    MaxIter,
    ZeroGradient,
    /// Every halving of the stepsize still increased the residual.
    Stagnation,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Discrepancy => "discrepancy",
            StopReason::MaxIter => "max_iter",
            StopReason::ZeroGradient => "zero_gradient",
            StopReason::Stagnation => "stagnation",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// State of iterate `k`: its residual, its relative error (if the truth is
/// known) and the stepsize that produced iterate `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub residual: f64,
    pub omega: Option<f64>,
    pub rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationLog {
    pub records: Vec<IterationRecord>,
    pub stop: StopReason,
}

impl IterationLog {
    /// Index of the returned iterate.
    pub fn final_index(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }

    pub fn final_residual(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.residual)
    }

    pub fn initial_rel_error(&self) -> Option<f64> {
        self.records.first().and_then(|r| r.rel_error)
    }

    pub fn final_rel_error(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.rel_error)
    }

    pub fn residual_nonincreasing(&self) -> bool {
        self.records.windows(2).all(|w| w[1].residual <= w[0].residual)
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub sigma: NodalField,
    pub log: IterationLog,
}

/// `E + delta_rel ||E|| e / ||e||` with `e` standard normal, norms taken in the
/// stacked mass-weighted `L2` data norm. Also returns `delta_rel ||E||`.
pub fn add_noise(
    data: &[NodalField],
    mass: &CsrMatrix,
    delta_rel: f64,
    seed: u64,
) -> Result<(ResidualField, f64)> {
    if !(delta_rel >= 0.0) || !delta_rel.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise level must be >= 0, got {delta_rel}"
        )));
    }
    let norm = |fields: &[NodalField]| -> f64 {
        fields
            .iter()
            .map(|f| crate::field::dot(f.values(), &mass.matvec(f.values())))
            .sum::<f64>()
            .sqrt()
    };
    let delta_abs = delta_rel * norm(data);
    if delta_rel == 0.0 {
        return Ok((data.to_vec(), delta_abs));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<NodalField> = data
        .iter()
        .map(|f| {
            NodalField::from_vec(
                (0..f.len())
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            )
        })
        .collect();
    let scale = delta_abs / norm(&noise);
    let noisy = data.iter().zip(&noise).map(|(e, n)| e.axpy(scale, n)).collect();
    Ok((noisy, delta_abs))
}

fn residual_fields(data: &[NodalField], state: &ForwardState<'_>) -> ResidualField {
    data.iter()
        .zip(state.power_densities())
        .map(|(d, f)| d.sub(f))
        .collect()
}

fn clamp(sigma: &NodalField, floor: f64) -> NodalField {
    let mut out = sigma.clone();
    out.values_mut().iter_mut().for_each(|v| *v = v.max(floor));
    out
}

/// Search direction and steepest-descent stepsize for a given residual.
fn descent(
    state: &ForwardState<'_>,
    residual: &[NodalField],
    space: &DomainSpace,
) -> Result<(NodalField, f64)> {
    let s = adjoint_apply(state, residual, space)?;
    let num = space.norm_sq(s.values());
    if !(num > 0.0) {
        return Err(Error::ZeroGradient);
    }
    let fs = derivative_apply(state, &s)?;
    let den = state.model().data_inner(&fs, &fs);
    if !(den > 0.0) {
        return Err(Error::ZeroGradient);
    }
    Ok((s, num / den))
}

#[derive(Debug, Clone)]
pub struct Step {
    pub sigma: NodalField,
    pub omega: f64,
    /// Residual norm at the input iterate.
    pub residual: f64,
}

/// One unsafeguarded Landweber step from `sigma`.
pub fn steepest_descent_step(
    model: &ForwardModel<'_>,
    space: &DomainSpace,
    sigma: &NodalField,
    data: &[NodalField],
) -> Result<Step> {
    check_data(model, data)?;
    let state = model.solve(sigma)?;
    let residual = residual_fields(data, &state);
    let norm = model.data_norm(&residual);
    let (s, omega) = descent(&state, &residual, space)?;
    Ok(Step {
        sigma: clamp(&sigma.axpy(omega, &s), model.sigma_floor()),
        omega,
        residual: norm,
    })
}

fn check_data(model: &ForwardModel<'_>, data: &[NodalField]) -> Result<()> {
    if data.len() != model.num_measurements() {
        return Err(Error::LengthMismatch {
            expected: model.num_measurements(),
            actual: data.len(),
        });
    }
    data.iter().try_for_each(|d| d.check_mesh(model.mesh()))
}

/// Runs the Landweber iteration on `data` with noise level `delta_abs`.
/// A zero `delta_abs` disables the discrepancy test.
pub fn run_landweber(
    config: &ReconstructionConfig,
    model: &ForwardModel<'_>,
    data: &[NodalField],
    delta_abs: f64,
    truth: Option<&NodalField>,
) -> Result<Reconstruction> {
    config.validate()?;
    check_data(model, data)?;
    if config.sigma_floor < model.sigma_floor() {
        return Err(Error::InvalidArgument(format!(
            "reconstruction floor {} is below the forward model floor {}",
            config.sigma_floor,
            model.sigma_floor()
        )));
    }
    if let Some(t) = truth {
        t.check_mesh(model.mesh())?;
    }
    let space = DomainSpace::new(model.mesh(), config.spec)?;
    let rel_error = |sigma: &NodalField| {
        truth.map(|t| model.field_norm(&sigma.sub(t)) / model.field_norm(t))
    };
    let threshold = config.tau * delta_abs;

    let mut sigma = config.sigma0.resolve(model)?;
    let mut state = model.solve(&sigma)?;
    let mut residual = residual_fields(data, &state);
    let mut norm = model.data_norm(&residual);
    let mut records = Vec::new();

    let stop = loop {
        let k = records.len();
        records.push(IterationRecord {
            k,
            residual: norm,
            omega: None,
            rel_error: rel_error(&sigma),
        });
        if delta_abs > 0.0 && norm <= threshold {
            break StopReason::Discrepancy;
        }
        if k >= config.max_iter {
            break StopReason::MaxIter;
        }
        let (s, mut omega) = match descent(&state, &residual, &space) {
            Ok(d) => d,
            Err(Error::ZeroGradient) => break StopReason::ZeroGradient,
            Err(e) => return Err(e),
        };
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let candidate = clamp(&sigma.axpy(omega, &s), config.sigma_floor);
            let next = model.solve(&candidate)?;
            let next_residual = residual_fields(data, &next);
            let next_norm = model.data_norm(&next_residual);
            if !config.safeguard || next_norm <= norm {
                accepted = Some((candidate, next, next_residual, next_norm));
                break;
            }
            debug!("k={k}: residual {next_norm:.6e} > {norm:.6e}, halving omega");
            omega *= 0.5;
        }
        let Some((candidate, next, next_residual, next_norm)) = accepted else {
            break StopReason::Stagnation;
        };
        records[k].omega = Some(omega);
        sigma = candidate;
        state = next;
        residual = next_residual;
        norm = next_norm;
    };
    info!(
        "landweber stopped after {} iterations ({stop}), residual {:.6e}",
        records.len() - 1,
        norm
    );
    Ok(Reconstruction {
        sigma,
        log: IterationLog { records, stop },
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;
    use crate::forward::MeasurementSet;
    use crate::mesh::{generate_disk_mesh, BoundaryArc, Mesh};
    use crate::phantom::default_phantom;

    fn setup(mesh: &Mesh) -> (ForwardModel<'_>, NodalField, Vec<NodalField>) {
        let ms = MeasurementSet::trig(BoundaryArc::new(TAU).unwrap(), &[1, 2, 3]).unwrap();
        let model = ForwardModel::new(mesh, ms, 0.1).unwrap();
        let truth = default_phantom().on_mesh(mesh);
        let data = model.solve(&truth).unwrap().into_power_densities();
        (model, truth, data)
    }

    #[test]
    fn zero_noise_is_identity() {
        let mesh = generate_disk_mesh(300).unwrap();
        let (model, _, data) = setup(&mesh);
        let (noisy, delta) = add_noise(&data, model.mass(), 0.0, 7).unwrap();
        assert_eq!(noisy, data);
        assert_eq!(delta, 0.0);
    }

    #[test]
    fn noise_level_is_exact_and_seed_independent() {
        let mesh = generate_disk_mesh(300).unwrap();
        let (model, _, data) = setup(&mesh);
        let norm = model.data_norm(&data);
        let mut diffs = Vec::new();
        for seed in [1, 2] {
            let (noisy, delta) = add_noise(&data, model.mass(), 0.05, seed).unwrap();
            assert!((delta - 0.05 * norm).abs() <= 1e-14 * norm);
            let diff: Vec<_> = noisy.iter().zip(&data).map(|(a, b)| a.sub(b)).collect();
            let rel = model.data_norm(&diff) / norm;
            assert!((rel - 0.05).abs() < 1e-12, "{rel}");
            diffs.push(diff);
        }
        assert_ne!(diffs[0], diffs[1]);
        let again = add_noise(&data, model.mass(), 0.05, 1).unwrap().0;
        let first = add_noise(&data, model.mass(), 0.05, 1).unwrap().0;
        assert_eq!(again, first);
    }

    #[test]
    fn exact_data_is_stationary() {
        let mesh = generate_disk_mesh(300).unwrap();
        let (model, _, _) = setup(&mesh);
        let sigma0 = NodalField::constant(&mesh, 1.5);
        let data = model.solve(&sigma0).unwrap().into_power_densities();
        let space = DomainSpace::new(&mesh, InnerProductSpec::l2()).unwrap();
        let err = steepest_descent_step(&model, &space, &sigma0, &data).unwrap_err();
        assert_eq!(err.kind(), "zero_gradient");

        let config = ReconstructionConfig::default();
        let rec = run_landweber(&config, &model, &data, 0.1, None).unwrap();
        assert_eq!(rec.log.stop, StopReason::Discrepancy);
        assert_eq!(rec.log.records.len(), 1);
        assert_eq!(rec.sigma, sigma0);

        let rec = run_landweber(&config, &model, &data, 0.0, None).unwrap();
        assert_eq!(rec.log.stop, StopReason::ZeroGradient);
        assert_eq!(rec.log.final_index(), 0);
    }

    #[test]
    fn one_step_reduces_residual() {
        let mesh = generate_disk_mesh(500).unwrap();
        let (model, _, data) = setup(&mesh);
        let sigma0 = NodalField::constant(&mesh, 1.5);

        // The unsafeguarded H2 step already descends.
        let space = DomainSpace::new(&mesh, InnerProductSpec::h2()).unwrap();
        let step = steepest_descent_step(&model, &space, &sigma0, &data).unwrap();
        let after = steepest_descent_step(&model, &space, &step.sigma, &data).unwrap();
        assert!(after.residual < step.residual);

        for spec in [
            InnerProductSpec::l2(),
            InnerProductSpec::h2(),
            InnerProductSpec::default_h2_beta(),
        ] {
            let config = ReconstructionConfig {
                max_iter: 1,
                spec,
                ..Default::default()
            };
            let rec = run_landweber(&config, &model, &data, 0.0, None).unwrap();
            let r = &rec.log.records;
            assert_eq!(r.len(), 2);
            assert!(r[1].residual < r[0].residual, "{:?}: {r:?}", spec.mode());
            assert!(rec.sigma.min() >= 0.1);
        }
    }

    #[test]
    fn stepsize_is_scale_invariant() {
        let mesh = generate_disk_mesh(300).unwrap();
        let (model, _, data) = setup(&mesh);
        let sigma = NodalField::constant(&mesh, 1.5);
        let space = DomainSpace::new(&mesh, InnerProductSpec::h2()).unwrap();
        let state = model.solve(&sigma).unwrap();
        let w = residual_fields(&data, &state);
        let w2: Vec<_> = w.iter().map(|f| f.scaled(2.0)).collect();
        let (s1, o1) = descent(&state, &w, &space).unwrap();
        let (s2, o2) = descent(&state, &w2, &space).unwrap();
        assert!((o1 - o2).abs() <= 1e-10 * o1);
        for (a, b) in s1.values().iter().zip(s2.values()) {
            assert!((2.0 * o1 * a - o2 * b).abs() <= 1e-9 * (o1 * a).abs().max(1e-12));
        }
    }

    #[test]
    fn landweber_log_invariants_and_determinism() {
        let mesh = generate_disk_mesh(300).unwrap();
        let (model, truth, data) = setup(&mesh);
        let config = ReconstructionConfig {
            max_iter: 15,
            spec: InnerProductSpec::l2(),
            ..Default::default()
        };
        let (noisy, delta) = add_noise(&data, model.mass(), 0.01, 3).unwrap();
        let run = || run_landweber(&config, &model, &noisy, delta, Some(&truth)).unwrap();
        let a = run();
        let b = run();
        assert_eq!(a.log, b.log);
        assert_eq!(a.sigma, b.sigma);
        assert!(a.log.records.len() <= config.max_iter + 1);
        assert!(a.log.residual_nonincreasing());
        assert!(a.sigma.min() >= config.sigma_floor);
        assert!(a.log.final_rel_error().unwrap() < a.log.initial_rel_error().unwrap());
        if a.log.stop == StopReason::Discrepancy {
            assert!(a.log.final_residual() <= config.tau * delta);
        }
    }

    #[test]
    fn config_validation() {
        let ok = ReconstructionConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            ReconstructionConfig { tau: 0.5, ..ok.clone() },
            ReconstructionConfig { max_iter: 0, ..ok.clone() },
            ReconstructionConfig { sigma_floor: 0.0, ..ok.clone() },
            ReconstructionConfig { delta_rel: -1.0, ..ok.clone() },
            ReconstructionConfig { sigma0: InitialGuess::Constant(0.01), ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
