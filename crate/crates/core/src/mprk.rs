//! Two-stage, second order modified Patankar–Runge–Kutta schemes.
//!
//! Both substeps are linear in their unknowns because every Patankar weight
//! is frozen at an already known state, so a step costs two dense `N x N`
//! solves and no nonlinear iteration. Each system has nonpositive
//! off-diagonals and known column sums, which the solver in [`crate::solve`]
//! exploits to keep mass conservation at rounding level.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::error::{Error, Result, Substep};
use crate::pds::{check_production, LinearPdsMatrix, ProductionSystem, StateVector};
use crate::solve::solve_column_sum_system;

/// How the intermediate stage treats production terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Productions in the stage are Patankar-weighted as well, so the stage
    /// conserves mass (MPRK22).
    ConservativeStages,
    /// Productions in the stage are explicit (MPRK22ncs).
    NonConservativeStages,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::ConservativeStages, Variant::NonConservativeStages];

    /// The stage weight: 1 for conservative stages, 0 otherwise.
    pub fn gamma(self) -> f64 {
        match self {
            Variant::ConservativeStages => 1.0,
            Variant::NonConservativeStages => 0.0,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Variant::ConservativeStages => "cs",
            Variant::NonConservativeStages => "ncs",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.short_name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cs" => Ok(Variant::ConservativeStages),
            "ncs" => Ok(Variant::NonConservativeStages),
            other => Err(Error::InvalidParameter(format!(
                "unknown variant {other:?}, expected \"cs\" or \"ncs\""
            ))),
        }
    }
}

/// Scheme parameter `alpha >= 1/2` together with the stage variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    alpha: f64,
    variant: Variant,
}

impl SchemeParams {
    pub fn new(alpha: f64, variant: Variant) -> Result<Self> {
        if !(alpha >= 0.5) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be a finite number >= 1/2, got {alpha}"
            )));
        }
        Ok(Self { alpha, variant })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn gamma(&self) -> f64 {
        self.variant.gamma()
    }

    /// Weight of the stage value in the final substep, `1/(2 alpha)`.
    pub(crate) fn stage_weight(&self) -> f64 {
        0.5 / self.alpha
    }
}

/// Outcome of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next: StateVector,
    pub stage: StateVector,
    pub step_size: f64,
}

/// Patankar denominator `(stage_i)^(1/alpha) (y_i)^(1 - 1/alpha)`, evaluated in
/// log space. Both arguments must be positive.
pub fn patankar_denominator(stage: f64, y: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        return stage;
    }
    let inv = 1.0 / alpha;
    (inv * stage.ln() + (1.0 - inv) * y.ln()).exp()
}

pub(crate) fn check_step_size(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "time step must be positive and finite, got {dt}"
        )))
    }
}

fn solve(
    off: &DMatrix<f64>,
    col_sums: &[f64],
    rhs: &DVector<f64>,
    substep: Substep,
) -> Result<DVector<f64>> {
    let x = solve_column_sum_system(off, col_sums, rhs).ok_or(Error::SingularSystem { substep })?;
    if let Some((index, &value)) = x
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
    {
        return Err(Error::NumericalBreakdown {
            substep,
            index,
            value,
        });
    }
    Ok(x)
}

fn check_dimension(expected: usize, y: &StateVector) -> Result<()> {
    if y.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: y.len(),
        });
    }
    Ok(())
}

/// One MPRK22 step for a general conservative production–destruction system.
pub fn mprk22_step<S>(
    system: &S,
    y_n: &StateVector,
    dt: f64,
    params: &SchemeParams,
) -> Result<StepResult>
where
    S: ProductionSystem + ?Sized,
{
    let n = system.dimension();
    check_dimension(n, y_n)?;
    y_n.ensure_positive()?;
    check_step_size(dt)?;

    let alpha = params.alpha();
    let gamma = params.gamma();
    let y1 = y_n.as_slice();

    let p1 = system.production(y1)?;
    check_production(&p1, n)?;

    // Stage: y2_i - a dt sum_j (gamma p_ij y2_j / y1_j - d_ij y2_i / y1_i)
    //        = y1_i + a dt (1 - gamma) sum_j p_ij, with d_ij = p_ji.
    // Column j of the system sums to 1 + a dt (1 - gamma) sum_i p_ij / y1_j.
    let adt = alpha * dt;
    let mut off = DMatrix::zeros(n, n);
    let mut col_sums = vec![1.0; n];
    let mut rhs = DVector::from_column_slice(y1);
    for j in 0..n {
        let outflow = p1.column(j).sum() / y1[j];
        col_sums[j] += adt * (1.0 - gamma) * outflow;
        for i in (0..n).filter(|&i| i != j) {
            off[(i, j)] = -adt * gamma * p1[(i, j)] / y1[j];
        }
        rhs[j] += adt * (1.0 - gamma) * p1.row(j).sum();
    }
    let y2 = solve(&off, &col_sums, &rhs, Substep::Stage)?;

    let p2 = system.production(y2.as_slice())?;
    check_production(&p2, n)?;

    let w2 = params.stage_weight();
    let weights = p1 * (1.0 - w2) + p2 * w2;
    let sigma: Vec<f64> = (0..n)
        .map(|i| patankar_denominator(y2[i], y1[i], alpha))
        .collect();

    // Every column of the final system sums to exactly 1.
    let off = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            -dt * weights[(i, j)] / sigma[j]
        }
    });
    let next = solve(&off, &vec![1.0; n], &y_n.to_dvector(), Substep::Final)?;

    Ok(StepResult {
        next: StateVector::from_dvector_unchecked(&next),
        stage: StateVector::from_dvector_unchecked(&y2),
        step_size: dt,
    })
}

/// One MPRK22 step for a linear PDS `y' = A y`, written as
/// `M(y) y_next = y` with `M(y) = I - dt A diag(C y) diag(sigma(y))^-1`.
pub fn mprk22_step_linear(
    a: &LinearPdsMatrix,
    y_n: &StateVector,
    dt: f64,
    params: &SchemeParams,
) -> Result<StepResult> {
    let n = a.dimension();
    check_dimension(n, y_n)?;
    y_n.ensure_positive()?;
    check_step_size(dt)?;

    let alpha = params.alpha();
    let gamma = params.gamma();
    let (a_p, a_d) = a.production_split();
    let y = y_n.to_dvector();

    // (I - alpha dt (gamma A_P - A_D)) y2 = (I + alpha dt (1 - gamma) A_P) y
    let adt = alpha * dt;
    let stage_off = &a_p * (-adt * gamma);
    let stage_sums: Vec<f64> = (0..n)
        .map(|j| 1.0 + adt * (1.0 - gamma) * a_d[(j, j)])
        .collect();
    let stage_rhs = if gamma == 1.0 {
        y.clone()
    } else {
        &y + &a_p * &y * (adt * (1.0 - gamma))
    };
    let y2 = solve(&stage_off, &stage_sums, &stage_rhs, Substep::Stage)?;

    let w2 = params.stage_weight();
    let tau = DVector::from_fn(n, |i, _| {
        let c = (1.0 - w2) * y[i] + w2 * y2[i];
        c / patankar_denominator(y2[i], y[i], alpha)
    });
    // M = I - dt A diag(tau); off-diagonals only, columns sum to 1
    let off = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            -dt * a_p[(i, j)] * tau[j]
        }
    });
    let next = solve(&off, &vec![1.0; n], &y, Substep::Final)?;

    Ok(StepResult {
        next: StateVector::from_dvector_unchecked(&next),
        stage: StateVector::from_dvector_unchecked(&y2),
        step_size: dt,
    })
}

/// A fixed-step run: `times[n] = n * step_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub params: SchemeParams,
    pub step_size: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &StateVector {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }

    /// Largest relative deviation of the total mass from the initial mass.
    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.states[0].total_mass();
        self.states
            .iter()
            .map(|s| ((s.total_mass() - m0) / m0).abs())
            .fold(0.0, f64::max)
    }
}

/// A step failed partway through a run.
#[derive(Debug, Clone, Error)]
#[error("step {step} failed: {source}")]
pub struct IntegrationError {
    /// Index `n` of the step that was advancing `states[n]`.
    pub step: usize,
    #[source]
    pub source: Error,
    /// Everything computed before the failure.
    pub partial: Trajectory,
}

/// Runs `n_steps` fixed steps of `step_fn` starting from `y0`.
pub fn integrate<F>(
    mut step_fn: F,
    y0: &StateVector,
    dt: f64,
    n_steps: usize,
    params: SchemeParams,
) -> std::result::Result<Trajectory, IntegrationError>
where
    F: FnMut(&StateVector, f64, &SchemeParams) -> Result<StepResult>,
{
    let mut traj = Trajectory {
        times: Vec::with_capacity(n_steps + 1),
        states: Vec::with_capacity(n_steps + 1),
        params,
        step_size: dt,
    };
    traj.times.push(0.0);
    traj.states.push(y0.clone());

    let precheck = y0.ensure_positive().and_then(|_| check_step_size(dt));
    if let Err(source) = precheck {
        return Err(IntegrationError {
            step: 0,
            source,
            partial: traj,
        });
    }

    for step in 0..n_steps {
        match step_fn(traj.last(), dt, &params) {
            Ok(res) => {
                traj.times.push((step + 1) as f64 * dt);
                traj.states.push(res.next);
            }
            Err(source) => {
                return Err(IntegrationError {
                    step,
                    source,
                    partial: traj,
                })
            }
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pds::FnProduction;
    use approx::assert_relative_eq;

    fn linear(a: f64, b: f64) -> LinearPdsMatrix {
        LinearPdsMatrix::from_rows(2, &[-a, b, a, -b]).unwrap()
    }

    fn sv(v: &[f64]) -> StateVector {
        StateVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(SchemeParams::new(0.5, Variant::ConservativeStages).is_ok());
        assert!(SchemeParams::new(0.49, Variant::ConservativeStages).is_err());
        assert!(SchemeParams::new(f64::NAN, Variant::ConservativeStages).is_err());
        assert!(SchemeParams::new(f64::INFINITY, Variant::ConservativeStages).is_err());
        assert_eq!(
            "ncs".parse::<Variant>().unwrap(),
            Variant::NonConservativeStages
        );
        assert!("foo".parse::<Variant>().is_err());
    }

    #[test]
    fn steady_state_is_fixed_point() {
        let a = linear(1.0, 1.0);
        let p = SchemeParams::new(1.0, Variant::ConservativeStages).unwrap();
        let r = mprk22_step(&a.production_system(), &sv(&[1.0, 1.0]), 1.0, &p).unwrap();
        assert_relative_eq!(r.next[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(r.next[1], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn hand_solved_step() {
        // Stage (7/6, 5/6), update 46/103 transferred from y1 to y2.
        let a = linear(1.0, 1.0);
        let p = SchemeParams::new(1.0, Variant::ConservativeStages).unwrap();
        let y = sv(&[1.5, 0.5]);
        for r in [
            mprk22_step(&a.production_system(), &y, 1.0, &p).unwrap(),
            mprk22_step_linear(&a, &y, 1.0, &p).unwrap(),
        ] {
            assert_relative_eq!(r.stage[0], 7.0 / 6.0, max_relative = 1e-14);
            assert_relative_eq!(r.stage[1], 5.0 / 6.0, max_relative = 1e-14);
            assert_relative_eq!(r.next[0], 1.5 - 46.0 / 103.0, max_relative = 1e-14);
            assert_relative_eq!(r.next[1], 0.5 + 46.0 / 103.0, max_relative = 1e-14);
            assert_relative_eq!(r.next.total_mass(), 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn degenerate_system_step() {
        // b = 0: y1_next = R(-1) y1 = 0.4 for alpha = 1
        let a = linear(1.0, 0.0);
        for variant in Variant::ALL {
            let p = SchemeParams::new(1.0, variant).unwrap();
            let r = mprk22_step(&a.production_system(), &sv(&[1.0, 1.0]), 1.0, &p).unwrap();
            assert_relative_eq!(r.next[0], 0.4, max_relative = 1e-14);
            assert_relative_eq!(r.next[1], 1.6, max_relative = 1e-14);
        }
    }

    #[test]
    fn three_by_three_linear_matches_generic() {
        let a = LinearPdsMatrix::from_rows(3, &[-2.0, 1.0, 0.0, 2.0, -1.0, 1.0, 0.0, 0.0, -1.0])
            .unwrap();
        let p = SchemeParams::new(0.5, Variant::NonConservativeStages).unwrap();
        let y = sv(&[1.0, 1.0, 1.0]);
        let lin = mprk22_step_linear(&a, &y, 0.1, &p).unwrap();
        let gen = mprk22_step(&a.production_system(), &y, 0.1, &p).unwrap();
        assert!(lin.next.is_positive());
        assert_relative_eq!(lin.next.total_mass(), 3.0, max_relative = 1e-12);
        for i in 0..3 {
            assert_relative_eq!(lin.next[i], gen.next[i], max_relative = 1e-12);
            assert_relative_eq!(lin.stage[i], gen.stage[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn linear_step_fixes_any_steady_state() {
        // A y* = 0 with y* = (1, 2, 2) for this matrix
        let a = LinearPdsMatrix::from_rows(3, &[-2.0, 1.0, 0.0, 2.0, -1.0, 0.0, 0.0, 0.0, 0.0])
            .unwrap();
        let y_star = sv(&[1.0, 2.0, 2.0]);
        for variant in Variant::ALL {
            let p = SchemeParams::new(0.7, variant).unwrap();
            for dt in [1e-3, 1.0, 1e3] {
                let r = mprk22_step_linear(&a, &y_star, dt, &p).unwrap();
                for i in 0..3 {
                    assert_relative_eq!(r.next[i], y_star[i], max_relative = 1e-13);
                }
            }
        }
    }

    #[test]
    fn errors_are_reported() {
        let a = linear(1.0, 1.0);
        let p = SchemeParams::new(1.0, Variant::ConservativeStages).unwrap();
        let sys = a.production_system();
        assert!(matches!(
            mprk22_step(&sys, &sv(&[0.0, 1.0]), 1.0, &p),
            Err(Error::NonPositiveInput { index: 0, .. })
        ));
        assert!(matches!(
            mprk22_step(&sys, &sv(&[1.0, 1.0]), 0.0, &p),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            mprk22_step(&sys, &sv(&[1.0, 1.0, 1.0]), 1.0, &p),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            mprk22_step_linear(&a, &sv(&[-1.0, 1.0]), 1.0, &p),
            Err(Error::NonPositiveInput { .. })
        ));
    }

    #[test]
    fn production_failure_propagates() {
        // undefined once any component exceeds 1
        let sys = FnProduction::new(2, |y: &[f64]| {
            if y.iter().any(|&v| v > 1.0) {
                Err(Error::ProductionEvaluation("out of range".into()))
            } else {
                Ok(DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 5.0 * y[0], 0.0]))
            }
        });
        let p = SchemeParams::new(1.0, Variant::NonConservativeStages).unwrap();
        let err = mprk22_step(&sys, &sv(&[0.9, 0.95]), 1.0, &p).unwrap_err();
        assert!(matches!(err, Error::ProductionEvaluation(_)));
    }

    #[test]
    fn invalid_production_is_rejected() {
        let sys = FnProduction::new(2, |_: &[f64]| {
            Ok(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]))
        });
        let p = SchemeParams::new(1.0, Variant::ConservativeStages).unwrap();
        assert!(matches!(
            mprk22_step(&sys, &sv(&[1.0, 1.0]), 1.0, &p),
            Err(Error::InvalidProduction { .. })
        ));
    }

    #[test]
    fn nonlinear_system_conserves_and_stays_positive() {
        // Robertson-like mass-action chain: y0 -> y1 (k y0), y1 + y1 -> y2 (k2 y1^2)
        let sys = FnProduction::new(3, |y: &[f64]| {
            let mut p = DMatrix::zeros(3, 3);
            p[(1, 0)] = 0.04 * y[0];
            p[(2, 1)] = 3e7 * y[1] * y[1];
            p[(0, 1)] = 1e4 * y[1] * y[2];
            Ok(p)
        });
        let p = SchemeParams::new(1.0, Variant::ConservativeStages).unwrap();
        let y0 = sv(&[1.0, 1e-20, 1e-20]);
        let traj = integrate(|y, dt, p| mprk22_step(&sys, y, dt, p), &y0, 1e-2, 500, p).unwrap();
        assert!(traj.states.iter().all(StateVector::is_positive));
        assert!(traj.max_mass_drift() < 1e-12);
    }

    #[test]
    fn integrate_zero_steps() {
        let a = linear(1.0, 2.0);
        let p = SchemeParams::new(1.0, Variant::ConservativeStages).unwrap();
        let y0 = sv(&[0.3, 0.7]);
        let traj = integrate(|y, dt, p| mprk22_step_linear(&a, y, dt, p), &y0, 0.5, 0, p).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.states[0], y0);
        assert_eq!(traj.times, vec![0.0]);
    }

    #[test]
    fn integrate_returns_partial_trajectory_on_failure() {
        let a = linear(1.0, 2.0);
        let p = SchemeParams::new(1.0, Variant::ConservativeStages).unwrap();
        let y0 = sv(&[0.3, 0.7]);
        let mut calls = 0;
        let err = integrate(
            |y, dt, p| {
                calls += 1;
                if calls == 4 {
                    Err(Error::SingularSystem {
                        substep: Substep::Final,
                    })
                } else {
                    mprk22_step_linear(&a, y, dt, p)
                }
            },
            &y0,
            0.5,
            10,
            p,
        )
        .unwrap_err();
        assert_eq!(err.step, 3);
        assert_eq!(err.partial.len(), 4);
        assert_eq!(err.partial.times, vec![0.0, 0.5, 1.0, 1.5]);
    }

    #[test]
    fn patankar_denominator_special_cases() {
        assert_eq!(patankar_denominator(0.3, 0.9, 1.0), 0.3);
        // alpha = 1/2: stage^2 / y
        assert_relative_eq!(
            patankar_denominator(0.3, 0.9, 0.5),
            0.09 / 0.9,
            max_relative = 1e-15
        );
        // alpha = 2: sqrt(stage * y)
        assert_relative_eq!(
            patankar_denominator(0.3, 0.9, 2.0),
            (0.27f64).sqrt(),
            max_relative = 1e-15
        );
    }
}
