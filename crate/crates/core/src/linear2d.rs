//! The 2x2 linear test problem `y' = A y` with `A = [[-a, b], [a, -b]]`.
//!
//! Applied to this problem an MPRK22 step is the explicit map
//! `g(y) = (I + dt / (1 + dt (a tau_1 + b tau_2)) A diag(tau(y))) y`,
//! built from the stage matrix `B_gamma`, the mixing matrix `C_gamma` and the
//! Patankar denominators `sigma(y)`.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::mprk::{check_step_size, patankar_denominator, SchemeParams, Variant};
use crate::pds::{LinearPdsMatrix, StateVector};

/// Relative residual `|A y| / |y|` above which a state is not a steady state.
pub const STEADY_STATE_TOLERANCE: f64 = 1e-12;

/// The direction `(1, -1)` spanning the conservation line.
pub fn conservation_direction() -> Vector2<f64> {
    Vector2::new(1.0, -1.0)
}

/// Rates `a, b >= 0` with `a + b > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear2x2Pds {
    a: f64,
    b: f64,
}

/// Everything computed while evaluating `g(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapEvaluation {
    pub output: Vector2<f64>,
    /// `B_gamma y`
    pub stage: Vector2<f64>,
    pub tau: Vector2<f64>,
    pub sigma: Vector2<f64>,
    /// `1 + dt (a tau_1 + b tau_2)`
    pub denominator: f64,
}

fn to_vector2(y: &StateVector) -> Result<Vector2<f64>> {
    if y.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: y.len(),
        });
    }
    Ok(Vector2::new(y[0], y[1]))
}

fn ensure_positive2(y: &Vector2<f64>) -> Result<()> {
    match y.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        Some((index, &value)) => Err(Error::NonPositiveInput { index, value }),
        None => Ok(()),
    }
}

fn to_state(v: &Vector2<f64>) -> StateVector {
    StateVector::new(vec![v[0], v[1]]).expect("finite components")
}

impl Linear2x2Pds {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0) || !a.is_finite() || !b.is_finite() || a + b <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "rates must satisfy a, b >= 0 and a + b > 0, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// The nonzero eigenvalue `-(a + b)` of `A`.
    pub fn lambda(&self) -> f64 {
        -(self.a + self.b)
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(-self.a, self.b, self.a, -self.b)
    }

    pub fn production_part(&self) -> Matrix2<f64> {
        Matrix2::new(0.0, self.b, self.a, 0.0)
    }

    pub fn destruction_part(&self) -> Matrix2<f64> {
        Matrix2::new(self.a, 0.0, 0.0, self.b)
    }

    pub fn to_linear_pds(&self) -> LinearPdsMatrix {
        LinearPdsMatrix::from_rows(2, &[-self.a, self.b, self.a, -self.b])
            .expect("2x2 test matrix is always a valid linear PDS")
    }

    fn require_interior(&self) -> Result<()> {
        if self.a > 0.0 && self.b > 0.0 {
            Ok(())
        } else {
            Err(Error::DegenerateSteadyState {
                a: self.a,
                b: self.b,
            })
        }
    }

    /// Analytic solution at time `t >= 0`.
    pub fn exact_solution(&self, y0: &StateVector, t: f64) -> Result<StateVector> {
        let y = to_vector2(y0)?;
        ensure_positive2(&y)?;
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time must be >= 0, got {t}"
            )));
        }
        let (a, b) = (self.a, self.b);
        let s = a + b;
        let mass_coef = (y[0] + y[1]) / s;
        let decay_coef = (a * y[0] - b * y[1]) / s * (self.lambda() * t).exp();
        Ok(to_state(&Vector2::new(
            mass_coef * b + decay_coef,
            mass_coef * a - decay_coef,
        )))
    }

    /// The steady state with the same total mass as `y0`.
    pub fn steady_state(&self, y0: &StateVector) -> Result<StateVector> {
        let y = to_vector2(y0)?;
        ensure_positive2(&y)?;
        self.require_interior()?;
        let r = (y[0] + y[1]) / (self.a + self.b);
        Ok(to_state(&Vector2::new(r * self.b, r * self.a)))
    }

    /// Stage matrix: `(I - alpha dt A)^-1` for conservative stages,
    /// `(I + alpha dt A_D)^-1 (I + alpha dt A_P)` otherwise.
    pub fn b_gamma(&self, dt: f64, params: &SchemeParams) -> Result<Matrix2<f64>> {
        check_step_size(dt)?;
        let adt = params.alpha() * dt;
        match params.variant() {
            Variant::ConservativeStages => {
                // adjugate of I - alpha dt A, whose determinant is 1 + alpha dt (a + b)
                let (x, y) = (adt * self.a, adt * self.b);
                Ok(Matrix2::new(1.0 + y, y, x, 1.0 + x) / (1.0 + x + y))
            }
            Variant::NonConservativeStages => {
                let d = Matrix2::new(
                    1.0 / (1.0 + adt * self.a),
                    0.0,
                    0.0,
                    1.0 / (1.0 + adt * self.b),
                );
                Ok(d * (Matrix2::identity() + self.production_part() * adt))
            }
        }
    }

    /// `C_gamma = (1 - 1/(2 alpha)) I + 1/(2 alpha) B_gamma`.
    pub fn c_gamma(&self, dt: f64, params: &SchemeParams) -> Result<Matrix2<f64>> {
        let w = 0.5 / params.alpha();
        Ok(Matrix2::identity() * (1.0 - w) + self.b_gamma(dt, params)? * w)
    }

    fn tau_sigma(
        &self,
        dt: f64,
        params: &SchemeParams,
        y: &Vector2<f64>,
    ) -> Result<(Vector2<f64>, Vector2<f64>, Vector2<f64>)> {
        let stage = self.b_gamma(dt, params)? * y;
        let w = 0.5 / params.alpha();
        let mixed = y * (1.0 - w) + stage * w;
        let sigma = Vector2::new(
            patankar_denominator(stage[0], y[0], params.alpha()),
            patankar_denominator(stage[1], y[1], params.alpha()),
        );
        let tau = mixed.component_div(&sigma);
        Ok((stage, sigma, tau))
    }

    /// Evaluates the step map at a positive `y` via its rank-one closed form.
    pub fn map_g(&self, dt: f64, params: &SchemeParams, y: &Vector2<f64>) -> Result<MapEvaluation> {
        ensure_positive2(y)?;
        self.require_interior()?;
        let (stage, sigma, tau) = self.tau_sigma(dt, params, y)?;
        let denominator = 1.0 + dt * (self.a * tau[0] + self.b * tau[1]);
        // y + dt/den A diag(tau) y, regrouped so that no component cancels
        let mass = y[0] + y[1];
        let output = Vector2::new(
            (y[0] + dt * self.b * tau[1] * mass) / denominator,
            (y[1] + dt * self.a * tau[0] * mass) / denominator,
        );
        Ok(MapEvaluation {
            output,
            stage,
            tau,
            sigma,
            denominator,
        })
    }

    /// [`Self::map_g`] on a [`StateVector`].
    pub fn map_g_state(
        &self,
        dt: f64,
        params: &SchemeParams,
        y: &StateVector,
    ) -> Result<MapEvaluation> {
        self.map_g(dt, params, &to_vector2(y)?)
    }

    /// `M(y) = I - dt A diag(C y) diag(sigma(y))^-1`, so that `g(y) = M(y)^-1 y`.
    pub fn update_matrix(
        &self,
        dt: f64,
        params: &SchemeParams,
        y: &Vector2<f64>,
    ) -> Result<Matrix2<f64>> {
        ensure_positive2(y)?;
        let (_, _, tau) = self.tau_sigma(dt, params, y)?;
        Ok(Matrix2::identity() - self.matrix() * Matrix2::from_diagonal(&tau) * dt)
    }

    /// Explicit inverse of [`Self::update_matrix`] for the rank-one `A`:
    /// `M^-1 = I + (1 - trace(K))^-1 K` with `K = dt A diag(tau)`.
    pub fn update_matrix_inverse(
        &self,
        dt: f64,
        params: &SchemeParams,
        y: &Vector2<f64>,
    ) -> Result<Matrix2<f64>> {
        ensure_positive2(y)?;
        let (_, _, tau) = self.tau_sigma(dt, params, y)?;
        let k = self.matrix() * Matrix2::from_diagonal(&tau) * dt;
        Ok(Matrix2::identity() + k / (1.0 - k.trace()))
    }

    /// Jacobian of `g` at a positive steady state:
    /// `I + dt / (1 + dt (a + b)) A (I + (I - B_gamma) / (2 alpha))`.
    pub fn jacobian_at_steady_state(
        &self,
        dt: f64,
        params: &SchemeParams,
        y_star: &Vector2<f64>,
    ) -> Result<Matrix2<f64>> {
        ensure_positive2(y_star)?;
        check_step_size(dt)?;
        let residual = (self.matrix() * y_star).norm();
        if residual > STEADY_STATE_TOLERANCE * y_star.norm() {
            return Err(Error::NotASteadyState { residual });
        }
        let id = Matrix2::identity();
        let inner = id + (id - self.b_gamma(dt, params)?) * (0.5 / params.alpha());
        Ok(id + self.matrix() * inner * (dt / (1.0 + dt * (self.a + self.b))))
    }
}

/// Per-step amplification of `y_1` for the one-way system `y_1' = -a y_1`,
/// `y_2' = a y_1` at `z = -dt a`:
/// `R(z) = s / (s - z (1 - (alpha - 1/2) z))` with `s = (1 - alpha z)^(1 - 1/alpha)`.
///
/// Requires `z < 0` and `alpha >= 1/2`; the result lies in `(0, 1)`.
pub fn degenerate_amplification(z: f64, alpha: f64) -> f64 {
    debug_assert!(z <= 0.0 && alpha >= 0.5);
    let s = (1.0 - alpha * z).powf(1.0 - 1.0 / alpha);
    s / (s - z * (1.0 - (alpha - 0.5) * z))
}
