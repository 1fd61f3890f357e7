//! Stability functions, stability regions and critical step sizes of the
//! MPRK22 schemes on the 2x2 linear test problem.
//!
//! At a positive steady state `y*` the Jacobian of the step map has the
//! eigenvalue 1 along the fixed-point ray and a second eigenvalue `R` along
//! `(1, -1)`. `R` depends only on the scaled steps `z_a = -dt a` and
//! `z_b = -dt b`, and `|R| < 1` makes `y*` a stable fixed point.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::linear2d::conservation_direction;
use crate::mprk::Variant;

/// Width of the band around `|R| = 1` reported as "on the boundary".
pub const BOUNDARY_BAND: f64 = 1e-12;

/// Absolute tolerance of the critical step size bisection.
pub const CRITICAL_DT_TOLERANCE: f64 = 1e-12;

/// Largest step size searched for a critical step.
pub const CRITICAL_DT_SEARCH_LIMIT: f64 = 1e6;

/// Allowed negative excursion of the discriminant in [`boundary_f`].
const DISCRIMINANT_SLACK: f64 = 1e-12;

/// Scaled step `(z_a, z_b) = (-dt a, -dt b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledStepPoint {
    pub z_a: f64,
    pub z_b: f64,
}

impl ScaledStepPoint {
    pub fn new(z_a: f64, z_b: f64) -> Self {
        Self { z_a, z_b }
    }

    pub fn from_step(dt: f64, a: f64, b: f64) -> Self {
        Self {
            z_a: -dt * a,
            z_b: -dt * b,
        }
    }

    pub fn sum(&self) -> f64 {
        self.z_a + self.z_b
    }
}

/// Stability function of MPRK22(alpha); depends on `z_a + z_b` only.
pub fn stability_r1(pt: ScaledStepPoint, alpha: f64) -> f64 {
    let z = pt.sum();
    (2.0 - 2.0 * alpha * z - z * z) / (2.0 * (1.0 - z) * (1.0 - alpha * z))
}

/// Stability function of MPRK22ncs(alpha).
pub fn stability_r0(pt: ScaledStepPoint, alpha: f64) -> f64 {
    let ScaledStepPoint { z_a, z_b } = pt;
    let z = z_a + z_b;
    let s = z_a / (1.0 - alpha * z_a) + z_b / (1.0 - alpha * z_b);
    (2.0 - z * s) / (2.0 * (1.0 - z))
}

pub fn stability_function(pt: ScaledStepPoint, alpha: f64, variant: Variant) -> f64 {
    match variant {
        Variant::ConservativeStages => stability_r1(pt, alpha),
        Variant::NonConservativeStages => stability_r0(pt, alpha),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict {
    pub r_value: f64,
    /// `|R| < 1` and not within the boundary band.
    pub stable: bool,
    pub on_boundary: bool,
}

pub fn classify(pt: ScaledStepPoint, alpha: f64, variant: Variant) -> StabilityVerdict {
    let r_value = stability_function(pt, alpha, variant);
    let on_boundary = (r_value.abs() - 1.0).abs() <= BOUNDARY_BAND;
    StabilityVerdict {
        r_value,
        stable: r_value.abs() < 1.0 && !on_boundary,
        on_boundary,
    }
}

fn require_boundary_alpha(alpha: f64) -> Result<()> {
    if (0.5..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "stability boundary exists only for 1/2 <= alpha < 1, got {alpha}"
        )))
    }
}

/// Leftmost `z_a` at which the MPRK22ncs(alpha) region stops being the whole
/// quadrant column: for `z_a` at or right of it, `R_0(z_a, .) > -1` everywhere.
pub fn boundary_asymptote(alpha: f64) -> Result<f64> {
    require_boundary_alpha(alpha)?;
    Ok((1.0 - 2.0 * alpha) / (2.0 * alpha * (1.0 - alpha)))
}

/// Lower boundary `z_b = f(xi)` of the MPRK22ncs(alpha) stability region,
/// i.e. the unique negative root of `R_0(xi, z_b) = -1`.
pub fn boundary_f(xi: f64, alpha: f64) -> Result<f64> {
    require_boundary_alpha(alpha)?;
    if !(xi < 0.0) || !xi.is_finite() {
        return Err(Error::Domain(format!("xi must be negative, got {xi}")));
    }
    let w = 1.0 - alpha * xi;
    let lead = (2.0 * alpha - 1.0) * w + alpha * xi;
    // lead >= 0 means R_0(xi, z_b) stays above -1 for every z_b < 0
    if !(lead < 0.0) {
        return Err(Error::NoBoundary { xi, alpha });
    }
    let p = -2.0 * w * (2.0 * alpha + (1.0 - alpha) * xi + 1.0) / lead;
    let q = (2.0 * w * (2.0 - xi) - xi * xi) / lead;
    let disc = p * p / 4.0 - q;
    if disc < -DISCRIMINANT_SLACK {
        return Err(Error::Domain(format!(
            "negative discriminant {disc} at xi = {xi}, alpha = {alpha}"
        )));
    }
    Ok(-p / 2.0 - disc.max(0.0).sqrt())
}

/// Critical step size of MPRK22ncs(alpha) for rates `a, b > 0`: the step at
/// which `R_0(-dt a, -dt b) = -1`.
pub fn critical_time_step(a: f64, b: f64, alpha: f64) -> Result<f64> {
    require_boundary_alpha(alpha)?;
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "rates must be positive, got a = {a}, b = {b}"
        )));
    }
    let excess = |dt: f64| stability_r0(ScaledStepPoint::from_step(dt, a, b), alpha) + 1.0;

    // excess(0+) = 2 and R_0 is strictly decreasing along the ray
    let mut lo = 0.0;
    let mut hi = 1.0 / (a + b);
    while excess(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > CRITICAL_DT_SEARCH_LIMIT {
            return Err(Error::BracketFailure {
                upper: CRITICAL_DT_SEARCH_LIMIT,
            });
        }
    }
    Ok(bisect(excess, lo, hi, CRITICAL_DT_TOLERANCE))
}

/// Root of a function positive at `lo` and nonpositive at `hi`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// MPRK22ncs(alpha) stability sampled on the lattice
/// `z_min + k (-z_min) / resolution`, `k = 0..resolution`, in both axes.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRaster {
    pub alpha: f64,
    pub z_min: f64,
    pub resolution: usize,
    /// Row-major in `z_b`: `cells[i_b * resolution + i_a]`.
    cells: Vec<bool>,
}

impl RegionRaster {
    pub fn coordinate(&self, k: usize) -> f64 {
        lattice_coordinate(self.z_min, self.resolution, k)
    }

    pub fn spacing(&self) -> f64 {
        -self.z_min / self.resolution as f64
    }

    pub fn is_stable(&self, i_a: usize, i_b: usize) -> bool {
        self.cells[i_b * self.resolution + i_a]
    }

    pub fn stable_fraction(&self) -> f64 {
        self.cells.iter().filter(|&&c| c).count() as f64 / self.cells.len() as f64
    }

    /// `(z_a, z_b, stable)` for every lattice point, `z_a` varying fastest.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, bool)> + '_ {
        self.cells.iter().enumerate().map(move |(idx, &stable)| {
            let (i_b, i_a) = (idx / self.resolution, idx % self.resolution);
            (self.coordinate(i_a), self.coordinate(i_b), stable)
        })
    }
}

fn lattice_coordinate(z_min: f64, resolution: usize, k: usize) -> f64 {
    z_min - z_min * (k as f64 / resolution as f64)
}

pub fn raster_region(alpha: f64, z_min: f64, resolution: usize) -> Result<RegionRaster> {
    if !(alpha >= 0.5) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be >= 1/2, got {alpha}"
        )));
    }
    if !(z_min < 0.0) || !z_min.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "z_min must be negative, got {z_min}"
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    let coords: Vec<f64> = (0..resolution)
        .map(|k| lattice_coordinate(z_min, resolution, k))
        .collect();
    let cells = coords
        .iter()
        .flat_map(|&z_b| {
            coords.iter().map(move |&z_a| {
                classify(
                    ScaledStepPoint::new(z_a, z_b),
                    alpha,
                    Variant::NonConservativeStages,
                )
                .stable
            })
        })
        .collect();
    Ok(RegionRaster {
        alpha,
        z_min,
        resolution,
        cells,
    })
}

/// Central differences `(g(y + h e_j) - g(y - h e_j)) / 2h`, column by column.
pub fn finite_difference_jacobian<F>(map: F, y: &Vector2<f64>, h: f64) -> Result<Matrix2<f64>>
where
    F: Fn(&Vector2<f64>) -> Result<Vector2<f64>>,
{
    let mut jac = Matrix2::zeros();
    for j in 0..2 {
        let mut e = Vector2::zeros();
        e[j] = h;
        let column = (map(&(y + e))? - map(&(y - e))?) / (2.0 * h);
        jac.set_column(j, &column);
    }
    Ok(jac)
}

/// Real eigenvalues of a 2x2 matrix, larger first; `None` if complex.
pub fn eigenvalues_2x2(m: &Matrix2<f64>) -> Option<(f64, f64)> {
    let half_gap = 0.5 * (m[(0, 0)] - m[(1, 1)]);
    let disc = half_gap * half_gap + m[(0, 1)] * m[(1, 0)];
    if disc < 0.0 {
        return None;
    }
    let mean = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let root = disc.sqrt();
    Some((mean + root, mean - root))
}

/// Diagonal of `S^-1 J S` for `S = (y*, (1, -1))` together with its largest
/// off-diagonal magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCheck {
    /// Eigenvalue along the fixed-point ray; 1 for a conservative map.
    pub eig_fixed: f64,
    /// Eigenvalue along the conservation direction.
    pub eig_r: f64,
    pub diag_residual: f64,
}

pub fn spectral_check(jac: &Matrix2<f64>, y_star: &Vector2<f64>) -> SpectralCheck {
    let s = Matrix2::from_columns(&[*y_star, conservation_direction()]);
    // det = -(y1 + y2) < 0 for positive y*
    let det = s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(1, 0)];
    let s_inv = Matrix2::new(s[(1, 1)], -s[(0, 1)], -s[(1, 0)], s[(0, 0)]) / det;
    let d = s_inv * jac * s;
    SpectralCheck {
        eig_fixed: d[(0, 0)],
        eig_r: d[(1, 1)],
        diag_residual: d[(0, 1)].abs().max(d[(1, 0)].abs()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn r1_examples() {
        for alpha in [0.5, 1.0, 3.0] {
            assert_eq!(stability_r1(ScaledStepPoint::new(0.0, 0.0), alpha), 1.0);
        }
        assert_relative_eq!(
            stability_r1(ScaledStepPoint::new(-0.5, -0.5), 1.0),
            0.375,
            max_relative = 1e-15
        );
    }

    #[test]
    fn r0_examples() {
        assert_eq!(stability_r0(ScaledStepPoint::new(0.0, 0.0), 0.7), 1.0);
        assert_relative_eq!(
            stability_r0(ScaledStepPoint::new(-0.5, -0.5), 1.0),
            1.0 / 3.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            stability_r0(ScaledStepPoint::new(-1.0, -1.0), 0.5),
            -1.0 / 9.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn classify_examples() {
        let v = classify(
            ScaledStepPoint::new(-6.06, -6.06),
            0.5,
            Variant::NonConservativeStages,
        );
        assert!(!v.stable && !v.on_boundary && v.r_value < -1.0);
        let v = classify(
            ScaledStepPoint::new(-1.0, -1.0),
            0.5,
            Variant::NonConservativeStages,
        );
        assert!(v.stable);
        assert_relative_eq!(v.r_value, -1.0 / 9.0, max_relative = 1e-14);
        for pt in [(-1e-3, -4.0), (-50.0, -50.0), (-1e4, -3e3)] {
            let v = classify(
                ScaledStepPoint::new(pt.0, pt.1),
                0.5,
                Variant::ConservativeStages,
            );
            assert!(v.stable);
        }
    }

    #[test]
    fn on_boundary_is_not_stable() {
        // on the boundary R_0 = -1 up to rounding
        let dt = critical_time_step(25.0, 25.0, 0.5).unwrap();
        let v = classify(
            ScaledStepPoint::from_step(dt, 25.0, 25.0),
            0.5,
            Variant::NonConservativeStages,
        );
        assert!(v.on_boundary);
        assert!(!v.stable);
    }

    #[test]
    fn boundary_crosses_diagonal_at_known_points() {
        let xi = -(3.0 + 17f64.sqrt()) / 2.0;
        assert_relative_eq!(boundary_f(xi, 0.5).unwrap(), xi, max_relative = 1e-12);
        let xi = -(9.0 + 101f64.sqrt()) / 2.0;
        assert_relative_eq!(boundary_f(xi, 0.8).unwrap(), xi, max_relative = 1e-12);
    }

    #[test]
    fn boundary_domain_errors() {
        assert!(matches!(boundary_f(-3.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(boundary_f(-3.0, 0.4), Err(Error::Domain(_))));
        assert!(matches!(boundary_f(0.0, 0.6), Err(Error::Domain(_))));
        // alpha = 0.8: no boundary right of -1.875
        assert_relative_eq!(
            boundary_asymptote(0.8).unwrap(),
            -1.875,
            max_relative = 1e-14
        );
        assert!(matches!(
            boundary_f(-1.0, 0.8),
            Err(Error::NoBoundary { .. })
        ));
        assert!(boundary_f(-2.0, 0.8).is_ok());
    }

    #[test]
    fn critical_time_step_examples() {
        let dt = critical_time_step(25.0, 25.0, 0.5).unwrap();
        assert!((dt - (17f64.sqrt() + 3.0) / 50.0).abs() < 1e-10);
        let dt = critical_time_step(25.0, 25.0, 0.8).unwrap();
        assert!((dt - (101f64.sqrt() + 9.0) / 50.0).abs() < 1e-10);
        assert!(matches!(
            critical_time_step(1.0, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(critical_time_step(0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn critical_time_step_scales_inversely_with_rates() {
        for (a, b, alpha) in [(25.0, 25.0, 0.5), (3.0, 40.0, 0.8), (0.7, 0.1, 0.6)] {
            let base = critical_time_step(a, b, alpha).unwrap();
            let scaled = critical_time_step(10.0 * a, 10.0 * b, alpha).unwrap();
            assert!((scaled - base / 10.0).abs() < 1e-11, "{a} {b} {alpha}");
        }
    }

    #[test]
    fn critical_step_lies_on_boundary_curve() {
        for (a, b, alpha) in [(25.0, 25.0, 0.5), (3.0, 40.0, 0.8), (10.0, 1.0, 0.95)] {
            let dt = critical_time_step(a, b, alpha).unwrap();
            let f = boundary_f(-dt * a, alpha).unwrap();
            assert!(
                (f + dt * b).abs() < 1e-8 * (1.0 + dt * b),
                "{a} {b} {alpha}"
            );
        }
    }

    #[test]
    fn raster_examples() {
        let r = raster_region(1.0, -50.0, 100).unwrap();
        assert_eq!(r.stable_fraction(), 1.0);

        let r = raster_region(0.5, -50.0, 100).unwrap();
        assert_eq!(r.coordinate(50), -25.0);
        assert_eq!(r.coordinate(98), -1.0);
        assert!(!r.is_stable(50, 50));
        assert!(r.is_stable(98, 98));
        assert!(raster_region(0.5, -50.0, 1).is_err());
        assert!(raster_region(0.5, 0.0, 10).is_err());
    }

    #[test]
    fn raster_columns_switch_once_at_boundary() {
        for alpha in [0.5, 0.65, 0.8, 0.95] {
            let r = raster_region(alpha, -50.0, 80).unwrap();
            let h = r.spacing();
            for i_a in 0..r.resolution {
                let z_a = r.coordinate(i_a);
                let column: Vec<bool> =
                    (0..r.resolution).map(|i_b| r.is_stable(i_a, i_b)).collect();
                // unstable rows (deep negative z_b) first, then stable rows
                let first_stable = column.iter().position(|&s| s).unwrap_or(r.resolution);
                assert!(
                    column[first_stable..].iter().all(|&s| s),
                    "alpha {alpha}, column {i_a}"
                );
                match boundary_f(z_a, alpha) {
                    Ok(f) if f >= r.z_min => {
                        assert!(first_stable > 0);
                        let below = r.coordinate(first_stable - 1);
                        let above = r.coordinate(first_stable);
                        assert!(
                            below <= f + 1e-9 && f <= above + 1e-9,
                            "alpha {alpha}, z_a {z_a}, f {f}"
                        );
                        assert!(above - below <= h * (1.0 + 1e-12));
                    }
                    Ok(_) | Err(Error::NoBoundary { .. }) => assert_eq!(first_stable, 0),
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }

    #[test]
    fn finite_difference_of_identity() {
        let y = Vector2::new(0.3, 4.0);
        let jac = finite_difference_jacobian(|v| Ok(*v), &y, 1e-6).unwrap();
        assert_relative_eq!(jac, Matrix2::identity(), epsilon = 1e-9);
    }

    #[test]
    fn spectral_check_of_identity() {
        let s = spectral_check(&Matrix2::identity(), &Vector2::new(1.0, 1.0));
        assert_eq!((s.eig_fixed, s.eig_r, s.diag_residual), (1.0, 1.0, 0.0));
    }

    #[test]
    fn eigenvalues_examples() {
        let (l1, l2) = eigenvalues_2x2(&Matrix2::new(2.0, 1.0, 1.0, 2.0)).unwrap();
        assert_relative_eq!(l1, 3.0);
        assert_relative_eq!(l2, 1.0);
        assert!(eigenvalues_2x2(&Matrix2::new(0.0, -1.0, 1.0, 0.0)).is_none());
    }
}
