//! Nonlinearities, cost weights, bounds, and the parameter bundle shared by
//! the forward, sensitivity, and optimizer modules.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// Coupling constant in the reaction term P(φ)(σ − δμ). Fixed to one.
pub const DELTA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    QuarticDoubleWell,
}

/// Double-well potential F(s) = w·(s² − 1)²/4, split as F = F0 + F1 with
/// convex F0(s) = w·(s⁴/4 + s²/2) and F1(s) = w·(1/4 − s²) of bounded curvature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub well_scale: f64,
}

impl PotentialSpec {
    /// Growth exponent of F0″; F0″(s) ~ |s|^(ρ−2).
    pub const RHO: f64 = 4.0;

    pub fn quartic(well_scale: f64) -> Result<Self> {
        if !(well_scale.is_finite() && well_scale > 0.0) {
            return Err(Error::usage(format!(
                "well_scale must be positive, got {well_scale}"
            )));
        }
        Ok(Self {
            kind: PotentialKind::QuarticDoubleWell,
            well_scale,
        })
    }

    pub fn value(&self, s: f64) -> f64 {
        let a = s * s - 1.0;
        self.well_scale * 0.25 * a * a
    }

    pub fn first(&self, s: f64) -> f64 {
        self.well_scale * (s * s * s - s)
    }

    pub fn second(&self, s: f64) -> f64 {
        self.well_scale * (3.0 * s * s - 1.0)
    }

    pub fn third(&self, s: f64) -> f64 {
        self.well_scale * 6.0 * s
    }

    pub fn convex_part(&self, s: f64) -> f64 {
        let s2 = s * s;
        self.well_scale * (0.25 * s2 * s2 + 0.5 * s2)
    }

    pub fn concave_part(&self, s: f64) -> f64 {
        self.well_scale * (0.25 - s * s)
    }

    pub fn convex_second(&self, s: f64) -> f64 {
        self.well_scale * (3.0 * s * s + 1.0)
    }

    pub fn concave_second(&self, _s: f64) -> f64 {
        -2.0 * self.well_scale
    }
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self {
            kind: PotentialKind::QuarticDoubleWell,
            well_scale: 1.0,
        }
    }
}

/// F and its derivatives up to third order.
pub fn f_deriv(spec: &PotentialSpec, order: u32, s: f64) -> Result<f64> {
    match order {
        0 => Ok(spec.value(s)),
        1 => Ok(spec.first(s)),
        2 => Ok(spec.second(s)),
        3 => Ok(spec.third(s)),
        _ => Err(Error::usage(format!(
            "potential derivative order must be 0..=3, got {order}"
        ))),
    }
}

/// Proliferation function P.
#[derive(Debug, Clone, Copy)]
pub enum ProliferationSpec {
    /// P(s) = p0·(1 + s²); satisfies the growth bound with q = 2.
    Quadratic { p0: f64 },
    /// P(s) = p0·(1 + tanh(k·s))/2 + floor; bounded slope, q = 1.
    Sigmoid { p0: f64, steepness: f64, floor: f64 },
    /// User-supplied P with its derivative and growth exponent q.
    Custom {
        name: &'static str,
        value: fn(f64) -> f64,
        slope: fn(f64) -> f64,
        q: f64,
    },
}

impl ProliferationSpec {
    pub fn quadratic(p0: f64) -> Result<Self> {
        if !(p0.is_finite() && p0 > 0.0) {
            return Err(Error::usage(format!("p0 must be positive, got {p0}")));
        }
        Ok(Self::Quadratic { p0 })
    }

    pub fn sigmoid(p0: f64, steepness: f64, floor: f64) -> Result<Self> {
        if !(p0.is_finite() && p0 > 0.0) {
            return Err(Error::usage(format!("p0 must be positive, got {p0}")));
        }
        if !(steepness.is_finite() && steepness > 0.0) {
            return Err(Error::usage(format!(
                "steepness must be positive, got {steepness}"
            )));
        }
        if !(floor.is_finite() && floor >= 0.0) {
            return Err(Error::usage(format!(
                "p_floor must be nonnegative, got {floor}"
            )));
        }
        Ok(Self::Sigmoid {
            p0,
            steepness,
            floor,
        })
    }

    pub fn value(&self, s: f64) -> f64 {
        match *self {
            Self::Quadratic { p0 } => p0 * (1.0 + s * s),
            Self::Sigmoid {
                p0,
                steepness,
                floor,
            } => 0.5 * p0 * (1.0 + (steepness * s).tanh()) + floor,
            Self::Custom { value, .. } => value(s),
        }
    }

    pub fn slope(&self, s: f64) -> f64 {
        match *self {
            Self::Quadratic { p0 } => 2.0 * p0 * s,
            Self::Sigmoid { p0, steepness, .. } => {
                let sech = 1.0 / (steepness * s).cosh();
                0.5 * p0 * steepness * sech * sech
            }
            Self::Custom { slope, .. } => slope(s),
        }
    }

    /// Exponent q in |P′(s)| ≤ α₁(1 + |s|^(q−1)).
    pub fn growth_exponent(&self) -> f64 {
        match *self {
            Self::Quadratic { .. } => 2.0,
            Self::Sigmoid { .. } => 1.0,
            Self::Custom { q, .. } => q,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Quadratic { .. } => "quadratic",
            Self::Sigmoid { .. } => "sigmoid",
            Self::Custom { name, .. } => name,
        }
    }
}

impl Default for ProliferationSpec {
    fn default() -> Self {
        Self::Quadratic { p0: 1.0 }
    }
}

/// P and P′.
pub fn p_deriv(spec: &ProliferationSpec, order: u32, s: f64) -> Result<f64> {
    match order {
        0 => Ok(spec.value(s)),
        1 => Ok(spec.slope(s)),
        _ => Err(Error::usage(format!(
            "proliferation derivative order must be 0 or 1, got {order}"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostWeights {
    pub beta_q: f64,
    pub beta_omega: f64,
    pub beta_u: f64,
}

impl CostWeights {
    pub fn new(beta_q: f64, beta_omega: f64, beta_u: f64) -> Self {
        Self {
            beta_q,
            beta_omega,
            beta_u,
        }
    }
}

/// Pointwise box constraints u_min ≤ u ≤ u_max, constant in time.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlBounds {
    pub lower: Field,
    pub upper: Field,
}

impl ControlBounds {
    pub fn new(lower: Field, upper: Field) -> Result<Self> {
        lower.grid().check_same(upper.grid())?;
        if let Some(k) = lower
            .values()
            .iter()
            .zip(upper.values())
            .position(|(lo, hi)| lo > hi)
        {
            return Err(Error::usage(format!(
                "u_min > u_max at cell {k} ({} > {})",
                lower.values()[k],
                upper.values()[k]
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn constant(grid: Grid, lower: f64, upper: f64) -> Result<Self> {
        Self::new(Field::constant(grid, lower), Field::constant(grid, upper))
    }

    /// Cellwise clamp into the box.
    pub fn clamp(&self, u: &Field) -> Field {
        let v = u
            .values()
            .iter()
            .zip(self.lower.values().iter().zip(self.upper.values()))
            .map(|(&x, (&lo, &hi))| lo.max(x.min(hi)))
            .collect();
        Field::from_vec(*u.grid(), v)
    }

    pub fn contains(&self, u: &Field) -> bool {
        u.values()
            .iter()
            .zip(self.lower.values().iter().zip(self.upper.values()))
            .all(|(&x, (&lo, &hi))| lo <= x && x <= hi)
    }
}

/// Tracking target φ_Q, constant in time or given per time level 0..=N.
#[derive(Debug, Clone, PartialEq)]
pub enum TrackingTarget {
    Constant(Field),
    PerLevel(Vec<Field>),
}

impl TrackingTarget {
    pub fn at(&self, level: usize) -> &Field {
        match self {
            Self::Constant(f) => f,
            Self::PerLevel(levels) => &levels[level],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub overflow_guard: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            cg_tol: 1e-12,
            cg_max_iter: 5000,
            overflow_guard: 1e6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelParams {
    pub grid: Grid,
    pub potential: PotentialSpec,
    pub proliferation: ProliferationSpec,
    pub weights: CostWeights,
    pub t_final: f64,
    pub tau: f64,
    pub bounds: ControlBounds,
    pub phi_q: TrackingTarget,
    pub phi_omega: Field,
    /// Stabilization constant S of the linear IMEX splitting.
    pub stabilization: f64,
    pub solver: SolverOptions,
}

impl ModelParams {
    /// Defaults: unit quartic well, quadratic P with p0 = 1, β = (1, 0, 0),
    /// T = 0.1, τ = 1e−3, bounds [−1, 1], targets ≡ 0, automatic S.
    pub fn new(grid: Grid) -> Self {
        let potential = PotentialSpec::default();
        Self {
            grid,
            potential,
            proliferation: ProliferationSpec::default(),
            weights: CostWeights::new(1.0, 0.0, 0.0),
            t_final: 0.1,
            tau: 1e-3,
            bounds: ControlBounds {
                lower: Field::constant(grid, -1.0),
                upper: Field::constant(grid, 1.0),
            },
            phi_q: TrackingTarget::Constant(Field::zeros(grid)),
            phi_omega: Field::zeros(grid),
            stabilization: auto_stabilization(&potential),
            solver: SolverOptions::default(),
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.tau).round() as usize
    }

    /// Enforces the parameter invariants (nonnegative, not-all-zero weights,
    /// ordered bounds, positive times, fields on the model grid).
    pub fn validate(&self) -> Result<()> {
        let w = &self.weights;
        for (name, b) in [
            ("beta_q", w.beta_q),
            ("beta_omega", w.beta_omega),
            ("beta_u", w.beta_u),
        ] {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::usage(format!(
                    "{name} must be nonnegative (H1), got {b}"
                )));
            }
        }
        if w.beta_q == 0.0 && w.beta_omega == 0.0 && w.beta_u == 0.0 {
            return Err(Error::usage("cost weights must not all be zero (H1)"));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::usage(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::usage(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        let n = self.n_steps();
        if n == 0 || ((n as f64) * self.tau - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(Error::usage(format!(
                "t_final = {} is not a positive integer multiple of tau = {}",
                self.t_final, self.tau
            )));
        }
        if !(self.stabilization.is_finite() && self.stabilization >= 0.0) {
            return Err(Error::usage(format!(
                "stabilization must be >= 0, got {}",
                self.stabilization
            )));
        }
        if !(self.solver.cg_tol > 0.0) || self.solver.cg_max_iter == 0 {
            return Err(Error::usage("cg_tol must be positive and cg_maxit nonzero"));
        }
        if !(self.solver.overflow_guard > 0.0) {
            return Err(Error::usage("overflow_guard must be positive"));
        }
        let bounds = ControlBounds::new(self.bounds.lower.clone(), self.bounds.upper.clone())?;
        self.grid.check_same(bounds.lower.grid())?;
        self.grid.check_same(self.phi_omega.grid())?;
        match &self.phi_q {
            TrackingTarget::Constant(f) => self.grid.check_same(f.grid())?,
            TrackingTarget::PerLevel(levels) => {
                if levels.len() != n + 1 {
                    return Err(Error::usage(format!(
                        "per-level phi_q needs {} levels, got {}",
                        n + 1,
                        levels.len()
                    )));
                }
                for f in levels {
                    self.grid.check_same(f.grid())?;
                }
            }
        }
        Ok(())
    }
}

/// Default stabilization S = w·max(2, 3·φ_max² − 1) with φ_max = 1.5, i.e.
/// the largest F″ on |φ| ≤ 1.5.
pub fn auto_stabilization(potential: &PotentialSpec) -> f64 {
    const PHI_MAX: f64 = 1.5;
    potential.well_scale * f64::max(2.0, 3.0 * PHI_MAX * PHI_MAX - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_well_minima_and_curvature() {
        let f = PotentialSpec::default();
        assert_eq!(f_deriv(&f, 1, 1.0).unwrap(), 0.0);
        assert_eq!(f_deriv(&f, 1, -1.0).unwrap(), 0.0);
        assert_eq!(f_deriv(&f, 2, 0.0).unwrap(), -1.0);
        assert_eq!(f_deriv(&f, 2, 1.0).unwrap(), 2.0);
        assert!(f_deriv(&f, 4, 0.0).is_err());
    }

    #[test]
    fn split_is_exact_at_integers() {
        let f = PotentialSpec::default();
        for s in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            assert_eq!(f.convex_part(s) + f.concave_part(s), f.value(s));
        }
    }

    #[test]
    fn third_derivative_matches_central_difference() {
        let f = PotentialSpec::quartic(1.7).unwrap();
        for s in [-1.3, -0.2, 0.4, 2.1] {
            let mut last = f64::INFINITY;
            for d in [1e-2, 5e-3, 2.5e-3] {
                let fd = (f.second(s + d) - f.second(s - d)) / (2.0 * d);
                let err = (fd - f.third(s)).abs();
                // F″ is quadratic, so the central difference is exact up to rounding.
                assert!(err < 1e-9, "s={s} d={d} err={err}");
                last = last.min(err);
            }
            assert!(last.is_finite());
        }
    }

    #[test]
    fn proliferation_values() {
        let p = ProliferationSpec::quadratic(0.5).unwrap();
        assert_eq!(p_deriv(&p, 0, 0.0).unwrap(), 0.5);
        assert_eq!(p_deriv(&p, 1, 0.0).unwrap(), 0.0);
        let p = ProliferationSpec::quadratic(1.0).unwrap();
        assert_eq!(p_deriv(&p, 0, 2.0).unwrap(), 5.0);
        assert_eq!(p_deriv(&p, 1, 2.0).unwrap(), 4.0);
        assert!(p_deriv(&p, 2, 0.0).is_err());
    }

    #[test]
    fn sigmoid_is_nonnegative_with_sech_slope() {
        let p = ProliferationSpec::sigmoid(1.0, 1.0, 0.0).unwrap();
        for i in 0..=2000 {
            let s = -10.0 + i as f64 * 0.01;
            assert!(p.value(s) >= 0.0);
            let sech = 1.0 / s.cosh();
            assert!((p.slope(s) - 0.5 * sech * sech).abs() < 1e-15);
            assert!(p.slope(s) >= 0.0);
        }
    }

    #[test]
    fn bounds_reject_inverted_box() {
        let g = Grid::new_1d(4, 1.0).unwrap();
        assert!(ControlBounds::constant(g, 1.0, 0.0).is_err());
        let b = ControlBounds::constant(g, 0.0, 1.0).unwrap();
        let u = Field::new(g, vec![-1.0, 0.5, 2.0, 1.0]).unwrap();
        assert_eq!(b.clamp(&u).values(), &[0.0, 0.5, 1.0, 1.0]);
        assert!(!b.contains(&u));
        assert!(b.contains(&b.clamp(&u)));
    }

    #[test]
    fn params_validate() {
        let g = Grid::new_1d(8, 1.0).unwrap();
        let mut p = ModelParams::new(g);
        assert_eq!(p.n_steps(), 100);
        p.validate().unwrap();
        p.weights = CostWeights::new(0.0, 0.0, 0.0);
        assert!(p.validate().is_err());
        p.weights = CostWeights::new(-1.0, 0.0, 1.0);
        assert!(p.validate().is_err());
        p.weights = CostWeights::new(1.0, 0.0, 0.0);
        p.tau = 0.03;
        assert!(p.validate().is_err());
    }

    #[test]
    fn auto_stabilization_default() {
        assert_eq!(auto_stabilization(&PotentialSpec::default()), 5.75);
    }
}
