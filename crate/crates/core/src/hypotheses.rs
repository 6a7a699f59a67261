//! Executable form of the standing assumptions on the data: weight signs,
//! ordered control bounds, nonnegativity and growth of P, and the structural
//! bounds on the split potential. Constants are estimated on a sampled range.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{ModelParams, PotentialSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
    /// sup |P′(s)| / (1 + |s|^(q−1))
    pub alpha1: f64,
    /// sup |F1″(s)|
    pub alpha2: f64,
    /// Largest α₃ with α₃(1 + |s|^(ρ−2)) ≤ F0″(s) on the samples.
    pub alpha3: f64,
    /// Smallest α₄ with F0″(s) ≤ α₄(1 + |s|^(ρ−2)) on the samples.
    pub alpha4: f64,
    /// Slope used in the coercivity bound F(s) ≥ α₅|s| − α₆.
    pub alpha5: f64,
    pub alpha6: f64,
    pub q: f64,
    pub rho: f64,
    /// L²(Q) radius of the admissible set (informational).
    pub control_radius: f64,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "hypothesis={} status={} detail=\"{}\"",
                c.name,
                if c.passed { "pass" } else { "fail" },
                c.detail
            )?;
        }
        write!(
            f,
            "alpha1={:?} alpha2={:?} alpha3={:?} alpha4={:?} alpha5={:?} alpha6={:?} q={:?} rho={:?} radius={:?}",
            self.alpha1,
            self.alpha2,
            self.alpha3,
            self.alpha4,
            self.alpha5,
            self.alpha6,
            self.q,
            self.rho,
            self.control_radius
        )
    }
}

fn samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut s: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    // Landmarks where the extremal ratios are attained for the shipped nonlinearities.
    for x in [0.0, -1.0, 1.0] {
        if lo <= x && x <= hi {
            s.push(x);
        }
    }
    s.sort_by(f64::total_cmp);
    s.dedup();
    s
}

pub fn check_hypotheses(
    params: &ModelParams,
    sample_range: (f64, f64),
    n_samples: usize,
) -> Result<HypothesisReport> {
    let (lo, hi) = sample_range;
    if n_samples < 100 {
        return Err(Error::usage(format!(
            "need at least 100 samples, got {n_samples}"
        )));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::usage(format!("invalid sample range [{lo}, {hi}]")));
    }
    let s = samples(lo, hi, n_samples);
    let mut checks = Vec::new();

    let w = &params.weights;
    let nonneg = w.beta_q >= 0.0 && w.beta_omega >= 0.0 && w.beta_u >= 0.0;
    let nonzero = w.beta_q != 0.0 || w.beta_omega != 0.0 || w.beta_u != 0.0;
    checks.push(HypothesisCheck {
        name: "H1",
        passed: nonneg && nonzero,
        detail: format!(
            "beta_q={:?} beta_omega={:?} beta_u={:?} nonnegative={nonneg} not_all_zero={nonzero}",
            w.beta_q, w.beta_omega, w.beta_u
        ),
    });

    let lower = params.bounds.lower.values();
    let upper = params.bounds.upper.values();
    let inverted = lower.iter().zip(upper).filter(|(l, u)| l > u).count();
    checks.push(HypothesisCheck {
        name: "H2",
        passed: inverted == 0,
        detail: format!("cells with u_min > u_max: {inverted}"),
    });

    let p = &params.proliferation;
    let q = p.growth_exponent();
    let min_p = s.iter().map(|&x| p.value(x)).fold(f64::INFINITY, f64::min);
    let alpha1 = s
        .iter()
        .map(|&x| p.slope(x).abs() / (1.0 + x.abs().powf(q - 1.0)))
        .fold(0.0, f64::max);
    let q_ok = (1.0..=4.0).contains(&q);
    checks.push(HypothesisCheck {
        name: "H4",
        passed: min_p >= 0.0 && alpha1.is_finite() && q_ok,
        detail: format!("min_P={min_p:?} alpha1={alpha1:?} q={q:?}"),
    });

    let (h5, alphas) = check_potential(&params.potential, &s);
    checks.push(h5);

    let n = params.n_steps() as f64;
    let radius_sq: f64 = lower
        .iter()
        .zip(upper)
        .map(|(l, u)| l.abs().max(u.abs()).powi(2))
        .sum::<f64>()
        * params.grid.cell_volume()
        * params.tau
        * n;

    Ok(HypothesisReport {
        checks,
        alpha1,
        alpha2: alphas[0],
        alpha3: alphas[1],
        alpha4: alphas[2],
        alpha5: alphas[3],
        alpha6: alphas[4],
        q,
        rho: PotentialSpec::RHO,
        control_radius: radius_sq.sqrt(),
    })
}

fn check_potential(f: &PotentialSpec, s: &[f64]) -> (HypothesisCheck, [f64; 5]) {
    let rho = PotentialSpec::RHO;
    let alpha2 = s
        .iter()
        .map(|&x| f.concave_second(x).abs())
        .fold(0.0, f64::max);
    let ratios: Vec<f64> = s
        .iter()
        .map(|&x| f.convex_second(x) / (1.0 + x.abs().powf(rho - 2.0)))
        .collect();
    let alpha3 = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let alpha4 = ratios.iter().copied().fold(0.0, f64::max);
    let alpha5 = f.well_scale;
    let slack: Vec<f64> = s.iter().map(|&x| alpha5 * x.abs() - f.value(x)).collect();
    let alpha6 = slack.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Coercive growth: F(s) − α₅|s| must not be at its minimum at either end of the range.
    let inner_min = slack.iter().copied().fold(f64::INFINITY, |m, v| m.min(-v));
    let grows = -slack[0] > inner_min && -slack[slack.len() - 1] > inner_min;
    let passed = alpha2.is_finite()
        && alpha3 > 0.0
        && alpha4.is_finite()
        && (2.0..6.0).contains(&rho)
        && alpha6.is_finite()
        && grows;
    let check = HypothesisCheck {
        name: "H5",
        passed,
        detail: format!(
            "alpha2={alpha2:?} alpha3={alpha3:?} alpha4={alpha4:?} alpha5={alpha5:?} alpha6={alpha6:?} rho={rho:?}"
        ),
    };
    (check, [alpha2, alpha3, alpha4, alpha5, alpha6])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, Grid};
    use crate::model::{CostWeights, ProliferationSpec};

    fn params() -> ModelParams {
        ModelParams::new(Grid::new_1d(8, 1.0).unwrap())
    }

    #[test]
    fn defaults_pass_with_unit_alpha3() {
        let r = check_hypotheses(&params(), (-5.0, 5.0), 1001).unwrap();
        assert!(r.all_passed(), "{r}");
        assert_eq!(r.alpha3, 1.0);
        assert_eq!(r.alpha2, 2.0);
        assert_eq!(r.q, 2.0);
    }

    #[test]
    fn sigmoid_passes() {
        let mut p = params();
        p.proliferation = ProliferationSpec::sigmoid(1.0, 2.0, 0.0).unwrap();
        let r = check_hypotheses(&p, (-5.0, 5.0), 500).unwrap();
        assert!(r.all_passed(), "{r}");
        assert_eq!(r.q, 1.0);
    }

    #[test]
    fn zero_weights_fail_h1() {
        let mut p = params();
        p.weights = CostWeights::new(0.0, 0.0, 0.0);
        let r = check_hypotheses(&p, (-5.0, 5.0), 200).unwrap();
        assert!(!r.check("H1").unwrap().passed);
        assert!(r.check("H4").unwrap().passed);
    }

    #[test]
    fn sign_indefinite_p_fails_h4() {
        let mut p = params();
        p.proliferation = ProliferationSpec::Custom {
            name: "identity",
            value: |s| s,
            slope: |_| 1.0,
            q: 1.0,
        };
        let r = check_hypotheses(&p, (-5.0, 5.0), 200).unwrap();
        assert!(!r.check("H4").unwrap().passed);
        assert!(!r.all_passed());
    }

    #[test]
    fn inverted_bounds_fail_h2() {
        let mut p = params();
        let g = p.grid;
        p.bounds.lower = Field::constant(g, 2.0);
        let r = check_hypotheses(&p, (-5.0, 5.0), 200).unwrap();
        assert!(!r.check("H2").unwrap().passed);
    }

    #[test]
    fn too_few_samples_is_usage_error() {
        assert!(check_hypotheses(&params(), (-5.0, 5.0), 99).is_err());
        assert!(check_hypotheses(&params(), (5.0, -5.0), 200).is_err());
    }
}
