//! Smooth initial and target fields, named so they can appear in config files.
//!
//! Text form: a preset name followed by `key=value` arguments, e.g.
//! `tanh_ball radius=4 eps=1` or `filtered_noise seed=7 amplitude=0.1`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cg::ShiftedOperator;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Constant(f64),
    /// tanh((radius − |x − center|)/(√2·eps)); center defaults to the box centre.
    TanhBall {
        center: Option<[f64; 2]>,
        radius: f64,
        eps: f64,
    },
    /// Seeded uniform noise in mean ± amplitude, smoothed by `passes`
    /// applications of (I − κΔ)⁻¹.
    FilteredNoise {
        seed: u64,
        amplitude: f64,
        mean: f64,
        kappa: f64,
        passes: usize,
    },
}

impl Preset {
    pub fn tanh_ball(radius: f64, eps: f64) -> Self {
        Preset::TanhBall {
            center: None,
            radius,
            eps,
        }
    }

    pub fn noise(seed: u64, amplitude: f64) -> Self {
        Preset::FilteredNoise {
            seed,
            amplitude,
            mean: 0.0,
            kappa: 1.0,
            passes: 2,
        }
    }

    /// Parses `name key=value ...`. The constant preset also accepts a bare
    /// number: `constant 0.3`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = text.split_whitespace();
        let name = parts.next().ok_or_else(|| Error::usage("empty preset"))?;
        let args: Vec<&str> = parts.collect();
        let mut kv = Vec::new();
        for a in &args {
            match a.split_once('=') {
                Some((k, v)) => kv.push((k, v)),
                None if name == "constant" && args.len() == 1 => kv.push(("value", *a)),
                None => {
                    return Err(Error::usage(format!(
                        "preset argument `{a}` is not key=value"
                    )))
                }
            }
        }
        let num = |key: &str| -> Result<Option<f64>> {
            match kv.iter().find(|(k, _)| *k == key) {
                Some((_, v)) => v.parse::<f64>().map(Some).map_err(|_| {
                    Error::usage(format!("preset argument {key}={v} is not a number"))
                }),
                None => Ok(None),
            }
        };
        let allowed: &[&str] = match name {
            "constant" => &["value"],
            "tanh_ball" => &["cx", "cy", "radius", "eps"],
            "filtered_noise" => &["seed", "amplitude", "mean", "kappa", "passes"],
            other => return Err(Error::usage(format!("unknown preset `{other}`"))),
        };
        if let Some((k, _)) = kv.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(Error::usage(format!(
                "preset `{name}` has no argument `{k}`"
            )));
        }
        let preset = match name {
            "constant" => Preset::Constant(
                num("value")?.ok_or_else(|| Error::usage("constant preset needs a value"))?,
            ),
            "tanh_ball" => {
                let center = match (num("cx")?, num("cy")?) {
                    (None, None) => None,
                    (cx, cy) => Some([cx.unwrap_or(0.0), cy.unwrap_or(0.0)]),
                };
                Preset::TanhBall {
                    center,
                    radius: num("radius")?.unwrap_or(1.0),
                    eps: num("eps")?.unwrap_or(1.0),
                }
            }
            _ => {
                let int = |key: &str, default: u64| -> Result<u64> {
                    match kv.iter().find(|(k, _)| *k == key) {
                        Some((_, v)) => v.parse::<u64>().map_err(|_| {
                            Error::usage(format!("preset argument {key}={v} is not an integer"))
                        }),
                        None => Ok(default),
                    }
                };
                Preset::FilteredNoise {
                    seed: int("seed", 0)?,
                    amplitude: num("amplitude")?.unwrap_or(0.1),
                    mean: num("mean")?.unwrap_or(0.0),
                    kappa: num("kappa")?.unwrap_or(1.0),
                    passes: int("passes", 2)? as usize,
                }
            }
        };
        Ok(preset)
    }

    /// Replaces the seed of a noise preset; other presets are unchanged.
    pub fn with_seed(&self, new_seed: u64) -> Self {
        match self {
            Preset::FilteredNoise {
                amplitude,
                mean,
                kappa,
                passes,
                ..
            } => Preset::FilteredNoise {
                seed: new_seed,
                amplitude: *amplitude,
                mean: *mean,
                kappa: *kappa,
                passes: *passes,
            },
            other => other.clone(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Constant(c) => write!(f, "constant {c:?}"),
            Preset::TanhBall { center, radius, eps } => {
                write!(f, "tanh_ball")?;
                if let Some([cx, cy]) = center {
                    write!(f, " cx={cx:?} cy={cy:?}")?;
                }
                write!(f, " radius={radius:?} eps={eps:?}")
            }
            Preset::FilteredNoise { seed, amplitude, mean, kappa, passes } => write!(
                f,
                "filtered_noise seed={seed} amplitude={amplitude:?} mean={mean:?} kappa={kappa:?} passes={passes}"
            ),
        }
    }
}

/// Evaluates a preset on `grid`.
pub fn preset_field(preset: &Preset, grid: Grid) -> Result<Field> {
    match *preset {
        Preset::Constant(c) => {
            if !c.is_finite() {
                return Err(Error::usage("constant preset must be finite"));
            }
            Ok(Field::constant(grid, c))
        }
        Preset::TanhBall {
            center,
            radius,
            eps,
        } => {
            if !(eps > 0.0) || !(radius >= 0.0) {
                return Err(Error::usage(format!(
                    "tanh_ball needs radius >= 0 and eps > 0, got radius={radius} eps={eps}"
                )));
            }
            let [cx, cy] = center.unwrap_or([
                0.5 * grid.lx(),
                if grid.dim() == 2 {
                    0.5 * grid.ly()
                } else {
                    0.0
                },
            ]);
            let width = std::f64::consts::SQRT_2 * eps;
            Ok(Field::from_fn(grid, |x, y| {
                let dy = if grid.dim() == 2 { y - cy } else { 0.0 };
                let r = ((x - cx).powi(2) + dy * dy).sqrt();
                ((radius - r) / width).tanh()
            }))
        }
        Preset::FilteredNoise {
            seed,
            amplitude,
            mean,
            kappa,
            passes,
        } => {
            if !(kappa >= 0.0) || !amplitude.is_finite() || !mean.is_finite() {
                return Err(Error::usage(
                    "filtered_noise needs finite amplitude/mean and kappa >= 0",
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw: Vec<f64> = (0..grid.len())
                .map(|_| rng.gen_range(-1.0..=1.0) * amplitude)
                .collect();
            let mut f = Field::from_vec(grid, raw);
            let smoother = ShiftedOperator {
                grid,
                biharmonic: 0.0,
                neg_laplacian: kappa,
            };
            for _ in 0..passes {
                f = smoother.solve(&f, 1e-14, 10 * grid.len() + 1000)?;
            }
            Ok(f.map(|v| v + mean))
        }
    }
}
