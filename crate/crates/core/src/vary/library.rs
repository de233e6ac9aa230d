//! Built-in perturbation directions, selectable by name and seed.

use super::path::operator_norm;
use crate::error::{LabError, Result};
use crate::geom::ambient::{ambient_sym2, AmbientPoly, MAX_AMBIENT};
use crate::geom::{harmonic_generator, Background, GridField, ScalarField, Sym2Field};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Degree of the random ambient polynomials behind seeded directions.
pub const RANDOM_DEGREE: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionKind {
    Zero,
    /// `h = ḡ`.
    Scaling,
    /// `h = x_index ḡ`, a first eigenfunction times the metric.
    Degree1 { index: usize },
    /// `h = (x_index² - 1/(n+1)) ḡ`.
    Degree2 { index: usize },
    /// `h = u ḡ` for a seeded random ambient polynomial `u`.
    RandomTrace { seed: u64 },
    /// Pullback of a seeded random ambient matrix field.
    RandomGeneral { seed: u64 },
    /// `h = 2∇²u = L_{∇u} ḡ` for a seeded random `u`.
    Gauge { seed: u64 },
}

impl DirectionKind {
    /// Parses `zero`, `scaling`, `deg1`, `deg2`, `random-trace`, `random` or
    /// `gauge`. Harmonic directions use the last ambient coordinate.
    pub fn parse(name: &str, n: usize, seed: u64) -> Result<Self> {
        Ok(match name {
            "zero" => Self::Zero,
            "scaling" => Self::Scaling,
            "deg1" => Self::Degree1 { index: n + 1 },
            "deg2" => Self::Degree2 { index: n + 1 },
            "random-trace" => Self::RandomTrace { seed },
            "random" => Self::RandomGeneral { seed },
            "gauge" => Self::Gauge { seed },
            other => {
                return Err(LabError::Domain(format!(
                    "unknown direction '{other}'; expected zero, scaling, deg1, deg2, random-trace, random or gauge"
                )))
            }
        })
    }

    /// `h = u ḡ` for some function `u`.
    pub fn is_pure_trace(&self) -> bool {
        matches!(self, Self::Zero | Self::Scaling | Self::Degree1 { .. } | Self::Degree2 { .. } | Self::RandomTrace { .. })
    }

    /// Directions along which the second variation of the comparison
    /// functional vanishes on the round sphere.
    pub fn is_equality_case(&self) -> bool {
        matches!(self, Self::Zero | Self::Scaling | Self::Degree1 { .. })
    }
}

impl fmt::Display for DirectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "zero"),
            Self::Scaling => write!(f, "scaling"),
            Self::Degree1 { index } => write!(f, "deg1[x{index}]"),
            Self::Degree2 { index } => write!(f, "deg2[x{index}]"),
            Self::RandomTrace { seed } => write!(f, "random-trace[{seed}]"),
            Self::RandomGeneral { seed } => write!(f, "random[{seed}]"),
            Self::Gauge { seed } => write!(f, "gauge[{seed}]"),
        }
    }
}

/// A perturbation direction on a background chart.
#[derive(Debug, Clone)]
pub struct Direction {
    pub kind: DirectionKind,
    pub h: Sym2Field,
    /// The function `u` of a pure-trace direction `h = u ḡ`.
    pub potential: Option<ScalarField>,
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn normalized(bg: &Background, h: Sym2Field) -> Result<Sym2Field> {
    let norm = operator_norm(bg, &h)?;
    if norm == 0.0 {
        return Ok(h);
    }
    Ok(h.scaled(1.0 / norm))
}

impl Direction {
    pub fn build(bg: &Background, kind: DirectionKind) -> Result<Self> {
        let chart = bg.chart();
        let n = bg.n();
        let g = bg.metric().field();
        let pure = |u: ScalarField| -> Result<Self> {
            let h = g.times(&u)?;
            Ok(Self { kind, h, potential: Some(u) })
        };
        match kind {
            DirectionKind::Zero => pure(ScalarField::constant(chart, 0.0)),
            DirectionKind::Scaling => pure(ScalarField::constant(chart, 1.0)),
            DirectionKind::Degree1 { index } => pure(harmonic_generator(chart, 1, index)?),
            DirectionKind::Degree2 { index } => pure(harmonic_generator(chart, 2, index)?),
            DirectionKind::RandomTrace { seed } => {
                let poly = AmbientPoly::random(n + 1, RANDOM_DEGREE, &mut rng_for(seed, 1));
                pure(poly.field(chart))
            }
            DirectionKind::RandomGeneral { seed } => {
                let mut rng = rng_for(seed, 2);
                let m = n + 1;
                let mut entries = Vec::new();
                for a in 0..m {
                    for b in a..m {
                        let shift: f64 = rng.gen_range(-1.0..=1.0);
                        entries.push((a, b, shift, AmbientPoly::random(m, 2, &mut rng)));
                    }
                }
                let h = ambient_sym2(chart, |y, out: &mut [[f64; MAX_AMBIENT]; MAX_AMBIENT]| {
                    for (a, b, shift, p) in &entries {
                        let v = shift + p.eval(y);
                        out[*a][*b] = v;
                        out[*b][*a] = v;
                    }
                });
                Ok(Self { kind, h: normalized(bg, h)?, potential: None })
            }
            DirectionKind::Gauge { seed } => {
                let poly = AmbientPoly::random(n + 1, RANDOM_DEGREE, &mut rng_for(seed, 3));
                let h = poly.sphere_hessian(chart).scaled(2.0);
                Ok(Self { kind, h: normalized(bg, h)?, potential: None })
            }
        }
    }

    pub fn name(&self) -> String {
        self.kind.to_string()
    }
}

/// Scaling, degree-1 and degree-2 harmonic directions followed by `count`
/// seeded random pure-trace directions with seeds `seed, seed + 1, …`.
pub fn pure_trace_library(bg: &Background, seed: u64, count: usize) -> Result<Vec<Direction>> {
    let n = bg.n();
    let mut kinds = vec![
        DirectionKind::Scaling,
        DirectionKind::Degree1 { index: n + 1 },
        DirectionKind::Degree2 { index: n + 1 },
    ];
    kinds.extend((0..count as u64).map(|i| DirectionKind::RandomTrace { seed: seed.wrapping_add(i) }));
    kinds.into_iter().map(|k| Direction::build(bg, k)).collect()
}
