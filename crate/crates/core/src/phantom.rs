//! Smooth test conductivities built from C² bump functions.

use crate::error::{Error, Result};
use crate::field::NodalField;
use crate::mesh::{Mesh, Point};

/// Quintic smoothstep: 0 for `t <= 0`, 1 for `t >= 1`, `6t^5 - 15t^4 + 10t^3`
/// in between. First and second derivatives vanish at both joins.
pub fn c2_ramp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        smoothstep5(t)
    }
}

fn smoothstep5(t: f64) -> f64 {
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: Point,
    pub radius: f64,
}

impl Disc {
    /// 1 inside `radius - width`, 0 outside `radius`, C² ramp in between.
    pub fn bump(&self, p: Point, width: f64) -> f64 {
        let d = (p[0] - self.center[0]).hypot(p[1] - self.center[1]);
        c2_ramp((self.radius - d) / width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disc(Disc),
    /// Outer disc with the inner disc cut away.
    Crescent { outer: Disc, cut: Disc },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inclusion {
    pub shape: Shape,
    /// Conductivity on the inclusion's plateau.
    pub plateau: f64,
    pub ramp_width: f64,
}

impl Inclusion {
    fn indicator(&self, p: Point) -> f64 {
        match self.shape {
            Shape::Disc(d) => d.bump(p, self.ramp_width),
            Shape::Crescent { outer, cut } => {
                outer.bump(p, self.ramp_width) * (1.0 - cut.bump(p, self.ramp_width))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub background: f64,
    pub inclusions: Vec<Inclusion>,
}

impl PhantomSpec {
    /// Checks the spec against an admissibility floor.
    pub fn validate(&self, sigma_floor: f64) -> Result<()> {
        if !(self.background > 0.0) || self.background < sigma_floor {
            return Err(Error::Inadmissible {
                vertex: 0,
                value: self.background,
                floor: sigma_floor,
            });
        }
        for (i, inc) in self.inclusions.iter().enumerate() {
            let radii = match inc.shape {
                Shape::Disc(d) => vec![d.radius],
                Shape::Crescent { outer, cut } => vec![outer.radius, cut.radius],
            };
            if !(inc.ramp_width > 0.0) || radii.iter().any(|&r| inc.ramp_width >= r) {
                return Err(Error::InvalidArgument(format!(
                    "inclusion {i}: ramp width must be positive and smaller than every radius"
                )));
            }
            if inc.plateau < sigma_floor {
                return Err(Error::Inadmissible {
                    vertex: 0,
                    value: inc.plateau,
                    floor: sigma_floor,
                });
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, p: Point) -> f64 {
        self.background
            + self
                .inclusions
                .iter()
                .map(|inc| (inc.plateau - self.background) * inc.indicator(p))
                .sum::<f64>()
    }

    pub fn on_mesh(&self, mesh: &Mesh) -> NodalField {
        NodalField::from_fn(mesh, |p| self.evaluate(p))
    }

    pub fn max_plateau(&self) -> f64 {
        self.inclusions
            .iter()
            .map(|i| i.plateau)
            .fold(self.background, f64::max)
    }
}

pub fn evaluate_phantom(spec: &PhantomSpec, point: Point) -> f64 {
    spec.evaluate(point)
}

/// Background 1 with two discs (plateaus 2 and 1.3) and a crescent (1.7).
pub fn default_phantom() -> PhantomSpec {
    let width = 0.06;
    PhantomSpec {
        background: 1.0,
        inclusions: vec![
            Inclusion {
                shape: Shape::Disc(Disc {
                    center: [0.4, 0.25],
                    radius: 0.25,
                }),
                plateau: 2.0,
                ramp_width: width,
            },
            Inclusion {
                shape: Shape::Disc(Disc {
                    center: [-0.1, -0.45],
                    radius: 0.15,
                }),
                plateau: 1.3,
                ramp_width: width,
            },
            Inclusion {
                shape: Shape::Crescent {
                    outer: Disc {
                        center: [-0.35, 0.3],
                        radius: 0.3,
                    },
                    cut: Disc {
                        center: [-0.2, 0.35],
                        radius: 0.25,
                    },
                },
                plateau: 1.7,
                ramp_width: width,
            },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{gram_matrix, InnerProductSpec};
    use crate::field::dot;
    use crate::mesh::generate_disk_mesh;

    #[test]
    fn ramp_values() {
        assert_eq!(c2_ramp(0.0), 0.0);
        assert_eq!(c2_ramp(1.0), 1.0);
        assert_eq!(c2_ramp(0.5), 0.5);
        assert_eq!(c2_ramp(-3.0), 0.0);
        assert_eq!(c2_ramp(4.0), 1.0);
    }

    #[test]
    fn ramp_joins_are_c2() {
        let h = 1e-4;
        for t in [0.0, 1.0] {
            let d1 = (smoothstep5(t + h) - smoothstep5(t - h)) / (2.0 * h);
            let d2 = (smoothstep5(t + h) - 2.0 * smoothstep5(t) + smoothstep5(t - h)) / (h * h);
            assert!(d1.abs() <= 1e-6, "{d1}");
            assert!(d2.abs() <= 1e-6, "{d2}");
        }
        // the clamped pieces meet the polynomial with matching values
        assert_eq!(c2_ramp(0.0), smoothstep5(0.0));
        assert_eq!(c2_ramp(1.0), smoothstep5(1.0));
    }

    #[test]
    fn default_plateaus() {
        let p = default_phantom();
        assert!((p.evaluate([0.4, 0.25]) - 2.0).abs() < 1e-15);
        assert!((p.evaluate([-0.1, -0.45]) - 1.3).abs() < 1e-15);
        assert!((p.evaluate([-0.55, 0.2]) - 1.7).abs() < 1e-15);
        assert_eq!(p.evaluate([0.0, 0.9]), 1.0);
        assert_eq!(p.evaluate([0.7, -0.6]), 1.0);
        // midline of the ramp
        let mid = p.evaluate([0.4 + 0.25 - 0.03, 0.25]);
        assert!((mid - 1.5).abs() < 1e-12);
        p.validate(0.1).unwrap();
    }

    #[test]
    fn bounds_on_mesh() {
        let m = generate_disk_mesh(2000).unwrap();
        let f = default_phantom().on_mesh(&m);
        assert!(f.min() >= 1.0 - 1e-12);
        assert!(f.max() <= 2.0 + 1e-12);
        assert!(f.min() >= 0.1);
    }

    #[test]
    fn validation() {
        let mut p = default_phantom();
        p.background = 0.05;
        assert!(p.validate(0.1).is_err());
        p.background = 0.5;
        assert!(p.validate(0.1).is_ok());
        p.inclusions[0].ramp_width = 0.3;
        assert!(p.validate(0.1).is_err());
    }

    #[test]
    fn smooth_along_segments() {
        // second differences across a ramp shrink as the step shrinks
        let p = default_phantom();
        let line = |s: f64| p.evaluate([0.4 + s, 0.25]);
        let mut prev = f64::INFINITY;
        for h in [1e-2, 5e-3, 2.5e-3] {
            let worst = (0..200)
                .map(|i| {
                    let s = 0.15 + 0.001 * i as f64;
                    (line(s + h) - 2.0 * line(s) + line(s - h)).abs()
                })
                .fold(0.0f64, f64::max);
            assert!(worst < prev);
            prev = worst;
        }
    }

    fn h2_norm(n: usize) -> f64 {
        let m = generate_disk_mesh(n).unwrap();
        let f = default_phantom().on_mesh(&m);
        let g = gram_matrix(&m, &InnerProductSpec::h2());
        dot(f.values(), &g.matvec(f.values())).sqrt()
    }

    #[test]
    fn h2_surrogate_norm_converges() {
        // A 0.06 ramp spans about 1.5 elements at 2000 vertices, so the
        // 2000/8000 gap is large; successive refinements must still shrink.
        let norms: Vec<f64> = [2000, 8000, 32000].iter().map(|&n| h2_norm(n)).collect();
        assert!(norms.iter().all(|n| n.is_finite() && *n > 0.0));
        let d1 = (norms[1] - norms[0]).abs();
        let d2 = (norms[2] - norms[1]).abs();
        assert!(d2 < d1, "{norms:?}");
    }

    #[test]
    fn h2_surrogate_converges_for_resolved_bump() {
        let norm = |n: usize| {
            let m = generate_disk_mesh(n).unwrap();
            let f = NodalField::from_fn(&m, |p| {
                let r2 = (p[0] * p[0] + p[1] * p[1]) / 0.36;
                if r2 < 1.0 {
                    (1.0 - r2).powi(4)
                } else {
                    0.0
                }
            });
            let g = gram_matrix(&m, &InnerProductSpec::h2());
            dot(f.values(), &g.matvec(f.values())).sqrt()
        };
        let (a, b) = (norm(2000), norm(8000));
        assert!((a - b).abs() / b < 0.05, "{a} {b}");
    }
}
