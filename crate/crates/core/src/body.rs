//! A.s. bounded closed L⁰-convex bodies built as atom-wise products of
//! balls or boxes. Such products are σ-stable by construction.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::element::{FiberSpec, RNElement};
use crate::error::{ensure_len, Error, Result};
use crate::measure::{AtomicSpace, L0Real, MeasurableSet};

#[derive(Debug, Clone, PartialEq)]
pub enum BodyShape {
    /// ℓ_q ball per atom: centre fiber and radius.
    Ball { centers: RNElement, radii: L0Real },
    /// Coordinate box per atom.
    Box { lower: RNElement, upper: RNElement },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    shape: BodyShape,
}

impl ConvexBody {
    pub fn ball(centers: RNElement, radii: L0Real) -> Result<Self> {
        ensure_len(centers.atom_count(), radii.len())?;
        if let Some(atom) = radii.values().iter().position(|&r| r < 0.0) {
            return Err(Error::domain(format!("negative radius at atom {atom}")));
        }
        Ok(Self {
            shape: BodyShape::Ball { centers, radii },
        })
    }

    pub fn cube(lower: RNElement, upper: RNElement) -> Result<Self> {
        lower.check_compatible(&upper)?;
        if let Some(i) = lower
            .data()
            .iter()
            .zip(upper.data())
            .position(|(l, u)| l > u)
        {
            let d = lower.dim();
            return Err(Error::domain(format!(
                "empty box at atom {} coordinate {}",
                i / d,
                i % d
            )));
        }
        Ok(Self {
            shape: BodyShape::Box { lower, upper },
        })
    }

    /// The same box [lo, hi]^d at every atom.
    pub fn uniform_cube(space: Arc<AtomicSpace>, spec: FiberSpec, lo: f64, hi: f64) -> Result<Self> {
        let lower = RNElement::constant(space.clone(), spec, &vec![lo; spec.dim])?;
        let upper = RNElement::constant(space, spec, &vec![hi; spec.dim])?;
        Self::cube(lower, upper)
    }

    /// Ball of the same radius around the origin at every atom.
    pub fn centered_ball(space: Arc<AtomicSpace>, spec: FiberSpec, radius: f64) -> Result<Self> {
        let n = space.atom_count();
        Self::ball(RNElement::zero(space, spec), L0Real::constant(n, radius))
    }

    pub fn shape(&self) -> &BodyShape {
        &self.shape
    }

    fn anchor(&self) -> &RNElement {
        match &self.shape {
            BodyShape::Ball { centers, .. } => centers,
            BodyShape::Box { lower, .. } => lower,
        }
    }

    pub fn space(&self) -> &Arc<AtomicSpace> {
        self.anchor().space()
    }

    pub fn spec(&self) -> FiberSpec {
        self.anchor().spec()
    }

    pub fn atom_count(&self) -> usize {
        self.anchor().atom_count()
    }

    pub fn is_ball(&self) -> bool {
        matches!(self.shape, BodyShape::Ball { .. })
    }

    /// Distance from `fiber` to the per-atom set, in the fiber norm.
    pub fn fiber_distance(&self, atom: usize, fiber: &[f64]) -> f64 {
        let spec = self.spec();
        match &self.shape {
            BodyShape::Ball { centers, radii } => {
                let diff: Vec<f64> = fiber
                    .iter()
                    .zip(centers.fiber(atom))
                    .map(|(a, c)| a - c)
                    .collect();
                (spec.norm(&diff) - radii.get(atom)).max(0.0)
            }
            BodyShape::Box { lower, upper } => {
                let excess: Vec<f64> = fiber
                    .iter()
                    .zip(lower.fiber(atom).iter().zip(upper.fiber(atom)))
                    .map(|(&v, (&lo, &hi))| (lo - v).max(v - hi).max(0.0))
                    .collect();
                spec.norm(&excess)
            }
        }
    }

    /// Per-atom distance from `x` to the body.
    pub fn distance(&self, x: &RNElement) -> L0Real {
        L0Real::new(
            (0..x.atom_count())
                .map(|a| self.fiber_distance(a, x.fiber(a)))
                .collect(),
        )
        .expect("finite distances")
    }

    pub fn contains(&self, x: &RNElement, tol: f64) -> bool {
        x.atom_count() == self.atom_count()
            && x.dim() == self.spec().dim
            && (0..x.atom_count()).all(|a| self.fiber_distance(a, x.fiber(a)) <= tol)
    }

    /// Atom-wise nearest point. Balls need Euclidean fibers; boxes accept any
    /// ℓ_q since the coordinate clamp is nearest for every separable norm.
    pub fn project(&self, x: &RNElement) -> Result<RNElement> {
        ensure_len(self.atom_count(), x.atom_count())?;
        ensure_len(self.spec().dim, x.dim())?;
        match &self.shape {
            BodyShape::Ball { centers, radii } => {
                if !self.spec().is_euclidean() {
                    return Err(Error::Unsupported(format!(
                        "ball projection needs q = 2 fibers, got q = {}",
                        self.spec().exponent
                    )));
                }
                Ok(x.map_fibers(|atom, src, dst| {
                    project_ball_fiber(src, centers.fiber(atom), radii.get(atom), dst)
                }))
            }
            BodyShape::Box { lower, upper } => Ok(x.map_fibers(|atom, src, dst| {
                for (k, o) in dst.iter_mut().enumerate() {
                    *o = src[k].clamp(lower.fiber(atom)[k], upper.fiber(atom)[k]);
                }
            })),
        }
    }

    /// ξ with ‖g‖ ≤ ξ for every member g (attained, so this is the supremum).
    pub fn bound(&self) -> L0Real {
        let spec = self.spec();
        let values = match &self.shape {
            BodyShape::Ball { centers, radii } => (0..self.atom_count())
                .map(|a| spec.norm(centers.fiber(a)) + radii.get(a))
                .collect(),
            BodyShape::Box { lower, upper } => (0..self.atom_count())
                .map(|a| {
                    let corner: Vec<f64> = lower
                        .fiber(a)
                        .iter()
                        .zip(upper.fiber(a))
                        .map(|(l, u)| l.abs().max(u.abs()))
                        .collect();
                    spec.norm(&corner)
                })
                .collect(),
        };
        L0Real::new(values).expect("finite bound")
    }

    /// Ball centre or box midpoint, a deterministic member of the body.
    pub fn center(&self) -> RNElement {
        match &self.shape {
            BodyShape::Ball { centers, .. } => centers.clone(),
            BodyShape::Box { lower, upper } => lower.lerp(upper, 0.5),
        }
    }

    /// G − u
    pub fn translate(&self, offset: &RNElement) -> Result<Self> {
        self.anchor().check_compatible(offset)?;
        let shape = match &self.shape {
            BodyShape::Ball { centers, radii } => BodyShape::Ball {
                centers: centers - offset,
                radii: radii.clone(),
            },
            BodyShape::Box { lower, upper } => BodyShape::Box {
                lower: lower - offset,
                upper: upper - offset,
            },
        };
        Ok(Self { shape })
    }

    /// Ĩ_A G: the body on A and the single point θ off A.
    pub fn restrict(&self, set: &MeasurableSet) -> Self {
        let shape = match &self.shape {
            BodyShape::Ball { centers, radii } => BodyShape::Ball {
                centers: centers.restrict(set),
                radii: radii.restrict(set),
            },
            BodyShape::Box { lower, upper } => BodyShape::Box {
                lower: lower.restrict(set),
                upper: upper.restrict(set),
            },
        };
        Self { shape }
    }

    /// Draws a member. Mixes interior points with boundary points, vertices
    /// and the centre so that extreme configurations get exercised.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RNElement {
        let spec = self.spec();
        let d = spec.dim;
        match &self.shape {
            BodyShape::Ball { centers, radii } => centers.map_fibers(|atom, c, dst| {
                let mode: f64 = rng.random();
                let direction: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                let norm = spec.norm(&direction);
                let r = radii.get(atom);
                let scale = if mode < 0.05 || norm == 0.0 {
                    0.0
                } else if mode < 0.2 {
                    r
                } else {
                    r * rng.random::<f64>().powf(1.0 / d as f64)
                };
                for k in 0..d {
                    let step = if norm == 0.0 { 0.0 } else { direction[k] / norm };
                    dst[k] = c[k] + scale * step;
                }
            }),
            BodyShape::Box { lower, upper } => lower.map_fibers(|atom, lo, dst| {
                let hi = upper.fiber(atom);
                let vertex = rng.random_bool(0.15);
                for k in 0..d {
                    let t: f64 = if vertex {
                        if rng.random_bool(0.5) { 1.0 } else { 0.0 }
                    } else {
                        rng.random()
                    };
                    dst[k] = lo[k] + t * (hi[k] - lo[k]);
                }
            }),
        }
    }
}

fn project_ball_fiber(x: &[f64], center: &[f64], radius: f64, out: &mut [f64]) {
    let dist = x
        .iter()
        .zip(center)
        .map(|(a, c)| (a - c) * (a - c))
        .sum::<f64>()
        .sqrt();
    if dist <= radius * (1.0 + 4.0 * f64::EPSILON) {
        out.copy_from_slice(x);
    } else {
        let s = radius / dist;
        for k in 0..x.len() {
            out[k] = center[k] + s * (x[k] - center[k]);
        }
    }
}

/// Membership of `x` in `g` within `tol` at every atom.
pub fn body_contains(g: &ConvexBody, x: &RNElement, tol: f64) -> bool {
    g.contains(x, tol)
}

pub fn body_project(g: &ConvexBody, x: &RNElement) -> Result<RNElement> {
    g.project(x)
}
