use super::domain::PolygonalDomain;
use crate::error::{Error, Result};
use crate::numerics::gauss_legendre;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::{Arc, OnceLock};

type ScalarFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

/// Serializable description of a field, used by configs and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldSpec {
    Constant {
        beta: f64,
        #[serde(default)]
        gauge_xy: f64,
    },
    /// `B(x) = b0 + bx·x₁ + by·x₂`.
    Linear {
        b0: f64,
        bx: f64,
        by: f64,
        #[serde(default)]
        gauge_xy: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Constant,
    Functional,
}

/// A magnetic field `B` together with a vector potential `A`, `curl A = B`.
#[derive(Clone)]
pub struct MagneticField {
    kind: FieldKind,
    strength: f64,
    b: ScalarFn,
    a: VectorFn,
    /// Coefficient `c` of an added gauge term `∇(c·x₁x₂)`.
    gauge_xy: f64,
}

impl fmt::Debug for MagneticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MagneticField")
            .field("kind", &self.kind)
            .field("strength", &self.strength)
            .field("gauge_xy", &self.gauge_xy)
            .finish()
    }
}

fn gl(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static RULES: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        (0..=24)
            .map(|k| {
                // nodes and weights on [0, 1]
                let (x, w) = gauss_legendre(k.max(1));
                (
                    x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
                    w.iter().map(|w| 0.5 * w).collect(),
                )
            })
            .collect()
    });
    &rules[n]
}

impl MagneticField {
    /// Constant field `β` in the gauge `A = (−βx₂, 0)`.
    pub fn constant(beta: f64) -> Self {
        MagneticField {
            kind: FieldKind::Constant,
            strength: beta,
            b: Arc::new(move |_| beta),
            a: Arc::new(move |x| [-beta * x[1], 0.0]),
            gauge_xy: 0.0,
        }
    }

    /// Variable field with the canonical potential `A = (−∫₀^{x₂} B(x₁, τ) dτ, 0)`.
    pub fn functional(b: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        let b: ScalarFn = Arc::new(b);
        let bb = b.clone();
        let a = move |x: [f64; 2]| {
            let (t, w) = gl(20);
            let s: f64 = t.iter().zip(w).map(|(t, w)| w * bb([x[0], t * x[1]])).sum();
            [-x[1] * s, 0.0]
        };
        MagneticField {
            kind: FieldKind::Functional,
            strength: f64::NAN,
            b,
            a: Arc::new(a),
            gauge_xy: 0.0,
        }
    }

    /// Field with a user-supplied potential; call [`curl_defect`](Self::curl_defect) to check it.
    pub fn with_potential(
        b: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
        a: impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        MagneticField {
            kind: FieldKind::Functional,
            strength: f64::NAN,
            b: Arc::new(b),
            a: Arc::new(a),
            gauge_xy: 0.0,
        }
    }

    pub fn from_spec(spec: &FieldSpec) -> Self {
        match *spec {
            FieldSpec::Constant { beta, gauge_xy } => Self::constant(beta).gauge_shifted(gauge_xy),
            FieldSpec::Linear { b0, bx, by, gauge_xy } => {
                // exact potential: A₁ = −(b0 x₂ + bx x₁ x₂ + by x₂²/2)
                Self::with_potential(
                    move |x| b0 + bx * x[0] + by * x[1],
                    move |x| [-(b0 * x[1] + bx * x[0] * x[1] + 0.5 * by * x[1] * x[1]), 0.0],
                )
                .gauge_shifted(gauge_xy)
            }
        }
    }

    /// Adds `∇(c·x₁x₂)` to the potential; the field is unchanged.
    pub fn gauge_shifted(mut self, c: f64) -> Self {
        self.gauge_xy += c;
        self
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// The constant strength, if the field is constant.
    pub fn strength(&self) -> Option<f64> {
        (self.kind == FieldKind::Constant).then_some(self.strength)
    }

    pub fn b(&self, x: [f64; 2]) -> f64 {
        (self.b)(x)
    }

    pub fn a(&self, x: [f64; 2]) -> [f64; 2] {
        let a = (self.a)(x);
        let c = self.gauge_xy;
        [a[0] + c * x[1], a[1] + c * x[0]]
    }

    /// `∫_c^x A·dl` along the straight segment.
    pub fn line_integral(&self, c: [f64; 2], x: [f64; 2]) -> f64 {
        let d = [x[0] - c[0], x[1] - c[1]];
        let base = match self.kind {
            FieldKind::Constant => {
                // A = (−βx₂, 0) is linear, so the midpoint rule is exact
                let m = [c[0] + 0.5 * d[0], c[1] + 0.5 * d[1]];
                -self.strength * m[1] * d[0]
            }
            FieldKind::Functional => {
                let (t, w) = gl(8);
                t.iter()
                    .zip(w)
                    .map(|(t, w)| {
                        let a = (self.a)([c[0] + t * d[0], c[1] + t * d[1]]);
                        w * (a[0] * d[0] + a[1] * d[1])
                    })
                    .sum()
            }
        };
        base + self.gauge_xy * (x[0] * x[1] - c[0] * c[1])
    }

    /// `∫₀¹ s·B(c + s(x − c)) ds`, the weight of the radial-gauge potential.
    pub fn radial_weight(&self, c: [f64; 2], x: [f64; 2]) -> f64 {
        match self.kind {
            FieldKind::Constant => 0.5 * self.strength,
            FieldKind::Functional => {
                let (t, w) = gl(6);
                t.iter()
                    .zip(w)
                    .map(|(t, w)| w * t * (self.b)([c[0] + t * (x[0] - c[0]), c[1] + t * (x[1] - c[1])]))
                    .sum()
            }
        }
    }

    /// Largest `|∂₁A₂ − ∂₂A₁ − B|` over the given points (sixth-order differences).
    pub fn curl_defect(&self, points: &[[f64; 2]]) -> f64 {
        const C: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
        let d = 1e-2;
        points
            .iter()
            .map(|&x| {
                let mut curl = 0.0;
                for (k, c) in C.iter().enumerate() {
                    let s = (k + 1) as f64 * d;
                    let a2 = self.a([x[0] + s, x[1]])[1] - self.a([x[0] - s, x[1]])[1];
                    let a1 = self.a([x[0], x[1] + s])[0] - self.a([x[0], x[1] - s])[0];
                    curl += c * (a2 - a1) / d;
                }
                (curl - self.b(x)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `inf B` over the closed domain, sampled on a grid plus the boundary.
    pub fn inf_over(&self, domain: &PolygonalDomain) -> f64 {
        if let Some(beta) = self.strength() {
            return beta;
        }
        let (lo, hi) = bounding_box(&domain.vertices);
        let n = 64;
        let mut m = self.inf_over_boundary(domain);
        for i in 0..=n {
            for j in 0..=n {
                let p = [
                    lo[0] + (hi[0] - lo[0]) * i as f64 / n as f64,
                    lo[1] + (hi[1] - lo[1]) * j as f64 / n as f64,
                ];
                if domain.contains(p) {
                    m = m.min(self.b(p));
                }
            }
        }
        m
    }

    /// `inf B` over the boundary, sampled at spacing perimeter/4096 and at the vertices.
    pub fn inf_over_boundary(&self, domain: &PolygonalDomain) -> f64 {
        if let Some(beta) = self.strength() {
            return beta;
        }
        let per = domain.perimeter();
        let n = 4096;
        (0..n)
            .map(|i| self.b(domain.point_at(per * i as f64 / n as f64)))
            .chain(domain.vertices.iter().map(|&v| self.b(v)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks positivity of `B` and the curl identity on sample points of `domain`.
    pub fn validate_on(&self, domain: &PolygonalDomain) -> Result<()> {
        let b = self.inf_over(domain);
        if !(b > 0.0) {
            return Err(Error::FieldMismatch(format!("inf B = {b} is not positive")));
        }
        let per = domain.perimeter();
        let samples: Vec<[f64; 2]> = (0..64).map(|i| domain.point_at(per * i as f64 / 64.0)).collect();
        let defect = self.curl_defect(&samples);
        let scale = samples.iter().map(|&p| self.b(p).abs()).fold(1.0, f64::max);
        if defect > 1e-8 * scale {
            return Err(Error::FieldMismatch(format!("curl A − B = {defect:e}")));
        }
        Ok(())
    }
}

pub fn bounding_box(points: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}
