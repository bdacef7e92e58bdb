//! Root certificates for complex polynomials by winding numbers of
//! `P/|P|` along contours, and root localization by rectangle subdivision.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_SAMPLES: usize = 64;
pub const MAX_SAMPLES: usize = 1 << 20;
/// Largest accepted turn of `P/|P|` between consecutive samples.
pub const STEP_LIMIT: f64 = FRAC_PI_2;
/// Contour values below this multiple of the coefficient scale count as zeros.
pub const MODULUS_FLOOR: f64 = 1e-12;
pub const MAX_DEPTH: usize = 128;
pub const H1_STEPS: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FtaError {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient resolution on {contour:?}: not certified after {samples} evaluations")]
    InsufficientResolution { contour: Contour, samples: usize },
    #[error("hypothesis violated: P has a root within radius {radius} ({evidence:?})")]
    HypothesisViolated { radius: f64, evidence: RootEvidence },
    #[error("localization failed in {region:?} at depth {depth}")]
    LocalizationFailed { region: Contour, depth: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coefficients: Vec<Complex64>,
}

impl Polynomial {
    /// Coefficients constant term first. Trailing zeros are dropped; the
    /// zero polynomial is rejected.
    pub fn new(mut coefficients: Vec<Complex64>) -> Result<Self, FtaError> {
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(FtaError::InvalidPolynomial("non-finite coefficient".into()));
        }
        while coefficients.last().is_some_and(|c| c.norm() == 0.0) {
            coefficients.pop();
        }
        if coefficients.is_empty() {
            return Err(FtaError::InvalidPolynomial("zero polynomial has no degree".into()));
        }
        Ok(Polynomial { coefficients })
    }

    pub fn from_real(coefficients: &[f64]) -> Result<Self, FtaError> {
        Self::new(coefficients.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &a) in c.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            c = next;
        }
        Polynomial { coefficients: c }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        self.coefficients[self.degree()]
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    pub fn derivative(&self) -> Option<Polynomial> {
        if self.degree() == 0 {
            return None;
        }
        Polynomial::new(
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &a)| a * k as f64)
                .collect(),
        )
        .ok()
    }

    /// Largest coefficient modulus.
    pub fn scale(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Every root lies strictly inside this radius.
    pub fn cauchy_bound(&self) -> f64 {
        let lead = self.leading().norm();
        let rest = self.coefficients[..self.degree()]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        1.0 + rest / lead
    }

    /// `Σ a_k t^{n−k} z^k`, equal to `t^n P(z/t)` for `t ≠ 0` and to
    /// `a_n z^n` at `t = 0`.
    pub fn homogenized(&self, t: f64) -> Polynomial {
        let n = self.degree();
        Polynomial {
            coefficients: self
                .coefficients
                .iter()
                .enumerate()
                .map(|(k, &a)| a * t.powi((n - k) as i32))
                .collect(),
        }
    }
}

pub fn eval_poly(p: &Polynomial, z: Complex64) -> Complex64 {
    p.eval(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Contour {
    Circle { center: [f64; 2], radius: f64 },
    Rectangle { min: [f64; 2], max: [f64; 2] },
}

impl Contour {
    pub fn circle(radius: f64) -> Self {
        Contour::Circle {
            center: [0.0, 0.0],
            radius,
        }
    }

    pub fn rectangle(min: Complex64, max: Complex64) -> Self {
        Contour::Rectangle {
            min: [min.re, min.im],
            max: [max.re, max.im],
        }
    }

    fn validate(&self) -> Result<(), FtaError> {
        let ok = match *self {
            Contour::Circle { center, radius } => radius > 0.0 && radius.is_finite() && center.iter().all(|c| c.is_finite()),
            Contour::Rectangle { min, max } => min[0] < max[0] && min[1] < max[1] && max.iter().chain(&min).all(|c| c.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(FtaError::InvalidArgument(format!("degenerate contour {self:?}")))
        }
    }

    /// Counterclockwise parametrization by `t ∈ [0, 1]`; rectangle edges
    /// take a quarter of the range each.
    fn at(&self, t: f64) -> Complex64 {
        match *self {
            Contour::Circle { center, radius } => Complex64::new(center[0], center[1]) + Complex64::from_polar(radius, TAU * t),
            Contour::Rectangle { min, max } => {
                let corners = [
                    Complex64::new(min[0], min[1]),
                    Complex64::new(max[0], min[1]),
                    Complex64::new(max[0], max[1]),
                    Complex64::new(min[0], max[1]),
                ];
                let e = ((t * 4.0).floor() as usize).min(3);
                let (a, b) = (corners[e], corners[(e + 1) % 4]);
                a + (b - a) * (t * 4.0 - e as f64)
            }
        }
    }

    /// Length of the piece between parameters `t0 < t1` (within one edge).
    fn arc_length(&self, t0: f64, t1: f64) -> f64 {
        match *self {
            Contour::Circle { radius, .. } => TAU * radius * (t1 - t0),
            Contour::Rectangle { .. } => (self.at(t1) - self.at(t0)).norm(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Contour::Circle { radius, .. } => 2.0 * radius,
            Contour::Rectangle { min, max } => (max[0] - min[0]).hypot(max[1] - min[1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingCertificate {
    pub contour: Contour,
    pub samples: usize,
    pub winding: i64,
    pub min_modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WindingOutcome {
    Certified(WindingCertificate),
    /// `|P|` fell below the modulus floor at this contour point.
    RootOnContour([f64; 2]),
}

impl WindingOutcome {
    pub fn winding(&self) -> Option<i64> {
        match self {
            WindingOutcome::Certified(c) => Some(c.winding),
            WindingOutcome::RootOnContour(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RootEvidence {
    OnContour([f64; 2]),
    Enclosed(WindingCertificate),
}

/// Taylor coefficients of `P` about `z0`, constant term first.
fn taylor(p: &Polynomial, z0: Complex64) -> Vec<Complex64> {
    let n = p.degree();
    let mut b: Vec<Complex64> = p.coefficients().iter().rev().copied().collect();
    for i in 0..=n {
        for j in 1..=n - i {
            let prev = b[j - 1];
            b[j] += z0 * prev;
        }
    }
    b.reverse();
    b
}

/// Bound on `|P(z) − P(z0)|` for `|z − z0| ≤ h`.
fn local_variation(taylor: &[Complex64], h: f64) -> f64 {
    taylor[1..].iter().rev().fold(0.0, |acc, c| (acc + c.norm()) * h)
}

/// Rounding bound for evaluating `P` at `z`.
fn eval_error(abs: &[f64], z: Complex64) -> f64 {
    let r = z.norm();
    let sum = abs.iter().rev().fold(0.0, |acc, a| acc * r + a);
    4.0 * abs.len() as f64 * f64::EPSILON * sum
}

struct Piece {
    t0: f64,
    t1: f64,
    z0: Complex64,
    z1: Complex64,
    v0: Complex64,
    v1: Complex64,
}

/// Winding of `P/|P|` along a contour. Starting from `samples` evenly
/// spaced points, a piece is accepted once `|P|` at its start exceeds a
/// Taylor bound on how far `P` can move along it, which keeps every accepted turn
/// below [`STEP_LIMIT`]; other pieces are halved. More than [`MAX_SAMPLES`]
/// evaluations give [`FtaError::InsufficientResolution`].
pub fn contour_winding(p: &Polynomial, contour: Contour, samples: usize) -> Result<WindingOutcome, FtaError> {
    contour.validate()?;
    let floor = MODULUS_FLOOR * p.scale();
    let abs: Vec<f64> = p.coefficients().iter().map(|a| a.norm()).collect();
    let n = samples.max(4).div_ceil(4) * 4;
    let mut evals = n;
    let ts: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let zs: Vec<Complex64> = ts.iter().map(|&t| contour.at(t)).collect();
    let vs: Vec<Complex64> = zs.iter().map(|&z| p.eval(z)).collect();
    let mut stack: Vec<Piece> = (0..n)
        .rev()
        .map(|k| Piece {
            t0: ts[k],
            t1: ts[k + 1],
            z0: zs[k],
            z1: zs[k + 1],
            v0: vs[k],
            v1: vs[(k + 1) % n],
        })
        .collect();
    let min_len = contour.diameter() * 1e-12;
    let mut total = 0.0;
    let mut min_modulus = f64::INFINITY;
    while let Some(q) = stack.pop() {
        let m = q.v0.norm();
        min_modulus = min_modulus.min(m);
        if !(m >= floor) || m == 0.0 {
            return Ok(WindingOutcome::RootOnContour([q.z0.re, q.z0.im]));
        }
        let h = contour.arc_length(q.t0, q.t1);
        let step = (q.v1 / q.v0).arg();
        let bound = 1.01 * local_variation(&taylor(p, q.z0), h) + eval_error(&abs, q.z0);
        if m > bound && step.abs() < STEP_LIMIT {
            total += step;
            continue;
        }
        if h < min_len || evals >= MAX_SAMPLES {
            let (z, zm) = piece_minimum(p, contour, q.t0, q.t1);
            if zm < floor {
                return Ok(WindingOutcome::RootOnContour([z.re, z.im]));
            }
            return Err(FtaError::InsufficientResolution { contour, samples: evals });
        }
        let tm = 0.5 * (q.t0 + q.t1);
        let zm = contour.at(tm);
        let vm = p.eval(zm);
        evals += 1;
        stack.push(Piece {
            t0: tm,
            t1: q.t1,
            z0: zm,
            z1: q.z1,
            v0: vm,
            v1: q.v1,
        });
        stack.push(Piece {
            t0: q.t0,
            t1: tm,
            z0: q.z0,
            z1: zm,
            v0: q.v0,
            v1: vm,
        });
    }
    Ok(WindingOutcome::Certified(WindingCertificate {
        contour,
        samples: evals,
        winding: (total / TAU).round() as i64,
        min_modulus,
    }))
}

/// Golden-section search for the smallest `|P|` on the contour between
/// parameters `t0` and `t1`.
fn piece_minimum(p: &Polynomial, contour: Contour, t0: f64, t1: f64) -> (Complex64, f64) {
    const G: f64 = 0.618_033_988_749_894_9;
    let f = |t: f64| p.eval(contour.at(t)).norm();
    let (mut lo, mut hi) = (t0, t1);
    for _ in 0..80 {
        let (a, b) = (hi - G * (hi - lo), lo + G * (hi - lo));
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let z = contour.at(0.5 * (lo + hi));
    (z, p.eval(z).norm())
}

/// Winding of `z ↦ P(Rz)/|P(Rz)|` around the unit circle.
pub fn boundary_winding(p: &Polynomial, radius: f64, samples: usize) -> Result<WindingOutcome, FtaError> {
    contour_winding(p, Contour::circle(radius), samples)
}

pub fn rectangle_winding(p: &Polynomial, min: Complex64, max: Complex64, samples: usize) -> Result<WindingOutcome, FtaError> {
    contour_winding(p, Contour::rectangle(min, max), samples)
}

/// Tracks the winding of `z ↦ P(tz)` on the unit circle over a grid of
/// `t ∈ [0, 1]`. At `t = 0` the map is the constant `P(0)/|P(0)|`.
/// Returns true when the winding stays 0; a root met along the way is
/// reported as a violated hypothesis.
pub fn h1_endpoint_check(p: &Polynomial, samples: usize) -> Result<bool, FtaError> {
    let at_zero = p.eval(Complex64::new(0.0, 0.0));
    if at_zero.norm() < MODULUS_FLOOR * p.scale() || at_zero.norm() == 0.0 {
        return Err(FtaError::HypothesisViolated {
            radius: 0.0,
            evidence: RootEvidence::OnContour([0.0, 0.0]),
        });
    }
    for k in 1..=H1_STEPS {
        let t = k as f64 / H1_STEPS as f64;
        match boundary_winding(p, t, samples)? {
            WindingOutcome::RootOnContour(z) => {
                return Err(FtaError::HypothesisViolated {
                    radius: t,
                    evidence: RootEvidence::OnContour(z),
                })
            }
            WindingOutcome::Certified(c) if c.winding != 0 => {
                return Err(FtaError::HypothesisViolated {
                    radius: t,
                    evidence: RootEvidence::Enclosed(c),
                })
            }
            WindingOutcome::Certified(_) => {}
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H2Check {
    pub degree: usize,
    /// Winding of `a_n z^n` on the unit circle (the `t = 0` end).
    pub leading_winding: i64,
    /// Winding of `t^n P(z/t)` on the unit circle at `t = 1/radius`.
    pub homotopy_winding: i64,
    pub radius: f64,
}

impl H2Check {
    pub fn holds(&self) -> bool {
        self.leading_winding == self.degree as i64 && self.homotopy_winding == self.leading_winding
    }
}

/// Checks both ends of the homotopy `t^n P(z/t)` between `P` on a circle of
/// radius `1/t` and `a_n z^n`, by independent winding computations.
/// `radius` defaults to twice the Cauchy bound.
pub fn h2_endpoint_check(p: &Polynomial, radius: Option<f64>, samples: usize) -> Result<H2Check, FtaError> {
    let radius = radius.unwrap_or(2.0 * p.cauchy_bound());
    let leading = p.homogenized(0.0);
    let winding = |q: &Polynomial| -> Result<i64, FtaError> {
        match boundary_winding(q, 1.0, samples)? {
            WindingOutcome::Certified(c) => Ok(c.winding),
            WindingOutcome::RootOnContour(z) => Err(FtaError::HypothesisViolated {
                radius: 1.0,
                evidence: RootEvidence::OnContour(z),
            }),
        }
    };
    Ok(H2Check {
        degree: p.degree(),
        leading_winding: winding(&leading)?,
        homotopy_winding: winding(&p.homogenized(1.0 / radius))?,
        radius,
    })
}

/// A located root and the number of roots its leaf rectangle certifies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCluster {
    pub center: [f64; 2],
    pub multiplicity: usize,
    pub region: Contour,
}

/// Split points tried in turn when a root sits on a shared edge.
const SPLITS: [f64; 7] = [0.5, 0.4621, 0.5379, 0.4137, 0.5863, 0.3719, 0.6281];

fn leaf_point(p: &Polynomial, dp: &Option<Polynomial>, lo: Complex64, hi: Complex64, m: usize) -> Complex64 {
    let mut z = (lo + hi) * 0.5;
    let Some(dp) = dp else { return z };
    let inside = |w: Complex64| w.re >= lo.re && w.re <= hi.re && w.im >= lo.im && w.im <= hi.im;
    for _ in 0..8 {
        let d = dp.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        let next = z - p.eval(z) / d * m as f64;
        if !inside(next) || !(p.eval(next).norm() < p.eval(z).norm()) {
            break;
        }
        z = next;
    }
    z
}

fn subdivide(
    p: &Polynomial,
    dp: &Option<Polynomial>,
    lo: Complex64,
    hi: Complex64,
    winding: i64,
    tol: f64,
    depth: usize,
    out: &mut Vec<RootCluster>,
) -> Result<(), FtaError> {
    let region = Contour::rectangle(lo, hi);
    if region.diameter() < tol {
        let z = leaf_point(p, dp, lo, hi, winding as usize);
        out.push(RootCluster {
            center: [z.re, z.im],
            multiplicity: winding as usize,
            region,
        });
        return Ok(());
    }
    if depth >= MAX_DEPTH {
        return Err(FtaError::LocalizationFailed { region, depth });
    }
    let mut near: Option<Complex64> = None;
    'split: for &s in &SPLITS {
        let mid = lo + (hi - lo) * s;
        if mid.re <= lo.re || mid.re >= hi.re || mid.im <= lo.im || mid.im >= hi.im {
            continue;
        }
        let quads = [
            (lo, mid),
            (Complex64::new(mid.re, lo.im), Complex64::new(hi.re, mid.im)),
            (Complex64::new(lo.re, mid.im), Complex64::new(mid.re, hi.im)),
            (mid, hi),
        ];
        let mut windings = [0i64; 4];
        for (w, &(a, b)) in windings.iter_mut().zip(&quads) {
            match rectangle_winding(p, a, b, DEFAULT_SAMPLES)? {
                WindingOutcome::Certified(c) => *w = c.winding,
                WindingOutcome::RootOnContour(z) => {
                    let z = Complex64::new(z[0], z[1]);
                    if near.is_none_or(|n| p.eval(z).norm() < p.eval(n).norm()) {
                        near = Some(z);
                    }
                    continue 'split;
                }
            }
        }
        if windings.iter().sum::<i64>() != winding || windings.iter().any(|&w| w < 0) {
            continue;
        }
        for (&w, &(a, b)) in windings.iter().zip(&quads) {
            if w > 0 {
                subdivide(p, dp, a, b, w, tol, depth + 1, out)?;
            }
        }
        return Ok(());
    }
    // every split line runs below the modulus floor: the region is at the
    // resolution limit and the near-zero point stands for its roots
    if let Some(z) = near {
        out.push(RootCluster {
            center: [z.re, z.im],
            multiplicity: winding as usize,
            region,
        });
        return Ok(());
    }
    Err(FtaError::LocalizationFailed { region, depth })
}

/// Root clusters of `p` inside the square of half-width
/// `max(bounding_radius, Cauchy bound)`, each region of diameter below `tol`.
pub fn locate_root_clusters(p: &Polynomial, bounding_radius: f64, tol: f64) -> Result<Vec<RootCluster>, FtaError> {
    if p.degree() == 0 {
        return Err(FtaError::InvalidPolynomial("constant polynomial has no root".into()));
    }
    if !(tol > 0.0) {
        return Err(FtaError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut r = p.cauchy_bound().max(bounding_radius);
    let dp = p.derivative();
    for _ in 0..8 {
        let lo = Complex64::new(-r, -r);
        let hi = Complex64::new(r, r);
        match rectangle_winding(p, lo, hi, DEFAULT_SAMPLES)? {
            WindingOutcome::Certified(c) if c.winding == p.degree() as i64 => {
                let mut out = Vec::new();
                subdivide(p, &dp, lo, hi, c.winding, tol, 0, &mut out)?;
                return Ok(out);
            }
            _ => r *= 1.5,
        }
    }
    Err(FtaError::LocalizationFailed {
        region: Contour::circle(r),
        depth: 0,
    })
}

/// Roots with multiplicity, in subdivision order.
pub fn locate_roots(p: &Polynomial, bounding_radius: f64, tol: f64) -> Result<Vec<Complex64>, FtaError> {
    Ok(locate_root_clusters(p, bounding_radius, tol)?
        .into_iter()
        .flat_map(|c| std::iter::repeat_n(Complex64::new(c.center[0], c.center[1]), c.multiplicity))
        .collect())
}
