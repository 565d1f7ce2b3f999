//! Reaction terms f: [0,1] -> R and the scalar calculus attached to them.
//!
//! Everything downstream (the PDE solver, stationary profiles, traveling
//! fronts, threshold searches) consumes a [`NonlinearitySpec`]: a shape
//! from a small catalogue plus a positive amplitude multiplier. The shapes
//! are the usual suspects for T_t = T_xx + f(T) on the line:
//!
//! * ignition: zero up to an ignition temperature theta0, a smooth hump above;
//! * positive-interior ("KPP-type" / combustion): theta^p (1-theta) for p >= 1;
//! * Arrhenius: exp(-A/theta)(1-theta), flushed to zero below theta = 1e-8;
//! * bistable cubic: theta (theta - a)(1 - theta);
//! * tabulated: piecewise-linear through user breakpoints with a declared
//!   sign pattern.
//!
//! Specs are validated at construction (parameter ranges plus a dense-grid
//! sign-pattern check), so the numerical modules can evaluate them without
//! re-checking structure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;

/// Evaluations below this temperature return exactly zero for the
/// Arrhenius shape; exp(-A/theta) underflows there anyway.
pub const ARRHENIUS_CUTOFF: f64 = 1e-8;

/// Quadrature tolerance for potentials without a closed form. Kept well
/// below the documented 1e-12 contract so that centered differences of
/// the potential still recover f to 1e-8.
const POTENTIAL_QUAD_TOL: f64 = 1e-13;

/// Bisection tolerance for the balance temperature.
const THETA2_TOL: f64 = 1e-12;

/// Sample count for dense-grid scans (sign pattern, Lipschitz fallback).
const SCAN_SAMPLES: usize = 20_001;

/// Sign structure of a reaction term on [0,1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SignPattern {
    /// Identically zero (amplitude 0).
    Zero,
    /// Zero on [0, theta0], strictly positive on (theta0, 1).
    IgnitionPlateau { theta0: f64 },
    /// Strictly positive on (0, 1).
    PositiveInterior,
    /// Strictly negative on (0, theta0), strictly positive on (theta0, 1).
    Bistable { theta0: f64 },
}

/// Piecewise-linear table with a declared sign pattern and the cumulative
/// integral cached at the breakpoints (the potential is then exact).
#[derive(Debug, Clone)]
pub struct Tabulated {
    points: Vec<(f64, f64)>,
    pattern: SignPattern,
    cum: Vec<f64>,
}

/// Shape catalogue. Construct through [`NonlinearitySpec`] so the
/// parameter-range and sign-pattern invariants always hold.
#[derive(Debug, Clone)]
pub enum Kind {
    /// Zero on [0, theta0], then the hump (theta - theta0)(1 - theta).
    Ignition { theta0: f64 },
    /// theta^p (1 - theta); p = 1 is the logistic case.
    Kpp { p: f64 },
    /// exp(-A/theta)(1 - theta) with activation energy A.
    Arrhenius { activation: f64 },
    /// theta (theta - a)(1 - theta) with the unstable zero at a.
    BistableCubic { a: f64 },
    /// Piecewise-linear interpolation of user data.
    Tabulated(Tabulated),
}

/// A reaction term: catalogue shape times a non-negative amplitude.
#[derive(Debug, Clone)]
pub struct NonlinearitySpec {
    kind: Kind,
    amplitude: f64,
}

/// Outcome of the constructor-time sign scan.
#[derive(Debug, Clone, Serialize)]
pub struct SignReport {
    /// The pattern the spec is declared (and verified) to have.
    pub pattern: SignPattern,
    /// Number of grid samples inspected.
    pub samples: usize,
    /// Smallest sampled value of f.
    pub min_f: f64,
    /// Largest sampled value of f.
    pub max_f: f64,
}

impl NonlinearitySpec {
    /// Validate and build a spec with an explicit amplitude.
    pub fn new(kind: Kind, amplitude: f64) -> Result<Self> {
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(Error::Validation(format!(
                "amplitude {amplitude} must be finite and >= 0"
            )));
        }
        match &kind {
            Kind::Ignition { theta0 } => {
                if !(*theta0 > 0.0 && *theta0 < 1.0) {
                    return Err(Error::Validation(format!(
                        "ignition temperature {theta0} must lie in (0, 1)"
                    )));
                }
            }
            Kind::Kpp { p } => {
                if !(*p >= 1.0) || !p.is_finite() {
                    return Err(Error::Validation(format!("exponent {p} must be >= 1")));
                }
            }
            Kind::Arrhenius { activation } => {
                if !(*activation > 0.0) || !activation.is_finite() {
                    return Err(Error::Validation(format!(
                        "activation energy {activation} must be positive"
                    )));
                }
            }
            Kind::BistableCubic { a } => {
                // a = 1/2 is admitted: the balanced cubic still has the
                // bistable sign structure (its front speed is zero), but
                // integral-positive operations reject it later.
                if !(*a > 0.0 && *a <= 0.5) {
                    return Err(Error::Validation(format!(
                        "unstable zero {a} must lie in (0, 0.5]"
                    )));
                }
            }
            Kind::Tabulated(_) => {}
        }
        let spec = NonlinearitySpec { kind, amplitude };
        spec.check_sign_pattern()?;
        Ok(spec)
    }

    /// Ignition shape with unit amplitude.
    pub fn ignition(theta0: f64) -> Result<Self> {
        Self::new(Kind::Ignition { theta0 }, 1.0)
    }

    /// Logistic reaction theta(1 - theta) with unit amplitude.
    pub fn kpp_logistic() -> Result<Self> {
        Self::new(Kind::Kpp { p: 1.0 }, 1.0)
    }

    /// Power reaction theta^p (1 - theta) with unit amplitude.
    pub fn kpp_power(p: f64) -> Result<Self> {
        Self::new(Kind::Kpp { p }, 1.0)
    }

    /// Arrhenius reaction with unit amplitude.
    pub fn arrhenius(activation: f64) -> Result<Self> {
        Self::new(Kind::Arrhenius { activation }, 1.0)
    }

    /// Bistable cubic with unit amplitude.
    pub fn bistable_cubic(a: f64) -> Result<Self> {
        Self::new(Kind::BistableCubic { a }, 1.0)
    }

    /// Piecewise-linear table through `points`, declared to have `pattern`.
    ///
    /// Points must be strictly increasing in theta, start at (0, 0) and end
    /// at (1, 0); the declared pattern is verified against the data.
    pub fn tabulated(points: Vec<(f64, f64)>, pattern: SignPattern) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Validation("table needs at least two points".into()));
        }
        if matches!(pattern, SignPattern::Zero) {
            return Err(Error::Validation(
                "declare a non-trivial sign pattern; use amplitude 0 for the zero term".into(),
            ));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Validation(format!(
                    "breakpoints must increase strictly, got {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        let first = points[0];
        let last = points[points.len() - 1];
        if first != (0.0, 0.0) || last.0 != 1.0 || last.1 != 0.0 {
            return Err(Error::Validation(
                "table must start at (0, 0) and end at (1, 0)".into(),
            ));
        }
        if points.iter().any(|(t, f)| !t.is_finite() || !f.is_finite()) {
            return Err(Error::Validation("table entries must be finite".into()));
        }
        // Cumulative trapezoid sums are exact for piecewise-linear data.
        let mut cum = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in points.windows(2) {
            acc += 0.5 * (w[1].1 + w[0].1) * (w[1].0 - w[0].0);
            cum.push(acc);
        }
        Self::new(
            Kind::Tabulated(Tabulated { points, pattern, cum }),
            1.0,
        )
    }

    /// Same shape, different amplitude.
    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(self.kind.clone(), amplitude)
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Short lowercase name of the shape, for reports and file naming.
    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            Kind::Ignition { .. } => "ignition",
            Kind::Kpp { .. } => "kpp",
            Kind::Arrhenius { .. } => "arrhenius",
            Kind::BistableCubic { .. } => "bistable_cubic",
            Kind::Tabulated(_) => "tabulated",
        }
    }

    /// The ignition/unstable temperature theta0; zero for shapes that are
    /// positive throughout the interior.
    pub fn theta0(&self) -> f64 {
        match &self.kind {
            Kind::Ignition { theta0 } => *theta0,
            Kind::BistableCubic { a } => *a,
            Kind::Kpp { .. } | Kind::Arrhenius { .. } => 0.0,
            Kind::Tabulated(t) => match t.pattern {
                SignPattern::IgnitionPlateau { theta0 } | SignPattern::Bistable { theta0 } => theta0,
                _ => 0.0,
            },
        }
    }

    /// Whether the sign structure is bistable.
    pub fn is_bistable(&self) -> bool {
        matches!(self.declared_pattern(), SignPattern::Bistable { .. })
    }

    /// Length delta of the interval above theta0 on which f is
    /// non-decreasing; defined for ignition-type shapes.
    pub fn ignition_rise(&self) -> Option<f64> {
        match &self.kind {
            // The hump (theta - theta0)(1 - theta) peaks at (1 + theta0)/2.
            Kind::Ignition { theta0 } => Some(0.5 * (1.0 - theta0)),
            Kind::Tabulated(t) => {
                if let SignPattern::IgnitionPlateau { theta0 } = t.pattern {
                    let mut end = theta0;
                    for w in t.points.windows(2) {
                        if w[1].0 <= theta0 {
                            continue;
                        }
                        if w[1].1 >= w[0].1 {
                            end = w[1].0;
                        } else {
                            break;
                        }
                    }
                    Some(end - theta0)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// f(theta). Errors if theta is outside [0, 1].
    pub fn eval_f(&self, theta: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!("theta = {theta} outside [0, 1]")));
        }
        Ok(self.amplitude * self.base_eval(theta))
    }

    /// f(theta) with the argument clamped into [0, 1]. This is the hot-loop
    /// entry point: solver fields may carry O(1e-16) round-off excursions.
    #[inline]
    pub fn eval_clamped(&self, theta: f64) -> f64 {
        self.amplitude * self.base_eval(theta.clamp(0.0, 1.0))
    }

    #[inline]
    fn base_eval(&self, theta: f64) -> f64 {
        match &self.kind {
            Kind::Ignition { theta0 } => {
                if theta <= *theta0 {
                    0.0
                } else {
                    (theta - theta0) * (1.0 - theta)
                }
            }
            Kind::Kpp { p } => pow_fast(theta, *p) * (1.0 - theta),
            Kind::Arrhenius { activation } => {
                if theta < ARRHENIUS_CUTOFF {
                    0.0
                } else {
                    (-activation / theta).exp() * (1.0 - theta)
                }
            }
            Kind::BistableCubic { a } => theta * (theta - a) * (1.0 - theta),
            Kind::Tabulated(t) => t.eval(theta),
        }
    }

    /// The potential F(theta) = integral of f from 0 to theta.
    ///
    /// Closed forms for the polynomial shapes and exact piecewise-quadratic
    /// sums for tables; adaptive quadrature (abs. error <= 1e-12) for the
    /// Arrhenius shape.
    pub fn potential(&self, theta: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!("theta = {theta} outside [0, 1]")));
        }
        let base = match &self.kind {
            Kind::Ignition { theta0 } => {
                if theta <= *theta0 {
                    0.0
                } else {
                    let prim = |s: f64| -s * s * s / 3.0 + 0.5 * (1.0 + theta0) * s * s - theta0 * s;
                    prim(theta) - prim(*theta0)
                }
            }
            Kind::Kpp { p } => {
                pow_fast(theta, p + 1.0) / (p + 1.0) - pow_fast(theta, p + 2.0) / (p + 2.0)
            }
            Kind::Arrhenius { .. } => {
                quad::integrate(|s| self.base_eval(s), 0.0, theta, POTENTIAL_QUAD_TOL)?
            }
            Kind::BistableCubic { a } => {
                -theta.powi(4) / 4.0 + (1.0 + a) * theta.powi(3) / 3.0 - a * theta * theta / 2.0
            }
            Kind::Tabulated(t) => t.potential(theta),
        };
        Ok(self.amplitude * base)
    }

    /// The balance temperature theta2: the unique zero of the potential in
    /// (theta0, 1). Defined only for bistable shapes with positive integral.
    pub fn theta2(&self) -> Result<f64> {
        let theta0 = match self.declared_pattern() {
            SignPattern::Bistable { theta0 } => theta0,
            other => {
                return Err(Error::UnsupportedKind(format!(
                    "balance temperature needs a bistable sign pattern, got {other:?}"
                )))
            }
        };
        match &self.kind {
            Kind::Tabulated(t) => t.theta2(theta0),
            _ => {
                // Bisection on the closed-form potential. F < 0 just above
                // theta0 and F(1) = integral of f, which must be positive.
                let f_at = |t: f64| self.base_potential_unchecked(t);
                let mut lo = theta0;
                let mut hi = 1.0;
                if !(f_at(hi) > 0.0) {
                    return Err(Error::DegenerateBalance(format!(
                        "potential at 1 is {:.3e}; no interior balance temperature",
                        f_at(hi)
                    )));
                }
                while hi - lo > THETA2_TOL {
                    let mid = 0.5 * (lo + hi);
                    if f_at(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }

    fn base_potential_unchecked(&self, theta: f64) -> f64 {
        // Only called for shapes with closed-form potentials.
        match &self.kind {
            Kind::BistableCubic { a } => {
                -theta.powi(4) / 4.0 + (1.0 + a) * theta.powi(3) / 3.0 - a * theta * theta / 2.0
            }
            _ => unreachable!("closed-form potential requested for {:?}", self.kind),
        }
    }

    /// A Lipschitz bound c >= max(sup |f'|, sup |f|) on [0, 1].
    ///
    /// Closed-form critical-point analysis for the polynomial shapes, exact
    /// segment slopes for tables, and an inflated dense scan otherwise.
    /// Scales linearly with the amplitude; the zero term gives 0.
    pub fn lipschitz_constant(&self) -> f64 {
        let base = match &self.kind {
            Kind::Ignition { theta0 } => {
                // |f'| peaks at the plateau edge; sup f = ((1-theta0)/2)^2.
                let slope = 1.0 - theta0;
                let peak = 0.25 * (1.0 - theta0) * (1.0 - theta0);
                slope.max(peak)
            }
            Kind::Kpp { p } => {
                let p = *p;
                let mut slope: f64 = 1.0; // |f'(1)| = 1 for every p
                if p == 1.0 {
                    slope = slope.max(1.0); // f'(0) = 1
                } else {
                    // Interior critical point of f': theta = (p-1)/(p+1).
                    let t = (p - 1.0) / (p + 1.0);
                    let fp = p * pow_fast(t, p - 1.0) - (p + 1.0) * pow_fast(t, p);
                    slope = slope.max(fp.abs());
                }
                let peak_t = p / (p + 1.0);
                let peak = pow_fast(peak_t, p) * (1.0 - peak_t);
                slope.max(peak)
            }
            Kind::BistableCubic { a } => {
                // f' = -3 theta^2 + 2(1+a) theta - a: check endpoints and vertex.
                let vertex = (1.0 + a) / 3.0;
                let fp = |t: f64| -3.0 * t * t + 2.0 * (1.0 + a) * t - a;
                let slope = fp(0.0).abs().max(fp(1.0).abs()).max(fp(vertex).abs());
                // Critical points of f itself: f' = 0.
                let disc = (a * a - a + 1.0).sqrt();
                let peak = [(1.0 + a - disc) / 3.0, (1.0 + a + disc) / 3.0]
                    .into_iter()
                    .filter(|t| (0.0..=1.0).contains(t))
                    .map(|t| (t * (t - a) * (1.0 - t)).abs())
                    .fold(0.0, f64::max);
                slope.max(peak)
            }
            Kind::Tabulated(t) => {
                let mut slope: f64 = 0.0;
                let mut peak: f64 = 0.0;
                for w in t.points.windows(2) {
                    slope = slope.max(((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs());
                    peak = peak.max(w[0].1.abs());
                }
                slope.max(peak)
            }
            Kind::Arrhenius { .. } => {
                // Dense secant scan, inflated to stay a guaranteed bound.
                let n = SCAN_SAMPLES;
                let h = 1.0 / (n - 1) as f64;
                let mut prev = self.base_eval(0.0);
                let mut slope: f64 = 0.0;
                let mut peak: f64 = prev.abs();
                for i in 1..n {
                    let v = self.base_eval(i as f64 * h);
                    slope = slope.max(((v - prev) / h).abs());
                    peak = peak.max(v.abs());
                    prev = v;
                }
                1.03 * slope.max(peak)
            }
        };
        self.amplitude * base
    }

    /// Dense-grid verification that the sampled sign structure matches the
    /// declared pattern. Runs at construction; also callable on demand.
    pub fn check_sign_pattern(&self) -> Result<SignReport> {
        let n = 2001usize;
        let h = 1.0 / (n - 1) as f64;
        let tol = 1e-12 * self.amplitude.max(1.0);
        let mut min_f = f64::INFINITY;
        let mut max_f = f64::NEG_INFINITY;
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let t = (i as f64 * h).min(1.0);
            let v = self.amplitude * self.base_eval(t);
            if !v.is_finite() {
                return Err(Error::NumericalFault(format!("f({t}) is not finite")));
            }
            min_f = min_f.min(v);
            max_f = max_f.max(v);
            values.push((t, v));
        }
        let report = |pattern| SignReport { pattern, samples: n, min_f, max_f };

        if self.amplitude == 0.0 {
            return Ok(report(SignPattern::Zero));
        }
        if values[0].1.abs() > tol || values[n - 1].1.abs() > tol {
            return Err(Error::Validation(format!(
                "f must vanish at 0 and 1, got f(0) = {:.3e}, f(1) = {:.3e}",
                values[0].1,
                values[n - 1].1
            )));
        }

        let pattern = self.declared_pattern();
        match pattern {
            SignPattern::Zero => unreachable!("zero pattern only for amplitude 0"),
            SignPattern::IgnitionPlateau { theta0 } => {
                for &(t, v) in &values {
                    if v < -tol {
                        return Err(Error::Validation(format!(
                            "declared ignition but f({t}) = {v:.3e} < 0"
                        )));
                    }
                    if t <= theta0 && v.abs() > tol {
                        return Err(Error::Validation(format!(
                            "declared plateau up to {theta0} but f({t}) = {v:.3e}"
                        )));
                    }
                    if t > theta0 + 2.0 * h && t < 1.0 - 2.0 * h && v <= tol {
                        return Err(Error::Validation(format!(
                            "declared ignition but f({t}) = {v:.3e} is not positive"
                        )));
                    }
                }
            }
            SignPattern::PositiveInterior => {
                // Allow a numerically-zero prefix (power and Arrhenius terms
                // underflow near 0) but nothing negative and no zeros once
                // the values have risen.
                let mut risen = false;
                for &(t, v) in &values {
                    if v < -tol {
                        return Err(Error::Validation(format!(
                            "declared positive-interior but f({t}) = {v:.3e} < 0"
                        )));
                    }
                    if v > tol {
                        risen = true;
                    } else if risen && t < 1.0 - 2.0 * h {
                        return Err(Error::Validation(format!(
                            "declared positive-interior but f({t}) = {v:.3e} after rising"
                        )));
                    }
                }
                if !risen {
                    return Err(Error::Validation(
                        "declared positive-interior but f never rises above tolerance".into(),
                    ));
                }
            }
            SignPattern::Bistable { theta0 } => {
                for &(t, v) in &values {
                    if t > 2.0 * h && t < theta0 - 2.0 * h && v >= -tol {
                        return Err(Error::Validation(format!(
                            "declared bistable but f({t}) = {v:.3e} is not negative below theta0"
                        )));
                    }
                    if t > theta0 + 2.0 * h && t < 1.0 - 2.0 * h && v <= tol {
                        return Err(Error::Validation(format!(
                            "declared bistable but f({t}) = {v:.3e} is not positive above theta0"
                        )));
                    }
                }
            }
        }
        Ok(report(pattern))
    }

    /// The sign pattern this spec is declared to have (validated at build).
    pub fn declared_pattern(&self) -> SignPattern {
        if self.amplitude == 0.0 {
            return SignPattern::Zero;
        }
        match &self.kind {
            Kind::Ignition { theta0 } => SignPattern::IgnitionPlateau { theta0: *theta0 },
            Kind::Kpp { .. } | Kind::Arrhenius { .. } => SignPattern::PositiveInterior,
            Kind::BistableCubic { a } => SignPattern::Bistable { theta0: *a },
            Kind::Tabulated(t) => t.pattern,
        }
    }

    /// Integral of f over [0, 1].
    pub fn integral(&self) -> Result<f64> {
        self.potential(1.0)
    }

    /// One-sided derivative f'(0+). Exact for every shape: the linearized
    /// decay/growth rate at the cold state.
    pub fn derivative_at_zero(&self) -> f64 {
        let base = match &self.kind {
            Kind::Ignition { .. } => 0.0,
            Kind::Kpp { p } => {
                if *p == 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            // exp(-A/theta) vanishes to all orders at 0+.
            Kind::Arrhenius { .. } => 0.0,
            Kind::BistableCubic { a } => -a,
            Kind::Tabulated(t) => {
                let (t1, f1) = t.points[1];
                f1 / t1
            }
        };
        self.amplitude * base
    }

    /// One-sided derivative f'(1-). Exact for every shape: the linearized
    /// rate at the hot state (negative when 1 is stable).
    pub fn derivative_at_one(&self) -> f64 {
        let base = match &self.kind {
            Kind::Ignition { theta0 } => -(1.0 - theta0),
            Kind::Kpp { .. } => -1.0,
            Kind::Arrhenius { activation } => -(-activation).exp(),
            Kind::BistableCubic { a } => -(1.0 - a),
            Kind::Tabulated(t) => {
                let n = t.points.len();
                let (t0, f0) = t.points[n - 2];
                -f0 / (1.0 - t0)
            }
        };
        self.amplitude * base
    }
}

impl Tabulated {
    fn eval(&self, theta: f64) -> f64 {
        let pts = &self.points;
        // partition_point returns the first breakpoint > theta.
        let idx = pts.partition_point(|&(t, _)| t <= theta);
        if idx == 0 {
            return pts[0].1;
        }
        if idx == pts.len() {
            return pts[pts.len() - 1].1;
        }
        let (t0, f0) = pts[idx - 1];
        let (t1, f1) = pts[idx];
        f0 + (f1 - f0) * (theta - t0) / (t1 - t0)
    }

    fn potential(&self, theta: f64) -> f64 {
        let pts = &self.points;
        let idx = pts.partition_point(|&(t, _)| t <= theta);
        if idx == 0 {
            return 0.0;
        }
        if idx == pts.len() {
            return self.cum[idx - 1];
        }
        let (t0, f0) = pts[idx - 1];
        let (t1, f1) = pts[idx];
        let slope = (f1 - f0) / (t1 - t0);
        let d = theta - t0;
        self.cum[idx - 1] + f0 * d + 0.5 * slope * d * d
    }

    /// Exact zero of the piecewise-quadratic potential above theta0.
    fn theta2(&self, theta0: f64) -> Result<f64> {
        let pts = &self.points;
        for i in 0..pts.len() - 1 {
            let (t0, f0) = pts[i];
            let (t1, f1) = pts[i + 1];
            if t1 <= theta0 {
                continue;
            }
            let (c0, c1) = (self.cum[i], self.cum[i + 1]);
            if !(c0 < 0.0 && c1 >= 0.0) {
                continue;
            }
            // Solve c0 + f0 d + slope d^2 / 2 = 0 on [0, t1 - t0].
            let slope = (f1 - f0) / (t1 - t0);
            let width = t1 - t0;
            let d = if slope.abs() < 1e-300 {
                -c0 / f0
            } else {
                let disc = f0 * f0 - 2.0 * slope * c0;
                if disc < 0.0 {
                    continue;
                }
                // The increasing branch: potential crosses zero from below.
                let r = (-f0 + disc.sqrt()) / slope;
                if (0.0..=width).contains(&r) {
                    r
                } else {
                    (-f0 - disc.sqrt()) / slope
                }
            };
            if (0.0..=width + 1e-15).contains(&d) {
                return Ok((t0 + d).min(t1));
            }
        }
        Err(Error::DegenerateBalance(
            "tabulated potential never returns to zero above theta0".into(),
        ))
    }
}

/// theta^p with fast paths for the small integer exponents the catalogue
/// actually uses; falls back to powf.
#[inline]
fn pow_fast(theta: f64, p: f64) -> f64 {
    if p == 1.0 {
        theta
    } else if p == 2.0 {
        theta * theta
    } else if p == 3.0 {
        theta * theta * theta
    } else if p == 4.0 {
        let s = theta * theta;
        s * s
    } else if p == 5.0 {
        let s = theta * theta;
        s * s * theta
    } else if p == 6.0 {
        let s = theta * theta * theta;
        s * s
    } else {
        theta.powf(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic_zero_of_quadratic(a: f64) -> f64 {
        // For the cubic, 4 F(theta)/theta^2 = -theta^2 + 4(1+a) theta / 3 - 2a,
        // so theta2 solves theta^2 - 4(1+a)/3 theta + 2a = 0 (root below 1).
        let b = 4.0 * (1.0 + a) / 3.0;
        let disc = (b * b - 8.0 * a).sqrt();
        0.5 * (b - disc)
    }

    #[test]
    fn cubic_value_at_half() {
        let f = NonlinearitySpec::bistable_cubic(0.25).unwrap();
        assert!((f.eval_f(0.5).unwrap() - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn ignition_is_zero_below_theta0() {
        let f = NonlinearitySpec::ignition(0.3).unwrap();
        assert_eq!(f.eval_f(0.0).unwrap(), 0.0);
        assert_eq!(f.eval_f(0.3).unwrap(), 0.0);
        assert_eq!(f.eval_f(0.15).unwrap(), 0.0);
        assert!(f.eval_f(0.31).unwrap() > 0.0);
    }

    #[test]
    fn eval_rejects_out_of_range_theta() {
        let f = NonlinearitySpec::kpp_logistic().unwrap();
        assert!(matches!(f.eval_f(1.2), Err(Error::Domain(_))));
        assert!(matches!(f.eval_f(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn logistic_potential_at_one_is_one_sixth() {
        let f = NonlinearitySpec::kpp_logistic().unwrap();
        assert!((f.potential(1.0).unwrap() - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_potential_at_one() {
        // -1/4 + 1.25/3 - 0.125 = 1/24 for a = 0.25.
        let f = NonlinearitySpec::bistable_cubic(0.25).unwrap();
        assert!((f.potential(1.0).unwrap() - 1.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn potential_at_zero_vanishes() {
        for f in [
            NonlinearitySpec::ignition(0.3).unwrap(),
            NonlinearitySpec::kpp_power(4.0).unwrap(),
            NonlinearitySpec::arrhenius(4.0).unwrap(),
            NonlinearitySpec::bistable_cubic(0.25).unwrap(),
        ] {
            assert_eq!(f.potential(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn theta2_matches_quadratic_root() {
        let f = NonlinearitySpec::bistable_cubic(0.25).unwrap();
        let t2 = f.theta2().unwrap();
        let oracle = cubic_zero_of_quadratic(0.25);
        assert!((t2 - oracle).abs() < 1e-11, "theta2 {t2} vs root {oracle}");
        // Frozen reference value for a = 0.25: (5 - sqrt 7) / 6.
        assert!((t2 - 0.392_374_781_085_1).abs() < 1e-9, "theta2 = {t2}");
        // The potential really vanishes there.
        assert!(f.potential(t2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn theta2_is_amplitude_invariant() {
        let f = NonlinearitySpec::bistable_cubic(0.3).unwrap();
        let g = f.with_amplitude(7.5).unwrap();
        assert_eq!(f.theta2().unwrap(), g.theta2().unwrap());
    }

    #[test]
    fn theta2_rejects_ignition() {
        let f = NonlinearitySpec::ignition(0.3).unwrap();
        assert!(matches!(f.theta2(), Err(Error::UnsupportedKind(_))));
    }

    #[test]
    fn theta2_rejects_balanced_cubic() {
        let f = NonlinearitySpec::bistable_cubic(0.5).unwrap();
        assert!(matches!(f.theta2(), Err(Error::DegenerateBalance(_))));
    }

    #[test]
    fn tabulated_theta2_matches_bisection() {
        // Sample the a = 0.25 cubic on a fine grid and compare the exact
        // segment solve against bisection on the same piecewise table.
        let n = 2000;
        let pts: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                (t, t * (t - 0.25) * (1.0 - t))
            })
            .collect();
        let f = NonlinearitySpec::tabulated(pts, SignPattern::Bistable { theta0: 0.25 }).unwrap();
        let t2 = f.theta2().unwrap();

        // Bisection oracle on the same table's potential.
        let (mut lo, mut hi) = (0.25, 1.0);
        assert!(f.potential(hi).unwrap() > 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f.potential(mid).unwrap() < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((t2 - oracle).abs() < 1e-10, "{t2} vs {oracle}");
        // And it sits near the smooth cubic's value.
        assert!((t2 - cubic_zero_of_quadratic(0.25)).abs() < 1e-5);
    }

    #[test]
    fn logistic_lipschitz_is_one() {
        let f = NonlinearitySpec::kpp_logistic().unwrap();
        assert!((f.lipschitz_constant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_amplitude_lipschitz_is_zero() {
        let f = NonlinearitySpec::new(Kind::Kpp { p: 1.0 }, 0.0).unwrap();
        assert_eq!(f.lipschitz_constant(), 0.0);
    }

    #[test]
    fn lipschitz_scales_with_amplitude() {
        let f = NonlinearitySpec::bistable_cubic(0.25).unwrap();
        let g = f.with_amplitude(4.0).unwrap();
        assert!((g.lipschitz_constant() - 4.0 * f.lipschitz_constant()).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_dominates_sampled_slopes() {
        for f in [
            NonlinearitySpec::ignition(0.3).unwrap(),
            NonlinearitySpec::kpp_logistic().unwrap(),
            NonlinearitySpec::kpp_power(4.0).unwrap(),
            NonlinearitySpec::arrhenius(2.0).unwrap(),
            NonlinearitySpec::bistable_cubic(0.25).unwrap(),
        ] {
            let c = f.lipschitz_constant();
            let n = 5000;
            for i in 0..n {
                let t0 = i as f64 / n as f64;
                let t1 = (i + 1) as f64 / n as f64;
                let slope = (f.eval_f(t1).unwrap() - f.eval_f(t0).unwrap()) / (t1 - t0);
                assert!(
                    slope.abs() <= c + 1e-9,
                    "{}: secant {slope} exceeds c = {c}",
                    f.kind_name()
                );
                assert!(f.eval_f(t0).unwrap().abs() <= c + 1e-12);
            }
        }
    }

    #[test]
    fn mislabeled_table_is_rejected() {
        let pts = vec![(0.0, 0.0), (0.5, -1.0), (1.0, 0.0)];
        let err = NonlinearitySpec::tabulated(pts, SignPattern::PositiveInterior);
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn table_must_close_at_the_corners() {
        let pts = vec![(0.1, 0.0), (1.0, 0.0)];
        assert!(NonlinearitySpec::tabulated(pts, SignPattern::PositiveInterior).is_err());
        let pts = vec![(0.0, 0.2), (1.0, 0.0)];
        assert!(NonlinearitySpec::tabulated(pts, SignPattern::PositiveInterior).is_err());
    }

    #[test]
    fn constructor_rejects_bad_parameters() {
        assert!(NonlinearitySpec::ignition(0.0).is_err());
        assert!(NonlinearitySpec::ignition(1.0).is_err());
        assert!(NonlinearitySpec::kpp_power(0.5).is_err());
        assert!(NonlinearitySpec::arrhenius(-1.0).is_err());
        assert!(NonlinearitySpec::bistable_cubic(0.6).is_err());
        assert!(NonlinearitySpec::new(Kind::Kpp { p: 1.0 }, -2.0).is_err());
        assert!(NonlinearitySpec::new(Kind::Kpp { p: 1.0 }, f64::NAN).is_err());
    }

    #[test]
    fn ignition_rise_length() {
        let f = NonlinearitySpec::ignition(0.3).unwrap();
        assert!((f.ignition_rise().unwrap() - 0.35).abs() < 1e-15);
        assert!(NonlinearitySpec::kpp_logistic().unwrap().ignition_rise().is_none());
    }

    #[test]
    fn potential_derivative_recovers_f() {
        let h = 1e-5;
        for f in [
            NonlinearitySpec::ignition(0.3).unwrap(),
            NonlinearitySpec::kpp_logistic().unwrap(),
            NonlinearitySpec::kpp_power(4.0).unwrap(),
            NonlinearitySpec::arrhenius(4.0).unwrap(),
            NonlinearitySpec::bistable_cubic(0.25).unwrap(),
        ] {
            for &t in &[0.05, 0.2, 0.45, 0.6, 0.8, 0.95] {
                let fd =
                    (f.potential(t + h).unwrap() - f.potential(t - h).unwrap()) / (2.0 * h);
                let exact = f.eval_f(t).unwrap();
                assert!(
                    (fd - exact).abs() < 1e-8,
                    "{} at {t}: centered diff {fd} vs f {exact}",
                    f.kind_name()
                );
            }
        }
    }

    #[test]
    fn endpoint_derivatives_match_one_sided_differences() {
        let table = NonlinearitySpec::tabulated(
            vec![(0.0, 0.0), (0.25, -0.05), (0.4, 0.0), (0.7, 0.3), (1.0, 0.0)],
            SignPattern::Bistable { theta0: 0.4 },
        )
        .unwrap();
        let specs = [
            NonlinearitySpec::ignition(0.3).unwrap(),
            NonlinearitySpec::kpp_logistic().unwrap(),
            NonlinearitySpec::kpp_power(3.0).unwrap(),
            NonlinearitySpec::arrhenius(2.0).unwrap(),
            NonlinearitySpec::bistable_cubic(0.25).unwrap().with_amplitude(1.7).unwrap(),
            table,
        ];
        let h = 1e-7;
        for f in &specs {
            let fd0 = f.eval_f(h).unwrap() / h;
            let fd1 = -f.eval_f(1.0 - h).unwrap() / h;
            assert!(
                (f.derivative_at_zero() - fd0).abs() < 1e-5,
                "{}: f'(0) = {} vs one-sided {fd0}",
                f.kind_name(),
                f.derivative_at_zero()
            );
            assert!(
                (f.derivative_at_one() - fd1).abs() < 1e-5,
                "{}: f'(1) = {} vs one-sided {fd1}",
                f.kind_name(),
                f.derivative_at_one()
            );
        }
    }
}
