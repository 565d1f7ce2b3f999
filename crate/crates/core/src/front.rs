//! Traveling fronts phi(x - vt) for bistable reactions.
//!
//! In the moving frame the profile solves phi'' + v phi' + f(phi) = 0 with
//! phi(-inf) = 1 and phi(+inf) = 0. Both rest states are saddles of the
//! phase-plane system (phi, psi = phi'), so the front is a saddle-saddle
//! connection and exists for exactly one speed; its sign is the sign of
//! the integral of f over [0, 1]. That single speed is found by shooting:
//! launch along the unstable eigendirection of (1, 0) and bisect on v
//! according to which side of the origin's stable manifold the orbit
//! falls —
//!
//!   undershoot: phi reaches 0 with psi < 0  =>  v too small,
//!   overshoot:  psi reaches 0 with phi > 0  =>  v too large.
//!
//! (The friction analogy: v is the damping felt by a particle rolling
//! from the hilltop at 1 toward the hilltop at 0; too little damping and
//! it flies past, too much and it stalls in the valley.)

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearitySpec;

/// Distance from the saddle at which the orbit is launched.
const LAUNCH_OFFSET: f64 = 1e-8;

/// Fixed integrator step in xi. The system is smooth and non-stiff;
/// classical fourth-order stepping at 1e-3 leaves the speed error far
/// below the bisection tolerance.
const DXI: f64 = 1e-3;

/// The profile table keeps every other integrator step, giving uniform
/// spacing 2e-3: centered differences on the table then certify the
/// equation to ~4e-7, inside the 1e-6 contract.
const STORE_EVERY: usize = 2;

const MAX_ITERS: usize = 200;

/// A computed front: speed plus the tabulated connecting orbit.
#[derive(Debug, Clone)]
pub struct FrontSolution {
    /// Front speed; positive means the hot state invades.
    pub speed: f64,
    /// Matching defect of the shot: the closest phase-plane distance of
    /// the final orbit to the rest state (0, 0) it should join onto.
    pub shoot_residual: f64,
    /// Final bisection bracket (v_lo, v_hi).
    pub bracket: (f64, f64),
    /// Bisection iterations used.
    pub iterations: usize,
    xs: Vec<f64>,
    phis: Vec<f64>,
    psis: Vec<f64>,
    /// Unstable rate at (1, 0): hot-side tail 1 - C exp(rate_hot xi).
    rate_hot: f64,
    /// Stable rate at (0, 0) (negative): cold-side tail C exp(rate_cold xi).
    rate_cold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shot {
    Undershoot,
    Overshoot,
    /// Ran past the safety horizon without classifying: the candidate v
    /// is indistinguishable from the true speed at this resolution.
    Undecided,
}

fn shoot(
    spec: &NonlinearitySpec,
    v: f64,
    mut record: Option<&mut Vec<(f64, f64, f64)>>,
) -> Shot {
    let fp1 = spec.derivative_at_one();
    let fp0 = spec.derivative_at_zero();
    let lam_saddle = 0.5 * (-v + (v * v - 4.0 * fp1).sqrt());
    let lam_origin = 0.5 * (-v + (v * v - 4.0 * fp0).sqrt());
    // Enough xi to leave the saddle, cross, and resolve the decision near
    // the origin even when v sits within 1e-13 of the connection.
    let xi_max = 50.0 + 60.0 * (1.0 / lam_saddle + 1.0 / lam_origin);
    let n_max = (xi_max / DXI) as usize;

    // Trap test for damped orbits: E = psi^2/2 + F(phi) decreases when
    // v > 0 and must stay >= 0 for the orbit ever to reach (0, 0). Once
    // E < 0 the orbit is confined near the interior equilibrium, where it
    // may converge as a stable node with psi < 0 throughout — the psi
    // sign test alone would never fire.
    let energy_floor = -1e-12 * spec.amplitude().max(1.0);
    let pot = |p: f64| {
        spec.potential(p.clamp(0.0, 1.0)).expect("potential is total on [0, 1]")
    };

    let mut phi = 1.0 - LAUNCH_OFFSET;
    let mut psi = -LAUNCH_OFFSET * lam_saddle;
    let h = DXI;
    let rhs = |p: f64, q: f64| (q, -v * q - spec.eval_clamped(p));
    for k in 0..n_max {
        if let Some(rec) = record.as_deref_mut() {
            if k % STORE_EVERY == 0 {
                rec.push((k as f64 * h, phi, psi));
            }
        }
        let (a1, b1) = rhs(phi, psi);
        let (a2, b2) = rhs(phi + 0.5 * h * a1, psi + 0.5 * h * b1);
        let (a3, b3) = rhs(phi + 0.5 * h * a2, psi + 0.5 * h * b2);
        let (a4, b4) = rhs(phi + h * a3, psi + h * b3);
        phi += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        psi += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        if phi <= 0.0 {
            return Shot::Undershoot;
        }
        if psi >= 0.0 {
            return Shot::Overshoot;
        }
        if v > 0.0 && 0.5 * psi * psi + pot(phi) < energy_floor {
            return Shot::Overshoot;
        }
    }
    Shot::Undecided
}

/// Find the unique front speed of a bistable reaction by bisection, to
/// bracket width `tol`, and assemble the connecting profile.
pub fn front_speed(spec: &NonlinearitySpec, tol: f64) -> Result<FrontSolution> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Validation(format!("speed tolerance {tol} must be positive")));
    }
    if !spec.is_bistable() {
        return Err(Error::UnsupportedKind(format!(
            "traveling-front shooting needs a bistable reaction, got {:?}",
            spec.declared_pattern()
        )));
    }
    let (fp0, fp1) = (spec.derivative_at_zero(), spec.derivative_at_one());
    if !(fp0 < 0.0 && fp1 < 0.0) {
        return Err(Error::Precondition(format!(
            "both rest states must be strictly stable: f'(0) = {fp0}, f'(1) = {fp1}"
        )));
    }

    let v_max = 2.0 * spec.lipschitz_constant().sqrt();
    let (mut lo, mut hi) = (-v_max, v_max);
    match shoot(spec, lo, None) {
        Shot::Undershoot => {}
        other => {
            return Err(Error::Bracket(format!(
                "v = {lo} should undershoot but the orbit reported {other:?}"
            )))
        }
    }
    match shoot(spec, hi, None) {
        Shot::Overshoot => {}
        other => {
            return Err(Error::Bracket(format!(
                "v = {hi} should overshoot but the orbit reported {other:?}"
            )))
        }
    }

    let mut iterations = 0;
    while hi - lo > tol && iterations < MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        iterations += 1;
        match shoot(spec, mid, None) {
            Shot::Undershoot => lo = mid,
            Shot::Overshoot => hi = mid,
            Shot::Undecided => {
                lo = mid;
                hi = mid;
            }
        }
    }
    let v = 0.5 * (lo + hi);

    // Re-run the winning shot with recording on and keep the orbit up to
    // its closest approach to the origin; past that point it veers off
    // along the unstable direction and is no longer part of the front.
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    let _ = shoot(spec, v, Some(&mut rows));
    let (mut cut, mut best) = (0usize, f64::INFINITY);
    for (i, &(_, p, q)) in rows.iter().enumerate() {
        let d = (p * p + q * q).sqrt();
        if d < best {
            best = d;
            cut = i;
        }
    }
    rows.truncate(cut + 1);
    // Strict monotonicity can only fail in the last few veering rows.
    while rows.len() > 1 {
        let m = rows.len();
        if rows[m - 1].1 < rows[m - 2].1 {
            break;
        }
        rows.pop();
    }
    if rows.len() < 4 {
        return Err(Error::NumericalFault(format!(
            "front orbit at v = {v} kept only {} usable rows",
            rows.len()
        )));
    }

    // Center the profile at phi = 1/2.
    let mut xi_half = rows[0].0;
    for w in rows.windows(2) {
        let (x0, p0, _) = w[0];
        let (x1, p1, _) = w[1];
        if p0 >= 0.5 && p1 < 0.5 {
            xi_half = x0 + (x1 - x0) * (p0 - 0.5) / (p0 - p1);
            break;
        }
    }

    let xs = rows.iter().map(|r| r.0 - xi_half).collect();
    let phis = rows.iter().map(|r| r.1).collect();
    let psis = rows.iter().map(|r| r.2).collect();
    Ok(FrontSolution {
        speed: v,
        shoot_residual: best,
        bracket: (lo, hi),
        iterations,
        xs,
        phis,
        psis,
        rate_hot: 0.5 * (-v + (v * v - 4.0 * fp1).sqrt()),
        rate_cold: 0.5 * (-v - (v * v - 4.0 * fp0).sqrt()),
    })
}

impl FrontSolution {
    /// Table rows (xi, phi), decreasing in phi, xi = 0 at phi = 1/2.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.phis.iter().copied())
    }

    /// phi(xi): cubic Hermite on the table, linearized rest-state tails
    /// outside it.
    pub fn eval(&self, xi: f64) -> f64 {
        let m = self.xs.len();
        if xi <= self.xs[0] {
            return 1.0 - (1.0 - self.phis[0]) * (self.rate_hot * (xi - self.xs[0])).exp();
        }
        if xi >= self.xs[m - 1] {
            return self.phis[m - 1] * (self.rate_cold * (xi - self.xs[m - 1])).exp();
        }
        let i = self.xs.partition_point(|&q| q <= xi).clamp(1, m - 1) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (xi - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.phis[i]
            + (t3 - 2.0 * t2 + t) * h * self.psis[i]
            + (-2.0 * t3 + 3.0 * t2) * self.phis[i + 1]
            + (t3 - t2) * h * self.psis[i + 1]
    }

    /// Sup of |D2 phi + v D1 phi + f(phi)| over interior table rows, with
    /// centered differences on the uniform table spacing. Depends only on
    /// row-to-row differences, so it is translation invariant.
    pub fn residual_sup(&self, spec: &NonlinearitySpec) -> Result<f64> {
        let m = self.xs.len();
        let h = self.xs[1] - self.xs[0];
        let mut worst = 0.0f64;
        for i in 1..m - 1 {
            let (hm, hp) = (self.xs[i] - self.xs[i - 1], self.xs[i + 1] - self.xs[i]);
            if (hm - h).abs() > 1e-12 || (hp - h).abs() > 1e-12 {
                return Err(Error::Resolution(format!(
                    "table spacing is not uniform near row {i}: {hm} vs {hp}"
                )));
            }
            let d2 = (self.phis[i - 1] - 2.0 * self.phis[i] + self.phis[i + 1]) / (h * h);
            let d1 = (self.phis[i + 1] - self.phis[i - 1]) / (2.0 * h);
            let r = d2 + self.speed * d1 + spec.eval_clamped(self.phis[i]);
            worst = worst.max(r.abs());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::SignPattern;

    fn tanh_speed(a: f64) -> f64 {
        (1.0 - 2.0 * a) / 2.0f64.sqrt()
    }

    #[test]
    fn tanh_ansatz_solves_the_cubic_front_equation() {
        // phi = (1 + exp(xi/sqrt 2))^-1 gives phi' = -phi(1-phi)/sqrt 2 and
        // phi'' = phi(1-phi)(1-2phi)/2; with v = (1-2a)/sqrt 2 the equation
        // collapses to phi(1-phi)[(a-phi) + (phi-a)] = 0 identically. This
        // pins the oracle the shooting results are judged against.
        for &a in &[0.1, 0.25, 0.4] {
            let spec = NonlinearitySpec::bistable_cubic(a).unwrap();
            let v = tanh_speed(a);
            let mut worst = 0.0f64;
            for k in 0..=400 {
                let xi = -20.0 + 0.1 * k as f64;
                let phi = 1.0 / (1.0 + (xi / 2.0f64.sqrt()).exp());
                let d1 = -phi * (1.0 - phi) / 2.0f64.sqrt();
                let d2 = phi * (1.0 - phi) * (1.0 - 2.0 * phi) / 2.0;
                worst = worst.max((d2 + v * d1 + spec.eval_f(phi).unwrap()).abs());
            }
            assert!(worst < 1e-15, "a = {a}: ansatz residual {worst:e}");
        }
    }

    #[test]
    fn cubic_speeds_match_the_tanh_oracle() {
        for &a in &[0.1, 0.25, 0.4] {
            let spec = NonlinearitySpec::bistable_cubic(a).unwrap();
            let front = front_speed(&spec, 1e-10).unwrap();
            let oracle = tanh_speed(a);
            assert!(
                (front.speed - oracle).abs() < 1e-3,
                "a = {a}: shot {} vs oracle {oracle}",
                front.speed
            );
        }
    }

    #[test]
    fn balanced_cubic_front_is_stationary() {
        let spec = NonlinearitySpec::bistable_cubic(0.5).unwrap();
        let front = front_speed(&spec, 1e-10).unwrap();
        assert!(front.speed.abs() < 1e-6, "balanced speed {}", front.speed);
    }

    #[test]
    fn profile_is_monotone_and_solves_the_equation() {
        let spec = NonlinearitySpec::bistable_cubic(0.25).unwrap();
        let front = front_speed(&spec, 1e-10).unwrap();
        let rows: Vec<_> = front.rows().collect();
        assert!(rows.first().unwrap().1 > 1.0 - 1e-6);
        assert!(rows.last().unwrap().1 < 1e-3);
        for w in rows.windows(2) {
            assert!(w[1].1 < w[0].1, "phi must strictly decrease");
        }
        assert!(front.shoot_residual < 1e-5, "join defect {}", front.shoot_residual);
        let res = front.residual_sup(&spec).unwrap();
        assert!(res <= 1e-6, "table residual {res:e}");
        // Centered: phi(0) = 1/2 up to table interpolation.
        assert!((front.eval(0.0) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn residual_is_translation_invariant() {
        let spec = NonlinearitySpec::bistable_cubic(0.25).unwrap();
        let front = front_speed(&spec, 1e-8).unwrap();
        let base = front.residual_sup(&spec).unwrap();
        let mut shifted = front.clone();
        for x in shifted.xs.iter_mut() {
            *x += 37.25; // exact in binary, so spacings are bitwise equal
        }
        assert_eq!(base.to_bits(), shifted.residual_sup(&spec).unwrap().to_bits());
    }

    #[test]
    fn speed_sign_follows_the_integral_of_f() {
        // Net-negative bistable table: the cold state wins, so v < 0.
        let spec = NonlinearitySpec::tabulated(
            vec![(0.0, 0.0), (0.5, -0.2), (0.7, 0.0), (0.85, 0.1), (1.0, 0.0)],
            SignPattern::Bistable { theta0: 0.7 },
        )
        .unwrap();
        assert!(spec.integral().unwrap() < 0.0);
        let front = front_speed(&spec, 1e-10).unwrap();
        assert!(front.speed < -1e-3, "expected retreat, got v = {}", front.speed);

        let hot = NonlinearitySpec::bistable_cubic(0.25).unwrap();
        assert!(hot.integral().unwrap() > 0.0);
        assert!(front_speed(&hot, 1e-10).unwrap().speed > 1e-3);
    }

    #[test]
    fn speed_decreases_in_a_and_vanishes_at_balance() {
        let mut prev = f64::INFINITY;
        for &a in &[0.1, 0.2, 0.3, 0.4, 0.45] {
            let spec = NonlinearitySpec::bistable_cubic(a).unwrap();
            let v = front_speed(&spec, 1e-8).unwrap().speed;
            assert!(v > 0.0, "a = {a}: v = {v}");
            assert!(v < prev, "a = {a}: speed must decrease, {v} !< {prev}");
            prev = v;
        }
        assert!(prev < 0.08, "v(0.45) should be near (1 - 0.9)/sqrt 2");
    }

    #[test]
    fn amplitude_k2_scales_speed_by_k() {
        let unit = NonlinearitySpec::bistable_cubic(0.25).unwrap();
        let hot = unit.with_amplitude(4.0).unwrap();
        let v1 = front_speed(&unit, 1e-10).unwrap().speed;
        let v4 = front_speed(&hot, 1e-10).unwrap().speed;
        assert!((v4 - 2.0 * v1).abs() < 2e-3, "v(4f) = {v4} vs 2 v(f) = {}", 2.0 * v1);
    }

    #[test]
    fn rejects_non_bistable_and_bad_tolerance() {
        let kpp = NonlinearitySpec::kpp_logistic().unwrap();
        match front_speed(&kpp, 1e-8) {
            Err(Error::UnsupportedKind(_)) => {}
            other => panic!("expected unsupported-kind, got {other:?}"),
        }
        let cubic = NonlinearitySpec::bistable_cubic(0.25).unwrap();
        assert!(front_speed(&cubic, 0.0).is_err());
        assert!(front_speed(&cubic, -1.0).is_err());
    }
}
