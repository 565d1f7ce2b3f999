//! Monotone time-stepping for T_t = T_xx + f(T) on [-X, X].
//!
//! Each step is a Lie splitting: the reaction map R(theta) =
//! clamp(theta + dt f(theta), 0, 1) applied nodewise, followed by one
//! backward-Euler diffusion solve (I - dt D2) v = u with the standard
//! three-point Laplacian. The implicit matrix is an M-matrix for every
//! dt > 0 and the reaction map is non-decreasing whenever dt <= 1/c with
//! c a Lipschitz bound, so the composite step preserves ordering between
//! solutions, the range [0, 1], and even symmetry.
//!
//! Symmetry is preserved *bitwise*: the tridiagonal solve eliminates from
//! both ends toward the center, so a mirror-symmetric right-hand side goes
//! through mirror-identical float operations. Threshold trajectories hover
//! near dynamically unstable states for long times; an ordinary one-sided
//! Thomas sweep would seed ulp-level asymmetries that grow exponentially
//! there.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, FIELD_RANGE_SLACK};
use crate::nonlinearity::NonlinearitySpec;

/// Boundary condition at x = +-X.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundary {
    /// T(+-X) held at zero.
    DirichletZero,
    /// Zero flux through +-X (second-order ghost-node closure).
    NeumannZero,
}

/// Time-stepping parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    /// Time step; must satisfy dt <= 1 / lipschitz_constant(spec).
    pub dt: f64,
    /// Final time.
    pub t_max: f64,
    pub boundary: Boundary,
    /// Emit a full snapshot every this many steps (0 = only first/last).
    pub snapshot_every: usize,
    /// Record probe series every this many steps (>= 1).
    pub probe_every: usize,
}

impl SimParams {
    pub fn new(dt: f64, t_max: f64, boundary: Boundary) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Validation(format!("dt = {dt} must be positive")));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::Validation(format!("t_max = {t_max} must be positive")));
        }
        Ok(SimParams { dt, t_max, boundary, snapshot_every: 0, probe_every: 1 })
    }

    /// Default step size for a grid/reaction pair: small enough that the
    /// splitting error stays negligible (0.25 h^2) and that the reaction
    /// map is monotone with margin (0.5 / c).
    pub fn default_dt(grid: Grid, spec: &NonlinearitySpec) -> f64 {
        let h = grid.spacing();
        let c = spec.lipschitz_constant();
        let cap = if c > 0.0 { 0.5 / c } else { f64::INFINITY };
        (0.25 * h * h).min(cap)
    }

    pub fn with_default_dt(
        grid: Grid,
        spec: &NonlinearitySpec,
        t_max: f64,
        boundary: Boundary,
    ) -> Result<Self> {
        Self::new(Self::default_dt(grid, spec), t_max, boundary)
    }

    /// Number of steps to reach t_max (rounded up, ulp-tolerant).
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil().max(1.0) as usize
    }
}

/// Prefactored solver for (I - dt D2) v = u.
///
/// Elimination runs from both ends toward the center node, so symmetric
/// input produces bitwise-symmetric output (see module docs).
#[derive(Debug, Clone)]
pub struct DiffusionSolver {
    n: usize,
    mid: usize,
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    /// Left-sweep multipliers m[1..=mid] and pivots d[0..=mid-1].
    m: Vec<f64>,
    d: Vec<f64>,
    /// Right-sweep multipliers mm[mid..=n-1] and pivots e[mid+1..=n].
    mm: Vec<f64>,
    e: Vec<f64>,
    d_center: f64,
}

impl DiffusionSolver {
    pub fn new(grid: Grid, dt: f64, boundary: Boundary) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Validation(format!("dt = {dt} must be positive")));
        }
        let n = grid.n_cells();
        let h = grid.spacing();
        let r = dt / (h * h);
        let mut sub = vec![-r; n + 1];
        let mut diag = vec![1.0 + 2.0 * r; n + 1];
        let mut sup = vec![-r; n + 1];
        sub[0] = 0.0;
        sup[n] = 0.0;
        match boundary {
            Boundary::DirichletZero => {
                diag[0] = 1.0;
                sup[0] = 0.0;
                diag[n] = 1.0;
                sub[n] = 0.0;
            }
            Boundary::NeumannZero => {
                sup[0] = -2.0 * r;
                sub[n] = -2.0 * r;
            }
        }

        let mid = grid.mid();
        let mut m = vec![0.0; mid + 1];
        let mut d = vec![0.0; mid];
        d[0] = diag[0];
        for i in 1..=mid {
            m[i] = sub[i] / d[i - 1];
            if i < mid {
                d[i] = diag[i] - m[i] * sup[i - 1];
            }
        }
        let mut mm = vec![0.0; n];
        let mut e = vec![0.0; n + 1];
        e[n] = diag[n];
        for i in (mid..n).rev() {
            mm[i] = sup[i] / e[i + 1];
            if i > mid {
                e[i] = diag[i] - mm[i] * sub[i + 1];
            }
        }
        let d_center = diag[mid] - m[mid] * sup[mid - 1] - mm[mid] * sub[mid + 1];
        Ok(DiffusionSolver { n, mid, sub, diag, sup, m, d, mm, e, d_center })
    }

    /// Solve (I - dt D2) v = x in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n + 1);
        let (n, mid) = (self.n, self.mid);
        for i in 1..mid {
            x[i] -= self.m[i] * x[i - 1];
        }
        for i in (mid + 1..n).rev() {
            x[i] -= self.mm[i] * x[i + 1];
        }
        x[mid] = (x[mid] - self.m[mid] * x[mid - 1] - self.mm[mid] * x[mid + 1]) / self.d_center;
        for i in (0..mid).rev() {
            x[i] = (x[i] - self.sup[i] * x[i + 1]) / self.d[i];
        }
        for i in mid + 1..=n {
            x[i] = (x[i] - self.sub[i] * x[i - 1]) / self.e[i];
        }
    }

    /// Residual oracle: y = (I - dt D2) v, for testing the solve.
    pub fn apply_matrix(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..=n)
            .map(|i| {
                let mut y = self.diag[i] * v[i];
                if i > 0 {
                    y += self.sub[i] * v[i - 1];
                }
                if i < n {
                    y += self.sup[i] * v[i + 1];
                }
                y
            })
            .collect()
    }
}

/// Why a run returned before t_max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StopReason {
    /// sup of the field fell below the extinction level at this time.
    SupFellBelow { t: f64 },
    /// Midpoint crossed the propagation level (at t_cross) and the
    /// level-set radius kept growing afterwards; stopped at t.
    MidpointSettled { t: f64, t_cross: f64 },
}

/// Early-exit rule for long classification runs. The predicates mirror the
/// outcome classifier exactly, so stopping early never changes the verdict.
#[derive(Debug, Clone, Copy)]
pub struct StopRule {
    pub ext_level: f64,
    pub prop_level: f64,
    /// Additional level the midpoint must also reach (bistable two-stage).
    pub confirm_level: Option<f64>,
    /// Level whose radius must grow over the trailing quarter-horizon.
    pub radius_level: f64,
}

/// Optional extra probe: sup distance to a reference profile on a window.
#[derive(Debug, Clone)]
pub struct ReferenceProbe {
    values: Vec<f64>,
    j_lo: usize,
    j_hi: usize,
    pub window: f64,
}

impl ReferenceProbe {
    /// Compare against `target(x)` for |x| <= window.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid, window: f64, target: F) -> Result<Self> {
        if !(window > 0.0) || window > grid.half_width() {
            return Err(Error::Validation(format!(
                "probe window {window} must lie in (0, {}]",
                grid.half_width()
            )));
        }
        let h = grid.spacing();
        let k = (window / h + 1e-9).floor() as usize;
        let mid = grid.mid();
        let j_lo = mid - k.min(mid);
        let j_hi = (mid + k).min(grid.n_cells());
        let values = (0..=grid.n_cells()).map(|j| target(grid.node(j))).collect();
        Ok(ReferenceProbe { values, j_lo, j_hi, window })
    }

    /// Distance to a constant level on the window.
    pub fn constant(grid: Grid, level: f64, window: f64) -> Result<Self> {
        Self::from_fn(grid, window, |_| level)
    }

    fn distance(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for j in self.j_lo..=self.j_hi {
            worst = worst.max((values[j] - self.values[j]).abs());
        }
        worst
    }
}

/// What to record along a run.
#[derive(Debug, Clone, Default)]
pub struct ProbeSet {
    /// Level-set radii r(t) = max { |x| : T >= level } to track.
    pub r_levels: Vec<f64>,
    pub reference: Option<ReferenceProbe>,
}

impl ProbeSet {
    pub fn levels(levels: &[f64]) -> Self {
        ProbeSet { r_levels: levels.to_vec(), reference: None }
    }
}

/// Recorded probe series plus final state of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub midpoint: Vec<f64>,
    pub sup: Vec<f64>,
    pub r_levels: Vec<f64>,
    /// radii[k][i] = radius of level r_levels[k] at times[i].
    pub radii: Vec<Vec<f64>>,
    /// Distance to the reference probe, when one was configured.
    pub ref_distance: Option<Vec<f64>>,
    pub snapshots: Vec<Field>,
    pub final_field: Field,
    /// Largest value seen on the nodes adjacent to the boundary; above
    /// ~1e-6 the domain is too small and the run should be redone wider.
    pub boundary_max: f64,
    pub stopped: Option<StopReason>,
}

impl Trajectory {
    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Index of the last probe at or before time t.
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    pub fn radius_series(&self, level: f64) -> Option<&[f64]> {
        self.r_levels
            .iter()
            .position(|&l| (l - level).abs() < 1e-12)
            .map(|k| self.radii[k].as_slice())
    }
}

/// One trajectory being advanced step by step. Owns the factored diffusion
/// solve and the scratch buffer, so stepping does not allocate.
pub struct Simulator {
    spec: NonlinearitySpec,
    grid: Grid,
    dt: f64,
    boundary: Boundary,
    op: DiffusionSolver,
    values: Vec<f64>,
    steps_taken: u64,
    start_time: f64,
}

impl Simulator {
    pub fn new(ic: &Field, spec: &NonlinearitySpec, dt: f64, boundary: Boundary) -> Result<Self> {
        let c = spec.lipschitz_constant();
        if dt * c > 1.0 + 1e-12 {
            return Err(Error::Validation(format!(
                "dt = {dt} violates the monotonicity constraint dt <= 1/c with c = {c}"
            )));
        }
        let op = DiffusionSolver::new(ic.grid(), dt, boundary)?;
        Ok(Simulator {
            spec: spec.clone(),
            grid: ic.grid(),
            dt,
            boundary,
            op,
            values: ic.values().to_vec(),
            steps_taken: 0,
            start_time: ic.time(),
        })
    }

    pub fn time(&self) -> f64 {
        self.start_time + self.steps_taken as f64 * self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance by one dt: reaction map, then implicit diffusion.
    pub fn advance(&mut self) {
        let dt = self.dt;
        for v in self.values.iter_mut() {
            let theta = v.clamp(0.0, 1.0);
            *v = (theta + dt * self.spec.eval_clamped(theta)).clamp(0.0, 1.0);
        }
        if self.boundary == Boundary::DirichletZero {
            self.values[0] = 0.0;
            let n = self.grid.n_cells();
            self.values[n] = 0.0;
        }
        self.op.solve_in_place(&mut self.values);
        self.steps_taken += 1;
    }

    /// Current state as a validated field.
    pub fn field(&self) -> Result<Field> {
        Field::from_values(self.grid, self.time(), self.values.clone())
    }

    /// Range guard: largest excursion outside [0, 1]. The scheme keeps
    /// this at round-off scale; anything bigger is a fault.
    fn range_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for &v in &self.values {
            worst = worst.max(-v).max(v - 1.0);
        }
        worst
    }
}

/// Advance a field by one step of size `params.dt`.
///
/// Convenience wrapper that refactors the diffusion matrix on every call;
/// loops should use [`Simulator`] or [`simulate`].
pub fn step(field: &Field, spec: &NonlinearitySpec, params: &SimParams) -> Result<Field> {
    let mut sim = Simulator::new(field, spec, params.dt, params.boundary)?;
    sim.advance();
    sim.field()
}

/// Run the scheme to t_max, recording probe series and snapshots.
pub fn simulate(
    ic: &Field,
    spec: &NonlinearitySpec,
    params: &SimParams,
    probes: &ProbeSet,
) -> Result<Trajectory> {
    simulate_with_stop(ic, spec, params, probes, None)
}

/// [`simulate`], optionally returning early once `stop` can already
/// determine the outcome (the classifier predicates only ever latch on,
/// so the verdict cannot change by running longer).
pub fn simulate_with_stop(
    ic: &Field,
    spec: &NonlinearitySpec,
    params: &SimParams,
    probes: &ProbeSet,
    stop: Option<&StopRule>,
) -> Result<Trajectory> {
    if params.probe_every == 0 {
        return Err(Error::Validation("probe_every must be >= 1".into()));
    }
    let mut sim = Simulator::new(ic, spec, params.dt, params.boundary)?;
    let grid = ic.grid();
    let n = grid.n_cells();
    let n_steps = params.n_steps();

    let reserve = n_steps / params.probe_every + 2;
    let mut traj = Trajectory {
        times: Vec::with_capacity(reserve),
        midpoint: Vec::with_capacity(reserve),
        sup: Vec::with_capacity(reserve),
        r_levels: probes.r_levels.clone(),
        radii: probes.r_levels.iter().map(|_| Vec::with_capacity(reserve)).collect(),
        ref_distance: probes.reference.as_ref().map(|_| Vec::with_capacity(reserve)),
        snapshots: Vec::new(),
        final_field: ic.clone(),
        boundary_max: 0.0,
        stopped: None,
    };
    // First probe time at which the midpoint reached the propagation
    // level, for the early-exit rule; `confirmed` latches the extra level.
    let mut t_cross: Option<f64> = None;
    let mut confirmed = false;

    record_probes(&sim, probes, &mut traj)?;
    if params.snapshot_every > 0 {
        traj.snapshots.push(sim.field()?);
    }

    for k in 1..=n_steps {
        sim.advance();
        if k % params.probe_every != 0 && k != n_steps {
            continue;
        }
        record_probes(&sim, probes, &mut traj)?;
        if params.snapshot_every > 0 && (k % params.snapshot_every == 0 || k == n_steps) {
            traj.snapshots.push(sim.field()?);
        }
        if let Some(rule) = stop {
            let t = sim.time();
            let i = traj.times.len() - 1;
            if traj.sup[i] < rule.ext_level {
                traj.stopped = Some(StopReason::SupFellBelow { t });
                break;
            }
            if traj.midpoint[i] >= rule.prop_level && t_cross.is_none() {
                t_cross = Some(t);
            }
            if let Some(level) = rule.confirm_level {
                confirmed |= traj.midpoint[i] >= level;
            } else {
                confirmed = true;
            }
            if let (Some(tc), true) = (t_cross, confirmed) {
                // Give the solution a comfortable margin past the crossing,
                // then require the same trailing-quarter radius growth (or
                // domain saturation) the classifier checks.
                if t >= (1.25 * tc).max(tc + 2.0) {
                    if let Some(r) = traj.radius_series(rule.radius_level) {
                        let back = traj.index_at(0.75 * t);
                        let grown = r[i] > r[back] + 1e-12;
                        let saturated = r[i] >= 0.9 * grid.half_width();
                        if grown || saturated {
                            traj.stopped = Some(StopReason::MidpointSettled { t, t_cross: tc });
                            break;
                        }
                    }
                }
            }
        }
    }

    traj.final_field = sim.field()?;
    if params.snapshot_every > 0
        && traj.snapshots.last().map(|f| f.time()) != Some(traj.final_field.time())
    {
        traj.snapshots.push(traj.final_field.clone());
    }
    traj.boundary_max = traj
        .boundary_max
        .max(sim.values()[1].abs())
        .max(sim.values()[n - 1].abs());
    Ok(traj)
}

fn record_probes(sim: &Simulator, probes: &ProbeSet, traj: &mut Trajectory) -> Result<()> {
    let values = sim.values();
    let n = sim.grid().n_cells();
    let mut s = f64::NEG_INFINITY;
    for &v in values {
        s = s.max(v);
    }
    if !s.is_finite() {
        return Err(Error::NumericalFault(format!(
            "non-finite field value at t = {}",
            sim.time()
        )));
    }
    let defect = sim.range_defect();
    if defect > FIELD_RANGE_SLACK {
        return Err(Error::NumericalFault(format!(
            "field left [0, 1] by {defect:.3e} at t = {}",
            sim.time()
        )));
    }
    traj.times.push(sim.time());
    traj.midpoint.push(values[sim.grid().mid()]);
    traj.sup.push(s);
    for k in 0..traj.r_levels.len() {
        let level = traj.r_levels[k];
        traj.radii[k].push(crate::grid::radius_above_values(sim.grid(), values, level));
    }
    if let (Some(series), Some(reference)) = (traj.ref_distance.as_mut(), probes.reference.as_ref())
    {
        series.push(reference.distance(values));
    }
    traj.boundary_max = traj.boundary_max.max(values[1].abs()).max(values[n - 1].abs());
    Ok(())
}

/// The half-width-L problem restated on fixed support: T with data
/// alpha restricted to [-L, L] and reaction f corresponds, via
/// T~(t, x) = T(L^2 t, L x), to data alpha on [-1, 1] with reaction
/// L^2 f. Sweeping L then only rescales amplitude, not the mesh.
#[derive(Debug, Clone, Copy)]
pub struct Rescaling {
    /// Support half-width of the original problem.
    pub l: f64,
}

pub fn rescaled_problem(l: f64) -> Result<Rescaling> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Domain(format!("support half-width {l} must be positive")));
    }
    Ok(Rescaling { l })
}

impl Rescaling {
    /// Reaction amplitude gains a factor L^2.
    pub fn amplitude_factor(&self) -> f64 {
        self.l * self.l
    }

    /// The reaction term of the rescaled problem.
    pub fn transform_spec(&self, spec: &NonlinearitySpec) -> Result<NonlinearitySpec> {
        spec.with_amplitude(spec.amplitude() * self.amplitude_factor())
    }

    /// Support half-width of the rescaled initial data.
    pub fn ic_half_width(&self) -> f64 {
        1.0
    }

    /// Original time corresponding to rescaled time t~.
    pub fn time(&self, t_tilde: f64) -> f64 {
        self.l * self.l * t_tilde
    }

    /// Original position corresponding to rescaled position x~.
    pub fn space(&self, x_tilde: f64) -> f64 {
        self.l * x_tilde
    }
}

/// Index of the first sample that breaks the down-then-up shape of a
/// series, ignoring wiggles smaller than `dead_band`; None if the series
/// decreases to a single minimum and then increases (or is monotone).
pub fn single_dip_violation(series: &[f64], dead_band: f64) -> Option<usize> {
    let mut rising = false;
    let mut anchor = match series.first() {
        Some(&v) => v,
        None => return None,
    };
    for (i, &v) in series.iter().enumerate().skip(1) {
        if rising {
            if v > anchor {
                anchor = v;
            } else if v < anchor - dead_band {
                return Some(i);
            }
        } else if v < anchor {
            anchor = v;
        } else if v > anchor + dead_band {
            rising = true;
            anchor = v;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::indicator_ic;

    fn grid() -> Grid {
        Grid::new(10.0, 400).unwrap()
    }

    #[test]
    fn diffusion_solve_matches_matrix_oracle() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &boundary in &[Boundary::DirichletZero, Boundary::NeumannZero] {
            for &n in &[2usize, 4, 10, 401 - 1] {
                let g = Grid::new(5.0, n).unwrap();
                let op = DiffusionSolver::new(g, 3e-3, boundary).unwrap();
                let rhs: Vec<f64> = (0..=n).map(|_| rng.random::<f64>()).collect();
                let mut x = rhs.clone();
                op.solve_in_place(&mut x);
                let back = op.apply_matrix(&x);
                for j in 0..=n {
                    assert!(
                        (back[j] - rhs[j]).abs() < 1e-12,
                        "residual {} at node {j}, n = {n}, {boundary:?}",
                        back[j] - rhs[j]
                    );
                }
            }
        }
    }

    #[test]
    fn symmetric_input_solves_to_bitwise_symmetric_output() {
        let g = grid();
        let n = g.n_cells();
        let op = DiffusionSolver::new(g, 1e-3, Boundary::NeumannZero).unwrap();
        let mut x: Vec<f64> = (0..=n)
            .map(|j| {
                let r = g.node(j).abs();
                (-r * r).exp() + 0.3 * (r * 1.7).sin().abs()
            })
            .collect();
        for j in 0..=n / 2 {
            x[n - j] = x[j];
        }
        op.solve_in_place(&mut x);
        for j in 0..=n / 2 {
            assert_eq!(
                x[j].to_bits(),
                x[n - j].to_bits(),
                "asymmetry at node pair {j}/{}",
                n - j
            );
        }
    }

    #[test]
    fn zero_field_is_a_fixed_point() {
        let spec = NonlinearitySpec::ignition(0.3).unwrap();
        let ic = Field::constant(grid(), 0.0).unwrap();
        let params = SimParams::new(1e-3, 0.05, Boundary::NeumannZero).unwrap();
        let traj = simulate(&ic, &spec, &params, &ProbeSet::default()).unwrap();
        assert!(traj.final_field.values().iter().all(|&v| v == 0.0));
        assert_eq!(traj.final_field.sup(), 0.0);
    }

    #[test]
    fn all_ones_is_fixed_under_neumann() {
        let spec = NonlinearitySpec::ignition(0.3).unwrap();
        let ic = Field::constant(grid(), 1.0).unwrap();
        let params = SimParams::new(1e-3, 0.1, Boundary::NeumannZero).unwrap();
        let traj = simulate(&ic, &spec, &params, &ProbeSet::default()).unwrap();
        for &v in traj.final_field.values() {
            assert!((v - 1.0).abs() <= 1e-13, "drifted to {v}");
        }
    }

    #[test]
    fn dirichlet_pins_the_ends_to_zero() {
        let spec = NonlinearitySpec::kpp_logistic().unwrap();
        let ic = Field::constant(grid(), 1.0).unwrap();
        let params = SimParams::new(1e-3, 0.05, Boundary::DirichletZero).unwrap();
        let traj = simulate(&ic, &spec, &params, &ProbeSet::default()).unwrap();
        let v = traj.final_field.values();
        assert_eq!(v[0], 0.0);
        assert_eq!(*v.last().unwrap(), 0.0);
        assert!(v[1] < 1.0 && v[1] > 0.0);
    }

    #[test]
    fn neumann_step_conserves_mass_without_reaction() {
        let spec = NonlinearitySpec::ignition(0.3).unwrap().with_amplitude(0.0).unwrap();
        let g = grid();
        let ic = indicator_ic(g, 1.7, 0.8).unwrap();
        let mass0 = ic.mass();
        let params = SimParams::new(2e-3, 2.0, Boundary::NeumannZero).unwrap();
        let traj = simulate(&ic, &spec, &params, &ProbeSet::default()).unwrap();
        let drift = (traj.final_field.mass() - mass0).abs();
        assert!(drift <= 1e-12, "mass drifted by {drift:e} over 1000 steps");
    }

    #[test]
    fn comparison_principle_holds_for_ordered_data() {
        let spec = NonlinearitySpec::bistable_cubic(0.25).unwrap();
        let g = grid();
        let lo = indicator_ic(g, 1.0, 0.6).unwrap();
        let hi = indicator_ic(g, 1.5, 0.8).unwrap();
        let dt = SimParams::default_dt(g, &spec);
        let mut sim_lo = Simulator::new(&lo, &spec, dt, Boundary::NeumannZero).unwrap();
        let mut sim_hi = Simulator::new(&hi, &spec, dt, Boundary::NeumannZero).unwrap();
        for _ in 0..800 {
            sim_lo.advance();
            sim_hi.advance();
        }
        for (a, b) in sim_lo.values().iter().zip(sim_hi.values()) {
            assert!(a <= b, "ordering violated: {a} > {b}");
        }
    }

    #[test]
    fn evolution_from_symmetric_data_stays_bitwise_symmetric() {
        let spec = NonlinearitySpec::ignition(0.3).unwrap();
        let g = grid();
        let ic = indicator_ic(g, 1.3, 0.9).unwrap();
        let dt = SimParams::default_dt(g, &spec);
        let mut sim = Simulator::new(&ic, &spec, dt, Boundary::NeumannZero).unwrap();
        for _ in 0..2000 {
            sim.advance();
        }
        let v = sim.values();
        let n = g.n_cells();
        for j in 0..=n / 2 {
            assert_eq!(v[j].to_bits(), v[n - j].to_bits(), "node pair {j}/{}", n - j);
        }
    }

    #[test]
    fn step_rejects_dt_above_monotonicity_bound() {
        // Logistic reaction: c = max(sup |f'|, sup |f|) = 1, so dt = 1.5
        // breaks the constraint.
        let spec = NonlinearitySpec::kpp_logistic().unwrap();
        let ic = Field::constant(grid(), 0.5).unwrap();
        let params = SimParams { dt: 1.5, t_max: 3.0, boundary: Boundary::NeumannZero, snapshot_every: 0, probe_every: 1 };
        match step(&ic, &spec, &params) {
            Err(Error::Validation(_)) => {}
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn default_dt_honors_both_caps() {
        let g = Grid::new(40.0, 1600).unwrap();
        // h = 0.05, logistic c = 1: mesh cap 0.25 h^2 = 6.25e-4 binds.
        let spec = NonlinearitySpec::kpp_logistic().unwrap();
        assert!((SimParams::default_dt(g, &spec) - 6.25e-4).abs() < 1e-18);
        // Amplitude 1000 pushes c to 1000, so the reaction cap 5e-4 binds.
        let hot = spec.with_amplitude(1000.0).unwrap();
        assert!((SimParams::default_dt(g, &hot) - 5e-4).abs() < 1e-18);
    }

    #[test]
    fn probes_track_radius_and_reference_distance() {
        let spec = NonlinearitySpec::ignition(0.3).unwrap();
        let g = grid();
        let ic = indicator_ic(g, 2.0, 1.0).unwrap();
        let mut probes = ProbeSet::levels(&[0.5]);
        probes.reference = Some(ReferenceProbe::constant(g, 0.3, 1.0).unwrap());
        let params = SimParams::new(1e-3, 0.5, Boundary::NeumannZero).unwrap();
        let traj = simulate(&ic, &spec, &params, &probes).unwrap();
        let r = traj.radius_series(0.5).expect("level 0.5 was requested");
        assert_eq!(r.len(), traj.times.len());
        assert!((r[0] - 2.0).abs() <= 0.05 + 1e-12, "initial radius {}", r[0]);
        let d = traj.ref_distance.as_ref().unwrap();
        // Data is 1.0 on the window at t = 0, so the distance starts at 0.7.
        assert!((d[0] - 0.7).abs() < 1e-12);
        assert!(d.last().unwrap() < &d[0]);
    }

    #[test]
    fn early_stop_matches_the_extinction_predicate() {
        let spec = NonlinearitySpec::ignition(0.3).unwrap();
        let g = grid();
        let ic = indicator_ic(g, 0.1, 0.5).unwrap();
        let params = SimParams {
            dt: 1e-3,
            t_max: 50.0,
            boundary: Boundary::NeumannZero,
            snapshot_every: 0,
            probe_every: 10,
        };
        let rule = StopRule {
            ext_level: 0.27,
            prop_level: 0.99,
            confirm_level: None,
            radius_level: 0.5,
        };
        let traj =
            simulate_with_stop(&ic, &spec, &params, &ProbeSet::levels(&[0.5]), Some(&rule))
                .unwrap();
        match traj.stopped {
            Some(StopReason::SupFellBelow { t }) => {
                assert!(t < 50.0);
                assert!(traj.sup.last().unwrap() < &0.27);
            }
            other => panic!("tiny data should die: {other:?}"),
        }
    }

    #[test]
    fn rescaling_maps_amplitude_and_coordinates() {
        let r = rescaled_problem(2.0).unwrap();
        assert_eq!(r.amplitude_factor(), 4.0);
        assert_eq!(r.ic_half_width(), 1.0);
        assert_eq!(r.time(3.0), 12.0);
        assert_eq!(r.space(1.5), 3.0);
        let spec = NonlinearitySpec::kpp_logistic().unwrap();
        let scaled = r.transform_spec(&spec).unwrap();
        assert_eq!(scaled.amplitude(), 4.0);
        assert!(rescaled_problem(0.0).is_err());
        assert!(rescaled_problem(-1.0).is_err());
    }

    #[test]
    fn single_dip_detector_accepts_dips_and_flags_double_dips() {
        assert_eq!(single_dip_violation(&[1.0, 0.5, 0.2, 0.6, 0.9], 1e-8), None);
        assert_eq!(single_dip_violation(&[1.0, 0.9, 0.8], 1e-8), None);
        assert_eq!(single_dip_violation(&[0.1, 0.5, 0.9], 1e-8), None);
        // Down, up, then back down past the dead band: flagged at the drop.
        let bad = [1.0, 0.4, 0.8, 0.3, 0.9];
        assert_eq!(single_dip_violation(&bad, 1e-8), Some(3));
        // Sub-dead-band wiggle is ignored.
        let wiggly = [1.0, 0.4, 0.8, 0.8 - 1e-9, 0.9];
        assert_eq!(single_dip_violation(&wiggly, 1e-8), None);
    }

    #[test]
    fn snapshots_appear_at_the_requested_cadence() {
        let spec = NonlinearitySpec::kpp_logistic().unwrap();
        let ic = indicator_ic(grid(), 1.0, 0.5).unwrap();
        let params = SimParams {
            dt: 1e-3,
            t_max: 0.1,
            boundary: Boundary::NeumannZero,
            snapshot_every: 25,
            probe_every: 1,
        };
        let traj = simulate(&ic, &spec, &params, &ProbeSet::default()).unwrap();
        // t = 0 plus steps 25, 50, 75, 100 (the final step).
        assert_eq!(traj.snapshots.len(), 5);
        assert_eq!(traj.snapshots[0].time(), 0.0);
        assert!((traj.snapshots[4].time() - 0.1).abs() < 1e-12);
    }
}
