//! Run configuration.
//!
//! One TOML file describes a run: the reaction, the grid, the
//! time-stepping, and one optional section per subcommand. `--set
//! key=value` overrides are applied to the parsed tree before
//! deserialization, so they obey the same schema (and the same unknown
//! key rejection) as the file itself. Emitting a parsed config and
//! parsing it back yields equal values; `summary.json` files embed the
//! resolved config in that form.

use serde::{Deserialize, Serialize};
use sharpfront::{Boundary, Grid, NonlinearitySpec, Result, SignPattern, SimParams};

fn default_amplitude() -> f64 {
    1.0
}

fn default_exponent() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

/// Reaction term, tagged by kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    /// `(theta - theta0)(1 - theta)` above `theta0`, zero below.
    Ignition {
        theta0: f64,
        #[serde(default = "default_amplitude", skip_serializing_if = "is_one")]
        amplitude: f64,
    },
    /// `theta^p (1 - theta)`; `p = 1` is the logistic reaction.
    Kpp {
        #[serde(default = "default_exponent")]
        p: f64,
        #[serde(default = "default_amplitude", skip_serializing_if = "is_one")]
        amplitude: f64,
    },
    /// `exp(-activation / theta)(1 - theta)`.
    Arrhenius {
        activation: f64,
        #[serde(default = "default_amplitude", skip_serializing_if = "is_one")]
        amplitude: f64,
    },
    /// `theta (theta - a)(1 - theta)` with `a` in (0, 1/2].
    BistableCubic {
        a: f64,
        #[serde(default = "default_amplitude", skip_serializing_if = "is_one")]
        amplitude: f64,
    },
    /// Piecewise-linear table of `(theta, f)` rows with a declared sign
    /// pattern.
    Tabulated {
        points: Vec<[f64; 2]>,
        pattern: PatternConfig,
        #[serde(default = "default_amplitude", skip_serializing_if = "is_one")]
        amplitude: f64,
    },
}

/// Declared sign pattern for a tabulated reaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PatternConfig {
    Zero,
    IgnitionPlateau { theta0: f64 },
    PositiveInterior,
    Bistable { theta0: f64 },
}

impl From<PatternConfig> for SignPattern {
    fn from(p: PatternConfig) -> SignPattern {
        match p {
            PatternConfig::Zero => SignPattern::Zero,
            PatternConfig::IgnitionPlateau { theta0 } => SignPattern::IgnitionPlateau { theta0 },
            PatternConfig::PositiveInterior => SignPattern::PositiveInterior,
            PatternConfig::Bistable { theta0 } => SignPattern::Bistable { theta0 },
        }
    }
}

impl NonlinearityConfig {
    pub fn build(&self) -> Result<NonlinearitySpec> {
        let (spec, amplitude) = match self {
            NonlinearityConfig::Ignition { theta0, amplitude } => {
                (NonlinearitySpec::ignition(*theta0)?, *amplitude)
            }
            NonlinearityConfig::Kpp { p, amplitude } => {
                (NonlinearitySpec::kpp_power(*p)?, *amplitude)
            }
            NonlinearityConfig::Arrhenius { activation, amplitude } => {
                (NonlinearitySpec::arrhenius(*activation)?, *amplitude)
            }
            NonlinearityConfig::BistableCubic { a, amplitude } => {
                (NonlinearitySpec::bistable_cubic(*a)?, *amplitude)
            }
            NonlinearityConfig::Tabulated { points, pattern, amplitude } => {
                let rows = points.iter().map(|&[t, f]| (t, f)).collect();
                (NonlinearitySpec::tabulated(rows, (*pattern).into())?, *amplitude)
            }
        };
        spec.with_amplitude(amplitude)
    }

    /// Overwrite one scalar parameter by name; used by `sweep`.
    pub fn set_parameter(&mut self, name: &str, value: f64) -> std::result::Result<(), String> {
        use NonlinearityConfig as N;
        if name == "amplitude" {
            match self {
                N::Ignition { amplitude, .. }
                | N::Kpp { amplitude, .. }
                | N::Arrhenius { amplitude, .. }
                | N::BistableCubic { amplitude, .. }
                | N::Tabulated { amplitude, .. } => *amplitude = value,
            }
            return Ok(());
        }
        match (self, name) {
            (N::Ignition { theta0, .. }, "theta0") => *theta0 = value,
            (N::Kpp { p, .. }, "p") => *p = value,
            (N::Arrhenius { activation, .. }, "activation") => *activation = value,
            (N::BistableCubic { a, .. }, "a") => *a = value,
            (_, other) => {
                return Err(format!("parameter `{other}` does not apply to this reaction kind"))
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub n_cells: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.half_width, self.n_cells)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryConfig {
    Dirichlet,
    Neumann,
}

impl From<BoundaryConfig> for Boundary {
    fn from(b: BoundaryConfig) -> Boundary {
        match b {
            BoundaryConfig::Dirichlet => Boundary::DirichletZero,
            BoundaryConfig::Neumann => Boundary::NeumannZero,
        }
    }
}

fn default_boundary() -> BoundaryConfig {
    BoundaryConfig::Dirichlet
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub t_max: f64,
    /// Omitted: the grid/reaction default (0.25 h^2 capped at 0.5 / c).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryConfig,
    /// Full snapshots every this many steps; 0 keeps only first/last.
    #[serde(default)]
    pub snapshot_every: usize,
    /// Probe cadence in steps; omitted: every ~0.02 time units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_every: Option<usize>,
}

impl SimConfig {
    pub fn build(&self, grid: Grid, spec: &NonlinearitySpec) -> Result<SimParams> {
        let dt = self.dt.unwrap_or_else(|| SimParams::default_dt(grid, spec));
        let mut params = SimParams::new(dt, self.t_max, self.boundary.into())?;
        params.snapshot_every = self.snapshot_every;
        params.probe_every = self.probe_every.unwrap_or(((0.02 / dt).round() as usize).max(1));
        Ok(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// Initial data: `ic_height` on `[-ic_half_width, ic_half_width]`,
    /// cell-averaged, zero outside.
    pub ic_half_width: f64,
    #[serde(default = "default_amplitude")]
    pub ic_height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub l_min: f64,
    pub l_max: f64,
    pub gap_tol: f64,
}

fn default_front_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontSection {
    /// Bisection width on the speed.
    #[serde(default = "default_front_tol")]
    pub tol: f64,
}

fn default_residual_h() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSection {
    /// Spacing of the centered-difference residual check.
    #[serde(default = "default_residual_h")]
    pub residual_h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcConfig {
    pub half_width: f64,
    pub height: f64,
}

/// Ordered-pair comparison run: the `[nonlinearity]` table is the
/// smaller reaction f, `g` the larger one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma22Section {
    pub g: NonlinearityConfig,
    pub theta1: f64,
    pub eps1: f64,
    pub theta_max: f64,
    pub ic_t: IcConfig,
    pub ic_s: IcConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepCommand {
    Front,
    Bump,
    Threshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub command: SweepCommand,
    /// Reaction parameter to vary: `amplitude`, or the kind's own knob
    /// (`theta0`, `p`, `activation`, `a`).
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub nonlinearity: NonlinearityConfig,
    pub grid: GridConfig,
    pub sim: SimConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub front: Option<FrontSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump: Option<BumpSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma22: Option<Lemma22Section>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl RunConfig {
    pub fn parse(text: &str, overrides: &[String]) -> std::result::Result<RunConfig, String> {
        let mut tree: toml::Value = text.parse().map_err(|e| format!("config: {e}"))?;
        for item in overrides {
            apply_override(&mut tree, item)?;
        }
        tree.try_into().map_err(|e| format!("config: {e}"))
    }

    pub fn load(
        path: &std::path::Path,
        overrides: &[String],
    ) -> std::result::Result<RunConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text, overrides).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Apply one `dotted.path=value` override to the TOML tree. The value is
/// parsed as a TOML literal, falling back to a string, so `--set
/// sim.dt=0.001` and `--set sim.boundary=neumann` both work unquoted.
fn apply_override(tree: &mut toml::Value, item: &str) -> std::result::Result<(), String> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| format!("override `{item}` is not of the form key.path=value"))?;
    let parsed = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(format!("override `{item}` has an empty path segment"));
    }
    let mut node = tree;
    for key in &keys[..keys.len() - 1] {
        node = node
            .as_table_mut()
            .ok_or_else(|| format!("override `{item}` descends into a non-table value"))?
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    node.as_table_mut()
        .ok_or_else(|| format!("override `{item}` descends into a non-table value"))?
        .insert(keys[keys.len() - 1].to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
        [nonlinearity]
        kind = "ignition"
        theta0 = 0.3

        [grid]
        half_width = 40.0
        n_cells = 800

        [sim]
        t_max = 100.0

        [threshold]
        l_min = 0.05
        l_max = 10.0
        gap_tol = 1e-3
    "#;

    #[test]
    fn parse_emit_parse_is_identity() {
        let first = RunConfig::parse(EXAMPLE, &[]).unwrap();
        let emitted = toml::to_string_pretty(&first).unwrap();
        let second = RunConfig::parse(&emitted, &[]).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn defaults_fill_in() {
        let config = RunConfig::parse(EXAMPLE, &[]).unwrap();
        match config.nonlinearity {
            NonlinearityConfig::Ignition { theta0, amplitude } => {
                assert_eq!(theta0, 0.3);
                assert_eq!(amplitude, 1.0);
            }
            _ => panic!("wrong kind"),
        }
        assert_eq!(config.sim.boundary, BoundaryConfig::Dirichlet);
        assert_eq!(config.sim.dt, None);
        let grid = config.grid.build().unwrap();
        let spec = config.nonlinearity.build().unwrap();
        let params = config.sim.build(grid, &spec).unwrap();
        assert_eq!(params.dt, SimParams::default_dt(grid, &spec));
        assert_eq!(params.probe_every, ((0.02 / params.dt).round() as usize).max(1));
    }

    #[test]
    fn overrides_replace_and_extend() {
        let sets = vec![
            "sim.dt=0.001".to_string(),
            "sim.boundary=neumann".to_string(),
            "threshold.gap_tol=0.05".to_string(),
            "nonlinearity.theta0=0.4".to_string(),
        ];
        let config = RunConfig::parse(EXAMPLE, &sets).unwrap();
        assert_eq!(config.sim.dt, Some(0.001));
        assert_eq!(config.sim.boundary, BoundaryConfig::Neumann);
        assert_eq!(config.threshold.unwrap().gap_tol, 0.05);
        match config.nonlinearity {
            NonlinearityConfig::Ignition { theta0, .. } => assert_eq!(theta0, 0.4),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn override_can_add_a_section() {
        let sets = vec![
            "front.tol=1e-8".to_string(),
            "nonlinearity.kind=bistable_cubic".to_string(),
            "nonlinearity.a=0.25".to_string(),
            "nonlinearity.theta0=".to_string(),
        ];
        // Clearing theta0 is not expressible; build a fresh bistable file
        // instead of patching the ignition one.
        assert!(RunConfig::parse(EXAMPLE, &sets).is_err());

        let bistable = r#"
            [nonlinearity]
            kind = "bistable_cubic"
            a = 0.25

            [grid]
            half_width = 20.0
            n_cells = 400

            [sim]
            t_max = 10.0
        "#;
        let config =
            RunConfig::parse(bistable, &["front.tol=1e-8".to_string()]).unwrap();
        assert_eq!(config.front.unwrap().tol, 1e-8);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = EXAMPLE.replace("gap_tol", "gap_tolerance");
        let err = RunConfig::parse(&bad, &[]).unwrap_err();
        assert!(err.contains("gap_tolerance"), "{err}");
        assert!(RunConfig::parse(EXAMPLE, &["sim.dx=0.1".to_string()]).is_err());
    }

    #[test]
    fn string_overrides_fall_back_unquoted() {
        let config = RunConfig::parse(
            EXAMPLE,
            &["sweep.command=front".into(), "sweep.parameter=a".into(), "sweep.values=[0.1,0.2]".into()],
        )
        .unwrap();
        let sweep = config.sweep.unwrap();
        assert_eq!(sweep.command, SweepCommand::Front);
        assert_eq!(sweep.parameter, "a");
        assert_eq!(sweep.values, vec![0.1, 0.2]);
    }

    #[test]
    fn sweep_parameter_dispatch() {
        let mut n = NonlinearityConfig::BistableCubic { a: 0.25, amplitude: 1.0 };
        n.set_parameter("a", 0.3).unwrap();
        n.set_parameter("amplitude", 2.0).unwrap();
        assert_eq!(n, NonlinearityConfig::BistableCubic { a: 0.3, amplitude: 2.0 });
        assert!(n.set_parameter("theta0", 0.1).is_err());
        let spec = n.build().unwrap();
        assert_eq!(spec.amplitude(), 2.0);
    }

    #[test]
    fn tabulated_round_trip() {
        let text = r#"
            [nonlinearity]
            kind = "tabulated"
            points = [[0.0, 0.0], [0.5, 0.25], [1.0, 0.0]]

            [nonlinearity.pattern]
            kind = "positive_interior"

            [grid]
            half_width = 10.0
            n_cells = 200

            [sim]
            t_max = 1.0
        "#;
        let first = RunConfig::parse(text, &[]).unwrap();
        first.nonlinearity.build().unwrap();
        let second = RunConfig::parse(&toml::to_string_pretty(&first).unwrap(), &[]).unwrap();
        assert_eq!(first, second);
    }
}
