//! Experiment configuration, orchestration and CSV/JSON artifacts.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::branched::{branched_lift, synthetic_level2, BranchedRoughPath};
use crate::branched_rde::{self, solve_branched_rde};
use crate::calculus::{
    standard_battery, test_function, NamedFunction, PolynomialSystem, VectorFieldSystem,
};
use crate::error::{Error, Result};
use crate::geometric::{self, solve_rde};
use crate::ode::{LogOdeConfig, Trajectory};
use crate::path::PiecewiseLinearPath;
use crate::residual::{dyadic_sweep, reports_from_sweep, ResidualReport};
use crate::signature::GeometricRoughPath;
use crate::trees::hopf::{antipode_contractions, iterated_coproducts};
use crate::trees::{enumerate_forests, Forest, ForestSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theory {
    Geometric,
    Branched,
}

/// How to obtain the driving path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriverSpec {
    /// CSV file with header `t,x1,...,xl`.
    Csv {
        path: PathBuf,
    },
    Smooth {
        width: usize,
        segments: usize,
        horizon: f64,
        amplitude: f64,
    },
    /// Symmetric random walk drawn from the experiment seed.
    RandomWalk {
        width: usize,
        segments: usize,
        horizon: f64,
        scale: f64,
    },
    Linear {
        increment: Vec<f64>,
        horizon: f64,
    },
    Zero {
        width: usize,
        segments: usize,
        horizon: f64,
    },
}

/// Driving fields: a JSON file holding a list of polynomial maps, or the list inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    File(PathBuf),
    Inline(PolynomialSystem),
}

/// Pass criteria applied to fitted slopes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Every fitted slope must exceed this.
    pub min_slope: f64,
    /// Largest allowed gap between a Bailleul slope and the Davie slope.
    pub max_spread: f64,
    pub min_r2: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            min_slope: 1.0,
            max_spread: 0.3,
            min_r2: 0.95,
        }
    }
}

fn default_substeps() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub theory: Theory,
    pub driver: DriverSpec,
    pub fields: FieldSpec,
    pub p: f64,
    pub depth: usize,
    /// Inclusive range `[first, last]` of dyadic levels.
    pub levels: [u32; 2],
    /// Test-function ids; defaults to the standard battery.
    #[serde(default)]
    pub battery: Option<Vec<String>>,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    /// Drift of the synthetic level-2 driver (branched theory, depth 2).
    #[serde(default)]
    pub synthetic_c: Option<f64>,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Default output directory.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Deepest supported truncation.
pub const MAX_DEPTH: usize = 4;

impl ExperimentConfig {
    /// Reads a config; relative file references resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config: ExperimentConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let DriverSpec::Csv { path } = &mut config.driver {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        if let FieldSpec::File(path) = &mut config.fields {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        if let Some(out) = &mut config.output {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(config)
    }

    pub fn level_range(&self) -> Vec<u32> {
        (self.levels[0]..=self.levels[1]).collect()
    }

    pub fn driver_path(&self) -> Result<PiecewiseLinearPath> {
        match &self.driver {
            DriverSpec::Csv { path } => PiecewiseLinearPath::from_csv_file(path),
            DriverSpec::Smooth {
                width,
                segments,
                horizon,
                amplitude,
            } => PiecewiseLinearPath::smooth(*width, *segments, *horizon, *amplitude),
            DriverSpec::RandomWalk {
                width,
                segments,
                horizon,
                scale,
            } => PiecewiseLinearPath::random_walk(*width, *segments, *horizon, *scale, self.seed),
            DriverSpec::Linear { increment, horizon } => {
                PiecewiseLinearPath::linear(increment, *horizon)
            }
            DriverSpec::Zero {
                width,
                segments,
                horizon,
            } => PiecewiseLinearPath::zero(*width, *segments, *horizon),
        }
    }

    pub fn system(&self) -> Result<PolynomialSystem> {
        match &self.fields {
            FieldSpec::File(path) => PolynomialSystem::from_json_file(path),
            FieldSpec::Inline(s) => Ok(s.clone()),
        }
    }

    pub fn battery(&self, dim: usize) -> Result<Vec<NamedFunction>> {
        match &self.battery {
            None => Ok(standard_battery(dim)),
            Some(ids) => ids.iter().map(|id| test_function(id, dim)).collect(),
        }
    }

    /// Checks the config against the loaded driver and fields.
    pub fn validate(&self, path: &PiecewiseLinearPath, system: &PolynomialSystem) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidConfig(m));
        if !self.p.is_finite() || self.p < 1.0 {
            return invalid(format!("p = {} must be at least 1", self.p));
        }
        if self.depth != self.p.floor() as usize {
            return invalid(format!(
                "depth {} must equal floor(p) = {}",
                self.depth,
                self.p.floor()
            ));
        }
        if self.depth > MAX_DEPTH {
            return invalid(format!(
                "depth {} exceeds the supported maximum {MAX_DEPTH}",
                self.depth
            ));
        }
        if self.levels[0] > self.levels[1] {
            return invalid("empty level range".into());
        }
        if self.levels[1] > 20 {
            return invalid("finest level must be at most 20".into());
        }
        LogOdeConfig::new(self.substeps)?;
        if let Some(c) = self.synthetic_c {
            if self.theory != Theory::Branched || self.depth != 2 {
                return invalid("synthetic_c needs the branched theory at depth 2".into());
            }
            if !c.is_finite() {
                return invalid("synthetic_c must be finite".into());
            }
        }
        if path.width() != system.driver_dim() {
            return invalid(format!(
                "driver has {} components but there are {} fields",
                path.width(),
                system.driver_dim()
            ));
        }
        if self.x0.len() != system.state_dim() {
            return invalid(format!(
                "x0 has {} entries for a system on R^{}",
                self.x0.len(),
                system.state_dim()
            ));
        }
        if !self.x0.iter().all(|v| v.is_finite()) {
            return invalid("x0 must be finite".into());
        }
        // every dyadic window endpoint must be a knot of the driver
        let (a, b) = (path.start(), path.end());
        let n = 1u64 << self.levels[1];
        let tol = 1e-12 * (b - a).abs().max(1.0);
        for k in 0..=n {
            let t = a + (b - a) * k as f64 / n as f64;
            let i = path.times().partition_point(|&s| s < t - tol);
            if path.times().get(i).is_none_or(|&s| (s - t).abs() > tol) {
                return invalid(format!(
                    "dyadic point {t} at level {} is not a knot of the driver",
                    self.levels[1]
                ));
            }
        }
        self.battery(system.state_dim())?;
        Ok(())
    }
}

/// The lifted driver in the chosen theory.
pub enum Driver {
    Geometric(GeometricRoughPath),
    Branched(BranchedRoughPath),
}

impl Driver {
    pub fn build(config: &ExperimentConfig, path: PiecewiseLinearPath) -> Result<Self> {
        Ok(match (config.theory, config.synthetic_c) {
            (Theory::Geometric, _) => {
                Driver::Geometric(GeometricRoughPath::lift(path, config.depth))
            }
            (Theory::Branched, Some(c)) => Driver::Branched(synthetic_level2(path, c)?),
            (Theory::Branched, None) => Driver::Branched(branched_lift(path, config.depth)?),
        })
    }

    pub fn knots(&self) -> &[f64] {
        match self {
            Driver::Geometric(x) => x.path().times(),
            Driver::Branched(x) => x.path().times(),
        }
    }

    pub fn solve<S: VectorFieldSystem + ?Sized>(
        &self,
        system: &S,
        x0: &[f64],
        config: &LogOdeConfig,
    ) -> Result<Trajectory> {
        match self {
            Driver::Geometric(x) => solve_rde(system, x, self.knots(), x0, config),
            Driver::Branched(x) => solve_branched_rde(system, x, self.knots(), x0, config),
        }
    }
}

/// Loaded and validated experiment inputs.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub system: PolynomialSystem,
    pub driver: Driver,
    pub battery: Vec<NamedFunction>,
    pub ode: LogOdeConfig,
}

impl Experiment {
    pub fn load(config: ExperimentConfig) -> Result<Self> {
        let path = config.driver_path()?;
        let system = config.system()?;
        config.validate(&path, &system)?;
        let battery = config.battery(system.state_dim())?;
        let ode = LogOdeConfig::new(config.substeps)?;
        let driver = Driver::build(&config, path)?;
        Ok(Experiment {
            config,
            system,
            driver,
            battery,
            ode,
        })
    }

    pub fn solve(&self) -> Result<Trajectory> {
        self.driver.solve(&self.system, &self.config.x0, &self.ode)
    }

    /// Solves on the driver's knots, then runs the dyadic residual study.
    pub fn run(&self) -> Result<RunOutcome> {
        let trajectory = self.solve()?;
        let levels = self.config.level_range();
        let reports = match &self.driver {
            Driver::Geometric(x) => geometric::residual_study(
                &self.system,
                x,
                &trajectory,
                &self.battery,
                &levels,
                &self.ode,
            )?,
            Driver::Branched(x) => branched_rde::residual_study(
                &self.system,
                x,
                &trajectory,
                &self.battery,
                &levels,
                &self.ode,
            )?,
        };
        let checks = evaluate_checks(&reports, &self.config.thresholds);
        Ok(RunOutcome {
            theory: self.config.theory,
            p: self.config.p,
            depth: self.config.depth,
            synthetic_c: self.config.synthetic_c,
            final_state: trajectory.final_state().to_vec(),
            passed: checks.iter().all(|c| c.passed),
            reports,
            checks,
        })
    }
}

impl Experiment {
    /// The driver seen as a branched rough path; geometric drivers are
    /// lifted over trees up to their depth.
    pub fn branched_driver(&self) -> Result<BranchedRoughPath> {
        match &self.driver {
            Driver::Branched(x) => Ok(x.clone()),
            Driver::Geometric(x) => branched_lift(x.path().clone(), x.depth()),
        }
    }

    /// Dyadic study of `|mu_tu(mu_us(z_s)) - mu_ts(z_s)|` at window midpoints.
    pub fn flow_study(&self) -> Result<ResidualReport> {
        let x = self.branched_driver()?;
        let z = solve_branched_rde(
            &self.system,
            &x,
            x.path().times(),
            &self.config.x0,
            &self.ode,
        )?;
        let (scales, maxima) =
            dyadic_sweep(z.start(), z.end(), &self.config.level_range(), |s, t| {
                let zs = z.state_at(s)?.to_vec();
                Ok(vec![branched_rde::approximate_flow_check(
                    &self.system,
                    &x,
                    s,
                    0.5 * (s + t),
                    t,
                    &[zs],
                    &self.ode,
                )?])
            })?;
        let labels = [("flow_defect".to_string(), "-".to_string())];
        Ok(reports_from_sweep(&scales, &maxima, &labels).remove(0))
    }

    /// Coefficients of the driver increment over `[s, t]`, keyed by word
    /// (1-based letters joined by commas) or by tree.
    pub fn lift_coefficients(&self, s: f64, t: f64) -> Result<Vec<(String, f64)>> {
        match &self.driver {
            Driver::Geometric(x) => Ok(x
                .increment(s, t)?
                .as_tensor()
                .words()
                .filter(|(w, _)| !w.is_empty())
                .map(|(w, v)| {
                    let key: Vec<String> = w.iter().map(|i| (i + 1).to_string()).collect();
                    (key.join(","), v)
                })
                .collect()),
            Driver::Branched(x) => {
                let values = x.tree_coefficients(s, t)?;
                let mut rows: Vec<_> = values.into_iter().collect();
                rows.sort_by(|a, b| a.0.nodes().cmp(&b.0.nodes()).then_with(|| a.0.cmp(&b.0)));
                Ok(rows.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub theory: Theory,
    pub p: f64,
    pub depth: usize,
    pub synthetic_c: Option<f64>,
    pub final_state: Vec<f64>,
    pub passed: bool,
    pub reports: Vec<ResidualReport>,
    pub checks: Vec<Check>,
}

impl RunOutcome {
    pub fn report(&self, kind: &str, f_id: &str) -> Option<&ResidualReport> {
        self.reports
            .iter()
            .find(|r| r.kind == kind && r.f_id == f_id)
    }

    pub fn reports_of(&self, kind: &str) -> impl Iterator<Item = &ResidualReport> {
        let kind = kind.to_string();
        self.reports.iter().filter(move |r| r.kind == kind)
    }

    /// Checks whose name starts with one of `prefixes`.
    pub fn checks_for(&self, prefixes: &[&str]) -> Vec<&Check> {
        self.checks
            .iter()
            .filter(|c| prefixes.iter().any(|p| c.name.starts_with(p)))
            .collect()
    }
}

fn slope_check(report: &ResidualReport, t: &Thresholds) -> Check {
    let name = format!("{}:{}", report.kind, report.f_id);
    if report.below_noise_floor {
        return Check {
            name,
            passed: true,
            detail: "below noise floor".into(),
        };
    }
    let (a, r2) = (report.slope.unwrap(), report.r_squared.unwrap());
    Check {
        name,
        passed: report.passes(t.min_slope, t.min_r2),
        detail: format!(
            "slope {a:.3} (> {}), R^2 {r2:.4} (>= {})",
            t.min_slope, t.min_r2
        ),
    }
}

/// Slope, fit-quality and Davie-versus-Bailleul agreement checks.
pub fn evaluate_checks(reports: &[ResidualReport], t: &Thresholds) -> Vec<Check> {
    let mut checks: Vec<Check> = reports.iter().map(|r| slope_check(r, t)).collect();
    let davie = reports.iter().find(|r| r.kind == "davie");
    for r in reports.iter().filter(|r| r.kind == "bailleul") {
        let name = format!("spread:{}", r.f_id);
        let check = match (davie.and_then(|d| d.slope), r.slope) {
            (Some(a), Some(b)) => Check {
                name,
                passed: (a - b).abs() <= t.max_spread,
                detail: format!(
                    "|{b:.3} - {a:.3}| = {:.3} (<= {})",
                    (a - b).abs(),
                    t.max_spread
                ),
            },
            (None, None) => Check {
                name,
                passed: true,
                detail: "both below noise floor".into(),
            },
            _ => Check {
                name,
                passed: false,
                detail: "only one of the two slopes could be fitted".into(),
            },
        };
        checks.push(check);
    }
    checks
}

/// Writes `scale,max_residual,kind,f_id` rows.
pub fn write_residuals_csv<W: Write>(reports: &[ResidualReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["scale", "max_residual", "kind", "f_id"])?;
    for r in reports {
        for (h, v) in r.scales.iter().zip(&r.max_residuals) {
            w.write_record([
                format!("{h:e}"),
                format!("{v:e}"),
                r.kind.clone(),
                r.f_id.clone(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `residuals.csv` and `report.json` into `dir`.
pub fn write_artifacts(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_residuals_csv(
        &outcome.reports,
        std::fs::File::create(dir.join("residuals.csv"))?,
    )?;
    let mut json = serde_json::to_string_pretty(outcome)?;
    json.push('\n');
    std::fs::write(dir.join("report.json"), json)?;
    Ok(())
}

/// Writes a trajectory as CSV with header `t,z1,...,zd`.
pub fn write_trajectory_csv<W: Write>(z: &Trajectory, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let d = z.states[0].len();
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("z{i}")));
    w.write_record(&header)?;
    for (t, s) in z.times.iter().zip(&z.states) {
        let mut row = vec![t.to_string()];
        row.extend(s.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Counts and exact-identity results of the Hopf-algebra self-test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfSelftest {
    pub width: usize,
    pub max_grade: usize,
    /// Number of trees with `n` nodes, `n = 1..=max_grade`.
    pub tree_counts: Vec<usize>,
    /// Number of forests of grade `n`, `n = 0..=max_grade`.
    pub forest_counts: Vec<usize>,
    pub coassociativity_failures: Vec<String>,
    pub antipode_failures: Vec<String>,
}

impl HopfSelftest {
    pub fn passed(&self) -> bool {
        self.coassociativity_failures.is_empty() && self.antipode_failures.is_empty()
    }
}

/// Checks coassociativity and both antipode identities exactly on every
/// forest up to `max_grade`.
pub fn hopf_selftest(width: usize, max_grade: usize) -> HopfSelftest {
    let forests = enumerate_forests(max_grade, width);
    let mut tree_counts = vec![0; max_grade];
    let mut forest_counts = vec![0; max_grade + 1];
    let mut coassociativity_failures = Vec::new();
    let mut antipode_failures = Vec::new();
    for f in &forests {
        forest_counts[f.grade()] += 1;
        if f.len() == 1 {
            tree_counts[f.grade() - 1] += 1;
        }
        let (left, right) = iterated_coproducts(f);
        if left != right {
            coassociativity_failures.push(f.to_string());
        }
        let expected: ForestSum = if f.is_unit() {
            BTreeMap::from([(Forest::unit(), 1)])
        } else {
            BTreeMap::new()
        };
        let (sl, sr) = antipode_contractions(f);
        if sl != expected || sr != expected {
            antipode_failures.push(f.to_string());
        }
    }
    HopfSelftest {
        width,
        max_grade,
        tree_counts,
        forest_counts,
        coassociativity_failures,
        antipode_failures,
    }
}
