//! Experiment orchestration: thermometry sweeps, fidelity scans, spectrum and
//! time-trace tables, cat-state phase estimation, and parameter-regime
//! validation.
//!
//! The central structural fact exploited here is that the sweep unitary — and
//! therefore the [`DickeResponse`] matrix — does not depend on the parameter
//! being estimated. One response is built per (params, schedule, cutoff,
//! steps) and reused across every grid point; a [`ResponseCache`] makes the
//! reuse explicit and thread-safe.
//!
//! Output tables use display units (kHz for frequencies, K for temperature,
//! μs for time); all internal computation stays in angular rad/s. Fisher
//! columns are reported per kelvin² at the temperature matching each n̄
//! through the mode frequency.

use crate::dynamics::{
    dicke_response, dicke_response_traced, instantaneous_spectrum, DickeResponse, Schedule,
};
use crate::error::{Error, Result};
use crate::hilbert::{JcModel, PhysicalParams};
use crate::metrology;
use crate::motion::{
    cat_weight_deps, cat_weights, coherent_weights, nbar_from_temperature, temperature_from_nbar,
    thermal_weights,
};
use crate::hilbert::sz_eigenvalue;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// Default relative tail tolerance for motional-state cutoffs.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;
/// Default probe strength for cat-state phase sweeps (the estimated parameter
/// must only be ≪ 1; the exact value is a documented choice).
pub const DEFAULT_EPSILON: f64 = 1e-3;
/// "Much greater than" factor for the addressability pass criterion.
pub const ADDRESSABILITY_FACTOR: f64 = 5.0;

/// Which motional state the experiment prepares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotionSpec {
    /// Thermal state; n̄ comes from the sweep grid.
    Thermal,
    /// Coherent state of fixed amplitude (time traces).
    Coherent { alpha: f64 },
    /// Even/odd cat with phase θ = αε; α comes from the sweep grid.
    Cat { epsilon: f64 },
}

/// Exactly one sweep axis per experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    /// Thermal occupation grid (thermometry / Fisher sweeps). May include 0.
    Nbar(Vec<f64>),
    /// Temperature grid in kelvin, converted through the mode frequency.
    TemperatureK(Vec<f64>),
    /// Sweep-rate grid (rad/s) × thermal occupations (fidelity scans).
    Gamma { values: Vec<f64>, nbars: Vec<f64> },
    /// Peak-detuning grid (rad/s) × thermal occupations (fidelity scans).
    Delta0 { values: Vec<f64>, nbars: Vec<f64> },
    /// Cat amplitude grid.
    Alpha(Vec<f64>),
    /// Uniform time grid over the drive window with this many points.
    Time { points: usize },
}

/// Full description of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: PhysicalParams,
    pub schedule: Schedule,
    pub motion: MotionSpec,
    pub sweep: SweepAxis,
    /// Explicit integrator step count; `None` applies the step-size rule.
    pub steps: Option<usize>,
    pub tail_tol: f64,
    /// Highest sector for spectrum traces (default 2S).
    pub max_sector: Option<usize>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::domain(format!(
                "tail_tol must lie in (0, 1), got {}",
                self.tail_tol
            )));
        }
        if let MotionSpec::Cat { epsilon } = self.motion {
            if !(epsilon > 0.0 && epsilon < 0.1) {
                return Err(Error::domain(format!(
                    "cat probe epsilon must lie in (0, 0.1), got {epsilon}"
                )));
            }
        }
        if let MotionSpec::Coherent { alpha } = self.motion {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::domain(format!(
                    "coherent alpha must be > 0, got {alpha}"
                )));
            }
        }
        match &self.sweep {
            SweepAxis::Nbar(v) => check_grid("nbar grid", v, 0.0)?,
            SweepAxis::TemperatureK(v) => check_grid("temperature grid", v, f64::MIN_POSITIVE)?,
            SweepAxis::Alpha(v) => check_grid("alpha grid", v, 0.0)?,
            SweepAxis::Gamma { values, nbars } => {
                check_grid("gamma grid", values, f64::MIN_POSITIVE)?;
                check_grid("nbar list", nbars, f64::MIN_POSITIVE)?;
            }
            SweepAxis::Delta0 { values, nbars } => {
                check_grid("delta0 grid", values, f64::MIN_POSITIVE)?;
                check_grid("nbar list", nbars, f64::MIN_POSITIVE)?;
            }
            SweepAxis::Time { points } => {
                if *points < 2 {
                    return Err(Error::domain("time grid needs at least 2 points"));
                }
            }
        }
        Ok(())
    }
}

fn check_grid(name: &str, values: &[f64], min: f64) -> Result<()> {
    if values.is_empty() {
        return Err(Error::domain(format!("{name} is empty")));
    }
    for &v in values {
        if !v.is_finite() || v < min {
            return Err(Error::domain(format!(
                "{name} contains invalid value {v} (minimum {min})"
            )));
        }
    }
    if values.len() > 1 {
        let increasing = values[1] > values[0];
        for w in values.windows(2) {
            if w[1] == w[0] || (w[1] > w[0]) != increasing {
                return Err(Error::domain(format!("{name} must be strictly monotone")));
            }
        }
    }
    Ok(())
}

/// How a column should be rendered in tabular output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Float,
    Integer,
}

/// Generic result table plus run diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub columns: Vec<String>,
    pub kinds: Vec<ColumnKind>,
    pub rows: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
    /// Half-open column range holding one probability distribution per row.
    pub prob_col_range: Option<(usize, usize)>,
}

impl SweepResult {
    /// Structural and probability-normalization checks (run before writing).
    pub fn validate(&self) -> Result<()> {
        if self.columns.len() != self.kinds.len() {
            return Err(Error::domain("column names and kinds differ in length"));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(Error::domain(format!(
                    "row {i} has {} fields, expected {}",
                    row.len(),
                    self.columns.len()
                )));
            }
            if let Some((a, b)) = self.prob_col_range {
                let sum: f64 = row[a..b].iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::domain(format!(
                        "row {i}: probability columns sum to {sum}, expected 1"
                    )));
                }
                if row[a..b].iter().any(|&p| p < -1e-12) {
                    return Err(Error::domain(format!("row {i}: negative probability")));
                }
            }
        }
        Ok(())
    }
}

#[derive(PartialEq, Eq, Hash)]
struct ResponseKey {
    num_ions: u32,
    eta: u64,
    mode: u64,
    axial: u64,
    model: u8,
    delta0: u64,
    lambda0: u64,
    gamma: u64,
    n_max: usize,
    steps: Option<usize>,
}

impl ResponseKey {
    fn new(params: &PhysicalParams, schedule: &Schedule, n_max: usize, steps: Option<usize>) -> Self {
        ResponseKey {
            num_ions: params.num_ions,
            eta: params.lamb_dicke.to_bits(),
            mode: params.mode_freq.to_bits(),
            axial: params.axial_freq.map(f64::to_bits).unwrap_or(u64::MAX),
            model: match params.model {
                JcModel::LinearJC => 0,
                JcModel::NonlinearJC => 1,
            },
            delta0: schedule.delta0.to_bits(),
            lambda0: schedule.lambda0.to_bits(),
            gamma: schedule.gamma.to_bits(),
            n_max,
            steps,
        }
    }
}

/// Thread-safe memo for response matrices keyed by everything that determines
/// them; motional-state parameters deliberately do not enter the key.
#[derive(Default)]
pub struct ResponseCache {
    inner: Mutex<HashMap<ResponseKey, Arc<DickeResponse>>>,
}

impl ResponseCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_build(
        &self,
        params: &PhysicalParams,
        schedule: &Schedule,
        n_max: usize,
        steps: Option<usize>,
    ) -> Result<Arc<DickeResponse>> {
        let key = ResponseKey::new(params, schedule, n_max, steps);
        if let Some(hit) = self.inner.lock().unwrap().get(&key) {
            return Ok(Arc::clone(hit));
        }
        // build outside the lock; a racing builder produces identical data
        let built = Arc::new(dicke_response(params, schedule, n_max, steps)?);
        let mut map = self.inner.lock().unwrap();
        Ok(Arc::clone(map.entry(key).or_insert(built)))
    }
}

/// The ladder must reach past every explicitly tracked Fock state so the
/// analytic tail (assigned to l = 2S) sits strictly above the ladder.
fn cutoff_floor(params: &PhysicalParams) -> usize {
    params.spin().max_level() + 4
}

/// Thermal sweep: populations, moments and Fisher information per grid point.
///
/// Columns: nbar, T_K, P_0…P_{2S}, Sz_mean, Sz_var, F_C, F_Q, F_Sz_moment.
/// The n̄ = 0 point is degenerate (zero variance, no temperature scale); its
/// Fisher columns are zeroed and a warning is attached.
pub fn run_thermometry_sweep(cfg: &ExperimentConfig, cache: &ResponseCache) -> Result<SweepResult> {
    cfg.validate()?;
    if cfg.motion != MotionSpec::Thermal {
        return Err(Error::domain("thermometry requires thermal motion"));
    }
    let nbars = thermal_axis(cfg)?;
    let spin = cfg.params.spin();
    let levels = spin.num_levels();

    let mut n_max = cutoff_floor(&cfg.params);
    for &nb in &nbars {
        if nb > 0.0 {
            n_max = n_max.max(thermal_weights(nb, cfg.tail_tol)?.n_max());
        }
    }
    let response = cache.get_or_build(&cfg.params, &cfg.schedule, n_max, cfg.steps)?;

    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(nbars.len());
    for &nb in &nbars {
        let mut row = Vec::with_capacity(levels + 7);
        if nb == 0.0 {
            // exact vacuum: sector 0 is a pure phase, so column 0 is exact
            let pops = response.column(0).to_vec();
            let sz = metrology::expected_sz(spin, &pops)?;
            let var = metrology::variance_sz(spin, &pops)?;
            row.extend([0.0, 0.0]);
            row.extend(&pops);
            row.extend([sz, var, 0.0, 0.0, 0.0]);
            warnings.push(
                "nbar = 0 endpoint is degenerate: no temperature scale; Fisher columns zeroed"
                    .to_string(),
            );
            rows.push(row);
            continue;
        }
        let pt = temperature_from_nbar(cfg.params.mode_freq, nb)?;
        let dist = thermal_weights(nb, cfg.tail_tol)?.extended(cutoff_floor(&cfg.params))?;
        let pops = metrology::final_dicke_populations(&response, &dist)?;
        let derivs = metrology::thermal_population_derivs(&response, &dist, pt.x)?;
        let est = metrology::classical_fisher_detailed(&pops, &derivs)?;
        for &l in &est.singular_outcomes {
            warnings.push(format!(
                "nbar = {nb}: level {l} probability at floor with finite derivative; \
                 its Fisher contribution is capped"
            ));
        }
        let t2 = pt.temperature * pt.temperature;
        let sz = metrology::expected_sz(spin, &pops)?;
        let var = metrology::variance_sz(spin, &pops)?;
        let mut dsz = 0.0;
        for (l, &d) in derivs.iter().enumerate() {
            dsz += d * sz_eigenvalue(spin, l)?;
        }
        let fsz = match metrology::moment_fisher(dsz, var) {
            Some(v) => v / t2,
            None => {
                warnings.push(format!("nbar = {nb}: zero variance, moment estimator absent"));
                0.0
            }
        };
        row.extend([nb, pt.temperature]);
        row.extend(&pops);
        row.extend([
            sz,
            var,
            est.value / t2,
            metrology::qfi_thermal_dimensionless(pt.x)? / t2,
            fsz,
        ]);
        rows.push(row);
    }

    let mut columns = vec!["nbar".to_string(), "T_K".to_string()];
    columns.extend((0..levels).map(|l| format!("P_{l}")));
    columns.extend(
        ["Sz_mean", "Sz_var", "F_C", "F_Q", "F_Sz_moment"]
            .iter()
            .map(|s| s.to_string()),
    );
    let kinds = vec![ColumnKind::Float; columns.len()];
    let result = SweepResult {
        columns,
        kinds,
        rows,
        warnings,
        prob_col_range: Some((2, 2 + levels)),
    };
    result.validate()?;
    Ok(result)
}

fn thermal_axis(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    match &cfg.sweep {
        SweepAxis::Nbar(v) => Ok(v.clone()),
        SweepAxis::TemperatureK(ts) => ts
            .iter()
            .map(|&t| nbar_from_temperature(cfg.params.mode_freq, t).map(|p| p.nbar))
            .collect(),
        _ => Err(Error::domain(
            "this experiment requires an nbar or temperature grid",
        )),
    }
}

/// Fisher-ratio sweep, optionally across several ion numbers (long format).
///
/// Columns: num_ions, nbar, T_K, F_C, F_Q, ratio_cfi_qfi, F_Sz_moment.
pub fn run_fisher_sweep(
    cfg: &ExperimentConfig,
    ion_numbers: &[u32],
    cache: &ResponseCache,
) -> Result<SweepResult> {
    let ns: Vec<u32> = if ion_numbers.is_empty() {
        vec![cfg.params.num_ions]
    } else {
        ion_numbers.to_vec()
    };
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for &n in &ns {
        let mut params = PhysicalParams::new(
            n,
            cfg.params.lamb_dicke,
            cfg.params.mode_freq,
            cfg.params.model,
        )?;
        if let Some(axial) = cfg.params.axial_freq {
            params = params.with_axial_freq(axial)?;
        }
        let sub = ExperimentConfig {
            params,
            ..cfg.clone()
        };
        let table = run_thermometry_sweep(&sub, cache)?;
        let levels = params.spin().num_levels();
        // thermometry layout: nbar, T_K, P_0..P_2S, Sz_mean, Sz_var, F_C, F_Q, F_Sz
        for row in &table.rows {
            let (fc, fq, fsz) = (row[levels + 4], row[levels + 5], row[levels + 6]);
            let ratio = if fq > 0.0 { fc / fq } else { 0.0 };
            rows.push(vec![n as f64, row[0], row[1], fc, fq, ratio, fsz]);
        }
        warnings.extend(
            table
                .warnings
                .into_iter()
                .map(|w| format!("N = {n}: {w}")),
        );
    }
    let result = SweepResult {
        columns: [
            "num_ions",
            "nbar",
            "T_K",
            "F_C",
            "F_Q",
            "ratio_cfi_qfi",
            "F_Sz_moment",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        kinds: vec![
            ColumnKind::Integer,
            ColumnKind::Float,
            ColumnKind::Float,
            ColumnKind::Float,
            ColumnKind::Float,
            ColumnKind::Float,
            ColumnKind::Float,
        ],
        rows,
        warnings,
        prob_col_range: None,
    };
    result.validate()?;
    Ok(result)
}

/// Transfer-fidelity scan over γ or Δ₀, crossed with a thermal n̄ list.
///
/// Columns: gamma_khz (or delta0_khz), nbar, fidelity.
pub fn run_fidelity_scan(cfg: &ExperimentConfig, cache: &ResponseCache) -> Result<SweepResult> {
    cfg.validate()?;
    if cfg.motion != MotionSpec::Thermal {
        return Err(Error::domain("fidelity scans require thermal motion"));
    }
    let (axis_name, values, nbars, vary_gamma) = match &cfg.sweep {
        SweepAxis::Gamma { values, nbars } => ("gamma_khz", values, nbars, true),
        SweepAxis::Delta0 { values, nbars } => ("delta0_khz", values, nbars, false),
        _ => {
            return Err(Error::domain(
                "fidelity scans require a gamma or delta0 sweep axis",
            ))
        }
    };
    let mut n_max = 0usize;
    let mut dists = Vec::with_capacity(nbars.len());
    for &nb in nbars {
        let d = thermal_weights(nb, cfg.tail_tol)?;
        n_max = n_max.max(d.n_max());
        dists.push(d);
    }
    let mut rows = Vec::with_capacity(values.len() * nbars.len());
    for &v in values {
        let schedule = if vary_gamma {
            Schedule::new(cfg.schedule.delta0, cfg.schedule.lambda0, v)?
        } else {
            Schedule::new(v, cfg.schedule.lambda0, cfg.schedule.gamma)?
        };
        let response = cache.get_or_build(&cfg.params, &schedule, n_max, cfg.steps)?;
        for (nb, dist) in nbars.iter().zip(&dists) {
            let f = metrology::transfer_fidelity(&response, dist)?;
            rows.push(vec![v / (2.0 * PI * 1e3), *nb, f]);
        }
    }
    let result = SweepResult {
        columns: vec![axis_name.to_string(), "nbar".to_string(), "fidelity".to_string()],
        kinds: vec![ColumnKind::Float; 3],
        rows,
        warnings: Vec::new(),
        prob_col_range: None,
    };
    result.validate()?;
    Ok(result)
}

/// Instantaneous sector eigenfrequencies on a uniform time grid, long format.
///
/// Columns: t_us, sector, branch, omega_khz (branches sorted ascending).
pub fn run_spectrum_trace(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let points = match cfg.sweep {
        SweepAxis::Time { points } => points,
        _ => return Err(Error::domain("spectrum traces require a time axis")),
    };
    let spin = cfg.params.spin();
    let max_m = cfg.max_sector.unwrap_or(spin.max_level());
    let tm = cfg.schedule.t_max();
    let grid: Vec<f64> = (0..points)
        .map(|k| -tm + 2.0 * tm * k as f64 / (points - 1) as f64)
        .collect();
    let mut rows = Vec::new();
    for m in 0..=max_m {
        let spectra = instantaneous_spectrum(&cfg.params, &cfg.schedule, m, &grid)?;
        for (k, evs) in spectra.iter().enumerate() {
            for (branch, &w) in evs.iter().enumerate() {
                rows.push(vec![
                    grid[k] * 1e6,
                    m as f64,
                    branch as f64,
                    w / (2.0 * PI * 1e3),
                ]);
            }
        }
    }
    let result = SweepResult {
        columns: ["t_us", "sector", "branch", "omega_khz"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        kinds: vec![
            ColumnKind::Float,
            ColumnKind::Integer,
            ColumnKind::Integer,
            ColumnKind::Float,
        ],
        rows,
        warnings: Vec::new(),
        prob_col_range: None,
    };
    result.validate()?;
    Ok(result)
}

/// Dicke-level populations over time for a coherent input.
///
/// Columns: t_us, P_0…P_{2S}. The truncated weight set is renormalized
/// (dividing by 1 − tail_mass) so every snapshot sums to one; the truncation
/// bias is bounded by tail_tol and noted in the warnings.
pub fn run_coherent_trace(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let alpha = match cfg.motion {
        MotionSpec::Coherent { alpha } => alpha,
        _ => return Err(Error::domain("coherent traces require coherent motion")),
    };
    let points = match cfg.sweep {
        SweepAxis::Time { points } => points,
        _ => return Err(Error::domain("coherent traces require a time axis")),
    };
    let spin = cfg.params.spin();
    let levels = spin.num_levels();
    let dist = coherent_weights(alpha, cfg.tail_tol)?.extended(cutoff_floor(&cfg.params))?;
    let renorm = 1.0 - dist.tail_mass;
    let (_, traces) =
        dicke_response_traced(&cfg.params, &cfg.schedule, dist.n_max(), cfg.steps, points)?;

    let tm = cfg.schedule.t_max();
    let mut rows = Vec::with_capacity(points);
    for k in 0..points {
        let t = -tm + 2.0 * tm * k as f64 / (points - 1) as f64;
        let mut pops = vec![0.0; levels];
        for (n, trace) in traces.iter().enumerate() {
            let w = dist.weights[n] / renorm;
            for (l, &p) in trace.populations[k].iter().enumerate() {
                pops[l] += w * p;
            }
        }
        let mut row = Vec::with_capacity(1 + levels);
        row.push(t * 1e6);
        row.extend(pops);
        rows.push(row);
    }
    let mut columns = vec!["t_us".to_string()];
    columns.extend((0..levels).map(|l| format!("P_{l}")));
    let kinds = vec![ColumnKind::Float; columns.len()];
    let result = SweepResult {
        columns,
        kinds,
        rows,
        warnings: vec![format!(
            "coherent weights truncated at n = {} and renormalized; bias ≤ {:.1e}",
            dist.n_max(),
            dist.tail_mass
        )],
        prob_col_range: Some((1, 1 + levels)),
    };
    result.validate()?;
    Ok(result)
}

/// Cat-state phase-estimation sweep over the amplitude grid.
///
/// Columns: alpha, theta, F_C_epsilon, heisenberg_ref (the 4α² reference is a
/// documented normalization choice, reported for context, never asserted).
pub fn run_cat_phase(cfg: &ExperimentConfig, cache: &ResponseCache) -> Result<SweepResult> {
    cfg.validate()?;
    let epsilon = match cfg.motion {
        MotionSpec::Cat { epsilon } => epsilon,
        _ => return Err(Error::domain("cat-phase sweeps require cat motion")),
    };
    let alphas = match &cfg.sweep {
        SweepAxis::Alpha(v) => v.clone(),
        _ => return Err(Error::domain("cat-phase sweeps require an alpha grid")),
    };
    let spin = cfg.params.spin();
    let levels = spin.num_levels();
    let two_s = spin.max_level() as f64;

    let mut n_max = cutoff_floor(&cfg.params);
    for &a in &alphas {
        if a > 0.0 {
            n_max = n_max.max(cat_weights(a, a * epsilon, cfg.tail_tol)?.n_max());
        }
    }
    let response = cache.get_or_build(&cfg.params, &cfg.schedule, n_max, cfg.steps)?;

    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        if alpha == 0.0 {
            rows.push(vec![0.0, 0.0, 0.0, 0.0]);
            continue;
        }
        if two_s < alpha * alpha + 3.0 * alpha {
            warnings.push(format!(
                "alpha = {alpha}: ladder saturates (2S = {two_s} < α² + 3α = {:.3}); \
                 scaling flattens here",
                alpha * alpha + 3.0 * alpha
            ));
        }
        let theta = alpha * epsilon;
        let dist = cat_weights(alpha, theta, cfg.tail_tol)?.extended(cutoff_floor(&cfg.params))?;
        let mut deps = Vec::with_capacity(dist.n_max() + 1);
        for n in 0..=dist.n_max() {
            deps.push(cat_weight_deps(alpha, epsilon, n)?);
        }
        let pops = metrology::final_dicke_populations(&response, &dist)?;
        let mut dpops = vec![0.0; levels];
        let mut dsum = 0.0;
        for (n, &dw) in deps.iter().enumerate() {
            dsum += dw;
            for (l, d) in dpops.iter_mut().enumerate() {
                *d += dw * response.entry(l, n);
            }
        }
        // probability conservation routes the tail derivative to the top level
        dpops[levels - 1] -= dsum;
        let est = metrology::classical_fisher_detailed(&pops, &dpops)?;
        for &l in &est.singular_outcomes {
            warnings.push(format!(
                "alpha = {alpha}: level {l} probability at floor with finite derivative"
            ));
        }
        rows.push(vec![alpha, theta, est.value, 4.0 * alpha * alpha]);
    }
    let result = SweepResult {
        columns: ["alpha", "theta", "F_C_epsilon", "heisenberg_ref"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        kinds: vec![ColumnKind::Float; 4],
        rows,
        warnings,
        prob_col_range: None,
    };
    result.validate()?;
    Ok(result)
}

/// Spectral-addressability report for the chosen mode and drive strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct AddressabilityReport {
    /// Gap to the nearest spectator mode (rad/s).
    pub gap: f64,
    pub ratio_lambda: f64,
    pub ratio_delta: f64,
    pub threshold: f64,
    pub pass: bool,
    /// True when the ln(6N)/N² estimate was used (no axial frequency given).
    pub used_scaling_formula: bool,
}

/// Check that the drive addresses a single collective mode: the gap between
/// the target mode at ω_x and the nearest spectator must exceed
/// `threshold × max(λ₀, Δ₀)`. With the axial frequency given the gap is
/// ω_x − √(ω_x² − ω_z²); otherwise the chain-scaling estimate
/// 0.6228·ln(6N)/N²·ω_x applies.
pub fn validate_addressability(
    num_ions: u32,
    mode_freq: f64,
    axial_freq: Option<f64>,
    lambda0: f64,
    delta0: f64,
    threshold: f64,
) -> Result<AddressabilityReport> {
    if num_ions == 0 {
        return Err(Error::domain("need at least one ion"));
    }
    for (name, v) in [
        ("mode_freq", mode_freq),
        ("lambda0", lambda0),
        ("delta0", delta0),
        ("threshold", threshold),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!("{name} must be > 0, got {v}")));
        }
    }
    let (gap, used_scaling_formula) = match axial_freq {
        Some(wz) => {
            if !(wz > 0.0 && wz < mode_freq) {
                return Err(Error::domain(format!(
                    "axial frequency must lie in (0, mode_freq); got {wz} vs {mode_freq}"
                )));
            }
            (mode_freq - (mode_freq * mode_freq - wz * wz).sqrt(), false)
        }
        None => {
            let n = num_ions as f64;
            (0.6228 * (6.0 * n).ln() / (n * n) * mode_freq, true)
        }
    };
    let reference = lambda0.max(delta0);
    Ok(AddressabilityReport {
        gap,
        ratio_lambda: gap / lambda0,
        ratio_delta: gap / delta0,
        threshold,
        pass: gap >= threshold * reference,
        used_scaling_formula,
    })
}
