//! Time-dependent sector Hamiltonians, the adiabatic drive schedule, fixed-step
//! norm-preserving integration, instantaneous spectra, and a full-space oracle
//! evolver used to validate the sector decomposition.
//!
//! The drive is Δ(t) = Δ₀ sin(γt/2), λ(t) = λ₀ cos²(γt/2) on t ∈ [−π/γ, π/γ]:
//! the detuning sweeps −Δ₀ → +Δ₀ while the exchange coupling switches on and
//! off, carrying |D₀⟩|n⟩ adiabatically into |D_min(n,2S)⟩|max(n−2S,0)⟩.
//!
//! Integration is classical fixed-step RK4 on iψ′ = H(t)ψ per sector. The step
//! count is chosen from the Gershgorin bound ‖H‖ so that both y = ‖H‖h ≤ 0.05
//! and the accumulated truncation budget Θ·y⁴/120 ≤ 10⁻⁹ hold, where
//! Θ = ‖H‖·2t_max is the total accumulated phase. The second constraint is the
//! binding one for long sweeps and also keeps the RK4 norm decay, which is
//! Θ·y⁵/144 in total (|R(iy)| = 1 − y⁶/144 + …), around 10⁻¹¹. Fixed steps keep
//! every result bitwise reproducible.

use crate::error::{Error, Result};
use crate::hilbert::{coupling_element, sector_basis, sz_eigenvalue, PhysicalParams, Spin};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Adiabatic drive parameters (all angular frequencies, rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub delta0: f64,
    pub lambda0: f64,
    pub gamma: f64,
}

impl Schedule {
    pub fn new(delta0: f64, lambda0: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("delta0", delta0), ("lambda0", lambda0), ("gamma", gamma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Schedule {
            delta0,
            lambda0,
            gamma,
        })
    }

    /// Half window: the sweep runs over t ∈ [−t_max, t_max] with t_max = π/γ.
    pub fn t_max(&self) -> f64 {
        PI / self.gamma
    }

    /// (Δ(t), λ(t)). The endpoints are special-cased so that Δ(±t_max) = ±Δ₀
    /// and λ(±t_max) = 0 hold exactly rather than to rounding.
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let tm = self.t_max();
        if !(t.abs() <= tm * (1.0 + 1e-12)) {
            return Err(Error::domain(format!(
                "t = {t} outside drive window [-{tm}, {tm}]"
            )));
        }
        if t == tm {
            return Ok((self.delta0, 0.0));
        }
        if t == -tm {
            return Ok((-self.delta0, 0.0));
        }
        Ok(drive_at(self, t))
    }
}

#[inline]
fn drive_at(s: &Schedule, t: f64) -> (f64, f64) {
    let u = 0.5 * s.gamma * t;
    let c = u.cos();
    (s.delta0 * u.sin(), s.lambda0 * c * c)
}

/// Real symmetric tridiagonal matrix in sector-basis ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagMatrix {
    pub diag: Vec<f64>,
    /// Sub/super-diagonal; length dim − 1.
    pub off: Vec<f64>,
}

impl TridiagMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for i in 0..n - 1 {
            m[(i, i + 1)] = self.off[i];
            m[(i + 1, i)] = self.off[i];
        }
        m
    }

    /// Eigenvalues sorted ascending (dense symmetric solve; dims are ≤ 2S+1).
    pub fn eigenvalues_sorted(&self) -> Vec<f64> {
        if self.dim() == 1 {
            return vec![self.diag[0]];
        }
        let eig = self.to_dense().symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }
}

/// Sector Hamiltonian H_M(Δ, λ): diagonal Δ(−S+l), off-diagonal λ·coupling.
pub fn sector_hamiltonian(
    params: &PhysicalParams,
    m: usize,
    delta: f64,
    lambda: f64,
) -> TridiagMatrix {
    let drive = SectorDrive::new(params, m);
    TridiagMatrix {
        diag: drive.sz.iter().map(|s| delta * s).collect(),
        off: drive.coup.iter().map(|c| lambda * c).collect(),
    }
}

/// Time-independent pieces of one sector Hamiltonian:
/// H(t) = Δ(t)·diag(sz) + λ(t)·tridiag(coup).
struct SectorDrive {
    sz: Vec<f64>,
    coup: Vec<f64>,
}

impl SectorDrive {
    fn new(params: &PhysicalParams, m: usize) -> Self {
        let spin = params.spin();
        let basis = sector_basis(spin, m);
        let dim = basis.dim();
        let sz: Vec<f64> = (0..dim)
            .map(|l| sz_eigenvalue(spin, l).expect("basis index in range"))
            .collect();
        let coup: Vec<f64> = (0..dim.saturating_sub(1))
            .map(|l| coupling_element(params, l, m - l - 1).expect("basis index in range"))
            .collect();
        SectorDrive { sz, coup }
    }

    fn dim(&self) -> usize {
        self.sz.len()
    }

    /// out = −i H(Δ, λ) ψ
    #[inline]
    fn apply(&self, delta: f64, lambda: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let dim = self.sz.len();
        for i in 0..dim {
            let mut acc = (delta * self.sz[i]) * psi[i];
            if i > 0 {
                acc += (lambda * self.coup[i - 1]) * psi[i - 1];
            }
            if i + 1 < dim {
                acc += (lambda * self.coup[i]) * psi[i + 1];
            }
            out[i] = Complex64::new(acc.im, -acc.re);
        }
    }

    /// Gershgorin bound on max_t ‖H(t)‖ using |Δ(t)| ≤ Δ₀, λ(t) ≤ λ₀.
    fn gershgorin(&self, schedule: &Schedule) -> f64 {
        let dim = self.dim();
        let mut bound: f64 = 0.0;
        for i in 0..dim {
            let mut r = schedule.delta0 * self.sz[i].abs();
            if i > 0 {
                r += schedule.lambda0 * self.coup[i - 1];
            }
            if i + 1 < dim {
                r += schedule.lambda0 * self.coup[i];
            }
            bound = bound.max(r);
        }
        bound
    }
}

/// Step count from the two step-size constraints (see module docs); never
/// below 64 steps.
fn steps_for_phase(theta: f64) -> usize {
    let y = 0.05f64.min((120.0 * 1e-9 / theta).powf(0.25));
    ((theta / y).ceil() as usize).max(64)
}

/// Hard validity floor: y = ‖H‖h must not exceed 0.05.
fn min_steps_for_phase(theta: f64) -> usize {
    ((theta / 0.05).ceil() as usize).max(1)
}

/// Default integration step count for one sector.
pub fn default_steps(params: &PhysicalParams, schedule: &Schedule, m: usize) -> usize {
    let drive = SectorDrive::new(params, m);
    steps_for_phase(drive.gershgorin(schedule) * 2.0 * schedule.t_max())
}

/// Final state of one sector evolution; amplitudes over the sector basis,
/// deliberately not renormalized so callers can observe the norm drift.
#[derive(Debug, Clone)]
pub struct SectorState {
    pub sector: usize,
    pub amplitudes: Vec<Complex64>,
}

impl SectorState {
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Populations of one sector recorded on a uniform time grid.
#[derive(Debug, Clone)]
pub struct SectorTrace {
    pub sector: usize,
    pub times: Vec<f64>,
    /// populations[k][l] at times[k]; index l is the Dicke level (= basis index).
    pub populations: Vec<Vec<f64>>,
}

const DRIFT_LIMIT: f64 = 1e-6;

fn resolve_steps(min_theta_steps: usize, auto: usize, steps: Option<usize>) -> Result<usize> {
    match steps {
        None => Ok(auto),
        Some(s) => {
            if s < min_theta_steps {
                Err(Error::integration(format!(
                    "requested {s} steps is below the step-size rule minimum {min_theta_steps}; \
                     increase the step count"
                )))
            } else {
                Ok(s)
            }
        }
    }
}

fn run_sector(
    params: &PhysicalParams,
    schedule: &Schedule,
    m: usize,
    steps: Option<usize>,
    snapshots: Option<usize>,
) -> Result<(SectorState, Option<SectorTrace>)> {
    let drive = SectorDrive::new(params, m);
    let theta = drive.gershgorin(schedule) * 2.0 * schedule.t_max();
    let mut steps = resolve_steps(
        min_steps_for_phase(theta),
        steps_for_phase(theta),
        steps,
    )?;
    let snap_every = match snapshots {
        Some(k) if k >= 2 => {
            steps = steps.next_multiple_of(k - 1);
            Some(steps / (k - 1))
        }
        Some(_) => {
            return Err(Error::domain("snapshot count must be at least 2"));
        }
        None => None,
    };

    let dim = drive.dim();
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    psi[0] = Complex64::new(1.0, 0.0); // |D_0⟩|M⟩
    let t0 = -schedule.t_max();
    let h = 2.0 * schedule.t_max() / steps as f64;

    let mut trace = snap_every.map(|_| SectorTrace {
        sector: m,
        times: Vec::new(),
        populations: Vec::new(),
    });
    rk4(
        |t, p, out| {
            let (d, l) = drive_at(schedule, t);
            drive.apply(d, l, p, out);
        },
        t0,
        h,
        steps,
        &mut psi,
        |step, p| {
            if let (Some(every), Some(tr)) = (snap_every, trace.as_mut()) {
                if step % every == 0 {
                    tr.times.push(t0 + step as f64 * h);
                    tr.populations.push(p.iter().map(|a| a.norm_sqr()).collect());
                }
            }
        },
    );

    let state = SectorState {
        sector: m,
        amplitudes: psi,
    };
    let drift = (state.norm() - 1.0).abs();
    if drift > DRIFT_LIMIT {
        return Err(Error::integration(format!(
            "sector {m}: norm drift {drift:.3e} exceeds {DRIFT_LIMIT:.0e}; rerun with more steps"
        )));
    }
    Ok((state, trace))
}

/// Evolve |D₀⟩|M⟩ across the full drive window. `steps = None` applies the
/// default step rule; an explicit count below the validity floor is rejected.
pub fn evolve_sector(
    params: &PhysicalParams,
    schedule: &Schedule,
    m: usize,
    steps: Option<usize>,
) -> Result<SectorState> {
    run_sector(params, schedule, m, steps, None).map(|(s, _)| s)
}

/// As [`evolve_sector`], additionally recording populations at `snapshots`
/// uniformly spaced times (endpoints included). The step count is rounded up
/// to a multiple of `snapshots − 1` so snapshot times land on grid points.
pub fn evolve_sector_traced(
    params: &PhysicalParams,
    schedule: &Schedule,
    m: usize,
    steps: Option<usize>,
    snapshots: usize,
) -> Result<(SectorState, SectorTrace)> {
    run_sector(params, schedule, m, steps, Some(snapshots))
        .map(|(s, tr)| (s, tr.expect("trace requested")))
}

/// Transfer-probability matrix R[l][n] = P(Dicke level l at t_max | initial
/// |D₀⟩|n⟩), columns n = 0…n_max. Stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeResponse {
    spin: Spin,
    n_max: usize,
    data: Vec<f64>,
}

impl DickeResponse {
    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn num_levels(&self) -> usize {
        self.spin.num_levels()
    }

    pub fn entry(&self, l: usize, n: usize) -> f64 {
        self.data[n * self.num_levels() + l]
    }

    /// All Dicke-level probabilities for initial Fock state n.
    pub fn column(&self, n: usize) -> &[f64] {
        let rows = self.num_levels();
        &self.data[n * rows..(n + 1) * rows]
    }

    /// Perfect-adiabatic reference: R[l][n] = 1 iff l = min(n, 2S).
    pub fn perfect(spin: Spin, n_max: usize) -> DickeResponse {
        let rows = spin.num_levels();
        let mut data = vec![0.0; rows * (n_max + 1)];
        for n in 0..=n_max {
            data[n * rows + n.min(spin.max_level())] = 1.0;
        }
        DickeResponse { spin, n_max, data }
    }

    /// Assemble a response from explicit per-Fock columns; column n may be
    /// shorter than the ladder (missing entries are zero).
    pub fn from_columns(spin: Spin, columns: Vec<Vec<f64>>) -> Result<DickeResponse> {
        if columns.is_empty() {
            return Err(Error::domain("response needs at least one column"));
        }
        let rows = spin.num_levels();
        let n_max = columns.len() - 1;
        let mut data = vec![0.0; rows * columns.len()];
        for (n, col) in columns.into_iter().enumerate() {
            if col.len() > rows {
                return Err(Error::domain(format!(
                    "column {n} has {} entries but the ladder has {rows} levels",
                    col.len()
                )));
            }
            data[n * rows..n * rows + col.len()].copy_from_slice(&col);
        }
        Ok(DickeResponse { spin, n_max, data })
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..=self.n_max)
            .map(|n| self.column(n).iter().sum())
            .collect()
    }

    /// Max-norm distance ‖R − other‖_max over common entries.
    pub fn max_deviation(&self, other: &DickeResponse) -> f64 {
        assert_eq!(self.spin, other.spin);
        assert_eq!(self.n_max, other.n_max);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Assemble per-sector final populations into the response matrix; sectors are
/// evolved in parallel, assembled in sector order (deterministic).
pub fn dicke_response(
    params: &PhysicalParams,
    schedule: &Schedule,
    n_max: usize,
    steps: Option<usize>,
) -> Result<DickeResponse> {
    let columns: Vec<Vec<f64>> = (0..=n_max)
        .into_par_iter()
        .map(|m| {
            evolve_sector(params, schedule, m, steps).map(|state| state.populations())
        })
        .collect::<Result<_>>()?;
    Ok(assemble_response(params.spin(), n_max, columns))
}

/// As [`dicke_response`] but additionally returns each sector's population
/// trace on a shared `snapshots`-point time grid (for time-series output).
pub fn dicke_response_traced(
    params: &PhysicalParams,
    schedule: &Schedule,
    n_max: usize,
    steps: Option<usize>,
    snapshots: usize,
) -> Result<(DickeResponse, Vec<SectorTrace>)> {
    let results: Vec<(Vec<f64>, SectorTrace)> = (0..=n_max)
        .into_par_iter()
        .map(|m| {
            evolve_sector_traced(params, schedule, m, steps, snapshots)
                .map(|(state, trace)| (state.populations(), trace))
        })
        .collect::<Result<_>>()?;
    let (columns, traces): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok((assemble_response(params.spin(), n_max, columns), traces))
}

fn assemble_response(spin: Spin, n_max: usize, columns: Vec<Vec<f64>>) -> DickeResponse {
    debug_assert_eq!(columns.len(), n_max + 1);
    // sector dim = min(n, 2S) + 1 ≤ num_levels, so the constructor can't fail
    DickeResponse::from_columns(spin, columns).expect("sector dims bounded by ladder")
}

/// Eigenvalues of the sector Hamiltonian along a time grid, each set sorted
/// ascending.
pub fn instantaneous_spectrum(
    params: &PhysicalParams,
    schedule: &Schedule,
    m: usize,
    t_grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    t_grid
        .iter()
        .map(|&t| {
            let (delta, lambda) = schedule.eval(t)?;
            Ok(sector_hamiltonian(params, m, delta, lambda).eigenvalues_sorted())
        })
        .collect()
}

/// Pure state on the truncated product space, indexed amp[l·(n_max+1) + n].
#[derive(Debug, Clone)]
pub struct FullState {
    pub spin: Spin,
    pub n_max: usize,
    pub amplitudes: Vec<Complex64>,
}

impl FullState {
    fn zeros(spin: Spin, n_max: usize) -> FullState {
        FullState {
            spin,
            n_max,
            amplitudes: vec![Complex64::new(0.0, 0.0); spin.num_levels() * (n_max + 1)],
        }
    }

    /// |D₀⟩ ⊗ Σ c_n |n⟩ from given Fock amplitudes, renormalized on truncation.
    pub fn from_fock_amplitudes(spin: Spin, amps: &[Complex64], n_max: usize) -> FullState {
        let mut st = FullState::zeros(spin, n_max);
        for (n, &c) in amps.iter().take(n_max + 1).enumerate() {
            st.amplitudes[n] = c; // l = 0 block leads
        }
        let norm = st.norm();
        for a in &mut st.amplitudes {
            *a /= norm;
        }
        st
    }

    /// Truncated coherent state |D₀⟩|α⟩, real amplitudes e^{−α²/2} αⁿ/√n!.
    pub fn coherent_ground(spin: Spin, alpha: f64, n_max: usize) -> FullState {
        let mut amps = Vec::with_capacity(n_max + 1);
        let mut c = (-alpha * alpha / 2.0).exp();
        for n in 0..=n_max {
            amps.push(Complex64::new(c, 0.0));
            c *= alpha / ((n + 1) as f64).sqrt();
        }
        FullState::from_fock_amplitudes(spin, &amps, n_max)
    }

    /// Truncated cat state |D₀⟩(e^{iθ}|α⟩ + e^{−iθ}|−α⟩)/√(2𝒩).
    pub fn cat_ground(spin: Spin, alpha: f64, theta: f64, n_max: usize) -> FullState {
        let phase = Complex64::new(0.0, theta).exp();
        let mut amps = Vec::with_capacity(n_max + 1);
        let mut c = (-alpha * alpha / 2.0).exp();
        let mut sign = 1.0;
        for n in 0..=n_max {
            amps.push(c * (phase + sign * phase.conj()));
            c *= alpha / ((n + 1) as f64).sqrt();
            sign = -sign;
        }
        FullState::from_fock_amplitudes(spin, &amps, n_max)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Marginal Dicke-level populations P_l = Σ_n |amp(l,n)|².
    pub fn dicke_populations(&self) -> Vec<f64> {
        let cols = self.n_max + 1;
        (0..self.spin.num_levels())
            .map(|l| {
                self.amplitudes[l * cols..(l + 1) * cols]
                    .iter()
                    .map(|a| a.norm_sqr())
                    .sum()
            })
            .collect()
    }

    /// ⟨l + n⟩ — total excitations with the spin index measured from l = 0.
    pub fn total_excitations(&self) -> f64 {
        let cols = self.n_max + 1;
        let mut acc = 0.0;
        for l in 0..self.spin.num_levels() {
            for n in 0..cols {
                acc += (l + n) as f64 * self.amplitudes[l * cols + n].norm_sqr();
            }
        }
        acc
    }

    /// Probability mass outside the set of sectors M carrying the initial state
    /// (block-diagonality check in tests).
    pub fn sector_mass(&self, m: usize) -> f64 {
        let cols = self.n_max + 1;
        let mut acc = 0.0;
        for l in 0..self.spin.num_levels() {
            if m >= l && m - l < cols {
                acc += self.amplitudes[l * cols + (m - l)].norm_sqr();
            }
        }
        acc
    }
}

/// Full product-space drive; couplings coup[l][n−1] connect (l, n) ↔ (l+1, n−1).
struct FullDrive {
    two_s: usize,
    n_max: usize,
    sz: Vec<f64>,
    coup: Vec<Vec<f64>>,
}

impl FullDrive {
    fn new(params: &PhysicalParams, n_max: usize) -> FullDrive {
        let spin = params.spin();
        let two_s = spin.max_level();
        let sz = (0..=two_s)
            .map(|l| sz_eigenvalue(spin, l).expect("level in range"))
            .collect();
        let coup = (0..two_s)
            .map(|l| {
                (1..=n_max)
                    .map(|n| coupling_element(params, l, n - 1).expect("level in range"))
                    .collect()
            })
            .collect();
        FullDrive {
            two_s,
            n_max,
            sz,
            coup,
        }
    }

    fn apply(&self, delta: f64, lambda: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let cols = self.n_max + 1;
        for l in 0..=self.two_s {
            for n in 0..cols {
                let idx = l * cols + n;
                let mut acc = (delta * self.sz[l]) * psi[idx];
                if l < self.two_s && n >= 1 {
                    acc += (lambda * self.coup[l][n - 1]) * psi[(l + 1) * cols + n - 1];
                }
                if l >= 1 && n + 1 < cols {
                    acc += (lambda * self.coup[l - 1][n]) * psi[(l - 1) * cols + n + 1];
                }
                out[idx] = Complex64::new(acc.im, -acc.re);
            }
        }
    }

    fn gershgorin(&self, schedule: &Schedule) -> f64 {
        let cols = self.n_max + 1;
        let mut bound: f64 = 0.0;
        for l in 0..=self.two_s {
            for n in 0..cols {
                let mut r = schedule.delta0 * self.sz[l].abs();
                if l < self.two_s && n >= 1 {
                    r += schedule.lambda0 * self.coup[l][n - 1];
                }
                if l >= 1 && n + 1 < cols {
                    r += schedule.lambda0 * self.coup[l - 1][n];
                }
                bound = bound.max(r);
            }
        }
        bound
    }
}

/// Dicke-level populations of the full state on a uniform time grid.
#[derive(Debug, Clone)]
pub struct FullTrace {
    pub times: Vec<f64>,
    pub dicke_populations: Vec<Vec<f64>>,
}

const FULL_DIM_LIMIT: usize = 100_000;

/// Evolve an arbitrary pure state on the whole truncated product space with
/// the same integrator and step rules as the sector engine. Test oracle for
/// the sector decomposition — not meant for production sweeps.
pub fn evolve_full_oracle(
    params: &PhysicalParams,
    schedule: &Schedule,
    initial: &FullState,
    steps: Option<usize>,
) -> Result<FullState> {
    run_full(params, schedule, initial, steps, None).map(|(s, _)| s)
}

/// As [`evolve_full_oracle`] with population snapshots on a uniform grid.
pub fn evolve_full_oracle_traced(
    params: &PhysicalParams,
    schedule: &Schedule,
    initial: &FullState,
    steps: Option<usize>,
    snapshots: usize,
) -> Result<(FullState, FullTrace)> {
    run_full(params, schedule, initial, steps, Some(snapshots))
        .map(|(s, tr)| (s, tr.expect("trace requested")))
}

fn run_full(
    params: &PhysicalParams,
    schedule: &Schedule,
    initial: &FullState,
    steps: Option<usize>,
    snapshots: Option<usize>,
) -> Result<(FullState, Option<FullTrace>)> {
    let dim = initial.amplitudes.len();
    if dim > FULL_DIM_LIMIT {
        return Err(Error::too_large(format!(
            "full-space dimension {dim} exceeds the oracle guard {FULL_DIM_LIMIT}"
        )));
    }
    assert_eq!(initial.spin, params.spin(), "state and params disagree on N");
    let drive = FullDrive::new(params, initial.n_max);
    let theta = drive.gershgorin(schedule) * 2.0 * schedule.t_max();
    let mut steps = resolve_steps(
        min_steps_for_phase(theta),
        steps_for_phase(theta),
        steps,
    )?;
    let snap_every = match snapshots {
        Some(k) if k >= 2 => {
            steps = steps.next_multiple_of(k - 1);
            Some(steps / (k - 1))
        }
        Some(_) => return Err(Error::domain("snapshot count must be at least 2")),
        None => None,
    };

    let mut state = initial.clone();
    let t0 = -schedule.t_max();
    let h = 2.0 * schedule.t_max() / steps as f64;
    let mut trace = snap_every.map(|_| FullTrace {
        times: Vec::new(),
        dicke_populations: Vec::new(),
    });
    {
        let spin = state.spin;
        let n_max = state.n_max;
        let psi = &mut state.amplitudes;
        rk4(
            |t, p, out| {
                let (d, l) = drive_at(schedule, t);
                drive.apply(d, l, p, out);
            },
            t0,
            h,
            steps,
            psi,
            |step, p| {
                if let (Some(every), Some(tr)) = (snap_every, trace.as_mut()) {
                    if step % every == 0 {
                        tr.times.push(t0 + step as f64 * h);
                        let probe = FullState {
                            spin,
                            n_max,
                            amplitudes: p.to_vec(),
                        };
                        tr.dicke_populations.push(probe.dicke_populations());
                    }
                }
            },
        );
    }

    let drift = (state.norm() - 1.0).abs();
    if drift > DRIFT_LIMIT {
        return Err(Error::integration(format!(
            "full-space oracle: norm drift {drift:.3e} exceeds {DRIFT_LIMIT:.0e}"
        )));
    }
    Ok((state, trace))
}

/// Classical RK4 over `steps` fixed steps of size `h` from `t0`; `observe` is
/// called with the step index (0 = initial state) after every update.
fn rk4<F, O>(apply: F, t0: f64, h: f64, steps: usize, psi: &mut [Complex64], mut observe: O)
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
    O: FnMut(usize, &[Complex64]),
{
    let dim = psi.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut k1 = vec![zero; dim];
    let mut k2 = vec![zero; dim];
    let mut k3 = vec![zero; dim];
    let mut k4 = vec![zero; dim];
    let mut tmp = vec![zero; dim];
    observe(0, psi);
    for step in 0..steps {
        let t = t0 + step as f64 * h;
        apply(t, psi, &mut k1);
        for j in 0..dim {
            tmp[j] = psi[j] + 0.5 * h * k1[j];
        }
        apply(t + 0.5 * h, &tmp, &mut k2);
        for j in 0..dim {
            tmp[j] = psi[j] + 0.5 * h * k2[j];
        }
        apply(t + 0.5 * h, &tmp, &mut k3);
        for j in 0..dim {
            tmp[j] = psi[j] + h * k3[j];
        }
        apply(t + h, &tmp, &mut k4);
        let w = h / 6.0;
        for j in 0..dim {
            psi[j] += w * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]);
        }
        observe(step + 1, psi);
    }
}
