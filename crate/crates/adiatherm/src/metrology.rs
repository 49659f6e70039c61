//! Fisher-information figures of merit for phonon thermometry.
//!
//! The thermal phonon state is diagonal in the Fock basis, so its quantum
//! Fisher information for temperature coincides with the classical Fisher
//! information of the number distribution and has the closed form
//! T²F_Q = (x²/4)csch²(x/2) = x²eˣ/(eˣ−1)², x = ħω/k_BT. The adiabatic sweep
//! maps number states onto Dicke levels (n → min(n, 2S)); measuring the
//! collective spin then yields a classical Fisher information approaching F_Q
//! whenever the transfer is faithful and the spin ladder is long enough to
//! resolve the occupied part of the distribution.
//!
//! All `*_dimensionless` quantities are the scale-free combination T²F;
//! divide by T² (kelvin²) for the dimensional Fisher information.

use crate::constants::{HBAR, KB};
use crate::dynamics::{DickeResponse, SectorState};
use crate::error::{Error, Result};
use crate::hilbert::{binomial, sz_eigenvalue, Spin};
use crate::motion::{thermal_tail_dt, thermal_weight_dt, MotionDistribution, MotionKind};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Probabilities below this floor are clamped in Fisher-information quotients.
pub const PROB_FLOOR: f64 = 1e-15;

/// Classical Fisher information with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherEstimate {
    pub value: f64,
    /// Outcomes with probability ≤ floor but derivative > floor: their
    /// contribution was capped by the floor and should be treated as suspect.
    pub singular_outcomes: Vec<usize>,
}

/// Classical Fisher information Σ (∂p)²/p of one outcome distribution.
///
/// Probabilities are clamped at [`PROB_FLOOR`]: genuine zero/zero outcomes
/// contribute nothing, while outcomes with vanishing probability but finite
/// derivative are capped and flagged in [`FisherEstimate::singular_outcomes`].
pub fn classical_fisher_detailed(probs: &[f64], derivs: &[f64]) -> Result<FisherEstimate> {
    if probs.len() != derivs.len() {
        return Err(Error::domain(format!(
            "probability and derivative vectors differ in length: {} vs {}",
            probs.len(),
            derivs.len()
        )));
    }
    let mut value = 0.0;
    let mut singular = Vec::new();
    for (i, (&p, &dp)) in probs.iter().zip(derivs).enumerate() {
        if !(p > -1e-9) || !p.is_finite() || !dp.is_finite() {
            return Err(Error::domain(format!(
                "invalid probability/derivative pair at outcome {i}: p = {p}, dp = {dp}"
            )));
        }
        if dp == 0.0 {
            continue;
        }
        if p <= PROB_FLOOR && dp.abs() > PROB_FLOOR {
            singular.push(i);
        }
        value += dp * dp / p.max(PROB_FLOOR);
    }
    Ok(FisherEstimate {
        value,
        singular_outcomes: singular,
    })
}

/// [`classical_fisher_detailed`] without the diagnostics.
pub fn classical_fisher(probs: &[f64], derivs: &[f64]) -> Result<f64> {
    classical_fisher_detailed(probs, derivs).map(|e| e.value)
}

/// T²F_Q of a thermal oscillator state: x²eˣ/(eˣ−1)², evaluated in the
/// overflow-free form x²q/(1−q)² with q = e^{−x}. The numerator keeps q
/// itself (never the cancellation-prone 1 − (1 − q)), so the value stays
/// accurate down to q ≈ 10⁻³⁰⁰ and underflows gracefully to 0 beyond.
pub fn qfi_thermal_dimensionless(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("x must be > 0, got {x}")));
    }
    let q = (-x).exp();
    let u = -(-x).exp_m1();
    Ok(x * x * q / (u * u))
}

/// Dimensional F_Q in K⁻² for mode frequency ω (rad/s) at temperature T (K).
pub fn qfi_thermal(omega: f64, temperature: f64) -> Result<f64> {
    let x = boltzmann_ratio(omega, temperature)?;
    Ok(qfi_thermal_dimensionless(x)? / (temperature * temperature))
}

fn boltzmann_ratio(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!("omega must be > 0, got {omega}")));
    }
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::domain(format!(
            "temperature must be > 0, got {temperature}"
        )));
    }
    Ok(HBAR * omega / (KB * temperature))
}

/// Diagonal of the symmetric logarithmic derivative of the thermal state,
/// L_n = ħω(n − n̄)/(k_B T²) = x(n − n̄)/T, for n = 0…n_max.
pub fn sld_thermal_diagonal(omega: f64, temperature: f64, n_max: usize) -> Result<Vec<f64>> {
    let x = boltzmann_ratio(omega, temperature)?;
    let nbar = 1.0 / x.exp_m1();
    Ok((0..=n_max)
        .map(|n| x * (n as f64 - nbar) / temperature)
        .collect())
}

/// T²F_C of the Fock-number measurement truncated at n_max, with the tail
/// n > n_max merged into a single outcome. Converges to
/// [`qfi_thermal_dimensionless`] from below as n_max grows.
pub fn fock_basis_cfi_dimensionless(x: f64, n_max: usize) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("x must be > 0, got {x}")));
    }
    let q = (-x).exp();
    let mut probs = Vec::with_capacity(n_max + 2);
    let mut derivs = Vec::with_capacity(n_max + 2);
    let mut p = 1.0 - q;
    for n in 0..=n_max {
        probs.push(p);
        derivs.push(thermal_weight_dt(n, x)?);
        p *= q;
    }
    probs.push(q.powi(n_max as i32 + 1)); // tail mass
    derivs.push(thermal_tail_dt(n_max, x)?);
    classical_fisher(&probs, &derivs)
}

/// Dicke-level populations after the sweep: P_l = Σ_n w_n R[l][n], with the
/// (perfectly transferred) tail mass assigned to the top level l = 2S.
pub fn final_dicke_populations(
    response: &DickeResponse,
    dist: &MotionDistribution,
) -> Result<Vec<f64>> {
    dist.validate()?;
    if dist.n_max() > response.n_max() {
        return Err(Error::cutoff(format!(
            "distribution extends to n = {} but the response only covers n ≤ {}",
            dist.n_max(),
            response.n_max()
        )));
    }
    let levels = response.num_levels();
    let mut pops = vec![0.0; levels];
    for (n, &w) in dist.weights.iter().enumerate() {
        for (l, p) in pops.iter_mut().enumerate() {
            *p += w * response.entry(l, n);
        }
    }
    pops[levels - 1] += dist.tail_mass;
    Ok(pops)
}

/// T·∂_T of the final Dicke populations for a thermal input, propagated
/// through the response matrix with the tail derivative routed to l = 2S.
/// Exact in T (the response does not depend on temperature).
pub fn thermal_population_derivs(
    response: &DickeResponse,
    dist: &MotionDistribution,
    x: f64,
) -> Result<Vec<f64>> {
    match dist.kind {
        MotionKind::Thermal { .. } => {}
        _ => {
            return Err(Error::domain(
                "temperature derivatives are defined for thermal distributions only",
            ))
        }
    }
    if dist.n_max() > response.n_max() {
        return Err(Error::cutoff(format!(
            "distribution extends to n = {} but the response only covers n ≤ {}",
            dist.n_max(),
            response.n_max()
        )));
    }
    let levels = response.num_levels();
    let mut derivs = vec![0.0; levels];
    for n in 0..=dist.n_max() {
        let dw = thermal_weight_dt(n, x)?;
        for (l, d) in derivs.iter_mut().enumerate() {
            *d += dw * response.entry(l, n);
        }
    }
    derivs[levels - 1] += thermal_tail_dt(dist.n_max(), x)?;
    Ok(derivs)
}

/// T²F_C of the Dicke-level measurement for a thermal input.
pub fn thermal_cfi_dimensionless(
    response: &DickeResponse,
    dist: &MotionDistribution,
    x: f64,
) -> Result<f64> {
    let pops = final_dicke_populations(response, dist)?;
    let derivs = thermal_population_derivs(response, dist, x)?;
    classical_fisher(&pops, &derivs)
}

/// ⟨Ŝz⟩ of a Dicke-level distribution.
pub fn expected_sz(spin: Spin, populations: &[f64]) -> Result<f64> {
    moments_sz(spin, populations).map(|(mean, _)| mean)
}

/// Var(Ŝz) of a Dicke-level distribution.
pub fn variance_sz(spin: Spin, populations: &[f64]) -> Result<f64> {
    moments_sz(spin, populations).map(|(_, var)| var)
}

fn moments_sz(spin: Spin, populations: &[f64]) -> Result<(f64, f64)> {
    if populations.len() != spin.num_levels() {
        return Err(Error::domain(format!(
            "expected {} level populations, got {}",
            spin.num_levels(),
            populations.len()
        )));
    }
    let mut mean = 0.0;
    let mut second = 0.0;
    for (l, &p) in populations.iter().enumerate() {
        let sz = sz_eigenvalue(spin, l)?;
        mean += p * sz;
        second += p * sz * sz;
    }
    Ok((mean, (second - mean * mean).max(0.0)))
}

/// Error-propagation Fisher information of the first-moment estimator,
/// (∂⟨Ŝz⟩)²/Var(Ŝz); `None` when the variance vanishes (no signal scale).
pub fn moment_fisher(dsz: f64, var: f64) -> Option<f64> {
    if var < 1e-30 {
        None
    } else {
        Some(dsz * dsz / var)
    }
}

/// Moment-estimator sensitivity along a sweep: second-order finite-difference
/// derivative of the signal curve against the grid, squared and divided by
/// the variance. Points with vanishing variance are reported as absent.
/// Endpoints use one-sided second-order stencils; the grid may be non-uniform
/// but must be strictly monotone with at least three points.
pub fn moment_sensitivity(
    signal: &[f64],
    variance: &[f64],
    grid: &[f64],
) -> Result<Vec<Option<f64>>> {
    let n = grid.len();
    if signal.len() != n || variance.len() != n {
        return Err(Error::domain("signal/variance/grid lengths differ"));
    }
    if n < 3 {
        return Err(Error::domain(
            "need at least three grid points for second-order derivatives",
        ));
    }
    let increasing = grid[1] > grid[0];
    for w in grid.windows(2) {
        if (w[1] > w[0]) != increasing || w[1] == w[0] {
            return Err(Error::domain("grid must be strictly monotone"));
        }
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // three-point Lagrange derivative centred as far as the edges allow
        let j = i.clamp(1, n - 2);
        let (x0, x1, x2) = (grid[j - 1], grid[j], grid[j + 1]);
        let (f0, f1, f2) = (signal[j - 1], signal[j], signal[j + 1]);
        let xi = grid[i];
        let d = f0 * (2.0 * xi - x1 - x2) / ((x0 - x1) * (x0 - x2))
            + f1 * (2.0 * xi - x0 - x2) / ((x1 - x0) * (x1 - x2))
            + f2 * (2.0 * xi - x0 - x1) / ((x2 - x0) * (x2 - x1));
        out.push(moment_fisher(d, variance[i]));
    }
    Ok(out)
}

/// T²F of the ⟨Ŝz⟩ moment estimator for a thermal input through the response,
/// using the exact derivative chain rather than grid differencing.
pub fn thermal_moment_fisher_dimensionless(
    response: &DickeResponse,
    dist: &MotionDistribution,
    x: f64,
) -> Result<Option<f64>> {
    let spin = response.spin();
    let pops = final_dicke_populations(response, dist)?;
    let derivs = thermal_population_derivs(response, dist, x)?;
    let var = variance_sz(spin, &pops)?;
    let mut dsz = 0.0;
    for (l, &d) in derivs.iter().enumerate() {
        dsz += d * sz_eigenvalue(spin, l)?;
    }
    Ok(moment_fisher(dsz, var))
}

/// |⟨a|b⟩|² between two sector states (same sector required).
pub fn state_overlap(a: &SectorState, b: &SectorState) -> Result<f64> {
    if a.sector != b.sector || a.amplitudes.len() != b.amplitudes.len() {
        return Err(Error::domain(format!(
            "states live in different sectors: {} vs {}",
            a.sector, b.sector
        )));
    }
    let ip = a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>();
    Ok(ip.norm_sqr())
}

/// Normalized-overlap fidelity Tr(ρ₁ρ₂)/√(Tr ρ₁² · Tr ρ₂²) for two states
/// diagonal in the same basis: the cosine similarity of their weight vectors.
pub fn state_fidelity_diagonal(w1: &[f64], w2: &[f64]) -> Result<f64> {
    if w1.len() != w2.len() {
        return Err(Error::domain("weight vectors differ in length"));
    }
    let dot: f64 = w1.iter().zip(w2).map(|(a, b)| a * b).sum();
    let p1: f64 = w1.iter().map(|a| a * a).sum();
    let p2: f64 = w2.iter().map(|a| a * a).sum();
    if p1 <= 0.0 || p2 <= 0.0 {
        return Err(Error::domain("state with zero purity"));
    }
    Ok(dot / (p1 * p2).sqrt())
}

/// Normalized-overlap fidelity for dense Hermitian density matrices on the
/// same truncated space.
pub fn state_fidelity_dense(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Result<f64> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::domain("density matrices must share a square shape"));
    }
    let overlap = trace_product(a, b);
    let p1 = trace_product(a, a);
    let p2 = trace_product(b, b);
    if p1 <= 0.0 || p2 <= 0.0 {
        return Err(Error::domain("state with zero purity"));
    }
    Ok(overlap / (p1 * p2).sqrt())
}

fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc.re
}

/// Normalized-overlap fidelity between the swept mixed state and the ideal
/// map |D₀⟩|n⟩ → |D_min(n,2S)⟩. Sector orthogonality and per-sector purity
/// reduce it to Σ_n w_n² R[min(n,2S)][n] / Σ_n w_n² (both purities coincide).
///
/// For thermal inputs the tail Σ_{n>n_max} w_n² enters both sums in closed
/// form with the tail treated as perfectly transferred; for other inputs the
/// tail contribution is below tail_mass² and is dropped.
pub fn transfer_fidelity(response: &DickeResponse, dist: &MotionDistribution) -> Result<f64> {
    if dist.n_max() > response.n_max() {
        return Err(Error::cutoff(format!(
            "distribution extends to n = {} but the response only covers n ≤ {}",
            dist.n_max(),
            response.n_max()
        )));
    }
    let top = response.num_levels() - 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for (n, &w) in dist.weights.iter().enumerate() {
        let w2 = w * w;
        num += w2 * response.entry(n.min(top), n);
        den += w2;
    }
    let tail_sq = match dist.kind {
        MotionKind::Thermal { nbar } => {
            // Σ_{n>N} (1−q)² q^{2n} = (1−q)² q^{2(N+1)} / (1−q²)
            let q = nbar / (1.0 + nbar);
            let one_minus_q = 1.0 / (1.0 + nbar);
            one_minus_q * one_minus_q * q.powi(2 * (dist.n_max() as i32 + 1)) / (1.0 - q * q)
        }
        _ => 0.0,
    };
    num += tail_sq;
    den += tail_sq;
    if den <= 0.0 {
        return Err(Error::domain("distribution has no probability mass"));
    }
    Ok(num / den)
}

/// Splits every Dicke level l into its binomial(N, l) underlying spin
/// configurations with equal shares and evaluates the classical Fisher
/// information at both granularities. Uniform cell splitting leaves the sum
/// invariant, so the two values agree analytically.
pub fn config_level_fisher_equivalence(
    populations: &[f64],
    derivs: &[f64],
    num_ions: u32,
) -> Result<(f64, f64)> {
    let spin = Spin::from_ion_count(num_ions)?;
    if populations.len() != spin.num_levels() {
        return Err(Error::domain(format!(
            "expected {} level populations for N = {num_ions}, got {}",
            spin.num_levels(),
            populations.len()
        )));
    }
    let f_dicke = classical_fisher(populations, derivs)?;
    let mut cfg_probs = Vec::new();
    let mut cfg_derivs = Vec::new();
    for (l, (&p, &dp)) in populations.iter().zip(derivs).enumerate() {
        let cells = binomial(num_ions as u128, l as u128) as f64;
        for _ in 0..cells as usize {
            cfg_probs.push(p / cells);
            cfg_derivs.push(dp / cells);
        }
    }
    let f_config = classical_fisher(&cfg_probs, &cfg_derivs)?;
    Ok((f_config, f_dicke))
}

/// Mean and variance of Ŝz under the ideal map, by direct summation over the
/// distribution (tail mass lands on the top level, contributing +S exactly).
pub fn perfect_transfer_moments(spin: Spin, dist: &MotionDistribution) -> Result<(f64, f64)> {
    let s = spin.value();
    let top = spin.max_level();
    let mut mean = 0.0;
    let mut second = 0.0;
    for (n, &w) in dist.weights.iter().enumerate() {
        let sz = -s + n.min(top) as f64;
        mean += w * sz;
        second += w * sz * sz;
    }
    mean += dist.tail_mass * s;
    second += dist.tail_mass * s * s;
    Ok((mean, (second - mean * mean).max(0.0)))
}

/// Closed form for the perfect-transfer mean of a thermal input:
/// ⟨Ŝz⟩ = n̄ − S − (1 + n̄) q^{2S+1}, q = n̄/(1+n̄). Matches direct summation
/// to rounding for every S and n̄ (see tests).
pub fn sz_mean_thermal_closed_form(spin: Spin, nbar: f64) -> f64 {
    let q = nbar / (1.0 + nbar);
    nbar - spin.value() - (1.0 + nbar) * q.powi(spin.max_level() as i32 + 1)
}

/// Alternative closed-form candidate ⟨Ŝz⟩ = n̄ − S − q^{2S+1}(n̄ + S + 1).
/// Differs from [`sz_mean_thermal_closed_form`] by S·q^{2S+1}, which is
/// visible for small ladders. Computed for comparison output only; the
/// direct-summation oracle arbitrates.
pub fn sz_mean_alt_closed_form(spin: Spin, nbar: f64) -> f64 {
    let q = nbar / (1.0 + nbar);
    nbar - spin.value() - q.powi(spin.max_level() as i32 + 1) * (nbar + spin.value() + 1.0)
}

/// Alternative closed-form candidate for the perfect-transfer variance,
/// n̄(1+n̄) − q^{4S+2}(1+S+n̄)² − q^{2S+1}[1+n̄+S(4+3S+2n̄)]. Like
/// [`sz_mean_alt_closed_form`] it disagrees with direct summation for small
/// ladders (S = 1/2, n̄ = 1: 0.171875 vs the exact 0.25) and is reported for
/// comparison only.
pub fn sz_var_alt_closed_form(spin: Spin, nbar: f64) -> f64 {
    let s = spin.value();
    let q = nbar / (1.0 + nbar);
    let q2s1 = q.powi(spin.max_level() as i32 + 1);
    nbar * (1.0 + nbar)
        - q2s1 * q2s1 * (1.0 + s + nbar) * (1.0 + s + nbar)
        - q2s1 * (1.0 + nbar + s * (4.0 + 3.0 * s + 2.0 * nbar))
}
