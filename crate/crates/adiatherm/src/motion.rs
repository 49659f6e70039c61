//! Fock-basis distributions of the vibrational mode (thermal, coherent,
//! Schrödinger-cat) with automatic cutoff selection and the analytic parameter
//! derivatives needed for Fisher-information chains.
//!
//! Temperature is carried internally as the dimensionless x = ħω/(k_B T); the
//! geometric thermal distribution then has ratio q = e^{−x} and the derivative
//! T·∂_T acts as −x·∂_x, which keeps every expression overflow-free at large x.
//!
//! Only the weights |c_n|² of an initial state are propagated, never inter-Fock
//! coherences: the exchange coupling conserves total excitations, so coherences
//! between different Fock states live in orthogonal sectors and cannot reach any
//! definite-excitation population. The full-space oracle test in `dynamics`
//! checks this against an actual coherent-state evolution.

use crate::constants::{HBAR, KB};
use crate::error::{Error, Result};

/// Which family a distribution belongs to, with its defining parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotionKind {
    Thermal { nbar: f64 },
    Coherent { alpha: f64 },
    /// (e^{iθ}|α⟩ + e^{−iθ}|−α⟩)/√(2𝒩’); θ = α·ε for a weak probe force ε.
    Cat { alpha: f64, theta: f64 },
}

/// Truncated Fock-weight list p_0…p_{n_max} plus the mass left beyond the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionDistribution {
    pub kind: MotionKind,
    pub weights: Vec<f64>,
    pub tail_mass: f64,
    pub tail_tol: f64,
}

impl MotionDistribution {
    pub fn n_max(&self) -> usize {
        self.weights.len() - 1
    }

    /// Rebuild with the cutoff raised to at least `min_n_max` (the protocol
    /// needs n_max ≥ 2S + 4 so the saturation channel at l = 2S is visible).
    pub fn extended(&self, min_n_max: usize) -> Result<MotionDistribution> {
        if self.n_max() >= min_n_max {
            return Ok(self.clone());
        }
        match self.kind {
            MotionKind::Thermal { nbar } => thermal_weights_floored(nbar, self.tail_tol, min_n_max),
            MotionKind::Coherent { alpha } => {
                coherent_weights_floored(alpha, self.tail_tol, min_n_max)
            }
            MotionKind::Cat { alpha, theta } => {
                cat_weights_floored(alpha, theta, self.tail_tol, min_n_max)
            }
        }
    }

    /// Check the distribution invariants (used by tests and the protocol layer).
    pub fn validate(&self) -> Result<()> {
        if self.weights.iter().any(|&p| p < 0.0) {
            return Err(Error::domain("negative weight in motion distribution"));
        }
        let total: f64 = self.weights.iter().sum::<f64>() + self.tail_mass;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::cutoff(format!(
                "weights + tail deviate from 1 by {:.3e}",
                total - 1.0
            )));
        }
        if self.tail_mass > self.tail_tol {
            return Err(Error::cutoff(format!(
                "tail mass {:.3e} exceeds tolerance {:.3e}",
                self.tail_mass, self.tail_tol
            )));
        }
        Ok(())
    }
}

/// A temperature expressed three equivalent ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperaturePoint {
    /// ħω/(k_B T).
    pub x: f64,
    /// Kelvin.
    pub temperature: f64,
    /// Mean occupation 1/(e^x − 1).
    pub nbar: f64,
}

fn check_tail_tol(tail_tol: f64) -> Result<()> {
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::domain(format!(
            "tail_tol must lie in (0, 1), got {tail_tol}"
        )));
    }
    Ok(())
}

/// Geometric thermal weights p_n = n̄^n/(1+n̄)^{n+1}, cut off at the smallest
/// n_max with analytic tail q^{n_max+1} ≤ tail_tol (q = n̄/(1+n̄)).
pub fn thermal_weights(nbar: f64, tail_tol: f64) -> Result<MotionDistribution> {
    thermal_weights_floored(nbar, tail_tol, 0)
}

fn thermal_weights_floored(nbar: f64, tail_tol: f64, floor: usize) -> Result<MotionDistribution> {
    if !(nbar > 0.0) {
        return Err(Error::domain(format!("nbar must be > 0, got {nbar}")));
    }
    check_tail_tol(tail_tol)?;
    let q = nbar / (1.0 + nbar);
    // smallest m with q^{m+1} <= tol
    let n_max = ((tail_tol.ln() / q.ln()).ceil() as isize - 1).max(0) as usize;
    let n_max = n_max.max(floor);
    let mut weights = Vec::with_capacity(n_max + 1);
    let mut p = 1.0 - q;
    for _ in 0..=n_max {
        weights.push(p);
        p *= q;
    }
    Ok(MotionDistribution {
        kind: MotionKind::Thermal { nbar },
        weights,
        tail_mass: q.powi(n_max as i32 + 1),
        tail_tol,
    })
}

/// Dimensionless temperature derivative T·∂_T p_n of the thermal weight at
/// x = ħω/(k_B T). With q = e^{−x} this is x·q^n·(n(1−q) − q), identical to the
/// chain rule (dp_n/dn̄)·x e^x n̄² through n̄(T); tests check it against central
/// finite differences.
pub fn thermal_weight_dt(n: usize, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("x must be > 0, got {x}")));
    }
    let q = (-x).exp();
    Ok(x * q.powi(n as i32) * (n as f64 * (1.0 - q) - q))
}

/// Dimensionless T·∂_T of the tail mass Σ_{n > n_max} p_n = q^{n_max+1}:
/// equals (n_max+1)·x·q^{n_max+1}.
pub fn thermal_tail_dt(n_max: usize, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("x must be > 0, got {x}")));
    }
    let m = n_max as i32 + 1;
    Ok(f64::from(m) * x * (-x).exp().powi(m))
}

/// Poisson weights p_n = e^{−α²} α^{2n}/n! of a coherent state |α⟩.
pub fn coherent_weights(alpha: f64, tail_tol: f64) -> Result<MotionDistribution> {
    coherent_weights_floored(alpha, tail_tol, 0)
}

fn coherent_weights_floored(alpha: f64, tail_tol: f64, floor: usize) -> Result<MotionDistribution> {
    if !(alpha >= 0.0) {
        return Err(Error::domain(format!("alpha must be >= 0, got {alpha}")));
    }
    check_tail_tol(tail_tol)?;
    let mean = alpha * alpha;
    let mut weights = Vec::new();
    let mut p = (-mean).exp();
    let mut cum = 0.0;
    let mut n = 0usize;
    loop {
        weights.push(p);
        cum += p;
        if (1.0 - cum <= tail_tol && n >= floor) || n > 500_000 {
            break;
        }
        n += 1;
        p *= mean / n as f64;
    }
    Ok(MotionDistribution {
        kind: MotionKind::Coherent { alpha },
        weights,
        tail_mass: (1.0 - cum).max(0.0),
        tail_tol,
    })
}

/// Normalization 𝒩 = ⟨ψ_cat|ψ_cat⟩/…  of (e^{iθ}|α⟩ + e^{−iθ}|−α⟩)/√2:
/// 𝒩 = 1 + cos(2θ)·e^{−2α²}, from ⟨α|−α⟩ = e^{−2α²} for real α.
fn cat_norm(alpha: f64, theta: f64) -> f64 {
    1.0 + (2.0 * theta).cos() * (-2.0 * alpha * alpha).exp()
}

/// Cat-state weights p_n = [1 + (−1)^n cos 2θ]·e^{−α²}α^{2n}/n! / 𝒩.
pub fn cat_weights(alpha: f64, theta: f64, tail_tol: f64) -> Result<MotionDistribution> {
    cat_weights_floored(alpha, theta, tail_tol, 0)
}

fn cat_weights_floored(
    alpha: f64,
    theta: f64,
    tail_tol: f64,
    floor: usize,
) -> Result<MotionDistribution> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("cat alpha must be > 0, got {alpha}")));
    }
    check_tail_tol(tail_tol)?;
    let norm = cat_norm(alpha, theta);
    assert!(norm > 0.0, "cat normalization must be positive for alpha > 0");
    let c2 = (2.0 * theta).cos();
    let mean = alpha * alpha;
    let mut weights = Vec::new();
    let mut g = (-mean).exp(); // bare Poisson weight
    let mut cum = 0.0;
    let mut sign = 1.0;
    let mut n = 0usize;
    loop {
        let p = g * (1.0 + sign * c2) / norm;
        weights.push(p);
        cum += p;
        if (1.0 - cum <= tail_tol && n >= floor) || n > 500_000 {
            break;
        }
        n += 1;
        g *= mean / n as f64;
        sign = -sign;
    }
    Ok(MotionDistribution {
        kind: MotionKind::Cat { alpha, theta },
        weights,
        tail_mass: (1.0 - cum).max(0.0),
        tail_tol,
    })
}

/// Analytic probe-force derivative ∂_ε p_n of the cat weight at θ = αε,
/// via ∂_ε = α·∂_θ applied to both the parity factor and the normalization:
///
/// ```text
/// ∂_θ p_n = −2 sin 2θ · g_n [(−1)^n 𝒩 − (1 + (−1)^n cos 2θ) e^{−2α²}] / 𝒩²
/// ```
pub fn cat_weight_deps(alpha: f64, epsilon: f64, n: usize) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("cat alpha must be > 0, got {alpha}")));
    }
    let theta = alpha * epsilon;
    let norm = cat_norm(alpha, theta);
    let c2 = (2.0 * theta).cos();
    let s2 = (2.0 * theta).sin();
    let overlap = (-2.0 * alpha * alpha).exp();
    let mean = alpha * alpha;
    let mut g = (-mean).exp();
    for k in 1..=n {
        g *= mean / k as f64;
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let dtheta = -2.0 * s2 * g * (sign * norm - (1.0 + sign * c2) * overlap) / (norm * norm);
    Ok(alpha * dtheta)
}

/// Convert a lab temperature to (x, T, n̄) for mode frequency ω (rad/s).
pub fn nbar_from_temperature(omega: f64, temperature: f64) -> Result<TemperaturePoint> {
    if !(omega > 0.0) {
        return Err(Error::domain(format!("omega must be > 0, got {omega}")));
    }
    if !(temperature > 0.0) {
        return Err(Error::domain(format!(
            "temperature must be > 0, got {temperature}"
        )));
    }
    let x = HBAR * omega / (KB * temperature);
    let q = (-x).exp();
    Ok(TemperaturePoint {
        x,
        temperature,
        nbar: q / (1.0 - q),
    })
}

/// Inverse of [`nbar_from_temperature`]: x = ln(1 + 1/n̄), T = ħω/(k_B x).
pub fn temperature_from_nbar(omega: f64, nbar: f64) -> Result<TemperaturePoint> {
    if !(omega > 0.0) {
        return Err(Error::domain(format!("omega must be > 0, got {omega}")));
    }
    if !(nbar > 0.0) {
        return Err(Error::domain(format!("nbar must be > 0, got {nbar}")));
    }
    let x = (1.0 / nbar).ln_1p();
    Ok(TemperaturePoint {
        x,
        temperature: HBAR * omega / (KB * x),
        nbar,
    })
}
