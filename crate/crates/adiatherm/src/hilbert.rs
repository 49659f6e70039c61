//! Excitation-sector bases and matrix elements of the collective spin-boson
//! coupling.
//!
//! A crystal of N two-level ions is treated as one pseudospin S = N/2 living in
//! the permutation-symmetric (Dicke) ladder |D_0⟩ … |D_2S⟩, where |D_l⟩ carries
//! l spin excitations and Sz|D_l⟩ = (−S + l)|D_l⟩. The red-sideband exchange
//! S₊F(n̂)a + S₋a†F(n̂) conserves M = l + n, so the joint spin-phonon space
//! splits into sectors of dimension min(M, 2S) + 1. This module builds those
//! bases and the scalar matrix elements everything else is assembled from.

use crate::error::{Error, Result};

/// Half-integer collective spin, stored as 2S to keep arithmetic exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    /// Collective spin of `n` two-level ions: S = n/2.
    pub fn from_ion_count(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("ion count must be at least 1"));
        }
        Ok(Spin { twice: n })
    }

    /// Construct from 2S directly.
    pub fn from_twice(twice: u32) -> Self {
        Spin { twice }
    }

    /// 2S as an integer.
    pub fn twice(self) -> u32 {
        self.twice
    }

    /// S as a float (exact: S is a multiple of 1/2).
    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    /// Highest Dicke index, 2S.
    pub fn max_level(self) -> usize {
        self.twice as usize
    }

    /// Number of Dicke levels, 2S + 1.
    pub fn num_levels(self) -> usize {
        self.twice as usize + 1
    }
}

/// Which spin-phonon coupling to use: the bare exchange or the one dressed by
/// the Lamb-Dicke factor F(n̂).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JcModel {
    LinearJC,
    NonlinearJC,
}

/// Static system parameters: ion count, Lamb-Dicke parameter, trap mode
/// frequencies (angular, rad/s) and the coupling model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub num_ions: u32,
    pub lamb_dicke: f64,
    /// Radial (center-of-mass) mode frequency ω_x in rad/s.
    pub mode_freq: f64,
    /// Axial frequency ω_z in rad/s, when known; must satisfy ω_z < ω_x.
    pub axial_freq: Option<f64>,
    pub model: JcModel,
}

impl PhysicalParams {
    pub fn new(num_ions: u32, lamb_dicke: f64, mode_freq: f64, model: JcModel) -> Result<Self> {
        if num_ions == 0 {
            return Err(Error::domain("num_ions must be at least 1"));
        }
        if !(lamb_dicke >= 0.0) {
            return Err(Error::domain(format!(
                "lamb_dicke must be >= 0, got {lamb_dicke}"
            )));
        }
        if !(mode_freq > 0.0) {
            return Err(Error::domain(format!(
                "mode_freq must be > 0, got {mode_freq}"
            )));
        }
        Ok(PhysicalParams {
            num_ions,
            lamb_dicke,
            mode_freq,
            axial_freq: None,
            model,
        })
    }

    pub fn with_axial_freq(mut self, axial_freq: f64) -> Result<Self> {
        if !(axial_freq > 0.0 && axial_freq < self.mode_freq) {
            return Err(Error::domain(format!(
                "axial_freq must satisfy 0 < omega_z < omega_x, got {axial_freq}"
            )));
        }
        self.axial_freq = Some(axial_freq);
        Ok(self)
    }

    pub fn spin(&self) -> Spin {
        Spin { twice: self.num_ions }
    }
}

/// Basis of one total-excitation sector: all (l, n) with l + n = M, ordered by
/// ascending Dicke index l.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    pub total_excitations: usize,
    /// (spin_level l, phonon_number n) pairs, l ascending.
    pub entries: Vec<(usize, usize)>,
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }
}

/// Dicke level together with its permutation degeneracy binomial(N, l).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DickeLevel {
    pub level: usize,
    pub degeneracy: u128,
}

impl DickeLevel {
    pub fn new(num_ions: u32, level: usize) -> Result<Self> {
        if level > num_ions as usize {
            return Err(Error::domain(format!(
                "Dicke level {level} exceeds 2S = {num_ions}"
            )));
        }
        Ok(DickeLevel {
            level,
            degeneracy: binomial(num_ions as u128, level as u128),
        })
    }
}

/// Exact binomial coefficient; fine for the ion counts this crate targets.
pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Basis of the sector with M total excitations: dimension min(M, 2S) + 1.
pub fn sector_basis(spin: Spin, m: usize) -> SectorBasis {
    let l_top = m.min(spin.max_level());
    let entries = (0..=l_top).map(|l| (l, m - l)).collect();
    SectorBasis {
        total_excitations: m,
        entries,
    }
}

/// Sz eigenvalue of |D_l⟩: −S + l.
pub fn sz_eigenvalue(spin: Spin, l: usize) -> Result<f64> {
    if l > spin.max_level() {
        return Err(Error::domain(format!(
            "Dicke index l = {l} out of range [0, {}]",
            spin.max_level()
        )));
    }
    // (−S + l) = (2l − 2S)/2, exact in f64 for any sane ion count.
    Ok((2.0 * l as f64 - f64::from(spin.twice())) / 2.0)
}

/// Collective raising amplitude ⟨D_{l+1}|S₊|D_l⟩ = √((l+1)(2S−l)).
pub fn ladder_element(spin: Spin, l: usize) -> Result<f64> {
    let two_s = spin.max_level();
    if l >= two_s {
        return Err(Error::domain(format!(
            "ladder element needs l <= 2S-1, got l = {l}, 2S = {two_s}"
        )));
    }
    Ok((((l + 1) * (two_s - l)) as f64).sqrt())
}

/// Diagonal Lamb-Dicke factor f_n = ⟨n|F(n̂)|n⟩ evaluated by its finite series
///
/// ```text
/// f_n = e^{−η²/2} Σ_{k=0}^{n} (−η²)^k/(k!(k+1)!) · n!/(n−k)!
/// ```
///
/// Terms are accumulated multiplicatively (term_k = term_{k−1}·(−η²)(n−k+1)/(k(k+1)))
/// so no factorial ever materializes. Equals e^{−η²/2} L_n⁽¹⁾(η²)/(n+1), which
/// the tests check via an independent Laguerre recurrence.
pub fn nonlinear_factor(n: usize, eta: f64) -> f64 {
    let x = eta * eta;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=n {
        term *= -x * ((n - k + 1) as f64) / ((k * (k + 1)) as f64);
        sum += term;
    }
    (-x / 2.0).exp() * sum
}

/// Off-diagonal sector coupling ⟨l+1, n_lower|S₊F(n̂)a|l, n_lower+1⟩ in units
/// of λ(t): ladder × √(n_lower+1), dressed by f_{n_lower} for the nonlinear
/// model. LinearJC ignores η entirely.
pub fn coupling_element(params: &PhysicalParams, l: usize, n_lower: usize) -> Result<f64> {
    let ladder = ladder_element(params.spin(), l)?;
    let bose = ((n_lower + 1) as f64).sqrt();
    let g = match params.model {
        JcModel::LinearJC => 1.0,
        JcModel::NonlinearJC => nonlinear_factor(n_lower, params.lamb_dicke),
    };
    Ok(ladder * bose * g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(n: u32, eta: f64, model: JcModel) -> PhysicalParams {
        PhysicalParams::new(n, eta, 2.0 * std::f64::consts::PI * 6.0e6, model).unwrap()
    }

    /// Independent oracle: associated Laguerre L_n^(α)(x) by the three-term
    /// recurrence k L_k = (2k−1+α−x) L_{k−1} − (k−1+α) L_{k−2}.
    fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
        let mut lm2 = 1.0;
        let mut lm1 = 1.0 + alpha - x;
        match n {
            0 => lm2,
            1 => lm1,
            _ => {
                let mut l = 0.0;
                for k in 2..=n {
                    let kf = k as f64;
                    l = ((2.0 * kf - 1.0 + alpha - x) * lm1 - (kf - 1.0 + alpha) * lm2) / kf;
                    lm2 = lm1;
                    lm1 = l;
                }
                l
            }
        }
    }

    #[test]
    fn sector_basis_ground() {
        let b = sector_basis(Spin::from_twice(2), 0);
        assert_eq!(b.entries, vec![(0, 0)]);
    }

    #[test]
    fn sector_basis_uncapped() {
        // S = 3/2, M = 3: all four levels reachable
        let b = sector_basis(Spin::from_twice(3), 3);
        assert_eq!(b.entries, vec![(0, 3), (1, 2), (2, 1), (3, 0)]);
        assert_eq!(b.dim(), 4);
    }

    #[test]
    fn sector_basis_capped_at_two_s() {
        // S = 1, M = 5: spin saturates at l = 2
        let b = sector_basis(Spin::from_twice(2), 5);
        assert_eq!(b.entries, vec![(0, 5), (1, 4), (2, 3)]);
    }

    #[test]
    fn sz_eigenvalues() {
        let s3 = Spin::from_twice(6);
        assert_eq!(sz_eigenvalue(s3, 0).unwrap(), -3.0);
        assert_eq!(sz_eigenvalue(s3, 6).unwrap(), 3.0);
        assert_eq!(sz_eigenvalue(Spin::from_twice(1), 1).unwrap(), 0.5);
        assert!(sz_eigenvalue(s3, 7).is_err());
    }

    #[test]
    fn ladder_elements() {
        assert_eq!(ladder_element(Spin::from_twice(1), 0).unwrap(), 1.0);
        let s1 = Spin::from_twice(2);
        assert_relative_eq!(ladder_element(s1, 0).unwrap(), 2f64.sqrt());
        assert_relative_eq!(ladder_element(s1, 1).unwrap(), 2f64.sqrt());
        assert!(ladder_element(s1, 2).is_err(), "l = 2S has no higher level");
    }

    #[test]
    fn nonlinear_factor_vacuum_and_linear_limit() {
        assert_relative_eq!(nonlinear_factor(0, 0.2), (-0.02f64).exp());
        for n in 0..60 {
            assert_eq!(nonlinear_factor(n, 0.0), 1.0, "eta = 0 must be exact");
        }
    }

    #[test]
    fn nonlinear_factor_first_excited() {
        // e^{−0.02} (1 − 0.02), frozen from direct series evaluation
        let f1 = nonlinear_factor(1, 0.2);
        assert_relative_eq!(f1, (-0.02f64).exp() * 0.98, max_relative = 1e-15);
        assert_relative_eq!(f1, 0.9605946998406202, max_relative = 1e-14);
    }

    #[test]
    fn nonlinear_factor_near_identity_for_tiny_eta() {
        for n in 0..=50 {
            let f = nonlinear_factor(n, 1e-6);
            assert!((f - 1.0).abs() < 1e-9, "f_{n}(1e-6) = {f}");
        }
    }

    #[test]
    fn nonlinear_factor_matches_laguerre_closed_form() {
        // f_n = e^{−x/2} L_n^{(1)}(x)/(n+1), x = η². The comparison is relative
        // to the natural O(1) scale because f_n passes through zeros of L_n^{(1)}.
        for n in 0..=100usize {
            for &eta in &[0.05, 0.1, 0.2, 0.3, 0.4, 0.5] {
                let x = eta * eta;
                let series = nonlinear_factor(n, eta);
                let closed = (-x / 2.0).exp() * laguerre(n, 1.0, x) / (n as f64 + 1.0);
                let scale = series.abs().max(closed.abs()).max(1.0);
                assert!(
                    (series - closed).abs() <= 1e-12 * scale,
                    "n={n} eta={eta}: series {series} vs laguerre {closed}"
                );
            }
        }
    }

    #[test]
    fn coupling_elements() {
        let lin = params(2, 0.0, JcModel::LinearJC);
        assert_relative_eq!(coupling_element(&lin, 0, 0).unwrap(), 2f64.sqrt());
        let half = params(1, 0.0, JcModel::LinearJC);
        assert_relative_eq!(coupling_element(&half, 0, 3).unwrap(), 2.0);
        let nl = params(1, 0.2, JcModel::NonlinearJC);
        assert_relative_eq!(
            coupling_element(&nl, 0, 0).unwrap(),
            (-0.02f64).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn linear_coupling_ignores_eta_bitwise() {
        for &eta in &[0.0, 0.1, 0.2, 0.77] {
            let p = params(4, eta, JcModel::LinearJC);
            let c = coupling_element(&p, 1, 2).unwrap();
            let c0 = coupling_element(&params(4, 0.0, JcModel::LinearJC), 1, 2).unwrap();
            assert_eq!(c.to_bits(), c0.to_bits());
        }
    }

    #[test]
    fn degeneracies_sum_to_two_pow_n() {
        for n in 1..=20u32 {
            let total: u128 = (0..=n as usize)
                .map(|l| DickeLevel::new(n, l).unwrap().degeneracy)
                .sum();
            assert_eq!(total, 1u128 << n, "N = {n}");
        }
    }

    #[test]
    fn params_validation() {
        assert!(PhysicalParams::new(0, 0.1, 1.0, JcModel::LinearJC).is_err());
        assert!(PhysicalParams::new(2, -0.1, 1.0, JcModel::LinearJC).is_err());
        let p = params(2, 0.1, JcModel::LinearJC);
        assert!(p.with_axial_freq(p.mode_freq * 1.5).is_err());
    }

    proptest! {
        #[test]
        fn sector_basis_invariants(twice_s in 1u32..=16, m in 0usize..=40) {
            let spin = Spin::from_twice(twice_s);
            let b = sector_basis(spin, m);
            prop_assert_eq!(b.dim(), m.min(spin.max_level()) + 1);
            for (i, &(l, n)) in b.entries.iter().enumerate() {
                prop_assert_eq!(l, i);
                prop_assert_eq!(l + n, m);
            }
        }

        #[test]
        fn ladder_symmetric_under_reflection(twice_s in 1u32..=16) {
            // √((l+1)(2S−l)) is symmetric under l ↔ 2S−1−l
            let spin = Spin::from_twice(twice_s);
            let two_s = spin.max_level();
            for l in 0..two_s {
                let a = ladder_element(spin, l).unwrap();
                let b = ladder_element(spin, two_s - 1 - l).unwrap();
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
