//! Acceptance gate: nine numbered criteria covering the headline physics
//! claims, the engine cross-checks, and the end-to-end harness. Each test
//! prints a single PASS line with the measured values; a failure panics with
//! the measured value in the message.

use adiatherm::dynamics::{
    default_steps, dicke_response, dicke_response_traced, evolve_full_oracle_traced,
    evolve_sector, DickeResponse, FullState, Schedule,
};
use adiatherm::metrology;
use adiatherm::motion::{coherent_weights, thermal_weights};
use adiatherm::protocol::{
    run_cat_phase, run_fisher_sweep, validate_addressability, ExperimentConfig, MotionSpec,
    ResponseCache, SweepAxis, ADDRESSABILITY_FACTOR,
};
use adiatherm::{JcModel, PhysicalParams};
use std::f64::consts::TAU;
use std::path::Path;
use std::time::Instant;

const TAIL: f64 = 1e-8;

fn khz(v: f64) -> f64 {
    TAU * v * 1e3
}

fn mhz(v: f64) -> f64 {
    TAU * v * 1e6
}

fn params(n: u32, eta: f64, model: JcModel) -> PhysicalParams {
    PhysicalParams::new(n, eta, mhz(6.0), model).unwrap()
}

/// log–log least-squares slope.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / sxx
}

#[test]
fn criterion_1_nonlinear_transfer_fidelity() {
    let start = Instant::now();
    let p = params(6, 0.2, JcModel::NonlinearJC);
    let schedule = Schedule::new(khz(22.0), khz(5.0), khz(2.4)).unwrap();
    let dist = thermal_weights(15.0, TAIL).unwrap().extended(10).unwrap();
    let response = dicke_response(&p, &schedule, dist.n_max(), None).unwrap();
    let fidelity = metrology::transfer_fidelity(&response, &dist).unwrap();
    let secs = start.elapsed().as_secs_f64();
    assert!(
        fidelity > 0.99,
        "transfer fidelity {fidelity:.6} not above 0.99"
    );
    assert!(secs < 60.0, "runtime {secs:.1} s exceeds 1 minute");
    println!(
        "criterion 1 PASS: N=6 nonlinear, nbar=15, gamma/2pi=2.4 kHz -> \
         fidelity = {fidelity:.5} > 0.99 ({secs:.1} s)"
    );
}

#[test]
fn criterion_2_protocol_duration() {
    let schedule = Schedule::new(khz(22.0), khz(5.0), khz(2.4)).unwrap();
    let tau = 2.0 * schedule.t_max();
    let expected = 416.7e-6;
    let rel = (tau - expected).abs() / expected;
    assert!(
        rel < 2e-3,
        "protocol duration {:.3} us deviates {rel:.2e} from 416.7 us",
        tau * 1e6
    );
    println!(
        "criterion 2 PASS: gamma/2pi = 2.4 kHz -> tau = {:.1} us (416.7 us within 0.2%)",
        tau * 1e6
    );
}

#[test]
fn criterion_3_addressability_gap() {
    let report = validate_addressability(
        12,
        mhz(8.0),
        None,
        khz(5.0),
        khz(15.0),
        ADDRESSABILITY_FACTOR,
    )
    .unwrap();
    assert!(report.used_scaling_formula, "expected the ln(6N)/N² route");
    let gap_khz = report.gap / khz(1.0);
    assert!(
        (147.0..=149.0).contains(&gap_khz),
        "gap {gap_khz:.3} kHz outside [147, 149]"
    );
    assert!(report.pass, "addressability verdict should be PASS");
    println!(
        "criterion 3 PASS: N=12 at 8 MHz -> gap/2pi = {gap_khz:.3} kHz in [147, 149]"
    );
}

#[test]
fn criterion_4_cfi_reaches_qfi() {
    let start = Instant::now();
    let cache = ResponseCache::new();
    let base = ExperimentConfig {
        params: params(4, 0.0, JcModel::LinearJC),
        schedule: Schedule::new(khz(25.0), khz(5.0), khz(5.5)).unwrap(),
        motion: MotionSpec::Thermal,
        sweep: SweepAxis::Nbar(vec![0.2, 0.4, 0.6, 0.8]),
        steps: None,
        tail_tol: TAIL,
        max_sector: None,
    };
    let table = run_fisher_sweep(&base, &[4], &cache).unwrap();
    let mut ratios = Vec::new();
    for row in &table.rows {
        let (nbar, ratio) = (row[1], row[5]);
        assert!(
            ratio >= 0.95,
            "F_C/F_Q = {ratio:.4} below 0.95 at nbar = {nbar}"
        );
        ratios.push(ratio);
    }
    let scan = ExperimentConfig {
        sweep: SweepAxis::Nbar(vec![2.0]),
        ..base
    };
    let table = run_fisher_sweep(&scan, &[6, 8, 12], &cache).unwrap();
    let trend: Vec<f64> = table.rows.iter().map(|r| r[5]).collect();
    assert!(
        trend.windows(2).all(|w| w[1] > w[0]),
        "F_C/F_Q not increasing over N = 6, 8, 12 at nbar = 2: {trend:?}"
    );
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 300.0, "runtime {secs:.1} s exceeds 5 minutes");
    println!(
        "criterion 4 PASS: N=4 ratios {:?} all >= 0.95; N=6,8,12 at nbar=2 \
         ratios {:?} monotone ({secs:.1} s)",
        ratios
            .iter()
            .map(|r| (r * 1e4).round() / 1e4)
            .collect::<Vec<_>>(),
        trend
            .iter()
            .map(|r| (r * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );
}

#[test]
fn criterion_5_moment_signals_match_oracle() {
    let p = PhysicalParams::new(12, 0.0, mhz(6.0), JcModel::LinearJC).unwrap();
    let spin = p.spin();
    let schedule = Schedule::new(khz(22.0), khz(5.0), khz(5.5)).unwrap();
    // 21-point logarithmic grid over nbar in [0.1, 10]
    let grid: Vec<f64> = (0..21).map(|i| 10f64.powf(-1.0 + i as f64 / 10.0)).collect();
    let top_dist = thermal_weights(10.0, TAIL).unwrap();
    let response = dicke_response(&p, &schedule, top_dist.n_max(), None).unwrap();

    let (mut dev_mean, mut dev_var) = (0.0f64, 0.0f64);
    let (mut scale_mean, mut scale_var) = (0.0f64, 0.0f64);
    let (mut alt_mean_gap, mut alt_var_gap) = (0.0f64, 0.0f64);
    for &nbar in &grid {
        let dist = thermal_weights(nbar, TAIL)
            .unwrap()
            .extended(spin.max_level() + 4)
            .unwrap();
        let pops = metrology::final_dicke_populations(&response, &dist).unwrap();
        let mean = metrology::expected_sz(spin, &pops).unwrap();
        let var = metrology::variance_sz(spin, &pops).unwrap();
        let (o_mean, o_var) = metrology::perfect_transfer_moments(spin, &dist).unwrap();
        dev_mean = dev_mean.max((mean - o_mean).abs());
        dev_var = dev_var.max((var - o_var).abs());
        scale_mean = scale_mean.max(o_mean.abs());
        scale_var = scale_var.max(o_var.abs());
        // printed closed forms, reported alongside but not asserted
        alt_mean_gap =
            alt_mean_gap.max((metrology::sz_mean_alt_closed_form(spin, nbar) - o_mean).abs());
        alt_var_gap =
            alt_var_gap.max((metrology::sz_var_alt_closed_form(spin, nbar) - o_var).abs());
    }
    let rel_mean = dev_mean / scale_mean;
    let rel_var = dev_var / scale_var;
    println!(
        "criterion 5 measured: S=6, gamma/2pi = 5.5 kHz, nbar in [0.1, 10]: \
         sup-norm deviation from the perfect-transfer oracle = {rel_mean:.4} (mean), \
         {rel_var:.4} (variance) vs the 0.02 target; \
         textbook closed forms (which drop the saturated channel) differ from the \
         oracle by up to {alt_mean_gap:.2e} (mean) and {alt_var_gap:.2e} (var) on \
         this grid — reported, not asserted"
    );
    // Known to exceed the 2% target at these exact parameters: the deviation
    // is integrator-converged physics (step doubling shifts populations by
    // < 1e-10; an independent dense integration of the same Hamiltonian
    // reproduces it to all printed digits). The 5.5 kHz sweep is not deeply
    // adiabatic for sectors near and above the ladder top at S = 6 — the
    // instantaneous top-branch gap reaches ~2pi x 22 kHz while the sweep
    // rate gives an adiabaticity parameter of order 0.4 — and the resulting
    // leakage grows with nbar. The same pipeline meets 2% at
    // gamma/2pi <= 2.4 kHz.
    assert!(
        rel_mean <= 0.02,
        "<Sz> deviates {rel_mean:.4} (sup-norm relative) from the perfect-transfer oracle; \
         physical non-adiabaticity of the 5.5 kHz sweep, not an integration artifact"
    );
    assert!(
        rel_var <= 0.02,
        "Var(Sz) deviates {rel_var:.4} (sup-norm relative) from the perfect-transfer oracle; \
         physical non-adiabaticity of the 5.5 kHz sweep, not an integration artifact"
    );
    println!(
        "criterion 5 PASS: S=6 moments within 2% of oracle over nbar in [0.1, 10] \
         (mean {rel_mean:.4}, var {rel_var:.4})"
    );
}

#[test]
fn criterion_6_heisenberg_scaling_of_cat_probe() {
    let cache = ResponseCache::new();
    let alphas = vec![1.2, 1.4, 1.6, 1.8, 2.0, 2.2];
    let cfg = ExperimentConfig {
        params: PhysicalParams::new(12, 0.0, mhz(6.0), JcModel::LinearJC).unwrap(),
        schedule: Schedule::new(khz(22.0), khz(5.0), khz(2.2)).unwrap(),
        // the parity-population signal ~2(αε)² must exceed the residual
        // non-adiabatic leakage of the 2.2 kHz sweep for the quadratic law
        // to be visible; 0.05 keeps the probe weak but above that floor
        motion: MotionSpec::Cat { epsilon: 0.05 },
        sweep: SweepAxis::Alpha(alphas.clone()),
        steps: None,
        tail_tol: TAIL,
        max_sector: None,
    };
    let table = run_cat_phase(&cfg, &cache).unwrap();
    // every grid point sits below the saturation bound 2S >= α² + 3α
    assert!(
        table.warnings.iter().all(|w| !w.contains("saturates")),
        "saturation warnings on the unsaturated grid: {:?}",
        table.warnings
    );
    let fisher: Vec<f64> = table.rows.iter().map(|r| r[2]).collect();
    let slope = loglog_slope(&alphas, &fisher);
    assert!(
        (1.8..=2.2).contains(&slope),
        "log-log slope {slope:.3} outside [1.8, 2.2]"
    );
    println!(
        "criterion 6 PASS: N=12 cat probe, F_C vs alpha log-log slope = {slope:.3} in [1.8, 2.2]"
    );
}

#[test]
fn criterion_7_sector_engine_matches_full_oracle() {
    let p = params(2, 0.0, JcModel::LinearJC);
    let spin = p.spin();
    let schedule = Schedule::new(khz(20.0), khz(5.0), khz(4.5)).unwrap();
    let dist = coherent_weights(1.2, TAIL)
        .unwrap()
        .extended(spin.max_level() + 4)
        .unwrap();
    let n_max = dist.n_max();
    // shared explicit step count satisfying both engines' validity floors
    let steps = default_steps(&p, &schedule, n_max + spin.max_level());
    let snapshots = 20;

    let initial = FullState::coherent_ground(spin, 1.2, n_max);
    let weights: Vec<f64> = (0..=n_max)
        .map(|n| initial.amplitudes[n].norm_sqr())
        .collect();
    let (_, full_trace) =
        evolve_full_oracle_traced(&p, &schedule, &initial, Some(steps), snapshots).unwrap();
    let (_, sector_traces) =
        dicke_response_traced(&p, &schedule, n_max, Some(steps), snapshots).unwrap();

    assert_eq!(full_trace.times.len(), snapshots);
    let mut max_dev = 0.0f64;
    for (k, full_pops) in full_trace.dicke_populations.iter().enumerate() {
        let mut mixed = vec![0.0; spin.num_levels()];
        for (m, trace) in sector_traces.iter().enumerate() {
            for (l, &pop) in trace.populations[k].iter().enumerate() {
                mixed[l] += weights[m] * pop;
            }
        }
        for (l, &pf) in full_pops.iter().enumerate() {
            max_dev = max_dev.max((mixed[l] - pf).abs());
        }
    }
    assert!(
        max_dev <= 1e-8,
        "engines disagree by {max_dev:.3e} (> 1e-8) on Dicke populations"
    );
    println!(
        "criterion 7 PASS: sector engine vs full-space oracle, coherent alpha=1.2, N=2: \
         max population deviation {max_dev:.2e} <= 1e-8 at {snapshots} snapshots"
    );
}

#[test]
fn criterion_8_property_suite() {
    // (a) norm conservation
    let p = params(6, 0.2, JcModel::NonlinearJC);
    let schedule = Schedule::new(khz(22.0), khz(5.0), khz(5.5)).unwrap();
    let mut norm_drift = 0.0f64;
    for m in [1, 5, 25, 80] {
        let state = evolve_sector(&p, &schedule, m, None).unwrap();
        norm_drift = norm_drift.max((state.norm() - 1.0).abs());
    }
    assert!(norm_drift <= 1e-9, "norm drift {norm_drift:.2e} > 1e-9");

    // (b) column-stochastic response
    let response = dicke_response(&p, &schedule, 40, None).unwrap();
    let col_dev = response
        .column_sums()
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0f64, f64::max);
    assert!(col_dev <= 1e-9, "column sums deviate {col_dev:.2e} > 1e-9");

    // (c) F_C <= F_Q and (d) configuration-level equivalence, on a worked point
    let p4 = params(4, 0.0, JcModel::LinearJC);
    let sched4 = Schedule::new(khz(25.0), khz(5.0), khz(5.5)).unwrap();
    let nbar = 0.6f64;
    let x = (1.0 + 1.0 / nbar).ln();
    let dist = thermal_weights(nbar, TAIL).unwrap().extended(8).unwrap();
    let r4 = dicke_response(&p4, &sched4, dist.n_max(), None).unwrap();
    let cfi = metrology::thermal_cfi_dimensionless(&r4, &dist, x).unwrap();
    let qfi = metrology::qfi_thermal_dimensionless(x).unwrap();
    assert!(
        cfi <= qfi * (1.0 + 1e-9),
        "F_C = {cfi:.6e} exceeds F_Q = {qfi:.6e}"
    );
    let pops = metrology::final_dicke_populations(&r4, &dist).unwrap();
    let derivs = metrology::thermal_population_derivs(&r4, &dist, x).unwrap();
    let (f_config, f_dicke) =
        metrology::config_level_fisher_equivalence(&pops, &derivs, 4).unwrap();
    let cfg_rel = (f_config - f_dicke).abs() / f_dicke;
    assert!(
        cfg_rel <= 1e-12,
        "configuration vs Dicke CFI differ by {cfg_rel:.2e} relative"
    );

    // (e) analytic T-derivative chain vs central finite differences
    let delta = 1e-5 * x;
    let fd_dist = |xx: f64| {
        let nb = 1.0 / (xx.exp() - 1.0);
        thermal_weights(nb, 1e-12)
            .unwrap()
            .extended(dist.n_max().max(60))
            .unwrap()
    };
    let r_fd = dicke_response(&p4, &sched4, dist.n_max().max(60), None).unwrap();
    let pop_hi = metrology::final_dicke_populations(&r_fd, &fd_dist(x + delta)).unwrap();
    let pop_lo = metrology::final_dicke_populations(&r_fd, &fd_dist(x - delta)).unwrap();
    let derivs_fd: Vec<f64> = pop_hi
        .iter()
        .zip(&pop_lo)
        .map(|(&h, &l)| -x * (h - l) / (2.0 * delta))
        .collect();
    let pops_fd = metrology::final_dicke_populations(&r_fd, &fd_dist(x)).unwrap();
    let cfi_chain = metrology::classical_fisher(&pops_fd, &derivs).unwrap();
    let cfi_fd = metrology::classical_fisher(&pops_fd, &derivs_fd).unwrap();
    let fd_rel = (cfi_chain - cfi_fd).abs() / cfi_fd;
    assert!(
        fd_rel <= 1e-6,
        "analytic chain vs finite differences differ by {fd_rel:.2e} relative"
    );

    // (f) integrator self-convergence under step doubling
    let steps = default_steps(&p4, &sched4, 20);
    let r_a = dicke_response(&p4, &sched4, 20, Some(steps)).unwrap();
    let r_b = dicke_response(&p4, &sched4, 20, Some(2 * steps)).unwrap();
    let conv = r_a.max_deviation(&r_b);
    assert!(conv <= 1e-8, "step-halving deviation {conv:.2e} > 1e-8");

    // (g) nonlinear coupling collapses onto the linear model as eta -> 0
    let p_lin = params(4, 0.0, JcModel::LinearJC);
    let p_eps = params(4, 1e-6, JcModel::NonlinearJC);
    let r_lin = dicke_response(&p_lin, &sched4, 30, None).unwrap();
    let r_eps = dicke_response(&p_eps, &sched4, 30, None).unwrap();
    let lin_dev = r_lin.max_deviation(&r_eps);
    assert!(
        lin_dev <= 1e-6,
        "eta = 1e-6 nonlinear response deviates {lin_dev:.2e} from linear"
    );

    // (h) adiabatic limit: ||R - R_perfect|| decreases monotonically in gamma
    let p2 = params(2, 0.0, JcModel::LinearJC);
    let perfect = DickeResponse::perfect(p2.spin(), 12);
    let gammas = [8.0, 4.0, 2.0, 1.0];
    let devs: Vec<f64> = gammas
        .iter()
        .map(|&g| {
            let s = Schedule::new(khz(22.0), khz(5.0), khz(g)).unwrap();
            dicke_response(&p2, &s, 12, None)
                .unwrap()
                .max_deviation(&perfect)
        })
        .collect();
    assert!(
        devs.windows(2).all(|w| w[1] < w[0]),
        "adiabatic error not monotone over gamma = {gammas:?}: {devs:?}"
    );

    println!(
        "criterion 8 PASS: norm drift {norm_drift:.1e}; column sums {col_dev:.1e}; \
         F_C <= F_Q; config-level CFI {cfg_rel:.1e}; chain vs FD {fd_rel:.1e}; \
         self-convergence {conv:.1e}; nonlinear->linear {lin_dev:.1e}; \
         adiabatic errors {devs:?} monotone"
    );
}

#[test]
fn criterion_9_shipped_configs_run_end_to_end() {
    let start = Instant::now();
    let configs_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let out_root = tempfile::tempdir().unwrap();
    // (config, subcommand, csv, expected header)
    let expected: &[(&str, &str, &str, &str)] = &[
        (
            "spectrum_three_ions.toml",
            "spectrum",
            "spectrum_three_ions.csv",
            "t_us,sector,branch,omega_khz",
        ),
        (
            "moments_thermal_n12.toml",
            "thermometry",
            "moments_thermal_n12.csv",
            "nbar,T_K,P_0,P_1,P_2,P_3,P_4,P_5,P_6,P_7,P_8,P_9,P_10,P_11,P_12,\
             Sz_mean,Sz_var,F_C,F_Q,F_Sz_moment",
        ),
        (
            "fisher_temperature_n4.toml",
            "fisher",
            "fisher_temperature_n4.csv",
            "num_ions,nbar,T_K,F_C,F_Q,ratio_cfi_qfi,F_Sz_moment",
        ),
        (
            "fisher_ion_scaling.toml",
            "fisher",
            "fisher_ion_scaling.csv",
            "num_ions,nbar,T_K,F_C,F_Q,ratio_cfi_qfi,F_Sz_moment",
        ),
        (
            "fidelity_rate_scan_n6.toml",
            "fidelity",
            "fidelity_rate_scan_n6.csv",
            "gamma_khz,nbar,fidelity",
        ),
        (
            "fidelity_detuning_scan_n6.toml",
            "fidelity",
            "fidelity_detuning_scan_n6.csv",
            "delta0_khz,nbar,fidelity",
        ),
        (
            "coherent_trace_n4.toml",
            "coherent-trace",
            "coherent_trace_n4.csv",
            "t_us,P_0,P_1,P_2,P_3,P_4",
        ),
        (
            "cat_phase_n12.toml",
            "cat-phase",
            "cat_phase_n12.csv",
            "alpha,theta,F_C_epsilon,heisenberg_ref",
        ),
        (
            "addressability_n12.toml",
            "validate",
            "addressability_n12.csv",
            "gap_khz,ratio_lambda,ratio_delta,threshold,pass,used_scaling_formula",
        ),
    ];
    for (config, sub, csv, header) in expected {
        let out_dir = out_root.path().join(config.trim_end_matches(".toml"));
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_adiatherm"))
            .args([
                sub,
                "--config",
                configs_dir.join(config).to_str().unwrap(),
                "--out-dir",
                out_dir.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{config}: exit {:?}, stderr: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
        let text = std::fs::read_to_string(out_dir.join(csv)).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            header.replace(' ', ""),
            "{config}: header mismatch"
        );
        let mut rows = 0;
        for line in lines {
            rows += 1;
            for field in line.split(',') {
                field
                    .parse::<f64>()
                    .unwrap_or_else(|_| panic!("{config}: non-numeric field {field:?}"));
            }
        }
        assert!(rows > 0, "{config}: no data rows");
        // re-validate probability rows from the emitted file
        if *sub == "thermometry" || *sub == "coherent-trace" {
            let skip = if *sub == "thermometry" { 2 } else { 1 };
            let levels = if *config == "moments_thermal_n12.toml" {
                13
            } else {
                5
            };
            for line in text.lines().skip(1) {
                let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
                let total: f64 = fields[skip..skip + levels].iter().sum();
                assert!(
                    (total - 1.0).abs() <= 1e-9,
                    "{config}: probability row sums to {total}"
                );
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 1800.0, "total runtime {secs:.0} s exceeds 30 minutes");
    println!(
        "criterion 9 PASS: all {} shipped configs ran end-to-end with conformant CSVs \
         in {secs:.1} s (< 30 min)",
        expected.len()
    );
}
