//! The five CLI verbs, each producing a structured [`Report`].

use crate::config::RunConfig;
use crate::report::{Report, Series};
use histate::entanglement::{
    appendix_check, conjugate_entropy, curvature_gap, e2_constant_analytic, e2_from_overlaps,
    e2_from_schmidt, e2_lower_bound, e2_upper_bound, overlap_angle_from_spectrum, vn_entropy,
    SpectralWeights,
};
use histate::history::{
    build_history_state, conjugate_representation, cumulative_unitaries, eigen_residual,
    special_clock_basis, step_unitaries, EvolutionSpec,
};
use histate::linalg::{
    dft_matrix, haar_state, haar_unitary, hermitian_eigen, hermitian_expm, partial_trace,
    schmidt_split, sub_seed, Complex64, ComplexMatrix, Subsystem,
};
use histate::measurement::{
    clock_pair_expectations, clock_reduced_density, dqc1, operator_overlap_protocol_detailed,
    shot_sample, PairObservable,
};
use histate::opstates::{
    choi_state, e2_operator, entangling_power_analytic, entangling_power_mc, kron_step_doubled,
    operator_history_state, operator_overlap, step_operator_history, weyl_set,
};
use serde_json::json;

pub fn run_simulate(config: &RunConfig, report: &mut Report) -> Result<(), String> {
    let spec = config.evolution_spec()?;
    let seed = config.seed_state()?;
    let tol = &config.tolerances;
    let h = build_history_state(&seed, &spec).map_err(|e| e.to_string())?;
    let schmidt = h.schmidt().map_err(|e| e.to_string())?;

    report.plain("schmidt_spectrum", json!(schmidt.coefficients));
    let e = vn_entropy(&schmidt).map_err(|e| e.to_string())?;
    report.scalar("vn_entropy_bits", e, tol.algebraic);
    let q_schmidt = e2_from_schmidt(&schmidt);
    let q_overlaps = e2_from_overlaps(&h);
    report.scalar("e2_from_schmidt", q_schmidt, tol.algebraic);
    report.scalar("e2_from_overlaps", q_overlaps, tol.algebraic);
    report.check_tol("e2_paths_agree", q_schmidt - q_overlaps, tol.algebraic);

    let r = eigen_residual(&spec, &h).map_err(|e| e.to_string())?;
    report.scalar("eigen_residual", r.residual, tol.algebraic);
    report.plain("eigen_phase_index", json!(r.phase_index));

    let basis = special_clock_basis(&h).map_err(|e| e.to_string())?;
    let rebuilt = basis.reconstruct().map_err(|e| e.to_string())?;
    let residual = rebuilt.sub(&h.amplitudes).norm();
    report.scalar("special_basis_reconstruction_residual", residual, tol.algebraic);
    report.check_tol("special_basis_reconstruction", residual, tol.algebraic);

    report.check_tol("history_norm", h.amplitudes.norm() - 1.0, tol.algebraic);
    let worst_column = (0..h.clock_dim)
        .map(|t| (h.system_state_at(t).norm() - 1.0).abs())
        .fold(0.0f64, f64::max);
    report.check_tol("column_norms", worst_column, tol.algebraic);

    if h.system_dim == h.clock_dim {
        let rep = conjugate_representation(&h).map_err(|e| e.to_string())?;
        let et = conjugate_entropy(&rep);
        report.scalar("conjugate_entropy_bits", et, tol.algebraic);
        report.plain("conjugate_weights", json!(rep.weights));
        let floor = (h.clock_dim as f64).log2() - 1e-9;
        report.check(
            "entropic_uncertainty",
            e + et >= floor,
            format!("{e} + {et} >= log2(N) - 1e-9"),
        );
    }
    Ok(())
}

pub fn run_bounds(config: &RunConfig, report: &mut Report) -> Result<(), String> {
    if !config.is_constant() {
        return Err("bounds analysis needs a constant-hamiltonian evolution".into());
    }
    let tol = &config.tolerances;
    let w = config.spectral_weights()?;
    let n = config.clock_steps;
    if n < 2 {
        return Err("bounds analysis needs clock_steps >= 2".into());
    }
    let t_final = config.t_final();
    let (t_min, t_max, points) = match &config.sweep {
        Some(s) => (s.t_min, s.t_max, s.points),
        None => (t_final / 50.0, t_final, 50),
    };

    let upper = e2_upper_bound(&w);
    report.scalar("e2_upper_bound", upper, tol.algebraic);

    let mut ts = Vec::with_capacity(points);
    let mut analytic = Vec::with_capacity(points);
    let mut lower = Vec::with_capacity(points);
    let mut gap = Vec::with_capacity(points);
    let mut predicted = Vec::with_capacity(points);
    let mut min_f = Vec::with_capacity(points);
    let mut sandwich_ok = true;
    let mut translation_ok = true;
    let mut f_endpoints_ok = true;

    for j in 0..points {
        let t = t_min + (t_max - t_min) * j as f64 / (points - 1) as f64;
        let e = e2_constant_analytic(&w, t, n).map_err(|e| e.to_string())?;
        let phi = overlap_angle_from_spectrum(&w, t);
        let lb = e2_lower_bound(phi, n).map_err(|e| e.to_string())?;
        sandwich_ok &= lb - 1e-10 <= e && e <= upper + 1e-12;
        let rep = appendix_check(&w, t, 101, n).map_err(|e| e.to_string())?;
        translation_ok &= rep.translation_ok;
        f_endpoints_ok &= rep.f_values.first().unwrap().abs() < tol.algebraic
            && rep.f_values.last().unwrap().abs() < tol.algebraic;
        ts.push(t);
        analytic.push(e);
        lower.push(lb);
        min_f.push(rep.min_f);
        if n > 2 {
            let g = curvature_gap(&w, t, n).map_err(|e| e.to_string())?;
            gap.push(g.gap);
            predicted.push(g.predicted);
        }
    }

    let mk = |label: &str, y: Vec<f64>| Series {
        x_label: "t_final".into(),
        y_label: label.into(),
        x: ts.clone(),
        y,
    };
    report.series("e2_analytic", mk("e2_analytic", analytic));
    report.series("e2_lower_bound", mk("e2_lower_bound", lower));
    report.series("appendix_min_f", mk("min_F", min_f));
    if n > 2 {
        report.series("curvature_gap", mk("gap", gap));
        report.series("curvature_gap_predicted", mk("predicted", predicted));
    }

    report.check("sandwich_on_sweep", sandwich_ok, "lower - 1e-10 <= E2 <= upper + 1e-12".into());
    report.check("translation_inequality_on_sweep", translation_ok, "Dirichlet term".into());
    report.check("appendix_f_endpoints", f_endpoints_ok, "F(0) = F(1) = 0".into());
    report.check_tol(
        "lower_bound_vanishes_at_zero_angle",
        e2_lower_bound(0.0, n).map_err(|e| e.to_string())?,
        tol.algebraic,
    );
    Ok(())
}

pub fn run_power(config: &RunConfig, report: &mut Report) -> Result<(), String> {
    if config.mc_samples < 2 {
        return Err("mc_samples must be >= 2".into());
    }
    let spec = config.evolution_spec()?;
    let tol = &config.tolerances;

    let e2_w = e2_operator(&spec).map_err(|e| e.to_string())?;
    report.scalar("e2_operator", e2_w, tol.algebraic);
    let analytic = entangling_power_analytic(&spec).map_err(|e| e.to_string())?;
    report.scalar("entangling_power_analytic", analytic, tol.algebraic);

    let oph = operator_history_state(&spec).map_err(|e| e.to_string())?;
    let os = oph.schmidt().map_err(|e| e.to_string())?;
    let ew = vn_entropy(&os).map_err(|e| e.to_string())?;
    report.scalar("operator_entropy_bits", ew, tol.algebraic);
    let e2_via_schmidt = e2_from_schmidt(&os);
    report.check_tol("e2_operator_two_routes", e2_w - e2_via_schmidt, tol.algebraic);

    let sh = step_operator_history(&spec).map_err(|e| e.to_string())?;
    report.scalar("step_operator_entropy_bits", sh.entropy, tol.algebraic);

    let mc = entangling_power_mc(&spec, config.mc_samples, config.rng_seed)
        .map_err(|e| e.to_string())?;
    report.scalar("entangling_power_mc_mean", mc.mean, tol.statistical_sigma * mc.stderr);
    report.scalar("entangling_power_mc_stderr", mc.stderr, 0.0);
    report.check(
        "mc_matches_analytic",
        (mc.mean - analytic).abs() <= tol.statistical_sigma * mc.stderr + 1e-12,
        format!(
            "|{} - {analytic}| <= {} * {}",
            mc.mean, tol.statistical_sigma, mc.stderr
        ),
    );

    if analytic < 2.0 {
        let dbar = histate::opstates::effective_dimension(analytic).map_err(|e| e.to_string())?;
        report.scalar("effective_dimension", dbar, tol.algebraic);
    }
    Ok(())
}

pub fn run_measure(config: &RunConfig, report: &mut Report) -> Result<(), String> {
    let spec = config.evolution_spec()?;
    let seed = config.seed_state()?;
    let tol = &config.tolerances;
    let n = config.clock_steps;
    let shots = config.shots;

    let h = build_history_state(&seed, &spec).map_err(|e| e.to_string())?;
    let mut pairs = Vec::new();
    let mut reconstruction_worst = 0.0f64;
    for t in 0..n {
        for t2 in 0..n {
            if t == t2 {
                continue;
            }
            let (x, y) = clock_pair_expectations(&h, t, t2).map_err(|e| e.to_string())?;
            let direct = h.system_state_at(t2).inner(&h.system_state_at(t))
                / Complex64::new(n as f64, 0.0);
            reconstruction_worst =
                reconstruction_worst.max((Complex64::new(x / 2.0, y / 2.0) - direct).norm());
            pairs.push(json!({
                "t": t,
                "t_prime": t2,
                "sigma_x": x,
                "sigma_y": y,
                "overlap": [x / 2.0 * n as f64, y / 2.0 * n as f64],
            }));
        }
    }
    report.plain("pair_expectations", json!(pairs));
    report.check_tol("overlap_reconstruction", reconstruction_worst, 1e-12);

    // operator-trace protocol against U_0 = 1
    let us = cumulative_unitaries(&spec).map_err(|e| e.to_string())?;
    let d = spec.system_dim() as f64;
    let mut traces = Vec::new();
    let mut exact_worst = 0.0f64;
    let mut sampled_ok = true;
    for t in 1..n {
        let out = operator_overlap_protocol_detailed(&spec, t, 0, shots, sub_seed(config.rng_seed, t as u64))
            .map_err(|e| e.to_string())?;
        let expected = us[t].trace() / Complex64::new(n as f64 * d, 0.0);
        if shots == 0 {
            exact_worst = exact_worst.max((out.estimate - expected).norm());
        } else {
            sampled_ok &= (out.estimate.re - out.exact.re).abs()
                <= tol.statistical_sigma * out.stderr_re + 1e-12;
            sampled_ok &= (out.estimate.im - out.exact.im).abs()
                <= tol.statistical_sigma * out.stderr_im + 1e-12;
        }
        traces.push(json!({
            "t": t,
            "estimate": [out.estimate.re, out.estimate.im],
            "exact": [out.exact.re, out.exact.im],
            "stderr": [out.stderr_re, out.stderr_im],
            "trace_over_d": [expected.re * n as f64, expected.im * n as f64],
        }));
    }
    report.plain("operator_trace_protocol", json!(traces));
    if shots == 0 {
        report.check_tol("trace_protocol_exact", exact_worst, 1e-12);
    } else {
        report.check("trace_protocol_within_stderr", sampled_ok, "estimates vs exact".into());
    }

    if n == 2 {
        // DQC1 mode on the single nontrivial evolution operator
        let u = us[1].clone();
        let out = dqc1(&u, shots, config.rng_seed).map_err(|e| e.to_string())?;
        report.complex("dqc1_trace_estimate", out.trace_estimate, 1e-12);
        report.scalar("dqc1_e2_w", out.e2_w, tol.algebraic);
        report.scalar("dqc1_entangling_power", out.entangling_power, tol.algebraic);
        let e2_two_step = e2_operator(
            &EvolutionSpec::step_sequence(vec![u.clone(), u.dagger()]).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        report.check_tol("dqc1_matches_e2_operator", out.e2_w - e2_two_step, 1e-12);
        if shots == 0 {
            let exact = u.trace() / Complex64::new(d, 0.0);
            report.check_tol("dqc1_trace_exact", (out.trace_estimate - exact).norm(), 1e-12);
        }
    }
    Ok(())
}

struct CheckRun<'a> {
    report: &'a mut Report,
    seed: u64,
}

impl<'a> CheckRun<'a> {
    fn named<F: FnOnce(u64) -> Result<(bool, String), String>>(&mut self, name: &str, body: F) {
        let stream = sub_seed(self.seed, self.report.checks.len() as u64);
        match body(stream) {
            Ok((pass, detail)) => self.report.check(name, pass, detail),
            Err(e) => self.report.check(name, false, format!("errored: {e}")),
        }
    }
}

fn random_step_spec(d: usize, n: usize, seed: u64) -> EvolutionSpec {
    let steps: Vec<ComplexMatrix> =
        (0..n).map(|t| haar_unitary(d, sub_seed(seed, t as u64)).unwrap()).collect();
    EvolutionSpec::step_sequence(steps).unwrap()
}

fn random_weights(levels: usize, seed: u64) -> SpectralWeights {
    let raw = haar_state(levels, seed).unwrap();
    let weights: Vec<f64> = raw.amplitudes.iter().map(|z| z.norm_sqr()).collect();
    let energies: Vec<f64> = (0..levels)
        .map(|k| {
            let z = haar_state(2, sub_seed(seed, 1000 + k as u64)).unwrap();
            8.0 * (z.amplitudes[0].norm_sqr() - 0.5)
        })
        .collect();
    SpectralWeights::new(&energies, &weights)
        .unwrap_or_else(|_| SpectralWeights::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap())
}

/// The full named-invariant suite. Every check is deterministic in
/// `rng_seed`; a config with an invalid evolution fails the corresponding
/// check instead of aborting the run.
pub fn run_verify(config: &RunConfig, report: &mut Report) -> Result<(), String> {
    let tol_alg = config.tolerances.algebraic;
    let tol_spec = config.tolerances.spectral;
    let sigma = config.tolerances.statistical_sigma;
    let mut run = CheckRun { report, seed: config.rng_seed };

    run.named("config.evolution_contracts", |_| {
        // unitarity / Hermiticity of the configured evolution; this is the
        // fault-injection hook, so a bad step fails here rather than at parse
        match config.evolution_spec() {
            Ok(spec) => {
                let steps = step_unitaries(&spec).map_err(|e| e.to_string())?;
                let worst = steps
                    .iter()
                    .map(|s| {
                        s.dagger()
                            .mul(s)
                            .max_abs_diff(&ComplexMatrix::identity(s.rows))
                    })
                    .fold(0.0f64, f64::max);
                Ok((worst < 1e-10, format!("worst step unitarity defect {worst:e}")))
            }
            Err(e) => Ok((false, format!("evolution rejected: {e}"))),
        }
    });

    run.named("linalg.dft_unitarity", |_| {
        let worst = [1usize, 2, 3, 8, 32, 128, 256]
            .iter()
            .map(|&n| {
                let f = dft_matrix(n).unwrap();
                f.dagger().mul(&f).max_abs_diff(&ComplexMatrix::identity(n))
            })
            .fold(0.0f64, f64::max);
        Ok((worst < 1e-12, format!("worst defect {worst:e}")))
    });

    run.named("linalg.schmidt_reconstruction", |s| {
        let mut worst = 0.0f64;
        for k in 0..20u64 {
            let da = 2 + (k as usize % 7);
            let db = 2 + ((k as usize / 2) % 7);
            let v = haar_state(da * db, sub_seed(s, k)).unwrap();
            let split = schmidt_split(&v, da, db).unwrap();
            worst = worst.max(split.reconstruct().dist_up_to_phase(&v));
        }
        Ok((worst < tol_alg, format!("worst residual {worst:e}")))
    });

    run.named("linalg.schmidt_marginal_consistency", |s| {
        let mut worst = 0.0f64;
        for k in 0..100u64 {
            let da = 2 + (k as usize % 7);
            let db = 2 + ((k as usize / 3) % 7);
            let v = haar_state(da * db, sub_seed(s, k)).unwrap();
            let split = schmidt_split(&v, da, db).unwrap();
            let rho = partial_trace(&v, da, db, Subsystem::First).unwrap();
            let (evals, _) = hermitian_eigen(&rho).unwrap();
            let mut evals: Vec<f64> = evals.into_iter().rev().collect();
            evals.resize(split.coefficients.len().max(evals.len()), 0.0);
            for (i, l) in split.coefficients.iter().enumerate() {
                worst = worst.max((l * l - evals[i]).abs());
            }
        }
        Ok((worst < 1e-10, format!("worst eigenvalue gap {worst:e}")))
    });

    run.named("linalg.expm_unitary_determinant", |s| {
        let mut worst = 0.0f64;
        for k in 0..10u64 {
            let u = haar_unitary(5, sub_seed(s, k)).unwrap();
            let herm = u.add(&u.dagger()).scale(Complex64::new(0.5, 0.0));
            let e = hermitian_expm(&herm, 0.9).unwrap();
            worst = worst.max((e.determinant().norm() - 1.0).abs());
            worst = worst
                .max(e.dagger().mul(&e).max_abs_diff(&ComplexMatrix::identity(5)));
        }
        Ok((worst < 1e-10, format!("worst defect {worst:e}")))
    });

    run.named("linalg.haar_determinism", |s| {
        let a = haar_state(6, s).unwrap();
        let b = haar_state(6, s).unwrap();
        let norm_gap = (a.norm() - 1.0).abs();
        Ok((a.amplitudes == b.amplitudes && norm_gap < 1e-12, format!("norm gap {norm_gap:e}")))
    });

    run.named("history.cumulative_step_consistency", |s| {
        let spec = random_step_spec(3, 6, s);
        let us = cumulative_unitaries(&spec).unwrap();
        let steps = step_unitaries(&spec).unwrap();
        let mut worst = 0.0f64;
        for t in 1..6 {
            worst = worst.max(us[t].mul(&us[t - 1].dagger()).max_abs_diff(&steps[t - 1]));
        }
        Ok((worst < tol_alg, format!("worst step gap {worst:e}")))
    });

    run.named("history.norm_preservation", |s| {
        let spec = random_step_spec(4, 7, s);
        let h = build_history_state(&haar_state(4, sub_seed(s, 99)).unwrap(), &spec).unwrap();
        let mut worst = (h.amplitudes.norm() - 1.0).abs();
        for t in 0..7 {
            worst = worst.max((h.system_state_at(t).norm() - 1.0).abs());
        }
        Ok((worst < 1e-10, format!("worst norm defect {worst:e}")))
    });

    run.named("history.eigen_residual_closed_cycles", |s| {
        let mut worst = 0.0f64;
        for k in 0..5u64 {
            let d = 2 + (k as usize % 2);
            let n = 3 + (k as usize % 4);
            let mut steps: Vec<ComplexMatrix> =
                (0..n - 1).map(|t| haar_unitary(d, sub_seed(s, 10 * k + t as u64)).unwrap()).collect();
            let mut total = ComplexMatrix::identity(d);
            for st in &steps {
                total = st.mul(&total);
            }
            steps.push(total.dagger());
            let spec = EvolutionSpec::step_sequence(steps).unwrap();
            let h = build_history_state(&haar_state(d, sub_seed(s, 500 + k)).unwrap(), &spec)
                .unwrap();
            let r = eigen_residual(&spec, &h).unwrap();
            worst = worst.max(r.residual);
            if r.phase_index != 0 {
                return Ok((false, "wrong eigenphase sector".into()));
            }
        }
        Ok((worst < 1e-10, format!("worst residual {worst:e}")))
    });

    run.named("history.special_basis_reconstruction", |s| {
        let mut worst = 0.0f64;
        for k in 0..100u64 {
            let d = 2 + (k as usize % 5);
            let n = 2 + (k as usize % 15);
            let spec = random_step_spec(d, n, sub_seed(s, k));
            let h = build_history_state(&haar_state(d, sub_seed(s, 7000 + k)).unwrap(), &spec)
                .unwrap();
            let basis = special_clock_basis(&h).unwrap();
            worst = worst.max(basis.reconstruct().unwrap().sub(&h.amplitudes).norm());
        }
        Ok((worst < 1e-10, format!("worst residual over 100 specs {worst:e}")))
    });

    run.named("history.conjugate_reconstruction", |s| {
        let mut worst = 0.0f64;
        for k in 0..20u64 {
            let n = 2 + (k as usize % 3);
            let spec = random_step_spec(n, n, sub_seed(s, k));
            let h = build_history_state(&haar_state(n, sub_seed(s, 300 + k)).unwrap(), &spec)
                .unwrap();
            let rep = conjugate_representation(&h).unwrap();
            let weight_gap = (rep.weights.iter().sum::<f64>() - 1.0).abs();
            worst = worst
                .max(rep.reconstruct().sub(&h.amplitudes).norm())
                .max(weight_gap);
        }
        Ok((worst < 1e-10, format!("worst residual {worst:e}")))
    });

    run.named("history.weyl_overlap_sum", |s| {
        let mut worst = 0.0f64;
        for d in [2usize, 3, 4] {
            let spec = EvolutionSpec::weyl(d).unwrap();
            let h = build_history_state(&haar_state(d, sub_seed(s, d as u64)).unwrap(), &spec)
                .unwrap();
            let n = d * d;
            let mut sum = 0.0;
            for t in 0..n {
                for t2 in 0..n {
                    sum += h.system_state_at(t).inner(&h.system_state_at(t2)).norm_sqr();
                }
            }
            worst = worst.max((sum - (d * d * d) as f64).abs());
        }
        Ok((worst < 1e-8, format!("worst sum defect {worst:e}")))
    });

    run.named("entanglement.e2_path_agreement", |s| {
        let mut worst = 0.0f64;
        for k in 0..200u64 {
            let d = 2 + (k as usize % 4);
            let n = 2 + (k as usize % 19);
            let spec = random_step_spec(d, n, sub_seed(s, k));
            let h = build_history_state(&haar_state(d, sub_seed(s, 900 + k)).unwrap(), &spec)
                .unwrap();
            let gap = e2_from_schmidt(&h.schmidt().unwrap()) - e2_from_overlaps(&h);
            worst = worst.max(gap.abs());
        }
        Ok((worst < 1e-10, format!("worst path gap over 200 histories {worst:e}")))
    });

    run.named("entanglement.sandwich", |s| {
        for k in 0..1000u64 {
            let w = random_weights(2 + (k as usize % 5), sub_seed(s, k));
            let n = 2 + (k as usize % 31);
            let t_final = 0.01 + 10.0 * (sub_seed(s, 5000 + k) % 1000) as f64 / 1000.0;
            let e = e2_constant_analytic(&w, t_final, n).unwrap();
            let phi = overlap_angle_from_spectrum(&w, t_final);
            let lower = e2_lower_bound(phi, n).unwrap();
            let upper = e2_upper_bound(&w);
            if !(lower - 1e-10 <= e && e <= upper + 1e-12) {
                return Ok((false, format!("violated at instance {k}: {lower} {e} {upper}")));
            }
        }
        Ok((true, "1000 instances".into()))
    });

    run.named("entanglement.periodicity", |s| {
        let mut worst = 0.0f64;
        for k in 0..20u64 {
            let w = random_weights(3, sub_seed(s, k));
            let n = 2 + (k as usize % 15);
            let t_final = 0.2 + (k as f64) * 0.17;
            let period = 2.0 * std::f64::consts::PI * (n as f64 - 1.0) / t_final;
            let mut shifted = w.energies().to_vec();
            shifted[2] += period;
            let w2 = SpectralWeights::new(&shifted, w.weights()).unwrap();
            let gap = e2_constant_analytic(&w, t_final, n).unwrap()
                - e2_constant_analytic(&w2, t_final, n).unwrap();
            worst = worst.max(gap.abs());
        }
        Ok((worst < 1e-9, format!("worst period defect {worst:e}")))
    });

    run.named("entanglement.entropic_uncertainty", |s| {
        for k in 0..200u64 {
            let n = [2usize, 3, 4][k as usize % 3];
            let spec = random_step_spec(n, n, sub_seed(s, k));
            let h = build_history_state(&haar_state(n, sub_seed(s, 40_000 + k)).unwrap(), &spec)
                .unwrap();
            let e = vn_entropy(&h.schmidt().unwrap()).unwrap();
            let et = conjugate_entropy(&conjugate_representation(&h).unwrap());
            if e + et < (n as f64).log2() - 1e-9 {
                return Ok((false, format!("violated at instance {k}: {e} + {et}")));
            }
        }
        Ok((true, "200 square histories".into()))
    });

    run.named("opstates.weyl_gram", |_| {
        let mut worst = 0.0f64;
        for d in 2..=8usize {
            let ops = weyl_set(d).unwrap();
            for (i, a) in ops.iter().enumerate() {
                for (j, b) in ops.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((operator_overlap(a, b).norm() - expect).abs());
                }
            }
        }
        Ok((worst < 1e-10, format!("worst Gram defect {worst:e}")))
    });

    run.named("opstates.duality_consistency", |s| {
        let mut worst = 0.0f64;
        for k in 0..10u64 {
            let d = 2 + (k as usize % 2);
            let n = 2 + (k as usize % 5);
            let spec = random_step_spec(d, n, sub_seed(s, k));
            let oph = operator_history_state(&spec).unwrap();
            let doubled = kron_step_doubled(&spec).unwrap();
            let bell = choi_state(&ComplexMatrix::identity(d)).unwrap().vector;
            let direct = build_history_state(&bell, &doubled).unwrap();
            worst = worst.max(oph.amplitudes.sub(&direct.amplitudes).norm());
        }
        Ok((worst < 1e-12, format!("worst duality gap {worst:e}")))
    });

    run.named("opstates.e2_operator_two_routes", |s| {
        let mut worst = 0.0f64;
        for k in 0..10u64 {
            let spec = random_step_spec(2 + (k as usize % 3), 3 + (k as usize % 6), sub_seed(s, k));
            let a = e2_operator(&spec).unwrap();
            let b = e2_from_schmidt(&operator_history_state(&spec).unwrap().schmidt().unwrap());
            worst = worst.max((a - b).abs());
        }
        Ok((worst < 1e-10, format!("worst route gap {worst:e}")))
    });

    run.named("opstates.entangling_power_identity", |s| {
        for k in 0..20u64 {
            let d = 2 + (k as usize % 3);
            let n = 2 + (k as usize % 15);
            let spec = random_step_spec(d, n, sub_seed(s, k));
            let analytic = entangling_power_analytic(&spec).unwrap();
            let mc = entangling_power_mc(&spec, 10_000, sub_seed(s, 600 + k)).unwrap();
            if (mc.mean - analytic).abs() > sigma * mc.stderr + 1e-12 {
                return Ok((
                    false,
                    format!("spec {k}: MC {} vs {analytic} (stderr {})", mc.mean, mc.stderr),
                ));
            }
        }
        Ok((true, format!("20 specs, 10k Haar seeds each, {sigma}σ")))
    });

    run.named("opstates.constant_spectrum_bound", |s| {
        for k in 0..200u64 {
            let d = 2 + (k as usize % 3);
            let w = random_weights(d, sub_seed(s, k));
            if w.levels() < d {
                continue;
            }
            let spec =
                EvolutionSpec::from_spectrum(w.energies(), None, None, d).unwrap();
            let power = entangling_power_analytic(&spec).unwrap();
            let bound = 2.0 * (d as f64 - 1.0) / (d as f64 + 1.0);
            if power > bound + 1e-12 {
                return Ok((false, format!("violated at {k}: {power} > {bound}")));
            }
        }
        Ok((true, "200 spectra with N = d_S".into()))
    });

    run.named("opstates.perturbed_weyl_entropy_drop", |_| {
        let d = 2usize;
        let mut us = weyl_set(d).unwrap();
        // rotate σ_z toward iσ_y: Tr[(iσ_y)† e^{-iεσ_x} σ_z] = 2i sin ε ≠ 0
        let sigma_x = us[2].clone();
        us[1] = hermitian_expm(&sigma_x, 0.3).unwrap().mul(&us[1]);
        let mut steps = Vec::new();
        for t in 1..us.len() {
            steps.push(us[t].mul(&us[t - 1].dagger()));
        }
        steps.push(us[0].mul(&us[us.len() - 1].dagger()));
        let spec = EvolutionSpec::step_sequence(steps).unwrap();
        let e = vn_entropy(&operator_history_state(&spec).unwrap().schmidt().unwrap()).unwrap();
        let cap = 2.0 * (d as f64).log2() - 1e-9;
        Ok((e < cap, format!("E(W) = {e} < {cap}")))
    });

    run.named("measurement.overlap_reconstruction", |s| {
        let mut worst = 0.0f64;
        for k in 0..50u64 {
            let d = 2 + (k as usize % 3);
            let n = 2 + (k as usize % 11);
            let spec = random_step_spec(d, n, sub_seed(s, k));
            let us = cumulative_unitaries(&spec).unwrap();
            for t in 0..n {
                for t2 in 0..n {
                    if t == t2 {
                        continue;
                    }
                    let got = operator_overlap_protocol_detailed(&spec, t, t2, 0, 0)
                        .unwrap()
                        .estimate;
                    let expected =
                        operator_overlap(&us[t2], &us[t]) / Complex64::new(n as f64, 0.0);
                    worst = worst.max((got - expected).norm());
                }
            }
        }
        Ok((worst < 1e-12, format!("worst protocol gap over 50 specs {worst:e}")))
    });

    run.named("measurement.protocol_density_validity", |s| {
        let mut worst = 0.0f64;
        for k in 0..5u64 {
            let spec = random_step_spec(2 + (k as usize % 2), 4, sub_seed(s, k));
            let rho = clock_reduced_density(&spec).unwrap();
            worst = worst.max(rho.max_abs_diff(&rho.dagger()));
            worst = worst.max((rho.trace().re - 1.0).abs());
            let (evals, _) = hermitian_eigen(&rho).unwrap();
            worst = worst.max((-evals[0]).max(0.0));
        }
        Ok((worst < 1e-10, format!("worst density defect {worst:e}")))
    });

    run.named("measurement.estimator_scaling", |s| {
        let spec = random_step_spec(2, 4, s);
        let h = build_history_state(&haar_state(2, sub_seed(s, 1)).unwrap(), &spec).unwrap();
        let mut ratio_sum = 0.0;
        for trial in 0..50u64 {
            let small =
                shot_sample(&h, PairObservable::PairX(0, 2), 4_000, sub_seed(s, 100 + trial))
                    .unwrap();
            let big =
                shot_sample(&h, PairObservable::PairX(0, 2), 8_000, sub_seed(s, 200 + trial))
                    .unwrap();
            ratio_sum += big.stderr / small.stderr;
        }
        let mean_ratio = ratio_sum / 50.0;
        let target = std::f64::consts::FRAC_1_SQRT_2;
        Ok((
            (mean_ratio - target).abs() < 0.1 * target,
            format!("mean stderr ratio {mean_ratio:.4} vs {target:.4}"),
        ))
    });

    run.named("measurement.dqc1_consistency", |s| {
        let mut worst = 0.0f64;
        for k in 0..5u64 {
            let u = haar_unitary(3, sub_seed(s, k)).unwrap();
            let out = dqc1(&u, 0, 0).unwrap();
            let spec = EvolutionSpec::step_sequence(vec![u.clone(), u.dagger()]).unwrap();
            worst = worst.max((out.e2_w - e2_operator(&spec).unwrap()).abs());
            let exact = u.trace() / Complex64::new(3.0, 0.0);
            worst = worst.max((out.trace_estimate - exact).norm());
        }
        Ok((worst < 1e-12, format!("worst DQC1 gap {worst:e}")))
    });

    let _ = tol_spec;
    let passed = run.report.checks.iter().filter(|c| c.pass).count();
    let total = run.report.checks.len();
    run.report.plain("invariants_passed", json!(format!("{passed}/{total}")));
    Ok(())
}
