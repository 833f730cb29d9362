use crate::blockenc::{
    block_measure, diamond_distance_unitary, diamond_lower_bound, dilate,
    ideal_block_measurement, perturb_projector, QuantumChannel,
};
use crate::costs::{self, Algorithm, CostOptions};
use crate::error::{Error, Result};
use crate::estimators::{
    self, evaluate_estimator, floor_estimate, gen_instance, hamsim_channel, EstimatorOptions,
    InstanceKind,
};
use crate::numerics::{partial_trace, random_unitary, spectral_norm, trace_norm_hermitian, CMatrix, CVector, C64};
use crate::polynomials::{amplifying_poly, amplifying_violation, jacobi_anger_cos, max_grid_error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const SUITES: [&str; 6] = ["lemma2", "blockmeasure", "collapse", "polynomials", "estimators", "costs"];

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// `value ≤ bound·scale`, or an error.
fn check(suite: &'static str, name: &str, value: Result<f64>, bound: f64, scale: f64) -> CheckResult {
    match value {
        Ok(v) => {
            let limit = bound * scale;
            CheckResult {
                suite,
                name: name.to_string(),
                passed: v.is_finite() && v <= limit,
                detail: format!("value={v:.3e} limit={limit:.3e}"),
            }
        }
        Err(e) => CheckResult { suite, name: name.to_string(), passed: false, detail: format!("error: {e}") },
    }
}

pub fn run_suites(suites: &[&str], seed: u64, scale: f64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for s in suites {
        match *s {
            "lemma2" => out.extend(lemma2(seed, scale)),
            "blockmeasure" => out.extend(blockmeasure(seed, scale)),
            "collapse" => out.extend(collapse(seed, scale)),
            "polynomials" => out.extend(polynomials(scale)),
            "estimators" => out.extend(estimators(seed, scale)),
            "costs" => out.extend(costs_suite(scale)),
            _ => {}
        }
    }
    out
}

fn random_density(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let p = &g * &g.adjoint();
    let t = p.trace().re;
    p.scale_real(1.0 / t)
}

fn lemma2(seed: u64, scale: f64) -> Vec<CheckResult> {
    let ratio = (0..200u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            let d = rng.random_range(2..=16);
            let u = random_unitary(d, &mut rng);
            // Mix near and far pairs.
            let v = if i % 2 == 0 {
                random_unitary(d, &mut rng)
            } else {
                let h = random_unitary(d, &mut rng);
                let small = rng.random::<f64>() * 0.1;
                let (vals, vecs) = crate::numerics::eig_unitary(&h)?;
                let phases: Vec<C64> = vals.iter().map(|t| C64::from_polar(1.0, small * t)).collect();
                &u * &(&(&vecs * &CMatrix::diag(&phases)) * &vecs.adjoint())
            };
            let dd = diamond_distance_unitary(&u, &v)?;
            let sn = spectral_norm(&(&u - &v))?;
            Ok(if sn == 0.0 { 0.0 } else { dd / (2.0 * sn) })
        })
        .collect::<Result<Vec<f64>>>()
        .map(|v| v.into_iter().fold(0.0, f64::max));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let contraction = (|| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let (da, db) = (rng.random_range(2..=4), rng.random_range(2..=4));
            let mut rho = random_density(da * db, &mut rng);
            let e = random_density(da * db, &mut rng);
            rho = &rho - &e;
            let full = trace_norm_hermitian(&rho)?;
            let part = trace_norm_hermitian(&partial_trace(&rho, &[da, db], &[1])?)?;
            worst = worst.max(part / full);
        }
        Ok(worst)
    })();
    vec![
        check("lemma2", "diamond_over_twice_spectral_200_pairs", ratio, 1.0 + 1e-9, scale),
        check("lemma2", "partial_trace_contracts_trace_norm", contraction, 1.0 + 1e-9, scale),
    ]
}

fn blockmeasure(seed: u64, scale: f64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for (i, &eps) in [1e-1, 1e-2, 1e-3].iter().enumerate() {
        let v = (|| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(100 + i as u64));
            let u = random_unitary(4, &mut rng);
            let pi = &(&u * &CMatrix::diag_real(&[1.0, 1.0, 0.0, 0.0])) * &u.adjoint();
            let e = random_unitary(4, &mut rng);
            let dir = (&e + &e.adjoint()).scale_real(0.5);
            let (a, _) = perturb_projector(&pi, &dir, eps)?;
            let ch = block_measure(&dilate(&a)?)?;
            let ideal = QuantumChannel::unitary(ideal_block_measurement(&pi))?;
            diamond_lower_bound(&ch, &ideal, 30, &mut rng)
        })();
        let bound = 4.0 * 2f64.sqrt() * eps;
        out.push(check("blockmeasure", &format!("perturbed_projector_eps_{eps:e}"), v, bound, scale));
    }
    let exact = (|| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(200));
        let u = random_unitary(3, &mut rng);
        let pi = &(&u * &CMatrix::diag_real(&[1.0, 0.0, 0.0])) * &u.adjoint();
        let ch = block_measure(&dilate(&pi)?)?;
        let ideal = QuantumChannel::unitary(ideal_block_measurement(&pi))?;
        diamond_lower_bound(&ch, &ideal, 20, &mut rng)
    })();
    out.push(check("blockmeasure", "exact_projector", exact, 1e-10, scale));
    out
}

fn collapse(seed: u64, scale: f64) -> Vec<CheckResult> {
    let v = (|| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(300));
        let d = 3;
        let u = random_unitary(d, &mut rng);
        let gammas: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = &(&u * &CMatrix::diag_real(&gammas)) * &u.adjoint();
        let ch = block_measure(&dilate(&a)?)?;
        let mut worst: f64 = 0.0;
        for (j, &g) in gammas.iter().enumerate() {
            let out = ch.apply_pure(&CVector::basis(2, 0).kron(&u.column(j)));
            let flag = partial_trace(&out, &[2, d], &[0])?;
            let p1 = g * g;
            worst = worst
                .max((flag.get(1, 1).re - p1).abs())
                .max((flag.get(0, 0).re - (1.0 - p1)).abs())
                .max(flag.get(0, 1).norm());
        }
        Ok(worst)
    })();
    vec![check("collapse", "flag_marginal_is_squared_block_eigenvalue", v, 1e-8, scale)]
}

fn polynomials(scale: f64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for &(eta, delta) in &[(0.25, 1e-2), (0.1, 1e-5), (0.05, 1e-8)] {
        let v = amplifying_poly(eta, delta).map(|(a, _)| amplifying_violation(&a, eta, delta, 10_000));
        out.push(check("polynomials", &format!("amplifying_eta_{eta}_delta_{delta:e}"), v, 1e-10, scale));
    }
    for &(m, eps) in &[(1.0, 1e-3), (8.0, 1e-6), (64.0, 1e-9)] {
        let t = m * std::f64::consts::PI;
        let v = jacobi_anger_cos(t, eps).map(|p| max_grid_error(&p, |x| (t * x).cos(), 10_000) / eps);
        out.push(check("polynomials", &format!("jacobi_anger_cos_t_{m}pi_eps_{eps:e}"), v, 1.0, scale));
    }
    out
}

fn estimators(seed: u64, scale: f64) -> Vec<CheckResult> {
    let opts = EstimatorOptions::default();
    let delta = 0.05;
    let pe = (|| -> Result<(f64, f64)> {
        let inst = gen_instance(3, 0.3, 8, seed, InstanceKind::Unitary)?;
        let (ch, _) = estimators::improved_pe(&inst, delta, &EstimatorOptions { uncompute: true, ..opts })?;
        let (succ, fid) = evaluate_estimator(&ch, &inst)?;
        Ok((succ.iter().map(|p| 1.0 - p).fold(0.0, f64::max), 1.0 - fid))
    })();
    let split = |f: fn(&(f64, f64)) -> f64| pe.as_ref().map(f).map_err(|e| Error::Numerical(e.to_string()));
    let (pe_fail, pe_fid) = (split(|p| p.0), split(|p| p.1));
    let tb = (|| -> Result<f64> {
        let inst = gen_instance(2, 0.3, 2, seed, InstanceKind::Unitary)?;
        let (_, rep) = estimators::textbook_pe(&inst, 0.1)?;
        Ok(1.0 - rep.min_success())
    })();
    let ee = (|| -> Result<f64> {
        let inst = gen_instance(2, 0.3, 2, seed, InstanceKind::Hamiltonian)?;
        let (_, rep) = estimators::improved_ee(&inst, 0.1, &opts)?;
        Ok(1.0 - rep.min_success())
    })();
    let np = (|| -> Result<f64> {
        let inst = gen_instance(3, 0.3, 2, seed, InstanceKind::Unitary)?;
        let lam = (floor_estimate(inst.eigenvalues()[0], 3) as f64 + 0.15) / 8.0;
        let inst = inst.with_eigenvalue(0, lam)?;
        let (ch, _) = estimators::improved_pe(&inst, delta, &opts)?;
        let dist = estimators::estimate_distribution(&ch, 3, &inst.eigenstate(0))?;
        let m = floor_estimate(lam, 3);
        Ok(1.0 - dist[m] - dist[(m + 7) % 8])
    })();
    let hs = (|| -> Result<f64> {
        let eps = 1e-3;
        let h = CMatrix::diag_real(&[0.5, -0.5]);
        let sim = hamsim_channel(&dilate(&h)?, std::f64::consts::PI, eps)?;
        Ok((1.0 - 2.0 * eps + eps * eps) - sim.postselection_success)
    })();
    vec![
        check("estimators", "improved_pe_success_shortfall", pe_fail, delta, scale),
        check("estimators", "improved_pe_uncomputed_infidelity", pe_fid, delta, scale),
        check("estimators", "textbook_pe_success_shortfall", tb, 0.1, scale),
        check("estimators", "improved_ee_success_shortfall", ee, 0.1, scale),
        check("estimators", "no_promise_mass_outside_two_values", np, delta, scale),
        check("estimators", "hamsim_postselection_deficit", hs, 1e-12, scale),
    ]
}

fn costs_suite(scale: f64) -> Vec<CheckResult> {
    let o = CostOptions::default();
    let (n, alpha, delta) = (10, 2f64.powi(-10), 1e-30);
    let ratio = |imp: Algorithm| -> Result<f64> {
        let i = costs::cost(imp, n, alpha, delta, &o)?.queries as f64;
        let b = costs::cost(imp.baseline(), n, alpha, delta, &o)?.queries as f64;
        Ok(i / b)
    };
    let acc = (|| -> Result<f64> {
        let sim = EstimatorOptions::default();
        let co = CostOptions { eta_rule: sim.eta_rule, ..o };
        let inst = gen_instance(3, 0.2, 2, 5, InstanceKind::Unitary)?;
        let (_, rep) = estimators::improved_pe(&inst, 0.1, &sim)?;
        let f = costs::cost_improved_pe(3, 0.2, 0.1, &co)?.queries;
        Ok((rep.query_count as f64 - f as f64).abs())
    })();
    vec![
        check("costs", "improved_over_textbook_pe_headline", ratio(Algorithm::ImprovedPe), 1.0, scale),
        check("costs", "improved_over_textbook_ee_headline", ratio(Algorithm::ImprovedEe), 1.0, scale),
        check("costs", "formula_matches_simulated_query_count", acc, 0.5, scale),
    ]
}
