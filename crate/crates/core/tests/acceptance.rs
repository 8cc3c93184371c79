//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line (visible under `cargo test -- --nocapture`). Tolerances are pinned
//! here, not calibrated after the fact.

use std::sync::{Arc, OnceLock};

use leibenson::datum::{bump_profile, DatumSpec};
use leibenson::evolution::{solve, EvolutionParams, SolveRun, Termination};
use leibenson::exponents as rex;
use leibenson::geometry::ModelManifold;
use leibenson::grid::{build_grid, DiscreteField, RadialGrid};
use leibenson::inequalities::{
    estimate_best_constant, Inequality, QuotientProbe, SearchGrid, TrialFamily,
};
use leibenson::ladder::{ladder_run, LadderSpec};
use leibenson::monitors::{
    check_ls_monotone, check_smoothing_bound, critical_exponents, exit_times, fit_decay,
};
use leibenson::operators::lebesgue_norm;
use leibenson::oracles::BarenblattSpec;

use num_rational::BigRational;
use num_traits::One;

fn euclid_grid(r: f64, n: usize) -> Arc<RadialGrid> {
    let mf = ModelManifold::euclidean(3).unwrap();
    Arc::new(build_grid(&mf, r, n).unwrap())
}

fn rel_l1_error(a: &DiscreteField, b: &DiscreteField) -> f64 {
    let vols = a.grid().cell_volumes();
    let mut num = 0.0;
    let mut den = 0.0;
    for ((x, y), v) in a.values().iter().zip(b.values()).zip(vols) {
        num += (x - y).abs() * v;
        den += y.abs() * v;
    }
    num / den
}

// ---------------------------------------------------------------------------
// C1: source-free oracle equivalence and first-order convergence
// ---------------------------------------------------------------------------

#[test]
fn c1_barenblatt_oracle_equivalence() {
    let spec = BarenblattSpec::new(2.0, 2.0, 3, 1.0, 1.0).unwrap();
    let run_error = |n: usize| -> f64 {
        let grid = euclid_grid(4.0, n);
        let u0 = spec.sample(grid.clone(), 1.0).unwrap();
        let mut params = EvolutionParams::new(2.0, 2.0, 0.0, 1.0);
        params.reaction_on = false;
        params.cfl_safety = 0.25;
        let run = solve(&u0, &params).unwrap();
        assert!(matches!(run.termination, Termination::Completed { .. }));
        let exact = spec.sample(grid, 2.0).unwrap();
        rel_l1_error(run.final_field(), &exact)
    };
    let err_coarse = run_error(1024);
    let err_fine = run_error(2048);
    let ratio = err_coarse / err_fine;
    assert!(
        err_fine <= 0.02,
        "[FAIL] C1: relative L1 error {err_fine:.4} exceeds 2%"
    );
    assert!(
        ratio >= 1.7,
        "[FAIL] C1: refinement ratio {ratio:.3} below 1.7 (errors {err_coarse:.5}, {err_fine:.5})"
    );
    println!(
        "[PASS] C1: oracle L1 error {err_fine:.3e} at n=2048 (<= 0.02), refinement ratio {ratio:.2} (>= 1.7)"
    );
}

// ---------------------------------------------------------------------------
// C2 + C3 share one small-datum supercritical run
// ---------------------------------------------------------------------------

fn supercritical_run() -> &'static SolveRun {
    static RUN: OnceLock<SolveRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let grid = euclid_grid(2.0, 512);
        let mut params = EvolutionParams::new(2.0, 2.0, 3.0, 200.0);
        params.cfl_safety = 0.25;
        params.norm_exponents = vec![1.5, 2.0, 4.0, 5.0];
        let u0 = DatumSpec::Barenblatt {
            mass: 1e-4,
            t0: 1.0,
        }
        .build(&grid, 2.0, 2.0)
        .unwrap();
        let run = solve(&u0, &params).unwrap();
        assert!(matches!(run.termination, Termination::Completed { .. }));
        run
    })
}

#[test]
fn c2_decay_exponent_of_smoothing_estimate() {
    let run = supercritical_run();
    let fit = fit_decay(&run.history, f64::INFINITY, (20.0, 200.0)).unwrap();
    // sup-norm rate -N / (N [m(p-1) - 1] + p) = -3/5 for m=2, p=2, N=3
    let expected = -0.6;
    assert!(
        (fit.exponent - expected).abs() <= 0.05,
        "[FAIL] C2: fitted slope {:.4} not within 0.05 of {expected}",
        fit.exponent
    );
    // decay faster than t^{-1/(q-1)}: the running S monitor freezes
    let s_series = leibenson::monitors::s_monitor(&run.history, 3.0).unwrap();
    let three_quarters = s_series[3 * s_series.len() / 4];
    assert_eq!(
        *s_series.last().unwrap(),
        three_quarters,
        "[FAIL] C2: S monitor still moving in the last quarter of the run"
    );
    println!(
        "[PASS] C2: sup-norm decay slope {:.4} within +/- 0.05 of {expected}",
        fit.exponent
    );
}

#[test]
fn c3_lebesgue_norm_monotonicity() {
    let run = supercritical_run();
    // q0 = (q - m(p-1)) N / p = 1.5 for these parameters
    let (_, q0) = critical_exponents(2.0, 2.0, 3.0, 3).unwrap();
    assert!((q0 - 1.5).abs() < 1e-12);
    for s in [1.0, 2.0, q0, 5.0] {
        let rep = check_ls_monotone(&run.history, s, 1e-3).unwrap();
        assert!(
            rep.passed,
            "[FAIL] C3: L^{s} norm grows by {:.3e} at t = {:.3}",
            rep.worst_excess, rep.worst_time
        );
    }
    // monotone-decreasing norms with S < 1 throughout: no gate is crossed
    let exits = exit_times(&run.history, 3.0, 2.0).unwrap();
    assert!(
        exits.t_s.is_infinite() && exits.t_f.is_infinite() && exits.t_m.is_infinite(),
        "[FAIL] C3: exit times unexpectedly finite: {exits:?}"
    );
    println!("[PASS] C3: L^s monotone within 1e-3 for s in {{1, 2, 1.5, 5}}; all exit times infinite");
}

// ---------------------------------------------------------------------------
// C4: subcritical Euclidean blow-up at three amplitudes
// ---------------------------------------------------------------------------

#[test]
fn c4_subcritical_blowup() {
    let grid = euclid_grid(16.0, 512);
    let base = DiscreteField::from_profile(grid, |r| bump_profile(1.0, 6.0, r));
    let mut blowup_times = Vec::new();
    for amplitude in [0.1, 1.0, 10.0] {
        let u0 = DiscreteField::new(
            base.grid().clone(),
            base.values().iter().map(|v| v * amplitude).collect(),
        )
        .unwrap();
        let sup0 = lebesgue_norm(&u0, f64::INFINITY).unwrap();
        let mut params = EvolutionParams::new(2.0, 2.0, 2.4, 1.0);
        params.k = f64::INFINITY;
        params.cfl_safety = 0.25;
        params.norm_exponents = vec![2.0];
        // horizon: 100x the datum's reaction-ODE blow-up time
        params.t_end = 100.0 * sup0.powf(1.0 - params.q) / (params.q - 1.0);
        let run = solve(&u0, &params).unwrap();
        let t_star = match run.termination {
            Termination::Blowup { t, .. } => t,
            other => panic!("[FAIL] C4: amplitude {amplitude} ended with {other:?}"),
        };
        // T_M finite and definitionally consistent with the running-sup form
        let exits = exit_times(&run.history, params.q, 2.0).unwrap();
        assert!(
            exits.t_m.is_finite(),
            "[FAIL] C4: T_M infinite for amplitude {amplitude}"
        );
        let l1 = run.history.norm_series(1.0).unwrap();
        let first_double = run
            .history
            .times()
            .iter()
            .zip(l1)
            .find(|(_, &v)| v > 2.0 * l1[0])
            .map(|(&t, _)| t)
            .expect("mass doubles before blow-up");
        assert_eq!(
            exits.t_m, first_double,
            "[FAIL] C4: T_M disagrees with the first doubling of the L1 series"
        );
        // growing norms: the monotonicity check must flag the run
        let rep = check_ls_monotone(&run.history, 1.0, 1e-3).unwrap();
        assert!(
            !rep.passed,
            "[FAIL] C4: monotonicity check passed on a blow-up run"
        );
        blowup_times.push((amplitude, t_star));
    }
    println!(
        "[PASS] C4: blow-up within horizon at amplitudes 0.1/1/10 (t* = {:.1}, {:.3}, {:.4}), T_M finite and consistent",
        blowup_times[0].1, blowup_times[1].1, blowup_times[2].1
    );
}

// ---------------------------------------------------------------------------
// C5: hyperbolic global existence below the Euclidean critical exponent
// ---------------------------------------------------------------------------

#[test]
fn c5_hyperbolic_extension_regime() {
    // Identical (m, p, q, datum): q = 2.2 lies in (m(p-1), m(p-1) + p/N).
    let datum = |grid: &Arc<RadialGrid>| {
        DiscreteField::from_profile(grid.clone(), |r| bump_profile(0.5, 1.0, r))
    };
    let mut params = EvolutionParams::new(2.0, 2.0, 2.2, 2000.0);
    params.k = f64::INFINITY;
    params.cfl_safety = 0.25;
    params.norm_exponents = vec![2.0];

    // hyperbolic(1): global within horizon, decreasing sup norm
    let hyp = ModelManifold::hyperbolic(3, 1.0).unwrap();
    let hyp_grid = Arc::new(build_grid(&hyp, 12.0, 384).unwrap());
    let hyp_run = solve(&datum(&hyp_grid), &params).unwrap();
    assert!(
        matches!(hyp_run.termination, Termination::Completed { .. }),
        "[FAIL] C5: hyperbolic run did not complete: {:?}",
        hyp_run.termination
    );
    let sup = hyp_run.history.sup_series();
    let sup0 = sup[0];
    let sup_end = *sup.last().unwrap();
    assert!(
        sup_end < 0.5 * sup0,
        "[FAIL] C5: hyperbolic sup norm did not halve ({sup0} -> {sup_end})"
    );
    // decreasing after the initial reaction transient (first 1% of horizon)
    let times = hyp_run.history.times();
    let start = times.partition_point(|&t| t < 0.01 * params.t_end);
    let mut running = f64::INFINITY;
    for j in start..sup.len() {
        assert!(
            sup[j] <= running * (1.0 + 1e-12),
            "[FAIL] C5: hyperbolic sup norm increases at t = {}",
            times[j]
        );
        running = running.min(sup[j]);
    }

    // identically configured Euclidean run blows up
    let mut euc_params = params.clone();
    euc_params.t_end = 30_000.0;
    let euc_grid = euclid_grid(24.0, 768);
    let euc_run = solve(&datum(&euc_grid), &euc_params).unwrap();
    let t_star = match euc_run.termination {
        Termination::Blowup { t, .. } => t,
        other => panic!("[FAIL] C5: Euclidean run ended with {other:?}"),
    };
    println!(
        "[PASS] C5: hyperbolic global (sup {sup0:.3} -> {sup_end:.2e}), Euclidean blow-up at t* = {t_star:.0}"
    );
}

// ---------------------------------------------------------------------------
// C6: smoothing-exponent arithmetic against an independent re-derivation
// ---------------------------------------------------------------------------

/// Independent algebraic routes re-deriving the closed forms; exact
/// rational equality against the library implementations.
mod rederive {
    use super::*;

    fn int(n: i64) -> BigRational {
        BigRational::from(num_bigint::BigInt::from(n))
    }

    /// beta via the split form `N/D + (s/h)(1/s - 1/r)(pr/D)` used to
    /// assemble the sup-norm bound from the time and norm factors.
    pub fn beta_split(
        m: &BigRational,
        p: &BigRational,
        dim: u32,
        r: &BigRational,
        s: &BigRational,
    ) -> BigRational {
        let h = m * (p - BigRational::one()) - BigRational::one();
        let d = int(dim as i64) * h.clone() + p * r;
        int(dim as i64) / d.clone()
            + s / h * (BigRational::one() / s - BigRational::one() / r) * (p * r / d)
    }

    /// Fujita exponent via the normalization `q_0(q_c) = 1`: solve
    /// `(q - m(p-1)) N / p = 1` for q.
    pub fn fujita_from_q0(m: &BigRational, p: &BigRational, dim: u32) -> BigRational {
        m * (p - BigRational::one()) + p / int(dim as i64)
    }

    /// q0 with the product expanded the other way: `(qN - m(p-1)N)/p`.
    pub fn q0_expanded(
        m: &BigRational,
        p: &BigRational,
        q: &BigRational,
        dim: u32,
    ) -> BigRational {
        (q * int(dim as i64) - m * (p - BigRational::one()) * int(dim as i64)) / p
    }

    /// gamma as a single fraction `(s - s0) / (s m (p-1))`.
    pub fn gamma_single_fraction(
        m: &BigRational,
        p: &BigRational,
        s0: &BigRational,
        s: &BigRational,
    ) -> BigRational {
        (s - s0) / (s * m * (p - BigRational::one()))
    }

    /// Datum exponent via the complement `1 - N h / D`.
    pub fn datum_exponent_complement(
        m: &BigRational,
        p: &BigRational,
        dim: u32,
        r: &BigRational,
    ) -> BigRational {
        let h = m * (p - BigRational::one()) - BigRational::one();
        let d = int(dim as i64) * h.clone() + p * r;
        BigRational::one() - int(dim as i64) * h / d
    }
}

#[test]
fn c6_exponent_arithmetic_exact() {
    // deterministic pseudo-random admissible tuples over small rationals
    let mut state = 0x9e3779b97f4a7c15_u64;
    let mut next = |modulus: u64| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 33) % modulus
    };
    let mut checked = 0;
    while checked < 20 {
        let dim = 2 + next(4) as u32; // N in 2..=5
        let p = rex::rational(11 + next(14) as i64, 10); // p in [1.1, 2.4]
        let p_f = rex::to_f64(&p);
        if p_f >= dim as f64 {
            continue;
        }
        // m > 1 with m(p-1) > 1
        let m = rex::rational(12 + next(28) as i64, 10);
        let hom = rex::homogeneity(&m, &p);
        if hom <= BigRational::one() {
            continue;
        }
        let q = rex::fujita_exponent(&m, &p, dim) + rex::rational(1 + next(15) as i64, 10);
        let r = rex::rational(20 + next(30) as i64, 10);
        let s = rex::rational(10 + next(9) as i64, 10);
        if s >= r {
            continue;
        }

        // exact rational agreement, route A vs route B
        let fujita_a = rex::fujita_exponent(&m, &p, dim);
        assert_eq!(fujita_a, rederive::fujita_from_q0(&m, &p, dim));
        assert_eq!(rex::q_zero(&m, &p, &fujita_a, dim), BigRational::one());
        assert_eq!(
            rex::q_zero(&m, &p, &q, dim),
            rederive::q0_expanded(&m, &p, &q, dim)
        );
        let beta_a = rex::beta_rs(&m, &p, dim, &r, &s).unwrap();
        assert_eq!(beta_a, rederive::beta_split(&m, &p, dim, &r, &s));
        // beta at s = r degenerates to the time exponent
        assert_eq!(
            rex::beta_rs(&m, &p, dim, &r, &r).unwrap(),
            rex::smoothing_time_exponent(&m, &p, dim, &r).unwrap()
        );
        assert_eq!(
            rex::gamma_s(&m, &p, &s, &r),
            rederive::gamma_single_fraction(&m, &p, &s, &r)
        );
        assert_eq!(
            rex::smoothing_datum_exponent(&m, &p, dim, &r).unwrap(),
            rederive::datum_exponent_complement(&m, &p, dim, &r)
        );
        // q0 > 1 iff q > fujita, exactly
        assert_eq!(rex::q_zero(&m, &p, &q, dim) > BigRational::one(), q > fujita_a);

        // f64 front ends agree with the rational image
        let (m_f, q_f, r_f, s_f) = (
            rex::to_f64(&m),
            rex::to_f64(&q),
            rex::to_f64(&r),
            rex::to_f64(&s),
        );
        let (fujita_f, q0_f) = critical_exponents(m_f, p_f, q_f, dim).unwrap();
        let close = |a: f64, b: &BigRational| (a - rex::to_f64(b)).abs() <= 1e-12 * a.abs().max(1.0);
        assert!(close(fujita_f, &fujita_a), "fujita f64 mismatch");
        assert!(close(q0_f, &rex::q_zero(&m, &p, &q, dim)), "q0 f64 mismatch");

        // the report's exponents match too (use a trivial completed run on
        // a grid of the tuple's dimension)
        let mf = ModelManifold::euclidean(dim).unwrap();
        let grid = Arc::new(build_grid(&mf, 1.0, 8).unwrap());
        let u0 = DiscreteField::from_profile(grid, |x| 1e-8 * (1.0 - x).max(0.0));
        let mut params = EvolutionParams::new(m_f, p_f, q_f, 0.01);
        params.allow_out_of_range = true;
        params.norm_exponents = vec![s_f, r_f];
        let run = solve(&u0, &params).unwrap();
        let report = check_smoothing_bound(&run, s_f, r_f, None).unwrap();
        assert!(close(report.beta_rs, &beta_a), "beta f64 mismatch");
        assert!(close(report.gamma_s, &rex::gamma_s(&m, &p, &s, &r)), "gamma f64 mismatch");
        assert!(close(report.delta_s, &rex::delta_s(&s, &r)), "delta f64 mismatch");
        assert!(
            close(
                report.l1_time_exponent,
                &rex::smoothing_time_exponent(&m, &p, dim, &BigRational::one()).unwrap()
            ),
            "l1 time exponent mismatch"
        );
        checked += 1;
    }
    println!("[PASS] C6: exponent closed forms agree exactly with the re-derivation on 20 tuples");
}

// ---------------------------------------------------------------------------
// C7: Poincare dichotomy between Euclidean and hyperbolic geometry
// ---------------------------------------------------------------------------

#[test]
fn c7_poincare_dichotomy() {
    // Euclidean: exact 1/lambda collapse across dilation doublings.
    let lambdas: Vec<f64> = (0..14).map(|k| f64::from(1u32 << k)).collect();
    let probe = QuotientProbe {
        manifold: ModelManifold::euclidean(3).unwrap(),
        p: 2.0,
        family: TrialFamily::Dilation { lambdas },
    };
    let search = SearchGrid {
        n_cells: 2048,
        padding: 1.25,
    };
    let report = estimate_best_constant(&probe, Inequality::Poincare, search).unwrap();
    let grid_vals: Vec<f64> = report
        .refinement_history
        .iter()
        .filter(|e| e.stage == "grid")
        .map(|e| e.value)
        .collect();
    assert!(
        grid_vals.windows(2).all(|w| w[1] < w[0]),
        "[FAIL] C7: Euclidean quotient not monotone across doublings: {grid_vals:?}"
    );
    let final_euclid = *grid_vals.last().unwrap();
    assert!(
        final_euclid < 1e-3,
        "[FAIL] C7: Euclidean infimum {final_euclid:.3e} not below 1e-3"
    );

    // hyperbolic(1): stabilized positive infimum (plateau bumps with an
    // independently optimized taper width).
    let probe = QuotientProbe {
        manifold: ModelManifold::hyperbolic(3, 1.0).unwrap(),
        p: 2.0,
        family: TrialFamily::Bump {
            widths: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            centers: vec![4.0, 8.0, 16.0, 32.0, 64.0],
        },
    };
    let report = estimate_best_constant(&probe, Inequality::Poincare, search).unwrap();
    // best value per plateau radius (the slowest axis)
    let mut keys = Vec::new();
    let mut minima: Vec<f64> = Vec::new();
    for e in report.refinement_history.iter().filter(|e| e.stage == "grid") {
        let key = *e.params.last().unwrap();
        match keys.iter().position(|&k: &f64| k == key) {
            Some(i) => minima[i] = minima[i].min(e.value),
            None => {
                keys.push(key);
                minima.push(e.value);
            }
        }
    }
    let last_change = {
        let a = minima[minima.len() - 2];
        let b = minima[minima.len() - 1];
        ((a - b) / b).abs()
    };
    assert!(
        report.infimum > 0.0 && report.infimum.is_finite(),
        "[FAIL] C7: hyperbolic infimum not positive"
    );
    assert!(
        last_change < 0.02,
        "[FAIL] C7: hyperbolic infimum not stabilized (last change {last_change:.3e})"
    );
    // plausibility against the spectral bound (N-1)/2 = 1
    assert!(
        report.infimum >= 0.9,
        "[FAIL] C7: hyperbolic infimum {} below 0.9",
        report.infimum
    );
    println!(
        "[PASS] C7: Euclidean infimum {final_euclid:.2e} -> 0 monotonically; hyperbolic stabilized at {:.4} (last change {last_change:.2e})",
        report.infimum
    );
}

// ---------------------------------------------------------------------------
// C8: randomized property suites (200 cases total)
// ---------------------------------------------------------------------------

mod property_suites {
    use super::*;
    use proptest::prelude::*;
    use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

    fn runner(cases: u32, tag: u8) -> TestRunner {
        let mut seed = [7u8; 32];
        seed[0] = tag;
        TestRunner::new_with_rng(
            Config {
                cases,
                failure_persistence: None,
                ..Config::default()
            },
            TestRng::from_seed(RngAlgorithm::ChaCha, &seed),
        )
    }

    pub fn truncation_identity() {
        let mut r = runner(64, 1);
        r.run(
            &(1e-6f64..1e6, -1e9f64..1e9),
            |(k, x)| {
                let t = leibenson::evolution::truncate(k, x).unwrap();
                let g = leibenson::evolution::g_remainder(k, x).unwrap();
                prop_assert!(t.abs() <= k);
                // identity up to one rounding of the remainder
                let back = t + g;
                prop_assert!(
                    back == x || (back - x).abs() <= f64::EPSILON * x.abs(),
                    "T + G = {back} vs {x}"
                );
                // inside the band both are exact
                if x.abs() < k {
                    prop_assert!(t == x && g == 0.0);
                }
                Ok(())
            },
        )
        .unwrap();
    }

    pub fn comparison_principle() {
        let mut r = runner(24, 2);
        r.run(
            &(
                proptest::collection::vec(0.0f64..0.5, 32),
                proptest::collection::vec(0.0f64..0.4, 32),
                1.5f64..2.5, // p
                1.0f64..2.0, // m
                0.2f64..1.0, // k
            ),
            |(lo_vals, extra, p, m, k)| {
                let grid = euclid_grid(1.0, 32);
                let smooth = |vals: &[f64]| -> Vec<f64> {
                    // mild smoothing keeps initial gradients bounded
                    (0..32usize)
                        .map(|i| {
                            let a = vals[i.saturating_sub(1)];
                            let b = vals[i];
                            let c = vals[(i + 1).min(31)];
                            0.25 * a + 0.5 * b + 0.25 * c
                        })
                        .collect()
                };
                let lo_vals = smooth(&lo_vals);
                let hi_vals: Vec<f64> = lo_vals
                    .iter()
                    .zip(smooth(&extra))
                    .map(|(a, b)| a + b)
                    .collect();
                let a = DiscreteField::new(grid.clone(), lo_vals).unwrap();
                let b = DiscreteField::new(grid, hi_vals).unwrap();
                let mut params = EvolutionParams::new(m, p, 2.0, 1.0);
                params.k = k;
                params.allow_out_of_range = true;
                params.cfl_safety = 0.1;
                let dt = 0.5 * leibenson::evolution::adaptive_dt(&b, &params, 1.0);
                let mut ua = a;
                let mut ub = b;
                for _ in 0..120 {
                    ua = leibenson::evolution::step(&ua, &params, dt).unwrap().field;
                    ub = leibenson::evolution::step(&ub, &params, dt).unwrap().field;
                }
                for (x, y) in ua.values().iter().zip(ub.values()) {
                    prop_assert!(*x <= y + 1e-12, "ordering violated: {x} > {y}");
                }
                Ok(())
            },
        )
        .unwrap();
    }

    pub fn mass_balance() {
        let mut r = runner(24, 3);
        r.run(
            &(
                proptest::collection::vec(0.0f64..1.0, 24),
                2.0f64..3.0,
                1.0f64..2.5,
            ),
            |(vals, p, m)| {
                let grid = euclid_grid(1.0, 24);
                let u0 = DiscreteField::new(grid.clone(), vals).unwrap();
                let mut params = EvolutionParams::new(m, p, 0.0, 0.05);
                params.reaction_on = false;
                params.cfl_safety = 0.1;
                let run = solve(&u0, &params).unwrap();
                let m0 = lebesgue_norm(&u0, 1.0).unwrap();
                let m1 = lebesgue_norm(run.final_field(), 1.0).unwrap();
                let defect = m1 - m0 + run.boundary_outflux - run.clipped_mass;
                prop_assert!(
                    defect.abs() <= 1e-10 * m0.max(1e-30),
                    "mass defect {defect:e} vs mass {m0:e}"
                );
                Ok(())
            },
        )
        .unwrap();
    }

    pub fn determinism() {
        let mut r = runner(16, 4);
        r.run(
            &(proptest::collection::vec(0.0f64..0.5, 24), 2.1f64..3.0),
            |(vals, q)| {
                let grid = euclid_grid(1.0, 24);
                let u0 = DiscreteField::new(grid, vals).unwrap();
                let mut params = EvolutionParams::new(2.0, 2.0, q, 0.05);
                params.norm_exponents = vec![2.0];
                params.cfl_safety = 0.15;
                let run_a = solve(&u0, &params).unwrap();
                let run_b = solve(&u0, &params).unwrap();
                let mut csv_a = Vec::new();
                let mut csv_b = Vec::new();
                leibenson::io::write_history_csv(&run_a.history, &mut csv_a).unwrap();
                leibenson::io::write_history_csv(&run_b.history, &mut csv_b).unwrap();
                prop_assert!(csv_a == csv_b, "history CSV differs between reruns");
                for (x, y) in run_a
                    .final_field()
                    .values()
                    .iter()
                    .zip(run_b.final_field().values())
                {
                    prop_assert!(x.to_bits() == y.to_bits());
                }
                Ok(())
            },
        )
        .unwrap();
    }

    pub fn monitor_monotonicity() {
        let mut r = runner(72, 5);
        r.run(
            &(
                proptest::collection::vec(1e-6f64..10.0, 3..40),
                1.1f64..4.0,
                1.0f64..6.0,
            ),
            |(sups, q, s)| {
                let mut h = leibenson::monitors::NormHistory::new(vec![s]).unwrap();
                let has_one = (s - 1.0).abs() < 1e-12;
                for (j, &v) in sups.iter().enumerate() {
                    let t = j as f64 * 0.1;
                    let row: Vec<f64> = if has_one { vec![v] } else { vec![v, v] };
                    h.push_row(t, 0.1, v, &row).unwrap();
                }
                let series = leibenson::monitors::s_monitor(&h, q).unwrap();
                prop_assert!(series.windows(2).all(|w| w[1] >= w[0]));
                let exits = exit_times(&h, q, s).unwrap();
                // T_M never precedes the first time the L1 series doubles
                let l1 = h.norm_series(1.0).unwrap();
                let first = h
                    .times()
                    .iter()
                    .zip(l1)
                    .find(|(_, &v)| v > 2.0 * l1[0])
                    .map(|(&t, _)| t)
                    .unwrap_or(f64::INFINITY);
                prop_assert!(exits.t_m >= first || (exits.t_m - first).abs() < 1e-15);
                // planted power law recovered exactly
                let a = -(q - 1.0) * 0.3;
                let mut hp = leibenson::monitors::NormHistory::new(vec![]).unwrap();
                for j in 1..=40 {
                    let t = j as f64 * 0.25;
                    let v = 3.0 * t.powf(a);
                    hp.push_row(t, 0.25, v, &[v]).unwrap();
                }
                let fit = fit_decay(&hp, f64::INFINITY, (0.25, 10.0)).unwrap();
                prop_assert!((fit.exponent - a).abs() < 1e-12);
                Ok(())
            },
        )
        .unwrap();
    }
}

#[test]
fn c8_property_suites() {
    let t0 = std::time::Instant::now();
    property_suites::truncation_identity();
    property_suites::comparison_principle();
    property_suites::mass_balance();
    property_suites::determinism();
    property_suites::monitor_monotonicity();
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(
        elapsed < 600.0,
        "[FAIL] C8: property run took {elapsed:.0}s (> 10 min)"
    );
    println!("[PASS] C8: 200 randomized property cases green in {elapsed:.1}s");
}

// ---------------------------------------------------------------------------
// C9: approximation-ladder convergence
// ---------------------------------------------------------------------------

#[test]
fn c9_ladder_convergence() {
    let mf = ModelManifold::euclidean(3).unwrap();
    let datum = DatumSpec::Bump {
        amplitude: 1.2,
        radius: 0.75,
    };
    let mut params = EvolutionParams::new(2.0, 2.0, 3.0, 0.2);
    params.cfl_safety = 0.2;
    let spec = LadderSpec {
        k_levels: vec![0.3, 0.8, 1.6, 1e9, f64::INFINITY],
        r_levels: vec![1.0, 2.0, 4.0, 4.0, 4.0],
        h_levels: vec![0.3, 0.6, 2.5, 50.0, 50.0],
        probe_times: vec![0.1, 0.2],
        tolerance: 1e-10,
    };
    let report = ladder_run(&mf, &datum, &params, &spec, 256).unwrap();

    // below the thresholds: probe norms increase strictly toward the limit
    for j in 0..3 {
        for (a, b) in report.levels[j]
            .probes
            .iter()
            .zip(&report.levels[j + 1].probes)
        {
            assert!(
                a.l1 < b.l1 && a.sup <= b.sup + 1e-14,
                "[FAIL] C9: level {j} -> {} not monotone (L1 {} vs {})",
                j + 1,
                a.l1,
                b.l1
            );
        }
    }
    // saturated thresholds: consecutive runs identical
    let last = report.diffs.last().unwrap();
    assert!(
        last.sup < 1e-10 && last.l1 < 1e-10,
        "[FAIL] C9: saturated levels differ (sup {:.3e}, L1 {:.3e})",
        last.sup,
        last.l1
    );
    assert!(report.converged, "[FAIL] C9: ladder did not converge");
    println!(
        "[PASS] C9: ladder monotone below thresholds, saturated diff ({:.1e}, {:.1e}) < 1e-10",
        last.sup, last.l1
    );
}
