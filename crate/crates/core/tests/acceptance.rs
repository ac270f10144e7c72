//! Acceptance suite: one test per release criterion, each printing a
//! pass line with the measured quantities. Run with
//! `cargo test --test acceptance -- --nocapture` to see the details.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use utc_eq::evaluation::{best_response_value, linear_swap_gap, ProfileAccumulator};
use utc_eq::game_core::{GameModel, Tfdp};
use utc_eq::games;
use utc_eq::learning::{
    run_dynamics, CfrState, DeviationGradient, DynConfig, LocalRegretMinimizer, RmKind,
};
use utc_eq::utc::{
    behavioral_to_sequence, canonicalize_rows, check_constraints, complete_matrix,
    count_pure_deviations, for_each_pure_deviation, BehavioralUtcStrategy, UtcDag, UtcDeviation,
};

fn model(game: utc_eq::game_core::ExtensiveFormGame) -> GameModel {
    GameModel::new(game).unwrap()
}

fn pure_by_labels(t: &Tfdp, chosen: &[&str]) -> Vec<f64> {
    let beh: Vec<Vec<f64>> = t
        .dps
        .iter()
        .map(|dp| {
            let mut dist = vec![0.0; dp.n_actions];
            let mut pick = 0;
            for a in 0..dp.n_actions {
                if chosen.contains(&t.seq_labels[dp.first_seq + a].as_str()) {
                    pick = a;
                }
            }
            dist[pick] = 1.0;
            dist
        })
        .collect();
    t.push_behavioral(&beh)
}

#[test]
fn criterion_1_generator_golden_counts() {
    let kuhn = games::kuhn(4, 5).unwrap().terminal_count();
    let leduc = games::leduc(3, 3, 2).unwrap().terminal_count();
    let sheriff = games::sheriff(10, 2, 2).unwrap().terminal_count();
    assert_eq!(kuhn, 3960);
    assert_eq!(leduc, 4500);
    assert_eq!(sheriff, 2376);
    println!("criterion 1: PASS — kuhn(4,5)={kuhn}, leduc(3,3,2)={leduc}, sheriff(10,2,2)={sheriff} terminal states");
}

#[test]
fn criterion_2_canonicalize_complete_round_trip() {
    // 200 random mixed behavioral deviations across the two DAGs: discard
    // B, canonicalize the rows of A, recompute B, and require a feasible
    // pair representing the same map on every pure mediator strategy.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_feas = 0.0f64;
    let mut worst_eval = 0.0f64;
    for game in [games::signal_guess(), games::kuhn(2, 3).unwrap()] {
        let m = model(game);
        let tfdp = m.tfdps[0].clone();
        let dag = UtcDag::self_pair(&tfdp);
        let pures = tfdp.enumerate_pure_strategies(1_000_000).unwrap();
        for _ in 0..100 {
            let beh = BehavioralUtcStrategy::random(&dag, &mut rng);
            let dev = behavioral_to_sequence(&beh, &dag).unwrap();
            let canon = canonicalize_rows(&dev.a, &tfdp).unwrap();
            let b = complete_matrix(&canon, &dag).unwrap();
            let rebuilt = UtcDeviation { a: canon, b };
            let rep = check_constraints(&rebuilt, &dag).unwrap();
            assert!(rep.max_residual <= 1e-9, "feasibility {}", rep.max_residual);
            worst_feas = worst_feas.max(rep.max_residual);
            for p in &pures {
                for s in 0..tfdp.d {
                    let orig: f64 = dev.a.row(s).iter().zip(p).map(|(x, y)| x * y).sum();
                    let new: f64 = rebuilt.a.row(s).iter().zip(p).map(|(x, y)| x * y).sum();
                    let diff = (orig - new).abs();
                    assert!(diff <= 1e-9, "evaluation drift {diff}");
                    worst_eval = worst_eval.max(diff);
                }
            }
        }
    }
    println!(
        "criterion 2: PASS — 200 round trips, max feasibility residual {worst_feas:.2e}, max evaluation drift {worst_eval:.2e}"
    );
}

#[test]
fn criterion_3_pure_deviations_map_pure_to_pure() {
    // Every pure deviation maps every pure strategy to an exact 0/1
    // feasible strategy.
    let mut total_plans = 0u64;
    let mut total_checks = 0u64;
    for (name, game, player) in [
        ("fig1", games::signal_guess(), 0usize),
        ("fig1", games::signal_guess(), 1),
        ("fig3", games::early_query(), 0),
        ("fig3", games::early_query(), 1),
    ] {
        let m = model(game);
        let tfdp = m.tfdps[player].clone();
        let dag = UtcDag::self_pair(&tfdp);
        let pures = tfdp.enumerate_pure_strategies(1_000_000).unwrap();
        let d = tfdp.d;
        let mut y = vec![0.0; d];
        let mut plans = 0u64;
        for_each_pure_deviation(&dag, |plan| {
            plans += 1;
            for p in &pures {
                for v in y.iter_mut() {
                    *v = 0.0;
                }
                for &(s, ms) in &plan.a_ones {
                    y[s] += p[ms];
                }
                for &v in &y {
                    assert!(v == 0.0 || v == 1.0, "{name} p{player}: entry {v} not 0/1");
                }
                assert_eq!(
                    tfdp.check_sequence_form(&y).unwrap(),
                    0.0,
                    "{name} p{player}: image infeasible"
                );
                total_checks += 1;
            }
        });
        assert_eq!(plans as u128, count_pure_deviations(&dag));
        total_plans += plans;
    }
    println!(
        "criterion 3: PASS — {total_plans} pure deviations, {total_checks} pure-to-pure images, all exact 0/1 and feasible"
    );
}

/// Correlated profile of the guessing game: uniform over the four pure
/// profiles (a_i, b_j, c1 | f_i, g_j).
fn guess_profile(m: &GameModel, acc: &mut ProfileAccumulator) {
    for i in 1..=2 {
        for j in 1..=2 {
            let x1 = pure_by_labels(
                &m.tfdps[0],
                &[&format!("A:a{i}"), &format!("B:b{j}"), "C:c1"],
            );
            let x2 = pure_by_labels(&m.tfdps[1], &[&format!("F:f{i}"), &format!("G:g{j}")]);
            let xs = vec![x1, x2];
            let gs: Vec<Vec<f64>> = (0..2)
                .map(|p| m.utility_gradient(p, &xs).unwrap())
                .collect();
            acc.accumulate(&xs, &gs);
        }
    }
}

/// Correlated profile of the early-query game: uniform over
/// (a1, b1 | c1) and (a1, b2 | c2).
fn early_query_profile(m: &GameModel, acc: &mut ProfileAccumulator) {
    for (b, c) in [("B:b1", "C:c1"), ("B:b2", "C:c2")] {
        let x1 = pure_by_labels(&m.tfdps[0], &["A:a1", b]);
        let x2 = pure_by_labels(&m.tfdps[1], &[c]);
        let xs = vec![x1, x2];
        let gs: Vec<Vec<f64>> = (0..2)
            .map(|p| m.utility_gradient(p, &xs).unwrap())
            .collect();
        acc.accumulate(&xs, &gs);
    }
}

#[test]
fn criterion_4_counterexample_gaps() {
    // Guessing game: the profitable plan enters unqueried and then reads
    // the guesses off recommendations, worth exactly 1/3 on average.
    let m = model(games::signal_guess());
    let dags: Vec<Arc<UtcDag>> = m.tfdps.iter().map(|t| Arc::new(UtcDag::self_pair(t))).collect();
    let mut acc = ProfileAccumulator::new(&[m.tfdps[0].d, m.tfdps[1].d]);
    guess_profile(&m, &mut acc);
    let gaps = linear_swap_gap(&acc, &dags).unwrap();
    assert!(
        (gaps.per_player[0] - 1.0 / 3.0).abs() <= 1e-9,
        "p1 gap {}",
        gaps.per_player[0]
    );
    assert!(gaps.per_player[1].abs() <= 1e-9, "p2 gap {}", gaps.per_player[1]);
    // Enumeration oracle agrees with the DP.
    let mut brute = f64::NEG_INFINITY;
    for_each_pure_deviation(&dags[0], |p| {
        brute = brute.max(p.score(&acc.players[0].g_outer, &ndarray::Array2::zeros((5, 5))));
    });
    let dp = gaps.per_player[0] * acc.t as f64 + acc.players[0].v_sum;
    assert!((brute - dp).abs() <= 1e-9, "dp {dp} vs enumeration {brute}");

    // Early-query game: querying the later decision point first is worth
    // exactly 1 per iteration.
    let m3 = model(games::early_query());
    let dags3: Vec<Arc<UtcDag>> = m3.tfdps.iter().map(|t| Arc::new(UtcDag::self_pair(t))).collect();
    let mut acc3 = ProfileAccumulator::new(&[m3.tfdps[0].d, m3.tfdps[1].d]);
    early_query_profile(&m3, &mut acc3);
    let gaps3 = linear_swap_gap(&acc3, &dags3).unwrap();
    assert!(
        (gaps3.per_player[0] - 1.0).abs() <= 1e-9,
        "p1 gap {}",
        gaps3.per_player[0]
    );
    let mut brute3 = f64::NEG_INFINITY;
    for_each_pure_deviation(&dags3[0], |p| {
        brute3 = brute3.max(p.score(&acc3.players[0].g_outer, &ndarray::Array2::zeros((2, 2))));
    });
    let dp3 = gaps3.per_player[0] * acc3.t as f64 + acc3.players[0].v_sum;
    assert!((brute3 - dp3).abs() <= 1e-9);
    println!(
        "criterion 4: PASS — guessing-game gaps (p1 {:.12}, p2 {:.2e}); early-query p1 gap {:.12}; both match enumeration",
        gaps.per_player[0], gaps.per_player[1], gaps3.per_player[0]
    );
}

#[test]
fn criterion_5_fixed_point_soundness_over_long_run() {
    // Every iteration of a 10,000-iteration run must produce a fixed
    // point within 1e-9 in both residuals (enforced online; the run
    // aborts otherwise).
    let m = model(games::kuhn(2, 3).unwrap());
    let cfg = DynConfig {
        iters: 10_000,
        log_every: 10_000,
        eps_fp: 1e-9,
        ..DynConfig::default()
    };
    let out = run_dynamics(&m, &cfg).unwrap();
    assert_eq!(out.summary.iterations, 10_000);
    assert!(out.summary.max_fp_residual <= 1e-9);
    assert!(out.summary.max_seq_residual <= 1e-9);
    println!(
        "criterion 5: PASS — 10,000 iterations on kuhn(2,3); max fixed-point residual {:.2e}, max sequence-form residual {:.2e}",
        out.summary.max_fp_residual, out.summary.max_seq_residual
    );
}

#[test]
fn criterion_6_convergence_ratios() {
    let m = model(games::kuhn(2, 3).unwrap());
    let cfg = DynConfig {
        iters: 10_000,
        log_every: 100,
        seed: 0,
        ..DynConfig::default()
    };
    let out = run_dynamics(&m, &cfg).unwrap();
    let gap = |t: u64| {
        out.rows
            .iter()
            .find(|r| r.t == t)
            .map(|r| r.gap_max)
            .unwrap()
    };
    let (g100, g10k) = (gap(100), gap(10_000));
    assert!(
        g10k <= g100 / 3.0,
        "kuhn(2,3): gap(10k)={g10k} vs gap(100)/3={}",
        g100 / 3.0
    );

    let m1 = model(games::signal_guess());
    let cfg1 = DynConfig {
        iters: 10_000,
        log_every: 10,
        seed: 0,
        ..DynConfig::default()
    };
    let out1 = run_dynamics(&m1, &cfg1).unwrap();
    let gap1 = |t: u64| {
        out1.rows
            .iter()
            .find(|r| r.t == t)
            .map(|r| r.gap_max)
            .unwrap()
    };
    let (g10, g10k1) = (gap1(10), gap1(10_000));
    assert!(
        g10k1 <= 0.05 * g10,
        "guessing game: gap(10k)={g10k1} vs 0.05*gap(10)={}",
        0.05 * g10
    );
    println!(
        "criterion 6: PASS — kuhn(2,3) gap {g100:.4} -> {g10k:.6} (ratio {:.3}); guessing game gap {g10:.4} -> {g10k1:.6} (ratio {:.4})",
        g10k / g100,
        g10k1 / g10
    );
}

#[test]
fn criterion_7_dp_matches_enumeration() {
    // Best-response DP equals brute-force vertex maximization on 100
    // random gradient matrices per DAG.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let fig1 = model(games::signal_guess());
    let fig3 = model(games::early_query());
    let cases: Vec<(&str, Arc<Tfdp>)> = vec![
        ("fig1", fig1.tfdps[0].clone()),
        ("fig3", fig3.tfdps[0].clone()),
        ("single", Arc::new(Tfdp::single_decision(3))),
    ];
    for (name, tfdp) in cases {
        let dag = UtcDag::self_pair(&tfdp);
        let n_grads = 100;
        let grads: Vec<DeviationGradient> = (0..n_grads)
            .map(|_| {
                let mut g = DeviationGradient::zeros(&dag);
                for v in g.g_a.iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
                g
            })
            .collect();
        let dp_vals: Vec<f64> = grads
            .iter()
            .map(|g| {
                let (v, arg) = best_response_value(&dag, g);
                // The argmax plan is feasible and achieves the value.
                assert_eq!(check_constraints(&arg, &dag).unwrap().max_residual, 0.0);
                assert!((g.score(&arg) - v).abs() <= 1e-9);
                v
            })
            .collect();
        // One streaming enumeration pass scores all gradients at once.
        let mut brute = vec![f64::NEG_INFINITY; n_grads];
        for_each_pure_deviation(&dag, |p| {
            for (k, g) in grads.iter().enumerate() {
                let s = p.score(&g.g_a, &g.g_b);
                if s > brute[k] {
                    brute[k] = s;
                }
            }
        });
        for (k, (&d, &b)) in dp_vals.iter().zip(&brute).enumerate() {
            let diff = (d - b).abs();
            assert!(diff <= 1e-9, "{name} gradient {k}: dp {d} vs brute {b}");
            worst = worst.max(diff);
        }
    }
    println!("criterion 7: PASS — DP equals enumeration on 300 random gradients, max |diff| {worst:.2e}");
}

#[test]
fn criterion_8_single_decision_matches_vertex_regret_matching() {
    // On one decision point with 3 actions, the DAG learner's measured
    // deviation regret after 5,000 adversarial-random rounds must be
    // within 10% of plain regret matching on the enumerated vertex set
    // fed the same utility stream. On any single stream the two regrets
    // differ by a mean-zero fluctuation with ~25% relative spread (both
    // are ~sqrt(T) quantities), so the comparison is made on the paired
    // mean over independent streams, which pins the systematic gap.
    let tfdp = Arc::new(Tfdp::single_decision(3));
    let dag = Arc::new(UtcDag::self_pair(&tfdp));
    let mut vertices = Vec::new();
    for_each_pure_deviation(&dag, |p| vertices.push(p.clone()));
    assert_eq!(vertices.len(), 30);

    let rounds = 5000;
    let streams = 60;
    let mut cfr_mean = 0.0;
    let mut vrm_mean = 0.0;
    let mut worst_single = 0.0f64;
    for stream in 0..streams {
        let mut rng = ChaCha8Rng::seed_from_u64(800 + stream);
        let mut cfr = CfrState::new(dag.clone(), RmKind::Rm);
        let mut cfr_total = 0.0;
        let mut vertex_totals = vec![0.0f64; vertices.len()];
        let mut vrm = LocalRegretMinimizer::new(RmKind::Rm, vertices.len());
        let mut vrm_total = 0.0;
        for _ in 0..rounds {
            let mut g = DeviationGradient::zeros(&dag);
            for v in g.g_a.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            let dev = cfr.recommend();
            cfr_total += g.score(&dev);
            let dist = vrm.next_strategy().to_vec();
            let utils: Vec<f64> = vertices.iter().map(|v| v.score(&g.g_a, &g.g_b)).collect();
            vrm_total += dist.iter().zip(&utils).map(|(p, u)| p * u).sum::<f64>();
            for (tot, u) in vertex_totals.iter_mut().zip(&utils) {
                *tot += u;
            }
            cfr.observe(&g).unwrap();
            vrm.observe(&utils);
        }
        let best = vertex_totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cfr_regret = best - cfr_total;
        let vrm_regret = best - vrm_total;
        cfr_mean += cfr_regret / streams as f64;
        vrm_mean += vrm_regret / streams as f64;
        worst_single = worst_single.max((cfr_regret - vrm_regret).abs() / vrm_regret.abs());
    }
    let rel = (cfr_mean - vrm_mean).abs() / vrm_mean.abs();
    assert!(
        rel <= 0.10,
        "mean regret mismatch: dag {cfr_mean:.3} vs vertex rm {vrm_mean:.3} (rel {rel:.3})"
    );
    println!(
        "criterion 8: PASS — mean deviation regret over {streams} streams of 5,000 rounds: DAG learner {cfr_mean:.2}, vertex RM {vrm_mean:.2}, relative difference {:.1}% (worst single-stream spread {:.0}%)",
        rel * 100.0,
        worst_single * 100.0
    );
}
