//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Seeds are fixed constants so every run checks the same instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use repsel::core::{ProgramSpace, DEFAULT_SPACE_CAP};
use repsel::domains::{DfaSpace, DrawingSpace, GrammarConfig, OrderingSpace, SpaceConfig};
use repsel::harness::{
    gen_dfa_dataset, gen_drawing_dataset, gen_ordering_dataset, run_method, Method, MethodParams,
};
use repsel::predictor::{
    train_committee, Arch, LayerWiring, Mlp, NnPredictor, OutputKind, Predictor, Target,
    TrainConfig,
};
use repsel::selection::{anticipation_select, h1_dfa_select, hasse_select};
use repsel::solver::fits;
use repsel::verify::{claims, greedy_bound, is_representative, minimal_subset, Tri};

fn report(criterion: u32, pass: bool, detail: String) {
    println!("acceptance criterion {criterion}: {} - {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion}: {detail}");
}

#[test]
fn criterion_1_greedy_count_subsets_are_representative() {
    let opts = claims::ClaimOpts { seed: 1001, ..Default::default() };
    let r = claims::claim1_ordering(50, 5, (10, 20), &opts).unwrap();
    report(
        1,
        r.trials == 50 && r.failures == 0,
        format!("greedy subsets representative on {}/{} ordering tasks", r.trials - r.failures, r.trials),
    );
}

#[test]
fn criterion_2_exact_predictor_argmin_matches_count_argmin() {
    let opts = claims::ClaimOpts { seed: 1002, ..Default::default() };
    let r = claims::claim3_ordering(100, (3, 5), &opts).unwrap();
    report(
        2,
        r.trials == 100 && r.failures == 0,
        format!("argmin agreement on {}/{} random selection states", r.trials - r.failures, r.trials),
    );
}

#[test]
fn criterion_3_prune_is_monotone_and_submodular() {
    let opts = claims::ClaimOpts { seed: 1003, ..Default::default() };
    let (mono, submod) = claims::lemma21_ordering(4, 5, &opts).unwrap();
    report(
        3,
        mono.failures == 0 && submod.failures == 0 && mono.trials == 243 && submod.trials == 1215,
        format!(
            "monotone {}/{} chains, submodular {}/{} marginals, exhaustive",
            mono.trials - mono.failures,
            mono.trials,
            submod.trials - submod.failures,
            submod.trials
        ),
    );
}

#[test]
fn criterion_4_greedy_size_bound() {
    let quoted = greedy_bound(1.0e6, 20).unwrap();
    let value_ok = quoted > 269.0 && quoted < 270.0;
    let opts = claims::ClaimOpts { seed: 1004, ..Default::default() };
    let r = claims::claim2_ordering(30, (3, 5), (5, 15), &opts).unwrap();
    report(
        4,
        value_ok && r.trials == 30 && r.failures == 0,
        format!(
            "bound(1e6, 20) = {quoted:.4}; greedy within bound on {}/{} tasks",
            r.trials - r.failures,
            r.trials
        ),
    );
}

#[test]
fn criterion_5_hasse_is_representative_and_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let mut ok = 0;
    let tasks = 30;
    for _ in 0..tasks {
        let n = rng.gen_range(4..=6usize);
        let space = OrderingSpace::new(n).unwrap();
        let max_size = n * (n - 1);
        let size = rng.gen_range(6..=max_size.min(18));
        let gen = gen_ordering_dataset(&space, size, rng.gen()).unwrap();
        let hasse = hasse_select(&gen.data).unwrap();
        let representative =
            is_representative(&space, &gen.data, &hasse, u64::MAX).unwrap().verdict == Tri::True;
        let minimal = minimal_subset(&space, &gen.data, DEFAULT_SPACE_CAP).unwrap();
        if representative && hasse.len() == minimal.len() {
            ok += 1;
        }
    }
    report(5, ok == tasks, format!("hasse representative and minimum-size on {ok}/{tasks} datasets"));
}

#[test]
fn criterion_6_every_method_reaches_total_consistency_on_dfa() {
    let mut tc = TrainConfig::new(10_000, 1e-4, 6001);
    tc.dfa_len_range = (1, 8);
    let model =
        train_committee(&SpaceConfig::Dfa { num_states: 4 }, Arch::dfa_default(), &tc).unwrap();
    let nn = NnPredictor::new(model);

    let space = DfaSpace::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6002);
    let methods = [
        Method::Full,
        Method::Cegis,
        Method::Rcegis,
        Method::Acegis,
        Method::RandCegis,
        Method::H1Cegis,
        Method::Ours,
    ];
    let tasks = 50;
    let mut consistent = 0;
    let mut total = 0;
    for t in 0..tasks {
        let gen = gen_dfa_dataset(&space, 200, (1, 8), rng.gen()).unwrap();
        for method in methods {
            let params =
                MethodParams { seed: t as u64, budget: u64::MAX, fraction: 0.2, tau: 0.95 };
            let out = run_method(
                &space,
                &gen.data,
                || Ok(h1_dfa_select(&gen.data, t as u64)),
                Some(&nn as &dyn Predictor<DfaSpace>),
                method,
                &params,
            )
            .unwrap();
            total += 1;
            if fits(&space, &out.program, &gen.data) {
                consistent += 1;
            }
        }
    }
    report(
        6,
        consistent == total && total == tasks * methods.len(),
        format!("synthesized programs consistent with all 200 strings in {consistent}/{total} runs"),
    );
}

#[test]
fn criterion_7_analytic_gradients_match_finite_differences() {
    fn max_rel_error(mlp: &mut Mlp, x: &[f64], target: Target) -> f64 {
        let (_, grads) = mlp.loss_and_grads(x, target).unwrap();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for li in 0..mlp.layers.len() {
            for (kind, len) in [(0usize, mlp.layers[li].w.len()), (1, mlp.layers[li].b.len())] {
                for pi in 0..len {
                    let read = |m: &Mlp| if kind == 0 { m.layers[li].w[pi] } else { m.layers[li].b[pi] };
                    let orig = read(mlp);
                    let write = |m: &mut Mlp, v: f64| {
                        if kind == 0 {
                            m.layers[li].w[pi] = v;
                        } else {
                            m.layers[li].b[pi] = v;
                        }
                    };
                    write(mlp, orig + h);
                    let (lp, _) = mlp.loss_and_grads(x, target).unwrap();
                    write(mlp, orig - h);
                    let (lm, _) = mlp.loss_and_grads(x, target).unwrap();
                    write(mlp, orig);
                    let fd = (lp - lm) / (2.0 * h);
                    let a = if kind == 0 { grads.w[li][pi] } else { grads.b[li][pi] };
                    let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1.0);
                    worst = worst.max(rel);
                }
            }
        }
        worst
    }

    let families: Vec<(&str, Arch)> = vec![
        ("ordering_fc", Arch::OrderingFc { n: 3, hidden: vec![8, 8] }),
        ("dfa_ff", Arch::DfaFf { k: 2, max_len: 4, encoder: 8, head: 8 }),
        ("draw_conv", Arch::DrawConv { window: 3, hidden: 5, width: 8, height: 8 }),
    ];
    let mut worst_overall: f64 = 0.0;
    let mut checked = 0;
    for (name, arch) in &families {
        for trial in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(7000 + trial);
            // Alternate committee and anticipation forms.
            let (mut mlp, input_dim, target) = if trial % 2 == 0 {
                let m = Mlp::new(
                    arch.committee_input_dim(),
                    &arch.committee_wirings(),
                    OutputKind::Softmax,
                    &mut rng,
                );
                (m, arch.committee_input_dim(), Target::Class((trial % 2) as usize))
            } else {
                let m = Mlp::new(
                    arch.anticipation_input_dim(),
                    &arch.anticipation_wirings(),
                    OutputKind::Sigmoid,
                    &mut rng,
                );
                (m, arch.anticipation_input_dim(), Target::Binary(trial % 4 == 1))
            };
            let x: Vec<f64> = (0..input_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let rel = max_rel_error(&mut mlp, &x, target);
            worst_overall = worst_overall.max(rel);
            checked += 1;
            assert!(rel < 1e-4, "{name} trial {trial}: relative error {rel}");
        }
    }
    report(
        7,
        worst_overall < 1e-4 && checked == 60,
        format!("{checked} networks checked, worst gradient relative error {worst_overall:.2e}"),
    );
}

#[test]
fn criterion_8_trained_net_selects_representative_ordering_subsets() {
    let n = 7usize;
    let space = OrderingSpace::new(n).unwrap();
    let cfg = TrainConfig::new(200_000, 1e-4, 8001);
    let model =
        train_committee(&SpaceConfig::Ordering { n }, Arch::ordering_default(n), &cfg).unwrap();
    let predictor = NnPredictor::new(model);

    let mut rng = ChaCha8Rng::seed_from_u64(8002);
    let universe = n * (n - 1);
    let tasks = 100;
    let mut representative = 0usize;
    let mut selected_total = 0usize;
    let mut optimal_total = 0usize;
    for _ in 0..tasks {
        let size =
            ((rng.gen_range(0.3..=1.0) * universe as f64).round() as usize).clamp(2, universe);
        let gen = gen_ordering_dataset(&space, size, rng.gen()).unwrap();
        let sel = anticipation_select::<OrderingSpace, _>(&predictor, &gen.data, 0.95, gen.data.len())
            .unwrap();
        if is_representative(&space, &gen.data, &sel.subset, u64::MAX).unwrap().verdict
            == Tri::True
        {
            representative += 1;
        }
        selected_total += sel.subset.len();
        optimal_total += hasse_select(&gen.data).unwrap().len();
    }
    let mean_selected = selected_total as f64 / tasks as f64;
    let mean_optimal = optimal_total as f64 / tasks as f64;
    report(
        8,
        representative * 100 >= 60 * tasks && mean_selected <= 3.0 * mean_optimal,
        format!(
            "representative on {representative}/{tasks} tasks (need >=60%), mean size {mean_selected:.2} vs optimal {mean_optimal:.2} ({:.2}x, need <=3x)",
            mean_selected / mean_optimal
        ),
    );
}

#[test]
fn criterion_9_drawing_pipeline_selects_few_pixels_and_recovers_targets() {
    let (w, h) = (16u8, 16u8);
    let grammar = GrammarConfig::desk();
    let space = DrawingSpace::new(w, h, grammar.clone()).unwrap();
    let cfg = TrainConfig::new(300_000, 1e-3, 9001);
    let model = train_committee(
        &SpaceConfig::Drawing { width: w, height: h, grammar },
        Arch::draw_default(w, h),
        &cfg,
    )
    .unwrap();
    let predictor = NnPredictor::new(model);

    let mut rng = ChaCha8Rng::seed_from_u64(9002);
    let tasks = 20;
    let pixels = w as usize * h as usize;
    let mut under_budget = 0usize;
    let mut exact = 0usize;
    for t in 0..tasks {
        let gen = gen_drawing_dataset(&space, rng.gen()).unwrap();
        let out = repsel::cegis::run_ours(
            &space,
            &gen.data,
            &predictor,
            0.95,
            repsel::solver::CeStrategy::Canonical,
            t as u64,
            u64::MAX,
        )
        .unwrap();
        let used = out.initial_subset.len() + out.counterexamples_added.len();
        if used * 100 <= 40 * pixels {
            under_budget += 1;
        }
        if space.render(&out.program) == space.render(&gen.hidden) {
            exact += 1;
        }
    }
    report(
        9,
        under_budget * 100 >= 80 * tasks && exact == tasks,
        format!(
            "selected <=40% of pixels on {under_budget}/{tasks} tasks (need >=80%), exact render match {exact}/{tasks} (need all)"
        ),
    );
}
