mod common;

use common::{engine, load, total};
use fockrec::fock::{compare, OccVec};
use fockrec::oracles::*;
use fockrec::scalar::Amp;
use fockrec::semantics::{CapSpec, SkipConvention};
use fockrec::symmetry::{is_symmetric, symmetrise_operator};

const TOL: f64 = 1e-12;

#[test]
fn unidirectional_closed_form_matches_each_approximation() {
    let e = engine("rhw.qr", CapSpec::uniform(6), SkipConvention::Paper);
    let g = WalkGates::from_module(e.module()).unwrap();
    for n in 0..=5 {
        let q = e.syntactic_approx("X", n).unwrap();
        let sem = e.interpret_generalised(&q).unwrap();
        let cf = unidirectional_closed_form(e.space(), &g, n).unwrap();
        let r = compare(&sem, &cf, TOL).unwrap();
        assert!(r.pass, "n = {n}: {}", r.max_diff);
    }
    let fix = e.kleene_fixpoint().unwrap();
    let cf = unidirectional_closed_form(e.space(), &g, 6).unwrap();
    assert!(compare(&fix.env[0], &cf, TOL).unwrap().pass);
}

#[test]
fn bidirectional_closed_form_and_supports() {
    let e = engine("ddrhw.qr", total(5), SkipConvention::Paper);
    let g = WalkGates::from_module(e.module()).unwrap();
    let (x, y) = bidirectional_closed_form(e.space(), &g).unwrap();
    let fix = e.kleene_fixpoint().unwrap();
    assert!(compare(&fix.env[0], &x, TOL).unwrap().pass);
    assert!(compare(&fix.env[1], &y, TOL).unwrap().pass);
}

#[test]
fn symmetrised_walks_match_closed_forms() {
    let e = engine("rhw.qr", CapSpec::uniform(4), SkipConvention::Paper);
    let g = WalkGates::from_module(e.module()).unwrap();
    let op = e.operational_semantics().unwrap();
    let sym = symmetrise_operator(&op.env[0], 8).unwrap();
    assert!(compare(&sym, &symmetrised_unidirectional(e.space(), &g).unwrap(), TOL).unwrap().pass);
    assert!(is_symmetric(&sym, TOL));
    assert!(compare(&symmetrise_operator(&sym, 8).unwrap(), &sym, TOL).unwrap().pass);

    let e = engine("ddrhw.qr", CapSpec::uniform(4), SkipConvention::Paper);
    let (x, y) = symmetrised_bidirectional(e.space(), &g).unwrap();
    let op = e.operational_semantics().unwrap();
    assert!(compare(&symmetrise_operator(&op.env[0], 8).unwrap(), &x, TOL).unwrap().pass);
    assert!(compare(&symmetrise_operator(&op.env[1], 8).unwrap(), &y, TOL).unwrap().pass);
}

#[test]
fn loop_closed_forms() {
    for (name, commuting) in [("loop.qr", true), ("loop_cnot.qr", true), ("loop_noncommuting.qr", false)] {
        let e = engine(name, CapSpec::uniform(4), SkipConvention::FullIdentity);
        let (w, u) = loop_gates(e.module()).unwrap();
        let fix = e.kleene_fixpoint().unwrap();
        let inter = loop_closed_form(e.space(), &w, &u, LoopOrder::Interleaved).unwrap();
        let paper = loop_closed_form(e.space(), &w, &u, LoopOrder::Paper).unwrap();
        assert!(compare(&fix.env[0], &inter, TOL).unwrap().pass, "{name}");
        let r = compare(&fix.env[0], &paper, TOL).unwrap();
        println!("{name}: paper order max diff {:e}", r.max_diff);
        assert_eq!(r.pass, commuting, "{name}");
        if commuting {
            let sym = symmetrise_operator(&fix.env[0], 8).unwrap();
            let scf = loop_symmetric_closed_form(e.space(), &w, &u, LoopOrder::Paper).unwrap();
            assert!(compare(&sym, &scf, TOL).unwrap().pass, "{name} symmetric");
        }
    }
}

#[test]
fn loop_with_product_toss_is_the_choice_loop() {
    let a = engine("loop_reduced.qr", CapSpec::uniform(4), SkipConvention::Paper).kleene_fixpoint().unwrap();
    let b = engine("recq2.qr", CapSpec::uniform(4), SkipConvention::Paper).kleene_fixpoint().unwrap();
    assert!(compare(&a.env[0], &b.env[0], TOL).unwrap().pass);
}

#[test]
fn paper_skip_moves_the_first_loop_term_up_one_shell() {
    let e = engine("loop.qr", CapSpec::uniform(4), SkipConvention::Paper);
    let fix = e.kleene_fixpoint().unwrap();
    assert!(fix.env[0].block(&OccVec(vec![1])).is_none());
}

#[test]
fn interference_cancels_a_pair_after_three_steps() {
    let m = load("qintw.qr");
    let sim = Simulator::<f64>::new(&m).unwrap();
    let init = SimInit { coins: vec![("d".into(), vec!["L".into()])], principal: vec![] };
    let steps = sim.run(&init, 3).unwrap();
    let got: Vec<(String, String, f64)> = steps[3]
        .iter()
        .map(|c| (sim.coin_labels(c)[0][0].clone(), sim.principal_label(c), c.amplitude.re * 8f64.sqrt()))
        .collect();
    println!("{got:?}");
    let expect = [("L", "-3", 1.0), ("R", "-1", 1.0), ("L", "-1", 2.0), ("L", "1", -1.0), ("R", "3", 1.0)];
    assert_eq!(got.len(), expect.len());
    for (l, p, a) in expect {
        assert!(got.iter().any(|(gl, gp, ga)| gl == l && gp == p && (ga - a).abs() < TOL), "{l} {p} {a}");
    }
    assert!(!got.iter().any(|(l, p, _)| l == "R" && p == "1"));
}

#[test]
fn simulator_triangulates_with_unfolding() {
    for name in ["rhw.qr", "ddrhw.qr", "two_coin.qr", "qutrit.qr", "loop.qr", "drhw.qr", "qintw.qr"] {
        let m = load(name);
        let e = engine(name, CapSpec::uniform(5), SkipConvention::FullIdentity);
        let sim = Simulator::<f64>::new(&m).unwrap();
        let steps = sim.run(&SimInit::default(), 5).unwrap();
        for s in &steps {
            assert!((Simulator::weight(s) - 1.0).abs() < 1e-10, "{name}");
        }
        let start = sim.initial(&SimInit::default()).unwrap().principal;
        for depth in 1..=5 {
            let got = sim.terminated_vectors(&steps[depth], e.space());
            let q = e.syntactic_approx(e.decl().equations.keys().next().unwrap(), depth).unwrap();
            let sem = e.interpret_generalised(&q).unwrap();
            for n in e.space().occupations() {
                let Some(b) = sem.block(&n) else {
                    assert!(got.get(&n).is_none_or(|v| v.iter().all(|a| a.norm() < TOL)), "{name} {n:?}");
                    continue;
                };
                let mut v = vec![Amp::new(0.0, 0.0); b.cols()];
                v[start] = Amp::new(1.0, 0.0);
                let want = b.matvec(&v);
                let have = got.get(&n).cloned().unwrap_or_else(|| vec![Amp::new(0.0, 0.0); want.len()]);
                let diff = want.iter().zip(&have).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(diff < TOL, "{name} depth {depth} block {n:?}: {diff}");
            }
        }
    }
}

#[test]
fn swapped_interference_walk_keeps_its_weight() {
    let sim = Simulator::<f64>::new(&load("qintw1.qr")).unwrap();
    let steps = sim.run(&SimInit::default(), 4).unwrap();
    for s in &steps {
        assert!((Simulator::weight(s) - 1.0).abs() < 1e-10);
    }
}
