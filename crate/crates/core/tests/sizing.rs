use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rec_sizer::sizing::{
    brute_force_oracle, check_solution, recompute_net_profit, solve_bnb, BnbOptions, SizingProblem,
    SizingSolution,
};
use rec_sizer::synth::random_tiny_problem;
use rec_sizer::Error;

fn tiny(rng: &mut ChaCha8Rng) -> SizingProblem {
    random_tiny_problem(rng)
}

fn exact() -> BnbOptions {
    BnbOptions {
        gap_tol: 0.0,
        ..BnbOptions::default()
    }
}

fn assert_sound(p: &SizingProblem, s: &SizingSolution) {
    let v = check_solution(p, s);
    assert!(v.is_empty(), "violations: {v:?}");
    let np = recompute_net_profit(p, s).unwrap();
    assert!(
        (np - s.objective).abs() <= 1e-6 * s.objective.abs().max(1.0),
        "{np} vs {}",
        s.objective
    );
    for part in &s.dispatch.participants {
        for (c, d) in part.p_charge.iter().zip(&part.p_discharge) {
            assert!(c * d <= 1e-6);
        }
    }
}

#[test]
fn matches_oracle_on_random_tiny_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut with_battery = 0;
    for case in 0..20 {
        let p = tiny(&mut rng);
        let oracle = brute_force_oracle(&p).unwrap();
        let bnb = solve_bnb(&p, &exact()).unwrap();
        assert!(
            (oracle.objective - bnb.objective).abs() <= 1e-6 * oracle.objective.abs().max(1.0),
            "case {case}: oracle {} ({:?}/{:?}) vs bnb {} ({:?}/{:?})",
            oracle.objective,
            oracle.n_pv,
            oracle.n_bess,
            bnb.objective,
            bnb.n_pv,
            bnb.n_bess
        );
        assert!(bnb.stats.proven);
        assert_sound(&p, &oracle);
        assert_sound(&p, &bnb);
        with_battery += usize::from(bnb.n_bess.iter().any(|&b| b > 0));
    }
    assert!(with_battery > 0, "no instance installed a battery");
}

#[test]
fn zero_roof_gets_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let mut p = tiny(&mut rng);
        p.participants[0].max_panels = 0;
        p.participants[0].max_batteries = 1;
        let s = solve_bnb(&p, &exact()).unwrap();
        assert_eq!((s.n_pv[0], s.n_bess[0]), (0, 0));
        let o = brute_force_oracle(&p).unwrap();
        assert_eq!((o.n_pv[0], o.n_bess[0]), (0, 0));
    }
}

#[test]
fn zero_demand_installs_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut p = tiny(&mut rng);
    p.economics.season_days = 91.0;
    for part in &mut p.participants {
        part.demand.iter_mut().for_each(|d| *d = 0.0);
        part.max_panels = 3;
    }
    let s = solve_bnb(&p, &exact()).unwrap();
    assert!(s.n_pv.iter().chain(&s.n_bess).all(|&n| n == 0));
    assert_eq!(s.objective, 0.0);
    assert_eq!(brute_force_oracle(&p).unwrap().objective, 0.0);
}

#[test]
fn generous_free_sun_fills_the_roof() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut p = tiny(&mut rng);
    p.participants.truncate(1);
    p.participants[0].zeta = 1.0;
    p.participants[0].demand = vec![1.0; p.hours()];
    p.participants[0].max_panels = 3;
    p.pv.cost_eur_per_kw = 0.0;
    p.pv.opex_eur_per_kw_year = 0.0;
    p.pv.ca_eur_per_kw_year = 0.0;
    let o = brute_force_oracle(&p).unwrap();
    assert_eq!(o.n_pv[0], 3);
    assert_eq!(solve_bnb(&p, &exact()).unwrap().n_pv[0], 3);
}

#[test]
fn oracle_rejects_large_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut p = tiny(&mut rng);
    p.participants[0].max_panels = 4;
    assert!(matches!(
        brute_force_oracle(&p),
        Err(Error::OracleLimitExceeded(_))
    ));
}

#[test]
fn larger_roof_never_lowers_profit() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..6 {
        let mut p = tiny(&mut rng);
        p.participants[0].max_panels = 1;
        let mut last = f64::NEG_INFINITY;
        for roof in 1..=3 {
            p.participants[0].max_panels = roof;
            let s = solve_bnb(&p, &exact()).unwrap();
            assert!(s.objective >= last - 1e-9 * last.abs().max(1.0));
            last = s.objective;
        }
    }
}

#[test]
fn higher_share_rate_never_lowers_profit() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..6 {
        let mut p = tiny(&mut rng);
        let base = solve_bnb(&p, &exact()).unwrap().objective;
        p.share.iter_mut().for_each(|s| *s *= 1.5);
        let raised = solve_bnb(&p, &exact()).unwrap().objective;
        assert!(raised >= base - 1e-9 * base.abs().max(1.0));
    }
}

#[test]
fn thread_count_does_not_change_the_result() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..4 {
        let p = tiny(&mut rng);
        let one = solve_bnb(&p, &exact()).unwrap();
        for threads in [2, 3, 8] {
            let many = solve_bnb(&p, &BnbOptions { threads, ..exact() }).unwrap();
            assert_eq!(
                serde_json::to_string(&one).unwrap(),
                serde_json::to_string(&many).unwrap()
            );
        }
    }
}

#[test]
fn payback_limit_is_respected() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..6 {
        let mut p = tiny(&mut rng);
        p.economics.max_payback_years = Some(8);
        let s = solve_bnb(&p, &exact()).unwrap();
        let o = brute_force_oracle(&p).unwrap();
        assert!((s.objective - o.objective).abs() <= 1e-6 * o.objective.abs().max(1.0));
        assert_sound(&p, &s);
    }
}

#[test]
fn node_limit_reports_unproven() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let p = tiny(&mut rng);
    let s = solve_bnb(
        &p,
        &BnbOptions {
            node_limit: Some(0),
            ..exact()
        },
    )
    .unwrap();
    assert!(!s.stats.proven);
    assert_eq!(s.objective, 0.0);
}
