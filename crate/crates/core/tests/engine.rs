mod common;

use std::collections::BTreeMap;

use fil_abm::config::{InitialTranche, StrategyKind};
use fil_abm::engine::{distribute_rewards, run, Simulation};
use fil_abm::power::{AgentId, PowerKind};
use fil_abm::units::{Bytes, EIB, PIB};
use proptest::prelude::*;

#[test]
fn decisions_ignore_same_day_state() {
    let mut sim = Simulation::new(common::mixed_config(60)).unwrap();
    let outsider = AgentId::from("dca");
    while !sim.is_finished() {
        sim.begin_day();
        let obs = sim.observe().unwrap();
        let frozen = sim.decide(&obs).unwrap();
        sim.power_mut().onboard(&outsider, 50.0 * PIB, 0.5, 30).unwrap();
        let again = sim.observe().unwrap();
        assert_eq!(obs, again, "day {}", obs.day);
        assert_eq!(frozen, sim.decide(&again).unwrap());
        sim.apply(&obs, frozen).unwrap();
    }
}

#[test]
fn two_identical_agents_match_one_doubled() {
    let single = common::config(200, 120, 0.1, vec![common::agent("a", StrategyKind::Npv, 4.0)]);
    let pair = common::config(
        200,
        120,
        0.1,
        vec![common::agent("a", StrategyKind::Npv, 2.0), common::agent("b", StrategyKind::Npv, 2.0)],
    );
    let x = run(&single).unwrap();
    let y = run(&pair).unwrap();
    for (a, b) in x.network.iter().zip(&y.network) {
        assert_eq!(a.qap, b.qap);
        assert!((a.circulating - b.circulating).abs() <= 1e-9 * a.circulating);
    }
}

#[test]
fn seeded_start_reports_the_seed() {
    let mut idle = common::agent("a", StrategyKind::Dca, 0.0);
    idle.candidate_durations = vec![30];
    let mut c = common::config(500, 3, 0.1, vec![idle]);
    c.initial_state.power = vec![
        InitialTranche { owner: "a".into(), rb: Bytes::eib(2.0), kind: PowerKind::Cc, expiry_day: 700, pledge: 1e6 },
        InitialTranche { owner: "a".into(), rb: Bytes::eib(1.0), kind: PowerKind::FilPlus, expiry_day: 800, pledge: 2e6 },
    ];
    c.initial_state.capped_rbp_cumsum = Bytes::eib(800.0);
    let t = run(&c).unwrap();
    assert_eq!(t.network[0].rbp, 3.0 * EIB);
    assert_eq!(t.network[0].qap, 12.0 * EIB);
    assert_eq!(t.network[0].locked_collateral, 3e6);
    assert!(t.network[0].capped_rbp_cumsum > 800.0 * EIB);
}

#[test]
fn no_agents_baseline_minting_stays_flat() {
    let t = run(&common::config(300, 50, 0.1, vec![])).unwrap();
    let p = fil_abm::supply::SupplyParams::default();
    for r in &t.network {
        let simple = p.simple_minting_cumulative(r.day as f64).unwrap();
        assert!((r.minted_cum - simple).abs() <= 1e-9 * simple);
        assert!(r.vested_cum > 0.0);
    }
}

#[test]
fn rate_schedule_must_cover_the_run() {
    let mut c = common::config(200, 20, 0.1, vec![common::agent("a", StrategyKind::Npv, 1.0)]);
    c.external_rate.end_day = Some(210);
    let err = run(&c).unwrap_err();
    assert!(err.to_string().contains("day 210"), "{err}");
}

#[test]
fn borrow_cost_tracks_rate() {
    let t = |rate| {
        let tr = run(&common::config(200, 60, rate, vec![common::agent("a", StrategyKind::Dca, 1.0)])).unwrap();
        tr.agents.last().unwrap().borrow_cost_cum
    };
    assert_eq!(t(0.0), 0.0);
    assert!(t(0.3) > t(0.1));
}

proptest! {
    #[test]
    fn payouts_sum_to_issuance(shares in prop::collection::vec(0.0f64..1e20, 1..20), dm in 0.0f64..1e6) {
        let map: BTreeMap<AgentId, f64> =
            shares.iter().enumerate().map(|(i, s)| (AgentId::new(format!("a{i:02}")), *s)).collect();
        let total: f64 = shares.iter().sum();
        let paid = distribute_rewards(dm, &map, total);
        let sum: f64 = paid.values().sum();
        if total > 0.0 {
            prop_assert!((sum - dm).abs() <= 1e-12 * dm.max(f64::MIN_POSITIVE));
        } else {
            prop_assert_eq!(sum, 0.0);
        }
    }
}
