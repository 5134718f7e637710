use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use super::*;
use crate::calibration::calibrate;
use crate::model::{defaults, ByPhase, IncidenceTable, LifeTable, Phase, Stage, TransitionParams, MIN_AGE};

fn flat_life_table(q: f64) -> LifeTable {
    LifeTable::new((MIN_AGE..=120).map(|a| (a, q))).unwrap()
}

fn params() -> TransitionParams {
    calibrate(defaults::transition_params(flat_life_table(0.01))).unwrap()
}

fn zero_params() -> TransitionParams {
    let mut p = defaults::transition_params(flat_life_table(0.0));
    p.incidence = IncidenceTable::new(vec![(20, 0.0)]).unwrap();
    p.progression_k = 0.0;
    p.healing_lambda = Some(ByPhase::new([0.0; 4], [0.0; 4]));
    p.death_lambda_diagnosed = ByPhase::new([0.0; 4], [0.0; 4]);
    p.death_lambda_undiagnosed = [0.0; 4];
    p.annual_diagnosis_prob = ByPhase::new(0.0, 0.0);
    p
}

fn config(total_cycles: u32) -> SimulationConfig {
    SimulationConfig {
        total_cycles,
        replications: 1,
        ..SimulationConfig::default()
    }
}

fn mixed_cohort(n: usize) -> Vec<Person> {
    (0..n)
        .map(|i| {
            let state = HealthState::ALL[i % 9];
            Person::new(25 + (i as u32 * 7) % 70, state)
        })
        .collect()
}

fn compile(p: &TransitionParams, cohort: &[Person], cycles: u32) -> TransitionModel {
    TransitionModel::compile(p, max_reachable_age(cohort, cycles).max(MIN_AGE), cycles).unwrap()
}

fn run(cohort: &[Person], p: &TransitionParams, cycles: u32, covid: bool, seed: u64) -> CostLedger {
    let model = compile(p, cohort, cycles);
    let (start, end) = if cycles >= 113 { (61, 113) } else { (0, cycles) };
    let scenario = ScenarioConfig::new(covid, start, end, cycles).unwrap();
    run_replication(cohort, &model, &CostParams::default(), &config(cycles), &scenario, seed).unwrap()
}

#[test]
fn diagnosed_stage_two_cycle_costs() {
    let cohort = [Person::new(50, HealthState::Diagnosed(Stage::II))];
    let model = compile(&params(), &cohort, 364);
    let mut person = cohort[0];
    let out = step_person(&mut person, &model, &CostParams::default(), false, 0.999_999).unwrap();
    assert_eq!(out.event, Event::Stay);
    assert_abs_diff_eq!(out.delta.direct, 61.25, epsilon = 1e-9);
    assert_abs_diff_eq!(out.delta.indirect_other, 253.057_692, epsilon = 1e-6);
    assert_eq!(out.delta.indirect_death, 0.0);
    assert_eq!(person.cycles_in_state, 1);
}

#[test]
fn undiagnosed_death_charges_indirect_cost() {
    let cohort = [Person::new(50, HealthState::Undiagnosed(Stage::III))];
    let model = compile(&params(), &cohort, 364);
    let mut person = cohort[0];
    let out = step_person(&mut person, &model, &CostParams::default(), false, 0.0).unwrap();
    assert_eq!(out.event, Event::CancerDeath);
    assert_eq!(person.state, HealthState::Deceased);
    assert_eq!(out.delta.indirect_death, 123_564.0);
    assert_eq!(out.delta.cancer_deaths, 1);
    assert_eq!(out.delta.direct, 0.0);
}

#[test]
fn deceased_cannot_step() {
    let cohort = [Person::new(50, HealthState::Healthy)];
    let model = compile(&params(), &cohort, 52);
    let mut dead = Person::new(50, HealthState::Deceased);
    assert!(step_person(&mut dead, &model, &CostParams::default(), false, 0.5).is_err());
    let mut alive = cohort[0];
    assert!(step_person(&mut alive, &model, &CostParams::default(), false, 1.0).is_err());
}

#[test]
fn segments_follow_fixed_order() {
    let model = compile(&params(), &[Person::new(60, HealthState::Healthy)], 364);
    let mut p = Person::new(60, HealthState::Undiagnosed(Stage::II));
    p.cycles_in_state = 10;
    let events: Vec<Event> = model.segments(&p, Phase::Normal).iter().map(|s| s.1).collect();
    assert_eq!(events, [Event::CancerDeath, Event::Progression, Event::Diagnosis]);
    p.state = HealthState::Undiagnosed(Stage::IV);
    let events: Vec<Event> = model.segments(&p, Phase::Normal).iter().map(|s| s.1).collect();
    assert_eq!(events, [Event::CancerDeath, Event::Diagnosis]);
    p.state = HealthState::Diagnosed(Stage::I);
    let events: Vec<Event> = model.segments(&p, Phase::Lockdown).iter().map(|s| s.1).collect();
    assert_eq!(events, [Event::CancerDeath, Event::Progression, Event::Healing]);
    p.state = HealthState::Healthy;
    let events: Vec<Event> = model.segments(&p, Phase::Normal).iter().map(|s| s.1).collect();
    assert_eq!(events, [Event::Onset, Event::BackgroundDeath]);
}

#[test]
fn shipped_parameters_keep_segment_sums_below_one() {
    let model = compile(&params(), &[Person::new(99, HealthState::Healthy)], 364);
    assert!(model.max_segment_sum() < 1.0);
}

#[test]
fn population_is_conserved_and_deaths_accumulate() {
    let cohort = mixed_cohort(3000);
    let ledger = run(&cohort, &params(), 364, true, 7);
    let mut prev_dead = 0;
    let mut prev_cum = CycleCosts::default();
    for (tally, (cum, _, _)) in ledger.tallies.iter().zip(ledger.cumulative()) {
        assert_eq!(tally.population(), cohort.len() as u64);
        let dead = tally.occupancy_of(HealthState::Deceased);
        assert!(dead >= prev_dead);
        assert!(cum.direct >= prev_cum.direct);
        assert!(cum.indirect_death >= prev_cum.indirect_death);
        assert!(cum.indirect_other >= prev_cum.indirect_other);
        prev_dead = dead;
        prev_cum = cum;
    }
    for pair in ledger.tallies.windows(2) {
        let dead = pair[0].occupancy_of(HealthState::Deceased) + pair[0].deaths();
        assert_eq!(pair[1].occupancy_of(HealthState::Deceased), dead);
    }
}

#[test]
fn scenarios_agree_before_lockdown() {
    let cohort = mixed_cohort(5000);
    let p = params();
    let nocovid = run(&cohort, &p, 364, false, 11);
    let covid = run(&cohort, &p, 364, true, 11);
    assert_eq!(nocovid.tallies[..61], covid.tallies[..61]);
    assert_eq!(nocovid.costs[..61], covid.costs[..61]);
    assert_ne!(nocovid.tallies[61..], covid.tallies[61..]);
}

#[test]
fn identical_across_thread_counts() {
    let cohort = mixed_cohort(10_000);
    let p = params();
    let in_pool = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run(&cohort, &p, 156, true, 3))
    };
    let one = in_pool(1);
    assert_eq!(one, in_pool(4));
    assert_eq!(one, run(&cohort, &p, 156, true, 3));
    assert_ne!(one, run(&cohort, &p, 156, true, 4));
}

#[test]
fn empty_cohort_gives_zero_ledger() {
    let ledger = run(&[], &params(), 104, false, 1);
    assert_eq!(ledger.cycles(), 104);
    assert!(ledger.tallies.iter().all(|t| *t == CycleTally::default()));
    assert!(ledger.costs.iter().all(|c| c.total() == 0.0));
}

#[test]
fn zero_hazards_freeze_occupancy() {
    let cohort = mixed_cohort(900);
    let ledger = run(&cohort, &zero_params(), 208, true, 5);
    let first = ledger.tallies[0].occupancy;
    for t in &ledger.tallies {
        assert_eq!(t.occupancy, first);
        assert_eq!(t.deaths() + t.onsets + t.diagnoses + t.healings + t.progressions, 0);
    }
}

#[test]
fn background_mortality_matches_binomial() {
    let mut p = zero_params();
    p.life_table = flat_life_table(0.02);
    let n = 20_000;
    let cohort = vec![Person::new(60, HealthState::Healthy); n];
    let ledger = run(&cohort, &p, 52, false, 99);
    let deaths: u64 = ledger.tallies.iter().map(|t| u64::from(t.background_deaths)).sum();
    let q = 1.0 - (1.0 - background_mortality_probability(&p, 60)).powi(52);
    assert_abs_diff_eq!(q, 0.02, epsilon = 1e-12);
    let mean = n as f64 * q;
    let sd = (n as f64 * q * (1.0 - q)).sqrt();
    assert!((deaths as f64 - mean).abs() < 3.0 * sd, "{deaths} vs {mean} +- {sd}");
}

fn background_mortality_probability(p: &TransitionParams, age: u32) -> f64 {
    p.background_mortality_probability(age).unwrap()
}

#[test]
fn cohort_beyond_tables_is_rejected() {
    let cohort = [Person::new(40, HealthState::Healthy)];
    let model = TransitionModel::compile(&params(), 40, 52).unwrap();
    let scenario = ScenarioConfig::new(false, 0, 104, 104).unwrap();
    assert!(run_replication(&cohort, &model, &CostParams::default(), &config(104), &scenario, 0).is_err());
}

#[test]
fn seeds_pair_under_common_random_numbers() {
    let loaded = crate::io::load_config(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/default.toml"))
        .unwrap();
    let mut exp = loaded.experiment(vec![Scenario::NoCovid, Scenario::Covid]).unwrap();
    assert_eq!(exp.seed_for(Scenario::Covid, 3), exp.seed_for(Scenario::NoCovid, 3));
    exp.config.common_random_numbers = false;
    assert_ne!(exp.seed_for(Scenario::Covid, 3), exp.seed_for(Scenario::NoCovid, 3));
    let all: std::collections::BTreeSet<u64> = (0..exp.config.replications)
        .flat_map(|r| [exp.seed_for(Scenario::Covid, r), exp.seed_for(Scenario::NoCovid, r)])
        .collect();
    assert_eq!(all.len(), 2 * exp.config.replications as usize);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conservation_for_any_seed(seed: u64, n in 0usize..400, covid: bool) {
        let cohort = mixed_cohort(n);
        let ledger = run(&cohort, &params(), 156, covid, seed);
        for t in &ledger.tallies {
            prop_assert_eq!(t.population(), n as u64);
        }
    }

    #[test]
    fn step_never_leaves_deceased_or_regresses(
        idx in 0usize..9,
        t in 0u32..400,
        age in 25u32..95,
        u in 0.0f64..1.0,
        lock: bool,
    ) {
        let cohort = [Person::new(age, HealthState::Healthy)];
        let model = compile(&params(), &cohort, 364);
        let mut person = Person { age, state: HealthState::ALL[idx], cycles_in_state: t };
        let out = step_person(&mut person, &model, &CostParams::default(), lock, u).unwrap();
        prop_assert!(out.from.successors().contains(&out.to) || out.from == out.to);
        if let (Some(a), Some(b)) = (out.from.stage(), out.to.stage()) {
            prop_assert!(b >= a);
        }
        let sum: f64 = model.segments(&Person { age, state: out.from, cycles_in_state: t }, Phase::from_lockdown(lock))
            .iter()
            .map(|s| s.0)
            .sum();
        prop_assert!((0.0..1.0).contains(&sum));
    }
}
