use convmod::dominance::minimizers;
use convmod::policy::Directive;
use convmod::sim::{Conversation, GroupConfig, Preset};
use convmod::PolicyKind;

fn conversation(preset: Preset, policy: PolicyKind, seed: u64) -> Conversation {
    Conversation::new(GroupConfig::new(preset.profiles(4), policy, seed)).unwrap()
}

#[test]
fn community_policy_addresses_outside_the_last_speakers_community() {
    let mut checked = 0;
    for policy in [PolicyKind::CommunityHard, PolicyKind::CommunitySoft] {
        for seed in 0..20 {
            let mut conv = conversation(Preset::TwoCliques, policy, seed);
            loop {
                let last = conv.state().last_speaker();
                let Some(step) = conv.step().unwrap() else { break };
                let (Some(partition), Some(last)) = (&step.decision.partition, last) else {
                    continue;
                };
                let target = step.decision.directive.addressee().expect("community policies address someone");
                assert_ne!(target, last);
                if partition.community_count() > 1 {
                    assert_ne!(partition.label(target.0), partition.label(last.0));
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 100, "only {checked} multi-community decisions seen");
}

#[test]
fn balancing_policy_addresses_a_least_dominant_speaker() {
    for policy in [PolicyKind::BalancingHard, PolicyKind::BalancingSoft] {
        for seed in 0..20 {
            let mut conv = conversation(Preset::DominantOne, policy, seed);
            while let Some(step) = conv.step().unwrap() {
                if let Some(scores) = &step.decision.scores {
                    let target = step.decision.directive.addressee().unwrap();
                    assert!(minimizers(scores).contains(&target.0), "{scores:?} -> {target:?}");
                }
            }
        }
    }
}

#[test]
fn full_compliance_means_the_addressee_always_answers() {
    for policy in PolicyKind::ALL {
        let mut profiles = Preset::TwoCliques.profiles(4);
        for p in &mut profiles {
            p.compliance = 1.0;
        }
        let mut conv = Conversation::new(GroupConfig::new(profiles, policy, 9)).unwrap();
        while let Some(step) = conv.step().unwrap() {
            if let Some(target) = step.decision.directive.addressee() {
                assert_eq!(step.speaker, target);
            }
            assert!(matches!(step.reaction, Directive::Accept(_)));
        }
    }
}

#[test]
fn hard_and_soft_differ_only_in_the_reaction_kind() {
    for policy in [PolicyKind::BalancingHard, PolicyKind::CommunityHard, PolicyKind::BalancingSoft] {
        let mut conv = conversation(Preset::DominantOne, policy, 3);
        let mut saw_repeat = false;
        while let Some(step) = conv.step().unwrap() {
            match step.reaction {
                Directive::Repeat(_) => {
                    assert!(policy.is_hard());
                    saw_repeat = true;
                }
                Directive::ReplyThenReaddress { responder, .. } => {
                    assert!(!policy.is_hard());
                    assert_eq!(responder, step.speaker);
                    saw_repeat = true;
                }
                _ => {}
            }
        }
        assert!(saw_repeat, "{policy} never re-addressed anyone");
    }
}

#[test]
fn every_turn_is_logged_whatever_the_reaction() {
    for policy in PolicyKind::ALL {
        let mut conv = conversation(Preset::DominantOne, policy, 11);
        let mut steps = 0;
        let mut last_index = None;
        while let Some(step) = conv.step().unwrap() {
            steps += 1;
            assert_eq!(Some(step.record.t_index), last_index.map_or(Some(0), |i: u64| Some(i + 1)));
            last_index = Some(step.record.t_index);
            assert_eq!(step.record.speaker, step.speaker.0);
            assert_eq!(step.record.directive, step.decision.directive.name());
        }
        assert!(steps >= 30);
    }
}

#[test]
fn neutral_sessions_never_address_anyone() {
    let mut conv = conversation(Preset::TwoCliques, PolicyKind::Neutral, 4);
    while let Some(step) = conv.step().unwrap() {
        assert_eq!(step.decision.directive, Directive::OpenFloor);
        assert_eq!(step.record.addressee, None);
        assert!(matches!(step.reaction, Directive::Accept(_)));
    }
}

#[test]
fn dominant_agent_holds_the_floor_without_moderation() {
    let mut dominated = 0;
    for seed in 0..100 {
        let log = convmod::sim::run_conversation(GroupConfig::new(
            Preset::DominantOne.profiles(4),
            PolicyKind::Neutral,
            seed,
        ))
        .unwrap();
        let total: f64 = log.records.iter().map(|r| r.duration_s).sum();
        let mine: f64 = log.records.iter().filter(|r| r.speaker == 0).map(|r| r.duration_s).sum();
        if mine / total > 0.4 {
            dominated += 1;
        }
    }
    assert!(dominated >= 90, "dominant share > 0.4 in only {dominated}/100 sessions");
}

#[test]
fn metrics_on_the_log_match_the_dialogue_state() {
    let mut conv = conversation(Preset::DominantOne, PolicyKind::BalancingSoft, 21);
    while let Some(step) = conv.step().unwrap() {
        let n = conv.state().n_speakers();
        let (secs, words) = convmod::dominance::window_totals(conv.state().window(), n);
        assert_eq!(step.record.time_err_s, convmod::dominance::range_error(&secs));
        assert_eq!(step.record.word_err, convmod::dominance::range_error(&words));
        assert!((1..=n).contains(&step.record.n_comm));
    }
}
