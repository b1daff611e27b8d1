//! End-to-end flows through the public API, driving the state machines by
//! hand rather than through simnet.

use privote_core::adversary;
use privote_core::bsv::{self, Ballot, Ledger, PhaseWindows, Registry, Rejection};
use privote_core::hev::{Government, Voter};
use privote_core::hevs::{self, SamplingGovernment};
use privote_core::{GroupParams, SampleSizePolicy, SamplingPlan, Vote, VoterId};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn hev_election(params: &GroupParams, votes: &[u64], seed: u64) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = votes.len();
    let mut voters: Vec<Voter> = VoterId::range(n)
        .zip(votes)
        .map(|(id, &v)| Voter::new(id, Vote::new(v).unwrap(), n))
        .collect();
    let mut gov = Government::new(params.clone(), n);
    for v in &mut voters {
        let piece = v.generate_key(params, &mut rng).unwrap();
        gov.receive_key_piece(v.id(), piece).unwrap();
    }
    let pk = gov.broadcast_public_key().unwrap();
    for v in &mut voters {
        let ballot = v.cast(params, std::slice::from_ref(&pk), &mut rng).unwrap().remove(0);
        gov.receive_ballot(v.id(), ballot).unwrap();
    }
    let request = gov.decryption_request().unwrap();
    for v in &mut voters {
        gov.receive_share(v.respond(params, 0, &request).unwrap()).unwrap();
    }
    gov.finish().unwrap().tally
}

#[test]
fn hev_state_machines_tally() {
    let params = GroupParams::default_256();
    assert_eq!(hev_election(&params, &[1, 0, 1], 1), 2);
    assert_eq!(hev_election(&params, &[1], 2), 1);
    assert_eq!(hev_election(&params, &[0, 0, 0, 0], 3), 0);
}

/// Runs HEVS by hand; voters listed in `fakers` answer with fake shares.
fn hevs_election(
    params: &GroupParams,
    votes: &[u64],
    fakers: &[u32],
    k: usize,
    seed: u64,
) -> (SamplingPlan, Vec<Option<u64>>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = votes.len();
    let mut voters: Vec<Voter> = VoterId::range(n)
        .zip(votes)
        .map(|(id, &v)| Voter::new(id, Vote::new(v).unwrap(), n))
        .collect();
    let mut gov = SamplingGovernment::new(params.clone(), n);
    for v in &mut voters {
        let piece = v.generate_key(params, &mut rng).unwrap();
        gov.receive_key_piece(v.id(), piece).unwrap();
    }
    let plan = hevs::make_sampling_plan(&mut rng, n, k, SampleSizePolicy::HalfCeil).unwrap();
    let keys = gov.broadcast_public_keys(plan.clone()).unwrap();
    for v in &mut voters {
        let ballots = v.cast(params, &keys, &mut rng).unwrap();
        gov.receive_ballots(v.id(), ballots).unwrap();
    }
    for req in gov.decryption_requests().unwrap() {
        for id in req.recipients {
            let v = &mut voters[id.0 as usize - 1];
            let share = if fakers.contains(&id.0) {
                let secret = v.key_share().unwrap().secret().clone();
                adversary::fake_decryption_share(&mut rng, params, id, &req.request.x_r, &secret)
            } else {
                v.respond(params, req.j, &req.request).unwrap()
            };
            gov.receive_share(req.j, share).unwrap();
        }
    }
    (plan, gov.finish().unwrap().into_iter().map(|r| r.tally).collect())
}

#[test]
fn hevs_samples_with_faker_fail_and_others_agree() {
    let params = GroupParams::default_256();
    let votes = [1, 1, 0, 1, 0, 1, 1, 0];
    let truth = 5;
    let (plan, tallies) = hevs_election(&params, &votes, &[3], 8, 50);
    for (j, tally) in tallies.iter().enumerate() {
        let tainted = plan.participants(j).unwrap().contains(&VoterId(3));
        assert_eq!(*tally == Some(truth), !tainted, "sample {j}");
    }
    let clean = tallies.iter().filter(|t| **t == Some(truth)).count();
    assert!(clean >= 2 && clean < tallies.len());
    assert_eq!(hevs::mode_decision(tallies.iter().copied(), 2).unwrap(), truth);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn honest_hevs_every_sample_decodes(votes in prop::collection::vec(0u64..=1, 1..12), k in 1usize..6, seed: u64) {
        let params = GroupParams::default_256();
        let truth: u64 = votes.iter().sum();
        let (_, tallies) = hevs_election(&params, &votes, &[], k, seed);
        prop_assert!(tallies.iter().all(|t| *t == Some(truth)));
    }
}

#[test]
fn bsv_election_flow() {
    let mut rng = ChaCha20Rng::seed_from_u64(60);
    let keys = bsv::signer_keygen(&mut rng, 384).unwrap();
    let public = keys.public().clone();
    let windows = PhaseWindows::new(0..4, 4..8).unwrap();
    let mut registry = Registry::new(VoterId::range(20));
    let mut ledger = Ledger::new(public.clone(), windows.clone(), vec!["no".into(), "yes".into()]);
    let mut yes = 0;
    for id in VoterId::range(20) {
        let content = if rng.gen_bool(0.5) { "yes" } else { "no" };
        yes += u64::from(content == "yes");
        let mut ballot = Ballot::new(content, &mut rng).unwrap();
        let state = bsv::blind(&ballot, &public, &mut rng);
        let signed = bsv::sign_blinded(&keys, &state.blinded, id, &mut registry).unwrap();
        assert!(bsv::sign_blinded(&keys, &state.blinded, id, &mut registry).is_err());
        ballot.signature = Some(bsv::unblind(&signed, &state, &public));
        assert!(public.verify(&ballot));
        assert_eq!(ledger.submit(ballot.clone(), 2), Err(Rejection::OutsidePostingWindow));
        ledger.submit(ballot.clone(), 5).unwrap();
        assert_eq!(ledger.submit(ballot, 6), Err(Rejection::DuplicateNonce));
    }
    assert!(ledger.tally(7).is_err());
    let counts = ledger.tally(8).unwrap();
    assert_eq!(counts["yes"], yes);
    assert_eq!(counts["no"], 20 - yes);
    assert_eq!(ledger.dump().lines().count(), 20);
}
