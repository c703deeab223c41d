mod common;

use std::collections::HashSet;

use blankcrack_core::pairgen::PairRejection;
use blankcrack_core::{Language, PairOrigin, PairState};
use blankcrack_service::state::SessionState;
use blankcrack_service::ServiceError;
use common::{Harness, FREE, SERIES};

#[test]
fn series_pairs_are_seeded_once() {
    let h = Harness::new(1);
    let n = h.game.with_state(|s| s.pairs.len());
    assert_eq!(n, SERIES.len() * (SERIES.len() - 1) / 2);
    assert_eq!(h.game.seed_pairs().unwrap(), 0);
}

#[test]
fn k_setting_controls_sentence_count() {
    let h = Harness::new(2);
    let p = h.player("alice");
    for k in [1, 3, 5] {
        h.game.update_settings(p, Some(k), None).unwrap();
        let r = h.game.serve_riddle(p, None, None).unwrap();
        assert_eq!(r.payload.k, k);
        assert_eq!(r.payload.sentences.len(), k);
        assert!(r.payload.sentences.iter().all(|s| s.contains("___")));
    }
    assert!(matches!(
        h.game.update_settings(p, Some(4), None),
        Err(ServiceError::InvalidInput(_))
    ));
}

#[test]
fn rapid_requests_get_distinct_riddles() {
    let h = Harness::new(3);
    let p = h.player("alice");
    let a = h.game.serve_riddle(p, Some(Language::En), None).unwrap();
    let b = h.game.serve_riddle(p, Some(Language::En), None).unwrap();
    assert_ne!(a.payload.riddle_id, b.payload.riddle_id);
}

#[test]
fn payload_hides_the_target() {
    let h = Harness::new(4);
    let p = h.player("alice");
    let r = h.game.serve_riddle(p, None, None).unwrap();
    let json = serde_json::to_value(&r).unwrap();
    let mut keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(keys, ["expires_at", "k", "options", "riddle_id", "sentences", "served_at", "session_id"]);
    let key = h.game.with_state(|s| s.pending[&r.payload.riddle_id].riddle.target.clone());
    assert!(r.payload.options.contains(&key));
    let text = json.to_string();
    assert!(!text.contains("target") && !text.contains("foil"));
}

#[test]
fn answering_scores_and_is_idempotent() {
    let h = Harness::new(5);
    let p = h.player("alice");
    h.game.update_settings(p, Some(3), None).unwrap();
    let r = h.game.serve_riddle(p, None, None).unwrap();
    let target = h.game.with_state(|s| s.pending[&r.payload.riddle_id].riddle.target.clone());
    h.clock.advance(10_000);
    let first = h.game.submit_answer(p, r.payload.riddle_id, &target).unwrap();
    assert!(first.correct);
    assert_eq!(first.points, 1.0);
    assert_eq!(first.elapsed_ms, 10_000);
    assert_eq!(first.running_totals.cracker_points, 1.0);

    h.clock.advance(5_000);
    match h.game.submit_answer(p, r.payload.riddle_id, &target) {
        Err(ServiceError::Duplicate(again)) => assert_eq!(*again, first),
        other => panic!("expected duplicate, got {other:?}"),
    }
    assert_eq!(h.game.scores(p).unwrap().cracker_points, 1.0);
    assert_eq!(h.game.records().len(), 1);
}

#[test]
fn invalid_choice_and_foreign_riddles() {
    let h = Harness::new(6);
    let p = h.player("alice");
    let q = h.player("bob");
    let r = h.game.serve_riddle(p, None, None).unwrap();
    assert!(matches!(
        h.game.submit_answer(p, r.payload.riddle_id, "zebra"),
        Err(ServiceError::InvalidInput(_))
    ));
    let opt = r.payload.options[0].clone();
    assert!(matches!(
        h.game.submit_answer(q, r.payload.riddle_id, &opt),
        Err(ServiceError::NotFound(_))
    ));
    // still answerable by its owner
    h.game.submit_answer(p, r.payload.riddle_id, &opt).unwrap();
}

#[test]
fn pending_riddles_expire_after_a_day() {
    let h = Harness::new(7);
    let p = h.player("alice");
    let r = h.game.serve_riddle(p, None, None).unwrap();
    h.clock.advance(24 * 3600 * 1000);
    let opt = r.payload.options[0].clone();
    assert!(matches!(
        h.game.submit_answer(p, r.payload.riddle_id, &opt),
        Err(ServiceError::NotFound(_))
    ));
    assert!(h.game.records().is_empty());
}

#[test]
fn known_difficult_k1_fast_answer_scores_three() {
    let h = Harness::new(8);
    let proposer = h.player("prop");
    let pair = h.game.propose_pair(proposer, Language::En, "kitten", "puppy").unwrap();
    // three wrong answers make the pair known-difficult
    for name in ["crk1", "crk2", "crk3"] {
        let p = h.player(name);
        loop {
            let r = h.game.serve_riddle(p, None, None).unwrap();
            let riddle = h.game.with_state(|s| s.pending[&r.payload.riddle_id].riddle.clone());
            let res = h.game.submit_answer(p, riddle.id, &riddle.foil).unwrap();
            assert!(!res.correct);
            assert_eq!(res.points, 0.0);
            if riddle.pair_id == pair.id {
                break;
            }
        }
    }
    let scores = h.game.scores(proposer).unwrap();
    assert_eq!(scores.blanker_annotation_count, 3);
    assert_eq!(scores.blanker_success_rate_percent, Some(100.0));

    let p = h.player("solver");
    h.game.update_settings(p, Some(1), None).unwrap();
    // pool sampling is random; keep serving until the difficult pair shows up
    for _ in 0..200 {
        let r = h.game.serve_riddle(p, None, None).unwrap();
        let riddle = h.game.with_state(|s| s.pending[&r.payload.riddle_id].riddle.clone());
        if riddle.pair_id == pair.id {
            h.clock.advance(90_000);
            let res = h.game.submit_answer(p, riddle.id, &riddle.target).unwrap();
            assert_eq!(res.points, 3.0);
            return;
        }
        h.game.submit_answer(p, riddle.id, &riddle.foil).unwrap();
    }
    panic!("difficult pair never served");
}

#[test]
fn proposals_are_validated() {
    let h = Harness::new(9);
    let p = h.player("alice");
    let ok = h.game.propose_pair(p, Language::En, "Kitten", "puppy").unwrap();
    assert_eq!(ok.origin, PairOrigin::UserProposed);
    assert_eq!(ok.proposer, Some(p));
    assert_eq!(ok.word_a, "kitten");
    assert_eq!(ok.state, PairState::Active);

    let reasons = |a: &str, b: &str| match h.game.propose_pair(p, Language::En, a, b) {
        Err(ServiceError::PairRejected(r)) => r,
        other => panic!("expected rejection, got {other:?}"),
    };
    assert!(reasons("run", "running").contains(&PairRejection::IdenticalStems { stem: "run".into() }));
    assert_eq!(reasons("cat", "cat")[0], PairRejection::IdenticalWords);
    assert!(reasons("kitten", "unicorn").contains(&PairRejection::OutOfVocabulary { word: "unicorn".into() }));
    assert_eq!(reasons("puppy", "kitten"), vec![PairRejection::AlreadyExists { pair_id: ok.id }]);
    // both words occur in exactly the same sentences
    assert!(matches!(
        reasons("hours", "keep")[0],
        PairRejection::InsufficientContexts { .. }
    ));
    assert!(matches!(
        h.game.propose_pair(p, Language::Fr, "a", "b"),
        Err(ServiceError::LanguageNotLoaded(Language::Fr))
    ));
    let mine = h.game.my_pairs(p);
    assert_eq!(mine.len(), 1);
    assert_eq!(mine[0].annotations, 0);
    assert_eq!(mine[0].success_rate_percent, None);
}

#[test]
fn fresh_proposal_goes_to_the_next_other_player() {
    let h = Harness::new(10);
    let a = h.player("alice");
    let b = h.player("bob");
    let c = h.player("carol");
    let pair = h.game.propose_pair(a, Language::En, FREE[2], FREE[3]).unwrap();
    let own = h.game.serve_riddle(a, None, None).unwrap();
    let own_pair = h.game.with_state(|s| s.pending[&own.payload.riddle_id].riddle.pair_id);
    assert_ne!(own_pair, pair.id);
    let next = h.game.serve_riddle(b, None, None).unwrap();
    let got = h.game.with_state(|s| s.pending[&next.payload.riddle_id].riddle.pair_id);
    assert_eq!(got, pair.id);
    // leased to bob: carol gets something else until bob answers
    let other = h.game.serve_riddle(c, None, None).unwrap();
    let got = h.game.with_state(|s| s.pending[&other.payload.riddle_id].riddle.pair_id);
    assert_ne!(got, pair.id);
}

#[test]
fn leaderboard_order_ties_and_limit() {
    let h = Harness::new(11);
    let a = h.player("early");
    h.clock.advance(1000);
    let b = h.player("late");
    h.clock.advance(1000);
    let c = h.player("best");
    let earn = |p, times: usize| {
        for _ in 0..times {
            let r = h.game.serve_riddle(p, None, None).unwrap();
            let t = h.game.with_state(|s| s.pending[&r.payload.riddle_id].riddle.target.clone());
            h.game.submit_answer(p, r.payload.riddle_id, &t).unwrap();
        }
    };
    earn(a, 2);
    earn(b, 2);
    earn(c, 3);
    let board = h.game.leaderboard(Some(Language::En), 10);
    let names: Vec<&str> = board.iter().map(|r| r.username.as_str()).collect();
    assert_eq!(names, ["best", "early", "late"]);
    assert_eq!(board[0].cracker_points, 1.5);
    assert_eq!(board[0].language, Language::En);
    assert!(h.game.leaderboard(None, 0).is_empty());
    assert!(h.game.leaderboard(Some(Language::Fr), 10).is_empty());
}

#[test]
fn competition_lifecycle() {
    let h = Harness::new(12);
    let a = h.player("alice");
    let b = h.player("bob");
    let c = h.player("carol");
    h.game.add_friend(a, "bob").unwrap();
    assert!(matches!(
        h.game.create_session(a, &["bob".into()], 5),
        Err(ServiceError::Forbidden(_))
    ));
    let f = h.game.add_friend(b, "alice").unwrap();
    assert!(f.mutual);
    assert!(matches!(
        h.game.create_session(a, &["carol".into()], 5),
        Err(ServiceError::Forbidden(_))
    ));
    let s = h.game.create_session(a, &["bob".into()], 5).unwrap();
    assert_eq!(s.state, SessionState::Open);
    assert!(matches!(
        h.game.serve_riddle(c, None, Some(s.session_id)),
        Err(ServiceError::NotFound(_))
    ));

    let before = h.game.scores(a).unwrap().cracker_points;
    for (player, right) in [(a, 5), (b, 2)] {
        for i in 0..5 {
            let r = h.game.serve_riddle(player, None, Some(s.session_id)).unwrap();
            let riddle = h.game.with_state(|st| st.pending[&r.payload.riddle_id].riddle.clone());
            let choice = if i < right { &riddle.target } else { &riddle.foil };
            h.game.submit_answer(player, riddle.id, choice).unwrap();
        }
        assert!(matches!(
            h.game.serve_riddle(player, None, Some(s.session_id)),
            Err(ServiceError::Forbidden(_))
        ));
    }
    let done = h.game.session(b, s.session_id).unwrap();
    assert_eq!(done.state, SessionState::Finished);
    assert_eq!(done.standings[0].username, "alice");
    assert_eq!(done.standings[0].points, 2.5);
    assert_eq!(done.standings[1].points, 1.0);
    assert!(done.share_text.unwrap().contains("1. alice 2.50 pts"));
    let after = h.game.scores(a).unwrap().cracker_points;
    assert_eq!(after - before, 2.5);

    let empty = h.game.create_session(a, &["bob".into()], 3).unwrap();
    let closed = h.game.close_session(b, empty.session_id).unwrap();
    assert_eq!(closed.state, SessionState::Finished);
    assert!(closed.standings.iter().all(|s| s.points == 0.0));
}

#[test]
fn sessions_only_count_riddles_served_in_them() {
    let h = Harness::new(13);
    let a = h.player("alice");
    let b = h.player("bob");
    h.game.add_friend(a, "bob").unwrap();
    h.game.add_friend(b, "alice").unwrap();
    let outside = h.game.serve_riddle(a, None, None).unwrap();
    let s = h.game.create_session(a, &["bob".into()], 2).unwrap();
    let t = h.game.with_state(|st| st.pending[&outside.payload.riddle_id].riddle.target.clone());
    h.game.submit_answer(a, outside.payload.riddle_id, &t).unwrap();
    let view = h.game.session(a, s.session_id).unwrap();
    assert!(view.standings.iter().all(|st| st.points == 0.0 && st.answered == 0));
}

#[test]
fn riddles_are_unique_per_player_and_pair() {
    let h = Harness::new(14);
    let p = h.player("alice");
    let mut seen = HashSet::new();
    loop {
        match h.game.serve_riddle(p, None, None) {
            Ok(r) => {
                let riddle = h.game.with_state(|s| s.pending[&r.payload.riddle_id].riddle.clone());
                assert!(seen.insert(riddle.pair_id), "pair served twice to one player");
                h.game.submit_answer(p, riddle.id, &riddle.target).unwrap();
            }
            Err(ServiceError::NoRiddles(_)) => break,
            Err(e) => panic!("{e}"),
        }
    }
    assert_eq!(seen.len(), 15);
}
