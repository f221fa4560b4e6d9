mod common;

use carcassonne_lab::engine;
use carcassonne_lab::game::PlayerId;

#[test]
fn random_games_pass_audits() {
    for seed in 0..1000 {
        common::audited_random_game(seed).unwrap();
    }
}

#[test]
fn turns_split_evenly_between_players() {
    for seed in 0..50 {
        let end = common::audited_random_game(seed).unwrap();
        let (a, b) = (end.turns_taken(PlayerId::P1), end.turns_taken(PlayerId::P2));
        assert!(a == b || a == b + 1, "{a} vs {b}");
        assert_eq!(a + b, end.turn());
        assert_eq!(engine::current_player(&end), if end.turn() % 2 == 0 { PlayerId::P1 } else { PlayerId::P2 });
    }
}

#[test]
fn same_seed_same_deck() {
    let a = engine::new_game(99);
    let b = engine::new_game(99);
    assert_eq!(a.deck(), b.deck());
    assert_ne!(a.deck(), engine::new_game(100).deck());
    assert_eq!(a.deck().len(), 71);
}
