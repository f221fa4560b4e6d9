mod common;

use carcassonne_lab::game::Game;
use carcassonne_lab::random::random_move;
use common::toy::Toy;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn picks_are_uniform_over_four_actions() {
    let state = Toy::new(4, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut counts = [0u32; 4];
    for _ in 0..10_000 {
        counts[random_move(&state, &mut rng).unwrap() as usize] += 1;
    }
    for c in counts {
        let share = c as f64 / 10_000.0;
        assert!((0.23..=0.27).contains(&share), "{counts:?}");
    }
}

#[test]
fn no_legal_move_is_an_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(random_move(&Toy::new(4, 0), &mut rng).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn moves_are_legal_and_reproducible(seed in any::<u64>(), turns in 0u32..70) {
        let s = common::midgame(seed, turns);
        prop_assume!(!s.is_terminal());
        let a = random_move(&s, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = random_move(&s, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(Game::legal_actions(&s).contains(&a));
    }
}
