//! Point values for completed and end-of-game features.

use super::features::Segment;
use super::tiles::FeatureKind;

/// All scoring constants in one place; engine and fixtures both read them from here.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScoringTable {
    pub city_per_tile: u32,
    pub city_per_pennant: u32,
    pub road_per_tile: u32,
    pub monastery_complete: u32,
    pub farm_per_city: u32,
    pub end_city_per_tile: u32,
    pub end_city_per_pennant: u32,
    pub end_road_per_tile: u32,
    /// End-game monastery value is `end_monastery_base` plus one per surrounding tile.
    pub end_monastery_base: u32,
}

/// Base-game rulebook values.
pub const SCORING: ScoringTable = ScoringTable {
    city_per_tile: 2,
    city_per_pennant: 2,
    road_per_tile: 1,
    monastery_complete: 9,
    farm_per_city: 3,
    end_city_per_tile: 1,
    end_city_per_pennant: 1,
    end_road_per_tile: 1,
    end_monastery_base: 1,
};

impl ScoringTable {
    /// Value of a feature completed during play. Fields never complete.
    pub fn completed(&self, seg: &Segment) -> u32 {
        match seg.kind {
            FeatureKind::City => self.city_per_tile * seg.tile_count() + self.city_per_pennant * seg.pennants as u32,
            FeatureKind::Road => self.road_per_tile * seg.tile_count(),
            FeatureKind::Monastery => self.monastery_complete,
            FeatureKind::Field => 0,
        }
    }

    /// Value of an unfinished city, road or monastery at the end of the game.
    pub fn incomplete(&self, seg: &Segment) -> u32 {
        match seg.kind {
            FeatureKind::City => {
                self.end_city_per_tile * seg.tile_count() + self.end_city_per_pennant * seg.pennants as u32
            }
            FeatureKind::Road => self.end_road_per_tile * seg.tile_count(),
            FeatureKind::Monastery => self.end_monastery_base + (8 - seg.open as u32),
            FeatureKind::Field => 0,
        }
    }

    pub fn farm(&self, completed_cities: u32) -> u32 {
        self.farm_per_city * completed_cities
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn city(tiles: &[usize], pennants: u8, open: u8) -> Segment {
        let mut s = Segment::new(FeatureKind::City, tiles[0], false, open);
        for &t in &tiles[1..] {
            s.tiles |= 1 << t;
        }
        s.pennants = pennants;
        s
    }

    #[test]
    fn two_tile_city_with_pennant_is_six() {
        assert_eq!(SCORING.completed(&city(&[0, 1], 1, 0)), 6);
    }

    #[test]
    fn incomplete_three_tile_city_with_pennant_is_four() {
        assert_eq!(SCORING.incomplete(&city(&[0, 1, 2], 1, 2)), 4);
    }

    #[test]
    fn monastery_values() {
        let mut m = Segment::new(FeatureKind::Monastery, 0, false, 0);
        assert_eq!(SCORING.completed(&m), 9);
        m.open = 5;
        assert_eq!(SCORING.incomplete(&m), 4);
    }
}
