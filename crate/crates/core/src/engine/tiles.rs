//! Tile set loading, validation and precomputed rotations.

use std::fmt;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Kind of a tile side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    City,
    Road,
    Field,
}

/// Kind of a feature slot on a tile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    City,
    Road,
    Field,
    Monastery,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FeatureKind::City => "city",
            FeatureKind::Road => "road",
            FeatureKind::Field => "field",
            FeatureKind::Monastery => "monastery",
        };
        f.write_str(s)
    }
}

/// Index of a tile kind in the tile set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TileKindId(pub u8);

pub(crate) const NO_SLOT: u8 = u8::MAX;

/// Sides are numbered N=0, E=1, S=2, W=3.
pub const SIDE_NAMES: [&str; 4] = ["N", "E", "S", "W"];
/// Half-edge ports, clockwise from the north-west corner. Port `p` lies on side `p / 2`.
pub const PORT_NAMES: [&str; 8] = ["Nw", "Ne", "En", "Es", "Se", "Sw", "Ws", "Wn"];

/// The port of the neighbouring tile that touches port `p`.
pub(crate) fn partner_port(p: usize) -> usize {
    ((p + 4) % 8) ^ 1
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureTemplate {
    pub kind: FeatureKind,
    /// Bit `s` set when the feature touches side `s`.
    pub sides: u8,
    /// Bit `p` set when the (field) feature touches port `p`.
    pub ports: u8,
    /// City slots bordering this field.
    pub cities: Vec<u8>,
}

/// One rotation of a tile kind, in world orientation.
#[derive(Clone, Debug)]
pub struct Rotation {
    pub edges: [EdgeKind; 4],
    /// City/road slot touching each side, or `NO_SLOT`.
    pub(crate) side_slot: [u8; 4],
    /// Field slot touching each port, or `NO_SLOT`.
    pub(crate) port_slot: [u8; 8],
    /// Per slot: rotated side mask and port mask.
    pub(crate) slot_sides: Vec<u8>,
    pub(crate) slot_ports: Vec<u8>,
}

#[derive(Clone, Debug)]
pub struct TileKind {
    pub id: String,
    pub index: TileKindId,
    pub edges: [EdgeKind; 4],
    pub features: Vec<FeatureTemplate>,
    pub pennant: bool,
    pub multiplicity: u8,
    pub(crate) rotations: [Rotation; 4],
}

impl TileKind {
    pub fn rotation(&self, rot: u8) -> &Rotation {
        &self.rotations[rot as usize & 3]
    }

    pub fn has_monastery(&self) -> bool {
        self.features.iter().any(|f| f.kind == FeatureKind::Monastery)
    }
}

#[derive(Clone, Debug)]
pub struct TileSet {
    pub version: u32,
    pub kinds: Vec<TileKind>,
    pub start: TileKindId,
}

#[derive(Deserialize)]
struct RawSet {
    version: u32,
    start: String,
    tile: Vec<RawTile>,
}

#[derive(Deserialize)]
struct RawTile {
    id: String,
    count: u8,
    edges: Vec<String>,
    #[serde(default)]
    pennant: bool,
    features: Vec<RawFeature>,
}

#[derive(Deserialize)]
struct RawFeature {
    kind: String,
    #[serde(default)]
    sides: Vec<String>,
    #[serde(default)]
    ports: Vec<String>,
    #[serde(default)]
    cities: Vec<u8>,
}

/// Total tiles in a complete set, start tile included.
pub const TILE_COUNT: usize = 72;

const STANDARD_TILES: &str = include_str!("../../data/tiles.toml");

static STANDARD: OnceLock<TileSet> = OnceLock::new();

impl TileSet {
    /// The embedded base-game set.
    pub fn standard() -> &'static TileSet {
        STANDARD.get_or_init(|| TileSet::from_toml(STANDARD_TILES).expect("embedded tile set is valid"))
    }

    pub fn standard_source() -> &'static str {
        STANDARD_TILES
    }

    /// Parses and validates a tile-set file.
    pub fn from_toml(text: &str) -> Result<TileSet> {
        let raw: RawSet = toml::from_str(text).map_err(|e| Error::TileSet(e.to_string()))?;
        if raw.tile.len() > u8::MAX as usize {
            return Err(Error::TileSet("too many tile kinds".into()));
        }
        let mut kinds = Vec::with_capacity(raw.tile.len());
        for (i, t) in raw.tile.into_iter().enumerate() {
            kinds.push(build_kind(TileKindId(i as u8), t)?);
        }
        let start = kinds
            .iter()
            .find(|k| k.id == raw.start)
            .map(|k| k.index)
            .ok_or_else(|| Error::TileSet(format!("start tile `{}` not defined", raw.start)))?;
        let set = TileSet {
            version: raw.version,
            kinds,
            start,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn kind(&self, id: TileKindId) -> &TileKind {
        &self.kinds[id.0 as usize]
    }

    pub fn by_name(&self, name: &str) -> Option<TileKindId> {
        self.kinds.iter().find(|k| k.id == name).map(|k| k.index)
    }

    pub fn total_tiles(&self) -> usize {
        self.kinds.iter().map(|k| k.multiplicity as usize).sum()
    }

    fn validate(&self) -> Result<()> {
        let total = self.total_tiles();
        if total != TILE_COUNT {
            return Err(Error::TileSet(format!("multiplicities sum to {total}, expected {TILE_COUNT}")));
        }
        if self.kind(self.start).multiplicity == 0 {
            return Err(Error::TileSet("start tile has multiplicity 0".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for k in &self.kinds {
            if !seen.insert(k.id.as_str()) {
                return Err(Error::TileSet(format!("duplicate tile id `{}`", k.id)));
            }
            validate_kind(k)?;
        }
        Ok(())
    }
}

fn parse_edge(s: &str) -> Result<EdgeKind> {
    match s {
        "C" => Ok(EdgeKind::City),
        "R" => Ok(EdgeKind::Road),
        "F" => Ok(EdgeKind::Field),
        other => Err(Error::TileSet(format!("unknown edge kind `{other}`"))),
    }
}

fn parse_kind(s: &str) -> Result<FeatureKind> {
    match s {
        "city" => Ok(FeatureKind::City),
        "road" => Ok(FeatureKind::Road),
        "field" => Ok(FeatureKind::Field),
        "monastery" => Ok(FeatureKind::Monastery),
        other => Err(Error::TileSet(format!("unknown feature kind `{other}`"))),
    }
}

fn name_index(names: &[&str], s: &str, what: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| *n == s)
        .ok_or_else(|| Error::TileSet(format!("unknown {what} `{s}`")))
}

fn build_kind(index: TileKindId, raw: RawTile) -> Result<TileKind> {
    if raw.edges.len() != 4 {
        return Err(Error::TileSet(format!("tile `{}` must list 4 edges", raw.id)));
    }
    let mut edges = [EdgeKind::Field; 4];
    for (i, e) in raw.edges.iter().enumerate() {
        edges[i] = parse_edge(e)?;
    }
    let mut features = Vec::with_capacity(raw.features.len());
    for f in raw.features {
        let kind = parse_kind(&f.kind)?;
        let mut sides = 0u8;
        for s in &f.sides {
            sides |= 1 << name_index(&SIDE_NAMES, s, "side")?;
        }
        let mut ports = 0u8;
        for p in &f.ports {
            ports |= 1 << name_index(&PORT_NAMES, p, "port")?;
        }
        features.push(FeatureTemplate {
            kind,
            sides,
            ports,
            cities: f.cities,
        });
    }
    if features.len() >= NO_SLOT as usize {
        return Err(Error::TileSet(format!("tile `{}` has too many features", raw.id)));
    }
    let rotations = [0u8, 1, 2, 3].map(|r| rotate(&edges, &features, r));
    Ok(TileKind {
        id: raw.id,
        index,
        edges,
        features,
        pennant: raw.pennant,
        multiplicity: raw.count,
        rotations,
    })
}

fn rotate_sides(mask: u8, r: u8) -> u8 {
    let r = r & 3;
    ((mask << r) | (mask >> (4 - r))) & 0xF
}

fn rotate_ports(mask: u8, r: u8) -> u8 {
    mask.rotate_left(2 * (r as u32 & 3))
}

fn rotate(edges: &[EdgeKind; 4], features: &[FeatureTemplate], r: u8) -> Rotation {
    let mut rot_edges = [EdgeKind::Field; 4];
    for (s, e) in edges.iter().enumerate() {
        rot_edges[(s + r as usize) % 4] = *e;
    }
    let mut side_slot = [NO_SLOT; 4];
    let mut port_slot = [NO_SLOT; 8];
    let mut slot_sides = Vec::with_capacity(features.len());
    let mut slot_ports = Vec::with_capacity(features.len());
    for (slot, f) in features.iter().enumerate() {
        let sides = rotate_sides(f.sides, r);
        let ports = rotate_ports(f.ports, r);
        for s in 0..4 {
            if sides & (1 << s) != 0 {
                side_slot[s] = slot as u8;
            }
        }
        for p in 0..8 {
            if ports & (1 << p) != 0 {
                port_slot[p] = slot as u8;
            }
        }
        slot_sides.push(sides);
        slot_ports.push(ports);
    }
    Rotation {
        edges: rot_edges,
        side_slot,
        port_slot,
        slot_sides,
        slot_ports,
    }
}

fn validate_kind(k: &TileKind) -> Result<()> {
    let err = |msg: String| Err(Error::TileSet(format!("tile `{}`: {msg}", k.id)));
    let has_city = k.features.iter().any(|f| f.kind == FeatureKind::City);
    if k.pennant && !has_city {
        return err("pennant on a tile without a city".into());
    }
    if k.features.iter().filter(|f| f.kind == FeatureKind::Monastery).count() > 1 {
        return err("more than one monastery".into());
    }
    let mut side_cover = [0u8; 4];
    let mut port_cover = [0u8; 8];
    for (slot, f) in k.features.iter().enumerate() {
        match f.kind {
            FeatureKind::City | FeatureKind::Road => {
                if f.sides == 0 || f.ports != 0 || !f.cities.is_empty() {
                    return err(format!("slot {slot}: {} must list sides only", f.kind));
                }
                let want = if f.kind == FeatureKind::City { EdgeKind::City } else { EdgeKind::Road };
                for s in 0..4 {
                    if f.sides & (1 << s) != 0 {
                        if k.edges[s] != want {
                            return err(format!("slot {slot} touches side {} of kind {:?}", SIDE_NAMES[s], k.edges[s]));
                        }
                        side_cover[s] += 1;
                    }
                }
            }
            FeatureKind::Field => {
                if f.ports == 0 || f.sides != 0 {
                    return err(format!("slot {slot}: field must list ports only"));
                }
                for p in 0..8 {
                    if f.ports & (1 << p) != 0 {
                        port_cover[p] += 1;
                    }
                }
                for &c in &f.cities {
                    match k.features.get(c as usize) {
                        Some(t) if t.kind == FeatureKind::City => {}
                        _ => return err(format!("slot {slot}: bordering slot {c} is not a city")),
                    }
                }
            }
            FeatureKind::Monastery => {
                if f.sides != 0 || f.ports != 0 || !f.cities.is_empty() {
                    return err("monastery occupies the tile centre only".into());
                }
            }
        }
    }
    for s in 0..4 {
        let (a, b) = (2 * s, 2 * s + 1);
        match k.edges[s] {
            EdgeKind::City => {
                if side_cover[s] != 1 || port_cover[a] != 0 || port_cover[b] != 0 {
                    return err(format!("city side {} must be covered by exactly one city slot", SIDE_NAMES[s]));
                }
            }
            EdgeKind::Road => {
                if side_cover[s] != 1 || port_cover[a] != 1 || port_cover[b] != 1 {
                    return err(format!("road side {} needs one road slot and two field ports", SIDE_NAMES[s]));
                }
            }
            EdgeKind::Field => {
                if side_cover[s] != 0 || port_cover[a] != 1 || port_cover[b] != 1 {
                    return err(format!("field side {} needs both ports covered once", SIDE_NAMES[s]));
                }
            }
        }
    }
    Ok(())
}
