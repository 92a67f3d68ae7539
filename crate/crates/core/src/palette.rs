//! Colors, palettes and the residual palette structure.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, VertexId};

/// A color. The value 0 is the blank color and never appears in a palette.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ColorId(pub u32);

impl ColorId {
    pub const BLANK: ColorId = ColorId(0);

    pub fn is_blank(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for ColorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for ColorId {
    fn from(value: u32) -> Self {
        ColorId(value)
    }
}

/// Every vertex gets `{1, ..., Δ+1}`.
pub fn canonical_palettes(graph: &Graph) -> Vec<Vec<ColorId>> {
    let size = graph.max_degree() as u32 + 1;
    let palette: Vec<ColorId> = (1..=size).map(ColorId).collect();
    vec![palette; graph.n()]
}

/// Parses a JSON object mapping vertex IDs (as strings) to color lists.
/// Vertices not mentioned get an empty palette, which `init_state` rejects.
pub fn palettes_from_json(json: &str, n: usize) -> Result<Vec<Vec<ColorId>>, serde_json::Error> {
    let map: BTreeMap<VertexId, Vec<ColorId>> = serde_json::from_str(json)?;
    let mut palettes = vec![Vec::new(); n];
    for (v, colors) in map {
        if v >= n {
            return Err(serde::de::Error::custom(format!(
                "palette given for vertex {v}, graph has {n} vertices"
            )));
        }
        palettes[v] = colors;
    }
    Ok(palettes)
}

pub fn palettes_to_json(palettes: &[Vec<ColorId>]) -> String {
    let map: BTreeMap<VertexId, &Vec<ColorId>> = palettes.iter().enumerate().collect();
    serde_json::to_string(&map).expect("palette map serializes")
}

const GONE: u32 = u32::MAX;

/// A palette that shrinks as neighbors commit colors.
///
/// `original` stays sorted for membership lookups; `live` holds indices into
/// it for the colors still available, and `slot[k]` is the position of
/// `original[k]` within `live` (or `GONE`). Removal is a swap-remove and
/// sampling is a uniform index into `live`.
#[derive(Debug, Clone)]
pub struct ResidualPalette {
    original: Vec<ColorId>,
    live: Vec<u32>,
    slot: Vec<u32>,
}

impl ResidualPalette {
    /// `colors` must be sorted, deduplicated and free of the blank color.
    pub(crate) fn new(colors: Vec<ColorId>) -> Self {
        debug_assert!(colors.windows(2).all(|w| w[0] < w[1]));
        let len = colors.len() as u32;
        ResidualPalette {
            original: colors,
            live: (0..len).collect(),
            slot: (0..len).collect(),
        }
    }

    pub fn original(&self) -> &[ColorId] {
        &self.original
    }

    pub fn in_original(&self, color: ColorId) -> bool {
        self.original.binary_search(&color).is_ok()
    }

    /// Current size Q(v).
    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn contains(&self, color: ColorId) -> bool {
        match self.original.binary_search(&color) {
            Ok(k) => self.slot[k] != GONE,
            Err(_) => false,
        }
    }

    /// Removes `color` if present; returns whether it was.
    pub fn remove(&mut self, color: ColorId) -> bool {
        let Ok(k) = self.original.binary_search(&color) else {
            return false;
        };
        let pos = self.slot[k];
        if pos == GONE {
            return false;
        }
        let last = *self
            .live
            .last()
            .expect("live is nonempty when a slot is set");
        self.live.swap_remove(pos as usize);
        if last as usize != k {
            self.slot[last as usize] = pos;
        }
        self.slot[k] = GONE;
        true
    }

    /// Uniform color from the residual palette; `None` if empty.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<ColorId> {
        if self.live.is_empty() {
            return None;
        }
        let idx = rng.gen_range(0..self.live.len());
        Some(self.original[self.live[idx] as usize])
    }

    /// Residual colors in no particular order.
    pub fn iter(&self) -> impl Iterator<Item = ColorId> + '_ {
        self.live.iter().map(|&k| self.original[k as usize])
    }

    /// Residual colors in increasing order.
    pub fn sorted(&self) -> Vec<ColorId> {
        let mut colors: Vec<_> = self.iter().collect();
        colors.sort_unstable();
        colors
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn palette(colors: &[u32]) -> ResidualPalette {
        ResidualPalette::new(colors.iter().copied().map(ColorId).collect())
    }

    #[test]
    fn remove_and_contains() {
        let mut p = palette(&[1, 3, 5, 7]);
        assert!(p.remove(ColorId(3)));
        assert!(!p.remove(ColorId(3)));
        assert!(!p.remove(ColorId(4)));
        assert!(!p.contains(ColorId(3)));
        assert!(p.in_original(ColorId(3)));
        assert_eq!(p.sorted(), vec![ColorId(1), ColorId(5), ColorId(7)]);
        assert!(p.remove(ColorId(7)));
        assert!(p.remove(ColorId(1)));
        assert!(p.remove(ColorId(5)));
        assert!(p.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(p.sample(&mut rng), None);
    }

    #[test]
    fn json_palettes() {
        let p = palettes_from_json(r#"{"0":[1,2],"2":[3]}"#, 3).unwrap();
        assert_eq!(p[0], vec![ColorId(1), ColorId(2)]);
        assert!(p[1].is_empty());
        assert_eq!(p[2], vec![ColorId(3)]);
        assert!(palettes_from_json(r#"{"5":[1]}"#, 3).is_err());
        let back = palettes_from_json(&palettes_to_json(&p), 3).unwrap();
        assert_eq!(back, p);
    }

    proptest! {
        #[test]
        fn removal_sequence_matches_set_model(
            colors in proptest::collection::btree_set(1u32..200, 1..60),
            removals in proptest::collection::vec(0u32..220, 0..80),
        ) {
            let mut model: BTreeSet<u32> = colors.clone();
            let mut p = palette(&colors.iter().copied().collect::<Vec<_>>());
            for r in removals {
                prop_assert_eq!(p.remove(ColorId(r)), model.remove(&r));
                prop_assert_eq!(p.len(), model.len());
            }
            let live: Vec<u32> = p.sorted().into_iter().map(|c| c.0).collect();
            prop_assert_eq!(live, model.iter().copied().collect::<Vec<_>>());
            for c in 0..220 {
                prop_assert_eq!(p.contains(ColorId(c)), model.contains(&c));
            }
        }
    }
}
