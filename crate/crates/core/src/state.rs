//! Partial colorings over a residual graph.
//!
//! A committed vertex leaves the residual graph: its color disappears from
//! the residual palettes of its uncolored neighbors and their residual
//! degrees drop by one. The surplus `S(v) = Q(v) - d(v)` of an uncolored
//! vertex therefore never decreases, since each commit removes at most one
//! color from `v`'s palette while removing one neighbor.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{InvariantViolation, StateError};
use crate::graph::{Graph, VertexId};
use crate::palette::{ColorId, ResidualPalette};

/// Residual quantities recorded right after the initial coloring step.
#[derive(Debug, Clone, Serialize)]
pub struct InitialSnapshot {
    /// `Pal_0(v)`, sorted.
    pub palettes: Vec<Vec<ColorId>>,
    /// `Q_0(v)`.
    pub palette_size: Vec<usize>,
    /// `d_0(v)`.
    pub degree: Vec<usize>,
}

impl InitialSnapshot {
    /// `S_0(v)`.
    pub fn surplus(&self, v: VertexId) -> i64 {
        self.palette_size[v] as i64 - self.degree[v] as i64
    }
}

#[derive(Debug, Clone)]
pub struct ColoringState {
    palettes: Vec<ResidualPalette>,
    tentative: Vec<ColorId>,
    committed: Vec<ColorId>,
    residual_degree: Vec<usize>,
    uncolored: usize,
    oversized_palettes: bool,
    snapshot: Option<InitialSnapshot>,
}

/// Validates the palettes against `graph` and builds a fresh state.
///
/// Every palette needs at least `Δ+1` distinct nonblank colors. Palettes
/// larger than that are accepted and flagged through
/// [`ColoringState::has_oversized_palettes`].
pub fn init_state(graph: &Graph, palettes: Vec<Vec<ColorId>>) -> Result<ColoringState, StateError> {
    if palettes.len() != graph.n() {
        return Err(StateError::PaletteCount {
            expected: graph.n(),
            got: palettes.len(),
        });
    }
    let required = graph.max_degree() + 1;
    let mut oversized = false;
    let mut residual = Vec::with_capacity(palettes.len());
    for (v, mut colors) in palettes.into_iter().enumerate() {
        colors.sort_unstable();
        if let Some(w) = colors.windows(2).find(|w| w[0] == w[1]) {
            return Err(StateError::DuplicateColor {
                vertex: v,
                color: w[0],
            });
        }
        if colors.first().is_some_and(|c| c.is_blank()) {
            return Err(StateError::BlankInPalette(v));
        }
        if colors.len() < required {
            return Err(StateError::PaletteTooSmall {
                vertex: v,
                size: colors.len(),
                required,
            });
        }
        oversized |= colors.len() > required;
        residual.push(ResidualPalette::new(colors));
    }
    let n = graph.n();
    Ok(ColoringState {
        palettes: residual,
        tentative: vec![ColorId::BLANK; n],
        committed: vec![ColorId::BLANK; n],
        residual_degree: graph.vertices().map(|v| graph.degree(v)).collect(),
        uncolored: n,
        oversized_palettes: oversized,
        snapshot: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CommitSummary {
    pub colored: usize,
}

impl ColoringState {
    pub fn n(&self) -> usize {
        self.committed.len()
    }

    pub fn palette(&self, v: VertexId) -> &ResidualPalette {
        &self.palettes[v]
    }

    /// Residual palette size `Q(v)`.
    pub fn palette_size(&self, v: VertexId) -> usize {
        self.palettes[v].len()
    }

    /// Residual degree `d(v)`. Frozen once `v` is colored.
    pub fn residual_degree(&self, v: VertexId) -> usize {
        self.residual_degree[v]
    }

    /// `S(v) = Q(v) - d(v)`. Only meaningful for uncolored vertices.
    pub fn surplus(&self, v: VertexId) -> i64 {
        self.palettes[v].len() as i64 - self.residual_degree[v] as i64
    }

    pub fn committed(&self, v: VertexId) -> ColorId {
        self.committed[v]
    }

    pub fn tentative(&self, v: VertexId) -> ColorId {
        self.tentative[v]
    }

    pub fn tentative_colors(&self) -> &[ColorId] {
        &self.tentative
    }

    pub(crate) fn set_tentative(&mut self, v: VertexId, color: ColorId) {
        self.tentative[v] = color;
    }

    pub(crate) fn clear_tentative(&mut self) {
        self.tentative.fill(ColorId::BLANK);
    }

    /// Committed colors, blank for uncolored vertices.
    pub fn coloring(&self) -> &[ColorId] {
        &self.committed
    }

    pub fn is_colored(&self, v: VertexId) -> bool {
        !self.committed[v].is_blank()
    }

    pub fn uncolored_count(&self) -> usize {
        self.uncolored
    }

    pub fn uncolored(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.committed
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_blank())
            .map(|(v, _)| v)
    }

    /// True when some palette is larger than `Δ+1`. The good-color double
    /// counting assumes exactly `Δ+1`, so diagnostics read differently then.
    pub fn has_oversized_palettes(&self) -> bool {
        self.oversized_palettes
    }

    pub fn snapshot(&self) -> Option<&InitialSnapshot> {
        self.snapshot.as_ref()
    }

    pub(crate) fn record_snapshot(&mut self) {
        self.snapshot = Some(InitialSnapshot {
            palettes: self.palettes.iter().map(ResidualPalette::sorted).collect(),
            palette_size: self.palettes.iter().map(ResidualPalette::len).collect(),
            degree: self.residual_degree.clone(),
        });
    }

    /// Colors every vertex in `assignments` and updates the residual graph.
    ///
    /// The whole batch is validated before anything changes: each vertex
    /// must be uncolored and listed once, each color must sit in the
    /// vertex's residual palette, and no edge may end up monochromatic.
    pub fn commit_colors(
        &mut self,
        graph: &Graph,
        assignments: &[(VertexId, ColorId)],
    ) -> Result<CommitSummary, InvariantViolation> {
        let mut batch: HashMap<VertexId, ColorId> = HashMap::with_capacity(assignments.len());
        for &(v, color) in assignments {
            if v >= self.n() {
                return Err(InvariantViolation::UnknownVertex(v));
            }
            if self.is_colored(v) {
                return Err(InvariantViolation::AlreadyColored(v));
            }
            if color.is_blank() {
                return Err(InvariantViolation::BlankAssignment(v));
            }
            if !self.palettes[v].contains(color) {
                return Err(InvariantViolation::ColorNotAvailable { vertex: v, color });
            }
            if batch.insert(v, color).is_some() {
                return Err(InvariantViolation::DuplicateAssignment(v));
            }
        }
        for &(v, color) in assignments {
            for &w in graph.neighbors(v) {
                if self.committed[w] == color || batch.get(&w) == Some(&color) {
                    return Err(InvariantViolation::Monochromatic {
                        u: v.min(w),
                        v: v.max(w),
                        color,
                    });
                }
            }
        }

        for &(v, color) in assignments {
            self.committed[v] = color;
        }
        self.uncolored -= assignments.len();

        let mut before: HashMap<VertexId, i64> = HashMap::new();
        for &(v, color) in assignments {
            for &w in graph.neighbors(v) {
                if self.is_colored(w) {
                    continue;
                }
                before.entry(w).or_insert_with(|| {
                    self.palettes[w].len() as i64 - self.residual_degree[w] as i64
                });
                self.palettes[w].remove(color);
                self.residual_degree[w] -= 1;
            }
        }
        for (w, prior) in before {
            let after = self.surplus(w);
            if after < prior {
                return Err(InvariantViolation::SurplusDecreased {
                    vertex: w,
                    before: prior,
                    after,
                });
            }
        }
        Ok(CommitSummary {
            colored: assignments.len(),
        })
    }

    /// Recomputes everything the state maintains incrementally and reports
    /// each disagreement: residual palettes and degrees of uncolored
    /// vertices, properness of the partial coloring, and palette membership
    /// of committed colors.
    pub fn check_consistency(&self, graph: &Graph) -> Vec<InvariantViolation> {
        let mut violations = Vec::new();
        let mut seen = Vec::new();
        for v in graph.vertices() {
            let color = self.committed[v];
            if !color.is_blank() {
                if !self.palettes[v].in_original(color) {
                    violations.push(InvariantViolation::OffPalette { vertex: v, color });
                }
                for &w in graph.neighbors(v) {
                    if v < w && self.committed[w] == color {
                        violations.push(InvariantViolation::Monochromatic { u: v, v: w, color });
                    }
                }
                continue;
            }
            seen.clear();
            let mut uncolored_neighbors = 0;
            for &w in graph.neighbors(v) {
                let c = self.committed[w];
                if c.is_blank() {
                    uncolored_neighbors += 1;
                } else if self.palettes[v].in_original(c) {
                    seen.push(c);
                }
            }
            seen.sort_unstable();
            seen.dedup();
            let palette = &self.palettes[v];
            let actual_q = palette.original().len() - seen.len();
            let stale = seen.iter().any(|&c| palette.contains(c));
            if stale || actual_q != palette.len() || uncolored_neighbors != self.residual_degree[v]
            {
                violations.push(InvariantViolation::ResidualDrift {
                    vertex: v,
                    tracked_q: palette.len(),
                    tracked_d: self.residual_degree[v],
                    actual_q,
                    actual_d: uncolored_neighbors,
                });
            }
        }
        violations
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::palette::canonical_palettes;

    fn colors(cs: &[u32]) -> Vec<ColorId> {
        cs.iter().copied().map(ColorId).collect()
    }

    fn complete(n: usize) -> Graph {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn triangle_surplus_one() {
        let g = complete(3);
        let s = init_state(&g, canonical_palettes(&g)).unwrap();
        for v in g.vertices() {
            assert_eq!(s.surplus(v), 1);
            assert_eq!(s.committed(v), ColorId::BLANK);
            assert_eq!(s.tentative(v), ColorId::BLANK);
        }
        assert!(!s.has_oversized_palettes());
    }

    #[test]
    fn isolated_vertex() {
        let g = Graph::from_edges(1, []).unwrap();
        let s = init_state(&g, vec![colors(&[1])]).unwrap();
        assert_eq!(s.surplus(0), 1);
    }

    #[test]
    fn star_surplus() {
        let g = Graph::from_edge_list((1..=4).map(|leaf| (0, leaf))).unwrap();
        let s = init_state(&g, vec![colors(&[1, 2, 3, 4, 5]); 5]).unwrap();
        assert_eq!(s.surplus(0), 1);
        for leaf in 1..=4 {
            assert_eq!(s.surplus(leaf), 4);
        }
        assert!(!s.has_oversized_palettes());
    }

    #[test]
    fn palette_validation() {
        let g = complete(3);
        assert_eq!(
            init_state(
                &g,
                vec![colors(&[1, 2, 3]), colors(&[1, 2]), colors(&[1, 2, 3])]
            )
            .unwrap_err(),
            StateError::PaletteTooSmall {
                vertex: 1,
                size: 2,
                required: 3
            }
        );
        assert_eq!(
            init_state(
                &g,
                vec![colors(&[0, 1, 2]), colors(&[1, 2, 3]), colors(&[1, 2, 3])]
            )
            .unwrap_err(),
            StateError::BlankInPalette(0)
        );
        assert!(matches!(
            init_state(&g, vec![colors(&[1, 1, 2, 3]); 3]).unwrap_err(),
            StateError::DuplicateColor { .. }
        ));
        assert!(init_state(&g, vec![colors(&[1, 2, 3, 4]); 3])
            .unwrap()
            .has_oversized_palettes());
    }

    #[test]
    fn path_commit_updates_neighbors() {
        let g = Graph::from_edge_list([(0, 1), (1, 2)]).unwrap();
        let mut s = init_state(
            &g,
            vec![colors(&[1, 2, 3]), colors(&[1, 2, 3]), colors(&[2, 3, 4])],
        )
        .unwrap();
        let before: Vec<i64> = g.vertices().map(|v| s.surplus(v)).collect();
        s.commit_colors(&g, &[(1, ColorId(1))]).unwrap();
        // 1 is in Pal(0) but not Pal(2).
        assert_eq!(s.palette_size(0), 2);
        assert_eq!(s.palette_size(2), 3);
        assert_eq!(s.residual_degree(0), 0);
        assert_eq!(s.residual_degree(2), 0);
        assert!(s.surplus(0) >= before[0]);
        assert!(s.surplus(2) >= before[2]);
        assert!(s.check_consistency(&g).is_empty());
    }

    #[test]
    fn commit_same_color_on_neighbors_rejected() {
        let g = Graph::from_edge_list([(0, 1)]).unwrap();
        let mut s = init_state(&g, canonical_palettes(&g)).unwrap();
        let err = s
            .commit_colors(&g, &[(0, ColorId(1)), (1, ColorId(1))])
            .unwrap_err();
        assert_eq!(
            err,
            InvariantViolation::Monochromatic {
                u: 0,
                v: 1,
                color: ColorId(1)
            }
        );
        assert_eq!(s.uncolored_count(), 2);
    }

    #[test]
    fn commit_against_existing_neighbor_rejected() {
        let g = Graph::from_edge_list([(0, 1)]).unwrap();
        let mut s = init_state(&g, canonical_palettes(&g)).unwrap();
        s.commit_colors(&g, &[(0, ColorId(2))]).unwrap();
        assert_eq!(
            s.commit_colors(&g, &[(1, ColorId(2))]).unwrap_err(),
            InvariantViolation::ColorNotAvailable {
                vertex: 1,
                color: ColorId(2)
            }
        );
        assert_eq!(
            s.commit_colors(&g, &[(0, ColorId(1))]).unwrap_err(),
            InvariantViolation::AlreadyColored(0)
        );
        assert_eq!(
            s.commit_colors(&g, &[(1, ColorId::BLANK)]).unwrap_err(),
            InvariantViolation::BlankAssignment(1)
        );
    }

    #[test]
    fn k4_two_commits() {
        let g = complete(4);
        let mut s = init_state(&g, canonical_palettes(&g)).unwrap();
        s.commit_colors(&g, &[(0, ColorId(1)), (1, ColorId(2))])
            .unwrap();
        for v in [2, 3] {
            assert_eq!(s.palette_size(v), 2);
            assert_eq!(s.residual_degree(v), 1);
            assert_eq!(s.surplus(v), 1);
        }
        assert_eq!(s.uncolored_count(), 2);
        assert!(s.check_consistency(&g).is_empty());
    }
}
