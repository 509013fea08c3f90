//! The concrete program spaces: total orderings, binary-alphabet DFAs, and
//! loop/shape drawing programs, plus their neighborhood functions.

pub mod dfa;
pub mod drawing;
pub mod ordering;

pub use dfa::{nb_dfa, DfaParams, DfaSpace};
pub use drawing::{nb_draw, DrawProgram, DrawingSpace, GrammarConfig, Grid, WindowCell};
pub use ordering::OrderingSpace;

use serde::{Deserialize, Serialize};

use crate::core::DomainId;

/// Neighborhood metrics used when conditioning a prediction on a subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborhoodKind {
    /// The whole subset at once; used for orderings, where the pair universe
    /// is small enough to encode without factorization.
    OrderingFull,
    /// Top-k by longest common prefix + suffix length.
    DfaPrefixSuffix,
    /// Square pixel window centered on the query.
    DrawWindow,
}

/// A neighborhood function nb over a selected subset: `kind` picks the
/// metric, `k` bounds how many neighbors are returned (ignored for
/// `DrawWindow`, whose extent is the window size).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborhoodFn {
    pub kind: NeighborhoodKind,
    pub k: usize,
}

impl NeighborhoodFn {
    pub fn for_domain(domain: DomainId) -> Self {
        match domain {
            DomainId::Ordering => NeighborhoodFn { kind: NeighborhoodKind::OrderingFull, k: usize::MAX },
            DomainId::Dfa => NeighborhoodFn { kind: NeighborhoodKind::DfaPrefixSuffix, k: 10 },
            DomainId::Drawing => NeighborhoodFn { kind: NeighborhoodKind::DrawWindow, k: 49 },
        }
    }
}

/// Space construction config, the on-disk form used by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "lowercase")]
pub enum SpaceConfig {
    Ordering {
        n: usize,
    },
    Dfa {
        num_states: u8,
    },
    Drawing {
        width: u8,
        height: u8,
        #[serde(default)]
        grammar: GrammarConfig,
    },
}

impl SpaceConfig {
    pub fn domain_id(&self) -> DomainId {
        match self {
            SpaceConfig::Ordering { .. } => DomainId::Ordering,
            SpaceConfig::Dfa { .. } => DomainId::Dfa,
            SpaceConfig::Drawing { .. } => DomainId::Drawing,
        }
    }
}
