//! End-to-end compilation of a graph into an atom register.

use std::time::Instant;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::error::EmbedError;
use crate::graph::{max_degree, Graph};
use crate::layout::{improve_edge_parity, snap_to_grid, ContinuousLayout, FruchtermanReingold, Layout3D, LayoutEngine, DEFAULT_FR_ITERATIONS, MIN_SCALE};
use crate::register::{assign_detunings, blockade_graph, AtomRegister, PhysicalParams};
use crate::router::{build_augmented_graph, insert_ancillas, route_edges, AugmentedGraph};

pub const MAX_DEGREE: usize = 6;
pub const DEFAULT_SCALE: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedConfig {
    pub scale: u32,
    pub seed: u64,
    pub fr_iterations: usize,
    pub params: PhysicalParams,
    /// Extra attempts at successively larger scales.
    pub max_scale_retries: u32,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            scale: DEFAULT_SCALE,
            seed: 0,
            fr_iterations: DEFAULT_FR_ITERATIONS,
            params: PhysicalParams::default(),
            max_scale_retries: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedStats {
    pub n: usize,
    pub edges: usize,
    pub n_plus: usize,
    pub total_ancillas: usize,
    pub max_chain_ancillas: usize,
    /// Lattice cells in the bounding box of the vertex layout.
    pub volume: u64,
    pub scale: u32,
    pub attempts: u32,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub layout: Layout3D,
    pub augmented: AugmentedGraph,
    pub register: AtomRegister,
    pub stats: EmbedStats,
}

/// Lays out, routes and detunes `g`. A scale that yields an unroutable
/// layout or a register whose blockade graph differs from the chain graph
/// is retried one step larger.
pub fn embed(g: &Graph, config: &EmbedConfig) -> Result<Embedding, EmbedError> {
    let start = Instant::now();
    let delta = max_degree(g);
    if delta > MAX_DEGREE {
        return Err(EmbedError::DegreeTooHigh(delta));
    }
    if config.scale < MIN_SCALE {
        return Err(EmbedError::Config(format!("scale {} is below {MIN_SCALE}", config.scale)));
    }
    config.params.validate()?;

    let engine = FruchtermanReingold::with_iterations(config.fr_iterations);
    let continuous = if g.n() == 0 {
        ContinuousLayout { positions: Vec::new() }
    } else {
        engine.layout(g, config.seed)
    };

    let mut last_error = String::new();
    let mut scale = config.scale;
    for attempt in 1..=config.max_scale_retries + 1 {
        scale = config.scale + attempt - 1;
        match try_scale(g, &continuous, scale, &config.params) {
            Ok((layout, augmented, mut register)) => {
                register.scale = Some(scale);
                let stats = stats(g, &layout, &augmented, scale, attempt, start.elapsed().as_secs_f64());
                info!(
                    "embedded n={} into N+={} atoms at scale {scale} ({} attempt(s))",
                    stats.n, stats.n_plus, attempt
                );
                return Ok(Embedding {
                    layout,
                    augmented,
                    register,
                    stats,
                });
            }
            Err(e) => {
                debug!("scale {scale} failed: {e}");
                last_error = e;
            }
        }
    }
    Err(EmbedError::RetriesExhausted {
        attempts: (config.max_scale_retries + 1) as usize,
        last_scale: scale,
        last_error,
    })
}

fn try_scale(
    g: &Graph,
    continuous: &ContinuousLayout,
    scale: u32,
    params: &PhysicalParams,
) -> Result<(Layout3D, AugmentedGraph, AtomRegister), String> {
    let snapped = snap_to_grid(continuous, scale).map_err(|e| e.to_string())?;
    let layout = improve_edge_parity(g, &snapped, scale as i32);
    let routes = route_edges(g, &layout).map_err(|e| e.to_string())?;
    let routes = routes
        .into_iter()
        .map(insert_ancillas)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let augmented = build_augmented_graph(g, &layout, &routes).map_err(|e| e.to_string())?;
    let register = assign_detunings(&augmented, params).map_err(|e| e.to_string())?;
    let blockade = blockade_graph(&register);
    if blockade.edges() != augmented.chain_edges.as_slice() {
        return Err(format!(
            "blockade graph has {} edges, chain graph has {}",
            blockade.edge_count(),
            augmented.chain_edges.len()
        ));
    }
    Ok((layout, augmented, register))
}

fn stats(g: &Graph, layout: &Layout3D, aug: &AugmentedGraph, scale: u32, attempts: u32, runtime_s: f64) -> EmbedStats {
    let volume = if layout.is_empty() {
        0
    } else {
        let (lo, hi) = layout.bounding_box();
        (0..3).map(|k| (hi[k] - lo[k] + 1) as u64).product()
    };
    EmbedStats {
        n: g.n(),
        edges: g.edge_count(),
        n_plus: aug.n_plus(),
        total_ancillas: aug.total_ancillas(),
        max_chain_ancillas: aug.chains.iter().map(|c| c.ancillas().len()).max().unwrap_or(0),
        volume,
        scale,
        attempts,
        runtime_s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_high_degree() {
        let star = Graph::new(8, (1..8).map(|v| (0, v))).unwrap();
        assert_eq!(embed(&star, &EmbedConfig::default()).unwrap_err(), EmbedError::DegreeTooHigh(7));
    }

    #[test]
    fn rejects_small_scale() {
        let cfg = EmbedConfig {
            scale: 2,
            ..EmbedConfig::default()
        };
        assert!(matches!(embed(&Graph::path(2), &cfg), Err(EmbedError::Config(_))));
    }

    #[test]
    fn empty_and_edgeless_graphs() {
        let e = embed(&Graph::empty(0), &EmbedConfig::default()).unwrap();
        assert_eq!(e.stats.n_plus, 0);
        let e = embed(&Graph::empty(3), &EmbedConfig::default()).unwrap();
        assert_eq!(e.stats.n_plus, 3);
        assert_eq!(e.register.local_detunings, vec![0.0; 3]);
    }

    #[test]
    fn chain_counts_are_even_and_blockade_matches() {
        let g = Graph::cycle(5);
        let e = embed(&g, &EmbedConfig::default()).unwrap();
        assert_eq!(e.register.chains.len(), 5);
        for c in &e.register.chains {
            assert_eq!(c.ancillas().len() % 2, 0);
        }
        assert_eq!(blockade_graph(&e.register).edges(), e.augmented.chain_edges.as_slice());
        assert_eq!(e.register.scale, Some(e.stats.scale));
    }

    #[test]
    fn deterministic_for_a_seed() {
        let g = Graph::complete(4);
        let cfg = EmbedConfig {
            seed: 7,
            ..EmbedConfig::default()
        };
        assert_eq!(embed(&g, &cfg).unwrap().register, embed(&g, &cfg).unwrap().register);
    }
}
