//! Self-similar structures, their level-m vertex graphs and the resistance metric.

mod dimension;
mod graph;
mod metric;
mod structure;

pub use dimension::similarity_dimension;
pub use graph::{build_level, build_level_with_budget, VertexGraph, Word, DEFAULT_BUDGET, GLUE_TOL};
pub use metric::{resistance, scaling_constants, Ball, ResistanceMetric, ScalingConstants};
pub use structure::{
    complete_graph_form, load_structure, AffineMap, HarmonicStructure, Identification,
    SelfSimilarStructure, StructureConfig, EMBEDDING_TOL,
};
pub(crate) use structure::dist;
