//! Instance generators and the brute-force oracle.

mod brute;
mod generators;
mod surface;

pub use brute::{brute_force, brute_force_with_budget, sequential_log_z, BruteForce, DEFAULT_ENUMERATION_BUDGET};
pub use generators::{
    gen_bounded_loop_network, gen_bounded_loop_tn, gen_ising_chain, gen_ising_triangle_chain, gen_random_gm,
    gen_random_network, gen_random_tn, gen_random_tree, gen_square_lattice_tn, gen_triangle_chain, random_cactus,
    ChainKind, ChainSeed, GeneratorSpec, TriangleChain,
};
pub use surface::{gen_surface_code_extended, CodeExcerpt, SurfaceCodeInstance};
