//! Conjugacy invariants of isometries of quadratic spaces over `Q_p`, computed
//! exactly over `Q`.
//!
//! The pipeline: [`IsometryPair`] → [`analyze`] (primary components, level
//! blocks, residual forms) → [`MilnorInvariant`] → [`decide_single_class`].
//! [`assemble`] goes the other way, from block descriptions to a pair, and
//! [`counterexample`] builds a GL-conjugate pair outside the orthogonal class.

pub mod arith;
pub mod error;
pub mod linalg;
pub mod poly;
pub mod quadspace;
pub mod padic_ext;
pub mod hermitian;
pub mod milnor;
pub mod decision;
pub mod realize;
pub mod corpus;

pub use arith::{hilbert_symbol, parse_rat, rat, rat_to_string, square_class, PadicContext, Rat, SquareClass};
pub use decision::{decide_single_class, Condition, FailingClause, Verdict};
pub use error::{Error, Result};
pub use hermitian::{HermCase, HermInvariant};
pub use linalg::Mat;
pub use milnor::{
    analyze, check_isometry, gl_conjugate, invariant_from_specs, milnor_invariant, o_conjugate, verify_structure, Analysis, IsometryPair,
    LevelRecord, MilnorInvariant, ResidualClass,
};
pub use poly::{factor_padic, FactorType, PadicFactorization, PolyQ};
pub use quadspace::{form_from_invariant, is_isometric, quad_invariant, QuadInvariant, QuadSpace};
pub use realize::{assemble, check_witness, counterexample, BlockKind, BlockSpec, CounterexampleRecipe, RecipeCase, WitnessCheck};
