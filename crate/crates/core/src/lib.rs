//! Workbench core for compact closed categories: typed morphism terms over
//! user signatures, string-diagram normal forms with decidable equality and
//! subdiagram rewriting, matrix models over pluggable commutative semirings,
//! and machine-checked structural arguments (cloning and deleting collapse,
//! teleportation-style protocols).

pub mod diagram;
pub mod matrix;
pub mod model;
pub mod nogo;
pub mod protocols;
pub mod random;
pub mod report;
pub mod scalar;
pub mod signature;
pub mod term;

pub use diagram::{
    apply_equation, canonical_key, enumerate_matches, equal_diagrams, render_dot, term_key,
    to_diagram, CanonicalKey, DiagNode, Diagram, DiagramError, Equation, LoopLabel, Match,
    PortRef, Wire,
};
pub use model::builtin::{
    finset_model, qubit_model, rel_model, semilattice_model, teleport_model,
};
pub use model::json::{
    model_from_json_file, model_from_json_file_auto, model_from_json_str,
    model_from_json_str_auto, model_from_json_str_tol, ModelJsonError,
};
pub use model::{
    parse_word, scalar_action, scalar_laws_check, EvalError, EvalReport, FamilyKind, Model,
    ModelError, ModelKind, ModelT, NaturalFamily, TeleportBranch, TeleportSpec,
};
pub use nogo::{
    cap_swap_equation, check_cloning_axioms, cloning_collapse_check, delta_unit_lemma_check,
    deleting_collapse_check, deleting_collapse_derivation, derive_collapse,
    find_naturality_counterexample, idempotent_scalars_check, key_digest, lattices_of_size,
    lattices_up_to, model_cap_swap, model_cloning_axioms, model_delta_unit,
    model_idempotent_scalars, model_naturality_search, model_product_structure,
    product_structure_check, verify_cap_swap_proof, DerivationReport, DerivationStep,
    IdempotenceOutcome, NaturalityWitness, NogoError, RewriteData,
};
pub use random::{
    congruent_pair, random_scalar_term, random_term, random_word, rng_from_seed,
};
pub use protocols::{
    bell_pair_terms, bent_composite_term, compositionality_lemma_check, model_teleport_verify,
    teleport_derivation, teleport_verify, InverseOracle, ProtocolError, ProtocolReport,
};
pub use report::{CheckItem, CheckReport};
pub use signature::{
    dual_object, Factor, Generator, ObjectExpr, Permutation, Signature, SignatureError,
};
pub use term::{
    coname_of, dual_of, name_of, perm_term, perm_term_from_images, trace_term, typecheck, Term,
    TermPath, TypeError, TypedTerm,
};
