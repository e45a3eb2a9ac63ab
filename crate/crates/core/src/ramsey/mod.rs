//! Partite structures, the partite lemma and the partite construction.

pub mod construction;
pub mod lemma;
pub mod partite;
pub mod partner;
pub mod rectify;

pub use construction::{
    build_c0, combinations, partite_construction, partite_step, rectified_copies, BuiltStep,
    Construction, Step, DEFAULT_MAX_SIZE,
};
pub use lemma::{lemma_levels, partite_lemma, Level, PartiteLemma, Selection};
pub use partite::{rectified_structure, PartiteStructure};
pub use partner::{find_partner_p, Partner};
pub use rectify::{rectified_substructure, rectify};
