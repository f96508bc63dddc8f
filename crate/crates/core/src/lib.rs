//! Filesystem synchronization as an algebra of commands.
//!
//! A filesystem maps nodes of a path forest to values (empty, directory, or
//! file contents). Updates are commands that check the type found at a node
//! and write a new value. This crate provides:
//!
//! - [`model`]: paths, values, filesystems, commands and their application;
//! - [`algebra`]: how adjacent command pairs behave, independence, inverses
//!   and simplification of command logs;
//! - [`ordering`]: the orders in which a simple command set can be applied
//!   without breaking;
//! - [`detect`]: the commands that turn one snapshot into another;
//! - [`reconcile`]: propagation of non-conflicting updates between two
//!   replicas;
//! - [`oracle`]: brute-force semantics over small filesystem spaces, used to
//!   check all of the above.
//!
//! ```
//! use fsalg_core::{detect, reconcile, Filesystem, NodePath, Value};
//!
//! let p = |s| NodePath::parse(s).unwrap();
//! let base = Filesystem::from_entries([(p("/a"), Value::Dir)]).unwrap();
//! let a = Filesystem::empty();
//! let b = Filesystem::from_entries([(p("/a"), Value::Dir), (p("/b"), Value::Dir)]).unwrap();
//!
//! let plan = reconcile(
//!     &detect(&base, &a).unwrap().commands,
//!     &detect(&base, &b).unwrap().commands,
//! )
//! .unwrap();
//! assert!(plan.conflicts.is_empty());
//! assert_eq!(a.apply_seq(&plan.to_a), b.apply_seq(&plan.to_b));
//! ```

pub mod algebra;
pub mod detect;
pub mod error;
pub mod model;
pub mod oracle;
pub mod ordering;
pub mod reconcile;

pub use algebra::{classify_pair, independent, simplify, PairClass};
pub use detect::{detect, detect_ordered, NodeForest, UpdateSet};
pub use error::{BreaksEverything, DetectError, ModelError, OrderError, ReconcileError};
pub use model::{
    Command, CommandSequence, ContentId, Filesystem, FsState, NodePath, TypeTag, Value,
};
pub use ordering::{enumerate_orders, order_canonical};
pub use reconcile::{reconcile, ConflictPair, ReconcilePlan};
