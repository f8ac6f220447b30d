//! Joint syntacto-discourse parsing core.
//!
//! A joint tree carries discourse relations in its upper layer and ordinary
//! constituency structure below the elementary discourse units. This crate
//! holds everything that does not touch the filesystem:
//!
//! * [`tree`], [`rst`], [`splice`]: the tree types, conversion of RST trees to
//!   discourse skeletons, and splicing constituency subtrees under the EDUs.
//! * [`transition`]: the span-based shift/combine/label system, its static
//!   and dynamic oracles, and greedy decoding.
//! * [`model`], [`optim`], [`train`]: a two-layer BiLSTM boundary encoder with
//!   hand-written backpropagation, Adam, and training with exploration.
//! * [`eval`]: span, segmentation and discourse metrics.
//! * [`verify`]: brute-force and finite-difference checks used by tests and
//!   the `verify` command.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod eval;
pub mod model;
pub mod optim;
pub mod rst;
pub mod splice;
pub mod stats;
pub mod synth;
pub mod train;
pub mod transition;
pub mod tree;
pub mod verify;

mod math;

pub use tree::{
    DiscourseLabel, EduSpan, JointTree, Label, LabeledSpan, Level, Node, Nuclearity,
    SyntacticLabel, Token,
};
