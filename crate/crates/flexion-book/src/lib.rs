//! mdbook cannot run a chapter's code blocks against the real crate, so
//! the guide's chapters are included here as doc comments and
//! `cargo test --doc` exercises every snippet. If a chapter and the
//! library drift apart, this crate fails to test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/beam-model.md")]
pub mod beam_model {}

#[doc = include_str!("../../../book/src/swarm-optimizer.md")]
pub mod swarm_optimizer {}

#[doc = include_str!("../../../book/src/tip-solver.md")]
pub mod tip_solver {}

#[doc = include_str!("../../../book/src/oracle.md")]
pub mod oracle {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
