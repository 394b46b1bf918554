//! Runs the code blocks of the guide in `book/src` as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/permgroup.md")]
pub mod permgroup {}
#[doc = include_str!("../../../book/src/formfactors.md")]
pub mod formfactors {}
#[doc = include_str!("../../../book/src/twirl.md")]
pub mod twirl {}
#[doc = include_str!("../../../book/src/probes.md")]
pub mod probes {}
#[doc = include_str!("../../../book/src/oracle.md")]
pub mod oracle {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
