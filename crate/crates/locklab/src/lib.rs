//! Logic-locking attack workbench: the std-side companion to
//! `locklab-core`. This crate carries everything that touches the outside
//! world: the bench netlist format, dataset/model/report files, the
//! end-to-end attack pipelines and the command-line interface.

pub mod bench;
pub mod cli;
pub mod config;
pub mod formats;
pub mod pipeline;

pub use locklab_core as core;
