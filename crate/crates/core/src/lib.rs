//! Multithreaded communication-avoiding LU factorization.
//!
//! A matrix is split into `b x b` tiles stored in one of several layouts.
//! Panels are factored with tournament pivoting and the remaining block
//! operations form a task graph that is executed by a hybrid scheduler: a
//! prefix of block columns is assigned statically to workers following a
//! 2D block-cyclic distribution, the rest is pulled from a shared queue.

pub mod dag;
pub mod error;
pub mod kernels;
pub mod layout;
pub mod matrix;
pub mod model;
pub mod scheduler;
pub mod trace;
pub mod tslu;

pub use dag::{Section, Task, TaskGraph, TaskId, TaskKind};
pub use error::{CaluError, Result};
pub use kernels::{PanelLU, PermutationVector};
pub use layout::{LayoutKind, LayoutMatrix, Partition, ThreadGrid};
pub use matrix::{DenseMatrix, Generator};
pub use model::{ModelInput, ModelOutput};
pub use scheduler::{ExecMode, Policy, RunReport, SchedulerConfig};
pub use trace::{Timeline, TraceEvent};
