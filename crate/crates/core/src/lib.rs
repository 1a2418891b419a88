//! Engine for auditing dimension-reduction embeddings against a grand tour of
//! the original data.
//!
//! The crate is organized by pipeline stage:
//!
//! * [`numerics`]: data matrices, orthonormal bases, SVD, PCA, half range.
//! * [`tour`]: random bases, geodesic interpolation and the frame stream.
//! * [`embed`]: exact t-SNE, PCA layouts and correspondence analysis.
//! * [`simulate`]: benchmark data generators and weighted subsampling.
//! * [`diagnostics`]: neighbor graphs and preservation scores.
//! * [`session`]: the interactive session state machine and wire protocol.

pub mod error;
pub mod io;
pub mod numerics;
pub mod embed;
pub mod tour;
pub mod simulate;
pub mod diagnostics;
pub mod session;

pub use error::{Error, Result};
pub use numerics::{DataMatrix, PcaResult, ProjectionBasis, SvdResult};
pub use tour::{TourPath, TourPathState};
pub use simulate::LabeledDataset;
pub use diagnostics::{NeighborGraph, PreservationReport};
pub use session::{Session, SessionConfig, SessionState};
