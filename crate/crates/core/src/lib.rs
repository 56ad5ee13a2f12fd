//! Sublinear-time support recovery for one-bit compressed sensing.
//!
//! Three schemes are provided:
//!
//! * [`universal::build_aa`]: one matrix that approximately recovers the
//!   support of every `k`-sparse signal.
//! * [`universal::build_ae`]: one matrix that exactly recovers every support.
//! * [`foreach::build_ee`]: exact recovery with high probability for a fixed
//!   signal, using `O(k log n)` measurements.
//!
//! Every random object is seeded. With the `parallel` feature (on by default)
//! the heavy loops run on rayon; [`Exec::Sequential`] gives the same results
//! on one thread.
//!
//! ```
//! use edocs_core::{build_ae, decode, BuildOptions, SparseSignal, Tolerance};
//!
//! let scheme = build_ae(4096, 4, 42, &BuildOptions::default())?;
//! let x = SparseSignal::new(4096, [(7, 1.3), (100, -0.4), (2048, 2.0)])?;
//! let y = scheme.measure_with(&x, Tolerance::FLOAT)?;
//! let recovered = decode(&scheme, &y)?;
//! assert_eq!(recovered.indices, x.support_set());
//! assert!(recovered.column_reads < scheme.num_measurements());
//! # Ok::<(), edocs_core::EdocsError>(())
//! ```

pub mod designs;
pub mod error;
pub mod exec;
pub mod foreach;
pub mod harness;
pub mod oracle;
pub mod rng;
pub mod sensing;
pub mod splitting;
pub mod universal;

pub use error::{EdocsError, Result};
pub use exec::Exec;
pub use foreach::{build_ee, decode_ee, EeScheme};
pub use sensing::{BinaryDesign, MeasurementBits, SparseSignal, Tolerance};
pub use splitting::{build_fbs, fbs_decode, FbsDesign, GtResult};
pub use universal::{build_aa, build_ae, decode, BuildOptions, RecoveredSupport, UniversalScheme};
