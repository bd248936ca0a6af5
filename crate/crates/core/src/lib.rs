//! Exact fixed points and cycles of piecewise-linear recurrent networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`plrnn`]: the map `z -> A z + W max(z, 0) + h`, region codes, affine
//!   compositions and trajectories.
//! * [`scyfi`]: the region-flipping cycle search, an exhaustive reference
//!   enumerator, search-cost formulas and benchmark system generators.
//! * [`pwl2d`]: closed-form fixed points, 2-cycles and 3-cycles of the planar
//!   map with one switching border, plus its bifurcation curve functions.
//! * [`sweep`]: cycle libraries along parameter grids or training traces,
//!   diffed and classified into bifurcation events.
//! * [`train`]: BPTT with generalized teacher forcing, closed-form cycle
//!   gradients and the look-ahead probe.
//! * [`io`] and [`cli`]: file formats and the `scyfi` command line tool.
//!
//! ```
//! use scyfi::plrnn::PlrnnParams;
//! use scyfi::scyfi::{find_all, SearchBudget, Tolerances};
//!
//! let p = PlrnnParams::skew_tent(0.5, -2.0, 1.0);
//! let lib = find_all(&p, 2, &SearchBudget::fixed(50, 20, 7), &Tolerances::default());
//! assert_eq!(lib.count(1), 1);
//! assert_eq!(lib.count(2), 1);
//! ```

pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod plrnn;
pub mod pwl2d;
pub mod rng;
pub mod scyfi;
pub mod sweep;
pub mod train;

pub use error::{Error, Result};
pub use plrnn::{PiecewiseLinearMap, PlrnnParams, RegionCode, RegionSequence};
pub use scyfi::{CycleLibrary, CycleObject, SearchBudget, Stability, Tolerances};
