//! Weighted least-squares reconstruction of functions on `[0,1]^d` from
//! random samples, over finite orthonormal systems.

pub mod basis1d;
pub mod bounds;
pub mod error;
pub mod experiment;
pub mod lsq;
pub mod numeric;
pub mod quadrature;
pub mod sampling;
pub mod system;
pub mod tensor;
pub mod testfn;

pub use basis1d::{BasisFamily, EigenRootTable, FamilyId, MeasureId};
pub use error::{Error, Result};
pub use lsq::{DesignOperator, LeastSquaresFit, OperatorMode};
pub use sampling::{MeasurePair, NoiseModel, SampleSet};
pub use system::{OrthonormalSystem, Truncated1d};
pub use tensor::{CrossTarget, HyperbolicCross, MultiIndex, TensorSystem};
