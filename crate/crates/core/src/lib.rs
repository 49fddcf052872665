pub mod capacity;
pub mod cdc;
pub mod channel;
pub mod error;
pub mod gds;
pub mod linalg;
pub mod optim;
pub mod scalar;
pub mod singleletter;
pub mod witness;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CMatrix = linalg::ComplexMatrix<f64>;
pub type Channel = channel::KrausChannel<f64>;
pub type Gds = gds::GdsChannel<f64>;
