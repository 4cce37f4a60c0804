pub mod audit;
pub mod coding;
pub mod error;
pub mod explorer;
pub mod inj;
pub mod orders;
pub mod periodic;
pub mod perm;
pub mod recognizer;
pub mod semaphore;
pub mod sparse;
pub mod surgery;
pub mod tower;
pub mod words;

pub use error::{Error, Result};
