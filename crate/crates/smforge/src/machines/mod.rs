//! Concrete machines: the noisy shifter, the builders that combine machines, plug-ins and
//! the main machine.

pub mod builders;
pub mod m1;
pub mod main_machine;
pub mod plugins;

use thiserror::Error;

use crate::smachine::MachineError;
use crate::words::WordError;

#[derive(Debug, Error)]
pub enum MachinesError {
    #[error("the input alphabet is empty")]
    EmptyAlphabet,
    #[error("alphabet: {0}")]
    Alphabet(String),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("cannot combine machines: {0}")]
    Compose(String),
    #[error("plug-in: {0}")]
    Plugin(String),
    #[error("replay failed: {0}")]
    Replay(String),
}
