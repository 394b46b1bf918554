//! One module per subcommand.

pub mod fit;
pub mod formfactor;
pub mod probe;
pub mod sample;
pub mod verify;
