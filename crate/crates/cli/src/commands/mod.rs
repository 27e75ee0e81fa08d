pub mod analyze;
pub mod power;
pub mod simulate;
pub mod verify;
