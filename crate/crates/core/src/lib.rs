pub mod arith;
pub mod asymptotics;
pub mod campaign;
pub mod error;
pub mod repr;
pub mod sieve;
pub mod squarefull;
pub mod sum;
pub mod zeta;
