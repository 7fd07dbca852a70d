//! Host package for the `acceptance` test target; the criteria live in `opensusy::regression`.

pub use opensusy::regression::*;
