pub mod benefit;
pub mod error;
pub mod heterogeneity;
pub mod inference;
pub mod io;
pub mod lp;
pub mod model;
pub mod validation;
