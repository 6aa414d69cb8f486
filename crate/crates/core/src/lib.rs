//! Exact certificates for the Gram-matrix cone filtration between sums of squares and
//! nonnegative forms.

pub mod exactla;
pub mod forms;
pub mod gram;
pub mod variety;
pub mod certify;
pub mod catalog;
pub mod cert;
pub mod reproduce;
pub mod cli;
