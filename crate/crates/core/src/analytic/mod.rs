//! Characteristic functions, density ODEs and densities of normal products.

mod bessel;
mod charfn;
mod density;
mod duality;
mod gauss;

pub use bessel::{bessel_k, bessel_k_upto};
pub use charfn::{
    charfn_closed, charfn_closed_complex, charfn_closed_derivative, charfn_grid, charfn_ode, mgf,
    CharFnODE,
};
pub use density::{
    density_table, hermite_he, pdf_conv, pdf_series, pdf_series_detail, DensityRow, SeriesValue,
    DEFAULT_TERMS,
};
pub use duality::{dual_density_ode, dual_operator, DensityODE};
pub use gauss::{GPoly, GaussianRational};
