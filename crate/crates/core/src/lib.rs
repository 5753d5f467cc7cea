//! Fourier estimation of spot and integrated volatility and co-volatility
//! from irregular, asynchronous observations.
//!
//! Observations are first mapped onto `[0, 2π]` with [`rescale_time`]. The
//! Fourier coefficients of the returns ([`return_fourier_coeffs`]) feed
//! either the convolution coefficients of the volatility
//! ([`convolution_coeffs`]) and a Fejér reconstruction of its path, or the
//! integrated estimators directly.

pub mod baselines;
pub mod convolution;
pub mod error;
pub mod fourier;
pub mod integrated;
pub mod series;
pub mod spot;

pub use baselines::{
    hayashi_yoshida, hayashi_yoshida_brute_force, realized_covariance_previous_tick, realized_variance,
    SyncSpec,
};
pub use convolution::{convolution_coeffs, convolution_coeffs_ordered, AlphaTable};
pub use error::{EstimatorError, Result};
pub use fourier::{coeffs_in_range, return_fourier_coeffs, CoeffTable};
pub use integrated::{
    dirichlet_kernel, integrated_covolatility, integrated_covolatility_dirichlet,
    integrated_covolatility_from_coeffs, integrated_volatility, integrated_volatility_fejer,
    select_cutoff, select_cutoff_bounded, FejerNormalization,
};
pub use series::{rescale_time, RescaledSeries, TickSeries};
pub use spot::{
    default_grid, fejer_spot_reconstruct, positive_convolution, positive_spot_reconstruct,
    PositiveNormalization, SpotCurve, SpotVariant,
};
