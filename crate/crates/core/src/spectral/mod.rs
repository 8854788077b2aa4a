//! Spectral estimation on the baseband stream: periodograms, window
//! response, the sidereal/annual triplet statistic and SNR bookkeeping.

mod periodogram;
mod snr;
mod triplet;
mod window;

pub use periodogram::{periodogram, PeriodogramConfig, Spectrum};
pub use snr::{coherent_integration_time, snr_estimate, SnrEstimate};
pub use triplet::{triplet_from_series, triplet_statistic, TripletMode, TripletPhases, TripletResult};
pub use window::{window_coefficients, window_response, window_transform, WindowKind, WindowResponse};
