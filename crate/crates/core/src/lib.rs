pub mod calendar;
pub mod error;
pub mod gof;
pub mod ingest;
pub mod intensity;
pub mod likelihood;
pub mod optimize;
pub mod params;
pub mod series;
pub mod simulate;
pub mod stability;

pub use calendar::TradingCalendar;
pub use error::{HawkesError, Result};
pub use intensity::{branching_matrix, compensator_at, intensity_at};
pub use params::{BowsherParams, ExpHawkesParams, Model};
pub use series::EventSeries;
pub use stability::{spectral_radius, stability_check, Stability};
