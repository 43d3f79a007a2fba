//! True states, exact outcome probabilities and sampled count records.

mod density;
mod record;

pub use density::{cat_density, cat_pure, gram, hermitize, psd_sqrt, random_density, DensityMatrix};
pub use record::{
    exact_qn, relative_bias, relative_noise, sample_counts, setting_rng, simulate_record, MeasurementRecord,
    SettingRecord, RECORD_SCHEMA_VERSION,
};
