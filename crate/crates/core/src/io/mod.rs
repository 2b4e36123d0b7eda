//! Run configuration, CSV time series and GPSN snapshots.

mod config;
mod snapshot;
mod timeseries;

pub use config::{parse_config, parse_config_with, InitSpec, RunConfig, CONFIG_KEYS};
pub use snapshot::{read_snapshot, read_snapshot_file, snapshot_len, write_snapshot, write_snapshot_file, GPSN_MAGIC, GPSN_VERSION};
pub use timeseries::{read_timeseries, write_timeseries, write_timeseries_file, CSV_HEADER};
