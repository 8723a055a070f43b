//! Decibel conversions. Everything inside the library is linear; these are
//! the only places where dB, dBm and dBW appear.

/// Power ratio in dB to a linear factor.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Absolute power in dBW to watts.
pub fn dbw_to_watts(dbw: f64) -> f64 {
    db_to_linear(dbw)
}

/// Absolute power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}
