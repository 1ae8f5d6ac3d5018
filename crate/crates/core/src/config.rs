//! TOML community configuration.
//!
//! ```toml
//! weather = "weather.csv"
//! loads = "loads.csv"
//!
//! [[participant]]
//! id = "p1"
//! roof_area_m2 = 30.0
//! annual_bill_eur = 950.0
//!
//! [[participant]]
//! id = "p2"
//! roof_area_m2 = 0.0
//! annual_bill_eur = 700.0
//! demand = "other.csv"
//! column = "household_7"
//!
//! [economics]
//! discount_rate = 0.03
//! ```
//!
//! Data paths are relative to the configuration file. A participant reads
//! the column named after its id from `loads` unless `demand` and `column`
//! say otherwise. The `pv`, `bess` and `tariff` tables are optional and
//! fall back to the defaults field by field.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{read_series_csv, read_weather_csv};
use crate::types::{
    validate_config, BessSpec, EconomicParams, ParticipantSpec, PvSpec, RecConfig, TariffSchedule,
    TimeSeries,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticipantEntry {
    pub id: String,
    pub roof_area_m2: f64,
    pub annual_bill_eur: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
}

impl ParticipantEntry {
    pub fn column(&self) -> &str {
        self.column.as_deref().unwrap_or(&self.id)
    }
}

/// The configuration file as written, before any data is read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub weather: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loads: Option<PathBuf>,
    #[serde(rename = "participant")]
    pub participants: Vec<ParticipantEntry>,
    #[serde(default)]
    pub pv: PvSpec,
    #[serde(default)]
    pub bess: BessSpec,
    #[serde(default)]
    pub tariff: TariffSchedule,
    pub economics: EconomicParams,
}

impl ConfigFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::parse(e.to_string()))
    }

    /// Demand file of a participant, relative to the configuration.
    pub fn demand_path<'a>(&'a self, p: &'a ParticipantEntry) -> Result<&'a Path> {
        p.demand
            .as_deref()
            .or(self.loads.as_deref())
            .ok_or_else(|| {
                Error::parse(format!(
                    "participant '{}' has no demand file and no `loads` is set",
                    p.id
                ))
            })
    }

    /// Every data file referenced, weather first, without duplicates.
    pub fn data_files(&self) -> Result<Vec<&Path>> {
        let mut out = vec![self.weather.as_path()];
        for p in &self.participants {
            let d = self.demand_path(p)?;
            if !out.contains(&d) {
                out.push(d);
            }
        }
        Ok(out)
    }

    /// Reads the data files under `base` and validates the result.
    pub fn resolve(&self, base: &Path) -> Result<RecConfig> {
        let weather = read_weather_csv(open(&base.join(&self.weather))?)?;
        let mut files: BTreeMap<&Path, Vec<(String, TimeSeries)>> = BTreeMap::new();
        let mut participants = Vec::with_capacity(self.participants.len());
        for p in &self.participants {
            let rel = self.demand_path(p)?;
            if !files.contains_key(rel) {
                files.insert(rel, read_series_csv(open(&base.join(rel))?)?);
            }
            let demand = files[rel]
                .iter()
                .find(|(name, _)| name == p.column())
                .map(|(_, s)| s.clone())
                .ok_or_else(|| {
                    Error::parse(format!(
                        "{} has no column '{}' for participant '{}'",
                        rel.display(),
                        p.column(),
                        p.id
                    ))
                })?;
            participants.push(ParticipantSpec {
                id: p.id.clone(),
                roof_area_m2: p.roof_area_m2,
                demand,
                annual_bill_eur: p.annual_bill_eur,
            });
        }
        validate_config(RecConfig {
            participants,
            pv: self.pv.clone(),
            bess: self.bess.clone(),
            tariff: self.tariff.clone(),
            economics: self.economics.clone(),
            weather,
        })
    }
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

/// Directory against which the paths of `config_path` resolve.
pub fn base_dir(config_path: &Path) -> PathBuf {
    match config_path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Parses the file at `path` and loads everything it references.
pub fn load_config(path: &Path) -> Result<(ConfigFile, RecConfig)> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    let file = ConfigFile::from_toml_str(&text)?;
    let config = file.resolve(&base_dir(path))?;
    Ok((file, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{write_series_csv, write_weather_csv};
    use crate::types::Weather;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"
weather = "w.csv"
loads = "l.csv"

[[participant]]
id = "a"
roof_area_m2 = 20.0
annual_bill_eur = 800.0

[[participant]]
id = "b"
roof_area_m2 = 0.0
annual_bill_eur = 600.0
column = "house_b"

[economics]
discount_rate = 0.05
"#;

    #[test]
    fn defaults_fill_missing_tables() {
        let f = ConfigFile::from_toml_str(MINIMAL).unwrap();
        assert_eq!(f.pv, PvSpec::default());
        assert_eq!(f.bess, BessSpec::default());
        assert_eq!(f.economics.horizon_years, 25);
        assert_eq!(f.economics.discount_rate, 0.05);
        assert_eq!(f.participants[1].column(), "house_b");
    }

    #[test]
    fn partial_tables_override_single_fields() {
        let text = format!("{MINIMAL}\n[bess]\nmax_units = 3\n\n[pv]\ncost_eur_per_kw = 900.0\n");
        let f = ConfigFile::from_toml_str(&text).unwrap();
        assert_eq!(f.bess.max_units, 3);
        assert_eq!(f.bess.capacity_kwh, BessSpec::default().capacity_kwh);
        assert_eq!(f.pv.cost_eur_per_kw, 900.0);
    }

    #[test]
    fn discount_rate_is_required() {
        let text = MINIMAL.replace("discount_rate = 0.05", "horizon_years = 20");
        assert!(matches!(
            ConfigFile::from_toml_str(&text),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("roof_area_m2 = 20.0", "roof_area_m2 = 20.0\nroof = 3");
        assert!(ConfigFile::from_toml_str(&text).is_err());
        let text = format!("{MINIMAL}\n[pv]\nrated_w = 430\n");
        assert!(ConfigFile::from_toml_str(&text).is_err());
    }

    #[test]
    fn resolves_relative_to_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let start = NaiveDate::from_ymd_opt(2023, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        let s = |v: f64| TimeSeries::hourly(start, vec![v; 24]).unwrap();
        let (a, b) = (s(1.0), s(2.0));
        write_series_csv(
            fs::File::create(dir.path().join("l.csv")).unwrap(),
            &[("a", &a), ("house_b", &b)],
        )
        .unwrap();
        let w = Weather {
            irradiance: s(0.2),
            ambient: s(10.0),
        };
        write_weather_csv(fs::File::create(dir.path().join("w.csv")).unwrap(), &w).unwrap();
        let path = dir.path().join("rec.toml");
        fs::write(&path, MINIMAL).unwrap();
        let (file, config) = load_config(&path).unwrap();
        assert_eq!(
            file.data_files().unwrap(),
            vec![Path::new("w.csv"), Path::new("l.csv")]
        );
        assert_eq!(config.participants[1].demand, b);
        assert_eq!(config.weather, w);

        fs::write(&path, MINIMAL.replace("house_b", "house_c")).unwrap();
        assert!(matches!(load_config(&path), Err(Error::Parse(_))));
        fs::remove_file(dir.path().join("w.csv")).unwrap();
        fs::write(&path, MINIMAL).unwrap();
        assert!(matches!(load_config(&path), Err(Error::Io(_))));
    }

    fn entry() -> impl Strategy<Value = ParticipantEntry> {
        (
            "[a-z][a-z0-9_]{0,8}",
            0.0f64..500.0,
            0.0f64..5000.0,
            proptest::option::of("[a-z]{1,6}\\.csv"),
            proptest::option::of("[a-z]{1,6}"),
        )
            .prop_map(|(id, roof, bill, demand, column)| ParticipantEntry {
                id,
                roof_area_m2: roof,
                annual_bill_eur: bill,
                demand: demand.map(PathBuf::from),
                column,
            })
    }

    proptest! {
        #[test]
        fn toml_round_trip(
            parts in proptest::collection::vec(entry(), 1..6),
            rate in 0.0f64..0.2,
            horizon in 1u32..40,
            payback in proptest::option::of(1u32..40),
            units in 0u32..30,
            cost in 0.0f64..2000.0,
            share in 0.0f64..0.5,
            holidays in proptest::collection::vec(0u32..365, 0..4),
        ) {
            let year = NaiveDate::from_ymd_opt(2023, 1, 1).unwrap();
            let f = ConfigFile {
                weather: PathBuf::from("data/weather.csv"),
                loads: Some(PathBuf::from("loads.csv")),
                participants: parts,
                pv: PvSpec { cost_eur_per_kw: cost, ..PvSpec::default() },
                bess: BessSpec { max_units: units, ..BessSpec::default() },
                tariff: TariffSchedule {
                    share_eur_per_kwh: share,
                    holidays: holidays.iter().map(|d| year + chrono::Duration::days(i64::from(*d))).collect(),
                    ..TariffSchedule::default()
                },
                economics: EconomicParams {
                    discount_rate: rate,
                    horizon_years: horizon,
                    max_payback_years: payback,
                    ..EconomicParams::default()
                },
            };
            let text = f.to_toml_string().unwrap();
            prop_assert_eq!(ConfigFile::from_toml_str(&text).unwrap(), f);
        }
    }
}
