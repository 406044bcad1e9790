//! Data analysis: survival-curve fits, rate extraction and polarization
//! fits from Rabi-frequency ratios.
//!
//! CSV formats:
//!
//! * survival curves: header `delay_s,trials,survivors`
//! * Rabi measurements: header `channel,rabi_rad_s,sigma_rad_s`, where
//!   `channel` is a quadrupole Δm (`dm1`, `1`, ...) or a Raman pair
//!   `5D5/2:1,0->5D5/2:3,2`.

mod exponential;
pub mod lm;
mod polarization;

use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

pub use exponential::{extract_srs_rate, fit_exponential, fit_exponential_with, CountCovariance, SrsRate};
pub use polarization::{fit_polarization_e2, fit_polarization_raman, RamanConstraint, MULTI_STARTS};

use crate::atomdata::HyperfineState;
use crate::error::{Error, Result};

/// Counts at one delay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurvivalRecord {
    /// Seconds.
    pub delay: f64,
    pub trials: u64,
    pub survivors: u64,
}

/// Survival counts at strictly increasing delays.
#[derive(Clone, Debug, PartialEq)]
pub struct SurvivalCurve {
    records: Vec<SurvivalRecord>,
    /// Covariance model used by default when fitting.
    pub covariance: CountCovariance,
}

impl SurvivalCurve {
    /// Validates `survivors <= trials`, `trials > 0` and strictly increasing
    /// nonnegative delays. Counts are taken as one set of trials followed
    /// through every delay.
    pub fn new(records: Vec<SurvivalRecord>) -> Result<Self> {
        for (idx, r) in records.iter().enumerate() {
            if r.trials == 0 {
                return Err(Error::InvalidArgument(format!("record {idx}: zero trials")));
            }
            if r.survivors > r.trials {
                return Err(Error::InvalidArgument(format!(
                    "record {idx}: {} survivors exceed {} trials",
                    r.survivors, r.trials
                )));
            }
            if !(r.delay >= 0.0) || !r.delay.is_finite() {
                return Err(Error::InvalidArgument(format!("record {idx}: bad delay {}", r.delay)));
            }
        }
        if records.windows(2).any(|w| w[1].delay <= w[0].delay) {
            return Err(Error::InvalidArgument("delays must be strictly increasing".into()));
        }
        Ok(SurvivalCurve {
            records,
            covariance: CountCovariance::Nested,
        })
    }

    pub fn with_covariance(mut self, covariance: CountCovariance) -> Self {
        self.covariance = covariance;
        self
    }

    pub fn records(&self) -> &[SurvivalRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        check_header(&mut rdr, &["delay_s", "trials", "survivors"])?;
        let mut records = Vec::new();
        for (idx, row) in rdr.records().enumerate() {
            let line = idx + 2;
            let row = row.map_err(|e| csv_error(line, e))?;
            let field = |k: usize| row.get(k).ok_or_else(|| parse_error(line, "missing column"));
            records.push(SurvivalRecord {
                delay: field(0)?.parse().map_err(|_| parse_error(line, "bad delay_s"))?,
                trials: field(1)?.parse().map_err(|_| parse_error(line, "bad trials"))?,
                survivors: field(2)?.parse().map_err(|_| parse_error(line, "bad survivors"))?,
            });
        }
        Self::new(records)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn to_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["delay_s", "trials", "survivors"]).map_err(io_error)?;
        for r in &self.records {
            w.write_record([format!("{}", r.delay), r.trials.to_string(), r.survivors.to_string()])
                .map_err(io_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_writer(std::fs::File::create(path)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
}

impl FitParam {
    pub fn new(name: &str, value: f64, std_error: f64) -> Self {
        FitParam {
            name: name.to_string(),
            value,
            std_error,
        }
    }
}

/// Parameters with standard errors at a converged optimum.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub params: Vec<FitParam>,
    /// Weighted residual sum of squares.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Result<&FitParam> {
        self.params
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("fit has no parameter `{name}`")))
    }

    pub fn value(&self, name: &str) -> Result<f64> {
        Ok(self.param(name)?.value)
    }

    pub fn std_error(&self, name: &str) -> Result<f64> {
        Ok(self.param(name)?.std_error)
    }
}

/// What a Rabi frequency was measured on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Channel {
    /// Quadrupole transition with |Δm| = 0, 1 or 2.
    DeltaM(u8),
    /// Raman transition between two states.
    Pair(HyperfineState, HyperfineState),
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once("->") {
            return Ok(Channel::Pair(a.trim().parse()?, b.trim().parse()?));
        }
        let digits = s
            .strip_prefix("dm=")
            .or_else(|| s.strip_prefix("dm"))
            .unwrap_or(s);
        match digits.parse::<u8>() {
            Ok(d) if d <= 2 => Ok(Channel::DeltaM(d)),
            _ => Err(Error::InvalidArgument(format!(
                "channel `{s}` is neither dm0/dm1/dm2 nor STATE->STATE"
            ))),
        }
    }
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Channel::DeltaM(d) => write!(f, "dm{d}"),
            Channel::Pair(a, b) => write!(f, "{a}->{b}"),
        }
    }
}

/// A measured Rabi frequency (rad/s) with its 1σ error (0 when unknown).
#[derive(Clone, Debug, PartialEq)]
pub struct RabiMeasurement {
    pub channel: Channel,
    pub rabi: f64,
    pub sigma: f64,
}

impl RabiMeasurement {
    pub fn new(channel: Channel, rabi: f64, sigma: f64) -> Self {
        RabiMeasurement { channel, rabi, sigma }
    }
}

pub fn read_rabi_measurements<R: Read>(reader: R) -> Result<Vec<RabiMeasurement>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    check_header(&mut rdr, &["channel", "rabi_rad_s", "sigma_rad_s"])?;
    let mut out = Vec::new();
    for (idx, row) in rdr.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| csv_error(line, e))?;
        let field = |k: usize| row.get(k).ok_or_else(|| parse_error(line, "missing column"));
        let rabi: f64 = field(1)?.parse().map_err(|_| parse_error(line, "bad rabi_rad_s"))?;
        let sigma: f64 = field(2)?.parse().map_err(|_| parse_error(line, "bad sigma_rad_s"))?;
        if !(rabi >= 0.0) || !(sigma >= 0.0) {
            return Err(parse_error(line, "Rabi frequency and sigma must be >= 0"));
        }
        out.push(RabiMeasurement {
            channel: field(0)?.parse().map_err(|e: Error| parse_error(line, &e.to_string()))?,
            rabi,
            sigma,
        });
    }
    Ok(out)
}

pub fn write_rabi_measurements<W: Write>(writer: W, data: &[RabiMeasurement]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["channel", "rabi_rad_s", "sigma_rad_s"]).map_err(io_error)?;
    for m in data {
        w.write_record([m.channel.to_string(), format!("{}", m.rabi), format!("{}", m.sigma)])
            .map_err(io_error)?;
    }
    w.flush()?;
    Ok(())
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(|e| csv_error(1, e))?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(parse_error(1, &format!("expected header `{}`, got `{}`", expected.join(","), got.join(","))));
    }
    Ok(())
}

fn parse_error(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

fn csv_error(line: usize, e: csv::Error) -> Error {
    parse_error(line, &e.to_string())
}

fn io_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
