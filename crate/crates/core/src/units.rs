//! Physical quantities with unit tags.
//!
//! Everything inside the library is carried in SI (m, s, m/s, m/s², 1/m,
//! °C). Files may use other tags such as `km/h`; they are converted here,
//! at the parse boundary, and nowhere else.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub mod serde_si;

/// What a quantity measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Length,
    Time,
    Speed,
    Acceleration,
    Curvature,
    Temperature,
    Frequency,
    Percent,
    Flag,
    Dimensionless,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Speed => "speed",
            Dimension::Acceleration => "acceleration",
            Dimension::Curvature => "curvature",
            Dimension::Temperature => "temperature",
            Dimension::Frequency => "frequency",
            Dimension::Percent => "percent",
            Dimension::Flag => "flag",
            Dimension::Dimensionless => "dimensionless",
        };
        f.write_str(s)
    }
}

/// A unit tag as it may appear in a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Unit {
    Meter,
    Kilometer,
    Second,
    MeterPerSecond,
    KilometerPerHour,
    MeterPerSecondSquared,
    PerMeter,
    DegreeCelsius,
    PerSecond,
    Percent,
    Flag,
    One,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        match self {
            Unit::Meter | Unit::Kilometer => Dimension::Length,
            Unit::Second => Dimension::Time,
            Unit::MeterPerSecond | Unit::KilometerPerHour => Dimension::Speed,
            Unit::MeterPerSecondSquared => Dimension::Acceleration,
            Unit::PerMeter => Dimension::Curvature,
            Unit::DegreeCelsius => Dimension::Temperature,
            Unit::PerSecond => Dimension::Frequency,
            Unit::Percent => Dimension::Percent,
            Unit::Flag => Dimension::Flag,
            Unit::One => Dimension::Dimensionless,
        }
    }

    /// The canonical unit for a dimension.
    pub fn si(dimension: Dimension) -> Unit {
        match dimension {
            Dimension::Length => Unit::Meter,
            Dimension::Time => Unit::Second,
            Dimension::Speed => Unit::MeterPerSecond,
            Dimension::Acceleration => Unit::MeterPerSecondSquared,
            Dimension::Curvature => Unit::PerMeter,
            Dimension::Temperature => Unit::DegreeCelsius,
            Dimension::Frequency => Unit::PerSecond,
            Dimension::Percent => Unit::Percent,
            Dimension::Flag => Unit::Flag,
            Dimension::Dimensionless => Unit::One,
        }
    }

    pub fn is_si(self) -> bool {
        Unit::si(self.dimension()) == self
    }

    pub fn tag(self) -> &'static str {
        match self {
            Unit::Meter => "m",
            Unit::Kilometer => "km",
            Unit::Second => "s",
            Unit::MeterPerSecond => "m/s",
            Unit::KilometerPerHour => "km/h",
            Unit::MeterPerSecondSquared => "m/s^2",
            Unit::PerMeter => "1/m",
            Unit::DegreeCelsius => "degC",
            Unit::PerSecond => "1/s",
            Unit::Percent => "%",
            Unit::Flag => "flag",
            Unit::One => "1",
        }
    }

    /// Converts a value expressed in this unit to the SI unit of its dimension.
    pub fn to_si(self, value: f64) -> f64 {
        match self {
            Unit::Kilometer => value * 1000.0,
            // Division by 3.6 keeps whole km/h values on the same floats
            // wherever they are converted.
            Unit::KilometerPerHour => value / 3.6,
            _ => value,
        }
    }

    pub fn from_si(self, value: f64) -> f64 {
        match self {
            Unit::Kilometer => value / 1000.0,
            Unit::KilometerPerHour => value * 3.6,
            _ => value,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitError {
    #[error("unknown unit tag `{0}`")]
    UnknownUnit(String),
    #[error("missing unit tag in `{0}`")]
    MissingUnit(String),
    #[error("invalid number in `{0}`")]
    InvalidNumber(String),
    #[error("expected a {expected} quantity, found `{found}` ({dimension})")]
    WrongDimension {
        expected: Dimension,
        found: String,
        dimension: Dimension,
    },
}

impl FromStr for Unit {
    type Err = UnitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unit = match s.trim() {
            "m" => Unit::Meter,
            "km" => Unit::Kilometer,
            "s" => Unit::Second,
            "m/s" => Unit::MeterPerSecond,
            "km/h" | "kph" => Unit::KilometerPerHour,
            "m/s^2" | "m/s2" | "m/s²" => Unit::MeterPerSecondSquared,
            "1/m" | "m^-1" => Unit::PerMeter,
            "degC" | "°C" | "C" => Unit::DegreeCelsius,
            "1/s" | "s^-1" => Unit::PerSecond,
            "%" => Unit::Percent,
            "flag" => Unit::Flag,
            "1" => Unit::One,
            other => return Err(UnitError::UnknownUnit(other.to_owned())),
        };
        Ok(unit)
    }
}

impl Serialize for Unit {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for Unit {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A number with its unit tag, e.g. `150 km/h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Quantity { value, unit }
    }

    /// Wraps an SI value of the given dimension.
    pub fn si(value: f64, dimension: Dimension) -> Self {
        Quantity {
            value,
            unit: Unit::si(dimension),
        }
    }

    pub fn dimension(&self) -> Dimension {
        self.unit.dimension()
    }

    pub fn si_value(&self) -> f64 {
        self.unit.to_si(self.value)
    }

    /// The SI value, provided the quantity has the expected dimension.
    pub fn expect(&self, dimension: Dimension) -> Result<f64, UnitError> {
        if self.dimension() == dimension {
            Ok(self.si_value())
        } else {
            Err(UnitError::WrongDimension {
                expected: dimension,
                found: self.to_string(),
                dimension: self.dimension(),
            })
        }
    }

    pub fn to_si(&self) -> Quantity {
        Quantity::si(self.si_value(), self.dimension())
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

impl FromStr for Quantity {
    type Err = UnitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let split = trimmed
            .find(|c: char| c.is_whitespace())
            .ok_or_else(|| UnitError::MissingUnit(trimmed.to_owned()))?;
        let (number, unit) = trimmed.split_at(split);
        let value: f64 = number
            .parse()
            .map_err(|_| UnitError::InvalidNumber(trimmed.to_owned()))?;
        if !value.is_finite() {
            return Err(UnitError::InvalidNumber(trimmed.to_owned()));
        }
        Ok(Quantity {
            value,
            unit: unit.trim().parse()?,
        })
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn kmh(value: f64) -> f64 {
    Unit::KilometerPerHour.to_si(value)
}
