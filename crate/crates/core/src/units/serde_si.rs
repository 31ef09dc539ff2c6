//! `#[serde(with = ...)]` adapters that store SI `f64` fields as unit-tagged
//! strings. Deserialization accepts any unit of the right dimension.

macro_rules! si_field {
    ($name:ident, $dim:expr) => {
        pub mod $name {
            use serde::{Deserialize, Deserializer, Serializer};

            use crate::units::Quantity;

            pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(&Quantity::si(*value, $dim))
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
                let q = Quantity::deserialize(deserializer)?;
                q.expect($dim).map_err(serde::de::Error::custom)
            }

            pub mod option {
                use serde::{Deserialize, Deserializer, Serializer};

                use crate::units::Quantity;

                pub fn serialize<S: Serializer>(
                    value: &Option<f64>,
                    serializer: S,
                ) -> Result<S::Ok, S::Error> {
                    match value {
                        Some(v) => serializer.collect_str(&Quantity::si(*v, $dim)),
                        None => serializer.serialize_none(),
                    }
                }

                pub fn deserialize<'de, D: Deserializer<'de>>(
                    deserializer: D,
                ) -> Result<Option<f64>, D::Error> {
                    let q = Option::<Quantity>::deserialize(deserializer)?;
                    q.map(|q| q.expect($dim).map_err(serde::de::Error::custom))
                        .transpose()
                }
            }
        }
    };
}

si_field!(length, crate::units::Dimension::Length);
si_field!(time, crate::units::Dimension::Time);
si_field!(speed, crate::units::Dimension::Speed);
si_field!(acceleration, crate::units::Dimension::Acceleration);
si_field!(curvature, crate::units::Dimension::Curvature);
si_field!(temperature, crate::units::Dimension::Temperature);
si_field!(frequency, crate::units::Dimension::Frequency);
