use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::engine::LookupTable;

#[derive(Debug, Clone, Copy)]
enum Range {
    /// Strictly positive.
    Positive,
    NonNegative,
    Fraction,
    Finite,
}

impl Range {
    fn check(self, name: &str, v: f64) -> Result<(), ModelError> {
        let ok = v.is_finite()
            && match self {
                Range::Positive => v > 0.0,
                Range::NonNegative => v >= 0.0,
                Range::Fraction => (0.0..=1.0).contains(&v),
                Range::Finite => true,
            };
        if ok {
            Ok(())
        } else {
            let expected = match self {
                Range::Positive => "> 0",
                Range::NonNegative => ">= 0",
                Range::Fraction => "in [0, 1]",
                Range::Finite => "finite",
            };
            Err(ModelError::OutOfRange {
                name: name.to_string(),
                value: v,
                expected,
            })
        }
    }
}

macro_rules! parameters {
    ($( $(#[$doc:meta])* $field:ident: $range:ident = $default:expr; )*) => {
        /// Every named constant of the model, plus its three lookup tables.
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct Parameters {
            $( $(#[$doc])* pub $field: f64, )*
            /// Realized PBR gap -> share of resources allocated to Medicaid (1/yr).
            pub gap_pressure: LookupTable,
            /// Year -> national violent crime rate (crimes per 100k per year).
            pub national_crime_rate: LookupTable,
            /// Perceived relative crime -> LAL out-migration fraction (1/yr).
            pub crime_perception_immigration: LookupTable,
        }

        impl Default for Parameters {
            fn default() -> Self {
                Self {
                    $( $field: $default, )*
                    gap_pressure: default_gap_pressure(),
                    national_crime_rate: default_national_crime_rate(),
                    crime_perception_immigration: default_crime_perception(),
                }
            }
        }

        impl Parameters {
            /// Names of all scalar parameters, in declaration order.
            pub const NAMES: &'static [&'static str] = &[$( stringify!($field) ),*];

            pub fn get(&self, name: &str) -> Option<f64> {
                match name {
                    $( stringify!($field) => Some(self.$field), )*
                    _ => None,
                }
            }

            /// Sets a scalar parameter by name. Range checks happen in
            /// [`Parameters::validate`].
            pub fn set(&mut self, name: &str, value: f64) -> Result<(), ModelError> {
                match name {
                    $( stringify!($field) => self.$field = value, )*
                    _ => return Err(ModelError::UnknownParameter(name.to_string())),
                }
                Ok(())
            }

            pub fn validate(&self) -> Result<(), ModelError> {
                $( Range::$range.check(stringify!($field), self.$field)?; )*
                Ok(())
            }
        }
    };
}

parameters! {
    // population sector
    initial_percent_vul: Fraction = 0.28;
    /// people
    initial_county_pop: Positive = 1.42262e6;
    frac_br_lal: Fraction = 0.015;
    frac_br_vul: Fraction = 0.015;
    frac_dr_lal: Fraction = 0.015;
    frac_dr_vul: Fraction = 0.015;
    frac_becoming_vulnerable: Fraction = 0.4;
    family_size: Positive = 2.0;
    /// years
    time_for_education_impact: Positive = 10.0;
    preterm_rate_lal: Fraction = 0.104;
    vul_preterm_odd_ratio: Positive = 2.03;
    medical_care_effect: Fraction = 0.86;

    // resource sector
    relative_contribution_vul: Fraction = 0.58;
    /// dollars per person per year
    tax_contribution_lal: Positive = 3500.0;
    shock_magnitude: Fraction = 0.35;
    time_of_shock: Finite = 2000.0;
    /// PULSE width, years
    shock_duration: NonNegative = 2.0;
    /// dollars
    initial_resources: Finite = 4e9;
    frac_resources_other: Fraction = 0.4;
    desired_pbr: NonNegative = 11.2;
    time_to_realize_gap: Positive = 2.0;
    initial_realized_gap: Finite = 3.0;
    /// dollars per person per year
    avg_insurance_cost: Positive = 4300.0;
    federal_match: Positive = 1.75;
    /// people
    initial_insurances: Finite = 500_000.0;
    time_to_implement_policies: Positive = 1.0;
    initial_insured_frac: Fraction = 0.5;
    school_age_percentage: Fraction = 0.32;
    desired_frac_school_funding: Fraction = 0.65;
    local_government_match: Positive = 2.3;
    /// dollars per person
    avg_cost_schooling: Positive = 13_000.0;
    initial_school_funds_status: Finite = 0.0;

    // crime sector
    /// crimes per person per year (450 per 100k)
    crime_rate_lal: Fraction = 450.0 / 100_000.0;
    relative_crime_vul: Positive = 4.0;
    crime_info_delay: Positive = 1.0;
    relative_vul_immigration: Fraction = 0.45;
    vul_migration_time_delay: Positive = 1.0;
}

fn default_gap_pressure() -> LookupTable {
    LookupTable::new(vec![
        (-10.0, 0.101316),
        (-4.0, 0.11),
        (0.168196, 0.17193),
        (2.76758, 0.297807),
        (4.90826, 0.389912),
        (7.43119, 0.439035),
        (10.1835, 0.475877),
        (14.5, 0.482018),
        (15.0765, 0.488158),
    ])
    .expect("static table")
}

fn default_national_crime_rate() -> LookupTable {
    LookupTable::new(vec![
        (1995.0, 684.46),
        (1996.0, 636.64),
        (1997.0, 611.0),
        (1998.0, 567.6),
        (1999.0, 523.0),
        (2000.0, 506.5),
        (2001.0, 504.5),
        (2002.0, 494.4),
        (2003.0, 475.8),
        (2004.0, 463.2),
        (2005.0, 469.0),
        (2006.0, 479.3),
        (2007.0, 471.8),
        (2008.0, 458.6),
        (2009.0, 431.9),
        (2010.0, 404.5),
        (2011.0, 387.1),
        (2012.0, 387.8),
        (2013.0, 369.1),
        (2014.0, 361.6),
        (2015.0, 373.7),
        (2016.0, 386.3),
        (2017.0, 382.9),
    ])
    .expect("static table")
}

fn default_crime_perception() -> LookupTable {
    LookupTable::new(vec![
        (0.66, -0.015),
        (0.8, -0.01),
        (0.9, -0.005),
        (1.0, 0.0),
        (1.1, 0.005),
        (1.25, 0.01),
        (1.5, 0.015),
        (2.0, 0.015),
    ])
    .expect("static table")
}

/// Binary structural switches; all on in the base model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Switches {
    pub education: bool,
    pub medical_interventions: bool,
    pub outmigration: bool,
    pub immigration: bool,
}

impl Default for Switches {
    fn default() -> Self {
        Self::all(true)
    }
}

impl Switches {
    pub const NAMES: &'static [&'static str] = &[
        "switch_education",
        "switch_medical_interventions",
        "switch_outmigration",
        "switch_immigration",
    ];

    pub fn all(on: bool) -> Self {
        Self {
            education: on,
            medical_interventions: on,
            outmigration: on,
            immigration: on,
        }
    }

    fn slot(&mut self, name: &str) -> Option<&mut bool> {
        match name {
            "switch_education" => Some(&mut self.education),
            "switch_medical_interventions" => Some(&mut self.medical_interventions),
            "switch_outmigration" => Some(&mut self.outmigration),
            "switch_immigration" => Some(&mut self.immigration),
            _ => None,
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        let mut copy = *self;
        copy.slot(name).map(|b| factor(*b))
    }

    /// Accepts only 0 or 1.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ModelError> {
        let slot = self
            .slot(name)
            .ok_or_else(|| ModelError::UnknownParameter(name.to_string()))?;
        *slot = match value {
            0.0 => false,
            1.0 => true,
            v => {
                return Err(ModelError::OutOfRange {
                    name: name.to_string(),
                    value: v,
                    expected: "0 or 1",
                })
            }
        };
        Ok(())
    }
}

/// 1.0 for an active switch, 0.0 otherwise.
pub fn factor(on: bool) -> f64 {
    if on {
        1.0
    } else {
        0.0
    }
}

/// Parameters and switches together: the unit a scenario overrides.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelInputs {
    pub parameters: Parameters,
    pub switches: Switches,
}

impl ModelInputs {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.parameters
            .get(name)
            .or_else(|| self.switches.get(name))
    }

    /// Applies one `name = value` override to a parameter or switch.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ModelError> {
        if Switches::NAMES.contains(&name) {
            self.switches.set(name, value)
        } else {
            if !value.is_finite() {
                return Err(ModelError::OutOfRange {
                    name: name.to_string(),
                    value,
                    expected: "finite",
                });
            }
            self.parameters.set(name, value)
        }
    }
}
