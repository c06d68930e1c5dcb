//! The six outcome quantities and their canonical text form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Scalar;

/// Outcome variables, in the fixed serialization order used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nutrient {
    Kcal,
    ProteinG,
    CarbG,
    SugarG,
    FiberG,
    FatG,
}

impl Nutrient {
    pub const ALL: [Nutrient; 6] = [
        Nutrient::Kcal,
        Nutrient::ProteinG,
        Nutrient::CarbG,
        Nutrient::SugarG,
        Nutrient::FiberG,
        Nutrient::FatG,
    ];

    /// Column key in CSV files, reports and plot file names.
    pub fn key(self) -> &'static str {
        match self {
            Nutrient::Kcal => "kcal",
            Nutrient::ProteinG => "protein_g",
            Nutrient::CarbG => "carb_g",
            Nutrient::SugarG => "sugar_g",
            Nutrient::FiberG => "fiber_g",
            Nutrient::FatG => "fat_g",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Nutrient::Kcal => "Energy",
            Nutrient::ProteinG => "Protein",
            Nutrient::CarbG => "Carbohydrate",
            Nutrient::SugarG => "Total sugars",
            Nutrient::FiberG => "Dietary fiber",
            Nutrient::FatG => "Total fat",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Nutrient::Kcal => "kcal",
            _ => "g",
        }
    }

    pub fn from_key(key: &str) -> Option<Nutrient> {
        Nutrient::ALL.into_iter().find(|n| n.key() == key)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Nutrient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// One value per outcome variable.
///
/// With a scalar `T` this is a nutrient vector (kcal plus five macronutrients
/// in grams); it is also used as the per-nutrient container for metrics and
/// agreement summaries.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerNutrient<T> {
    pub kcal: T,
    pub protein_g: T,
    pub carb_g: T,
    pub sugar_g: T,
    pub fiber_g: T,
    pub fat_g: T,
}

impl<T> PerNutrient<T> {
    pub fn from_fn(mut f: impl FnMut(Nutrient) -> T) -> Self {
        PerNutrient {
            kcal: f(Nutrient::Kcal),
            protein_g: f(Nutrient::ProteinG),
            carb_g: f(Nutrient::CarbG),
            sugar_g: f(Nutrient::SugarG),
            fiber_g: f(Nutrient::FiberG),
            fat_g: f(Nutrient::FatG),
        }
    }

    pub fn from_array(values: [T; 6]) -> Self {
        let [kcal, protein_g, carb_g, sugar_g, fiber_g, fat_g] = values;
        PerNutrient { kcal, protein_g, carb_g, sugar_g, fiber_g, fat_g }
    }

    pub fn into_array(self) -> [T; 6] {
        [self.kcal, self.protein_g, self.carb_g, self.sugar_g, self.fiber_g, self.fat_g]
    }

    pub fn get(&self, nutrient: Nutrient) -> &T {
        match nutrient {
            Nutrient::Kcal => &self.kcal,
            Nutrient::ProteinG => &self.protein_g,
            Nutrient::CarbG => &self.carb_g,
            Nutrient::SugarG => &self.sugar_g,
            Nutrient::FiberG => &self.fiber_g,
            Nutrient::FatG => &self.fat_g,
        }
    }

    pub fn get_mut(&mut self, nutrient: Nutrient) -> &mut T {
        match nutrient {
            Nutrient::Kcal => &mut self.kcal,
            Nutrient::ProteinG => &mut self.protein_g,
            Nutrient::CarbG => &mut self.carb_g,
            Nutrient::SugarG => &mut self.sugar_g,
            Nutrient::FiberG => &mut self.fiber_g,
            Nutrient::FatG => &mut self.fat_g,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerNutrient<U> {
        PerNutrient::from_fn(|n| f(self.get(n)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Nutrient, &T)> + '_ {
        Nutrient::ALL.into_iter().map(move |n| (n, self.get(n)))
    }
}

impl<T: Scalar> PerNutrient<T> {
    pub fn zero() -> Self {
        PerNutrient::from_fn(|_| T::zero())
    }

    pub fn is_valid(&self) -> bool {
        self.iter().all(|(_, v)| v.is_finite() && *v >= T::zero())
    }

    pub fn scale(&self, factor: T) -> Self {
        self.map(|v| *v * factor)
    }

    pub fn add(&self, other: &Self) -> Self {
        PerNutrient::from_fn(|n| *self.get(n) + *other.get(n))
    }

    pub fn round2(&self) -> Self {
        self.map(|v| round2(*v))
    }
}

/// Minimal decimal form with at most two decimals: `22`, `15.6`, `314.68`.
pub fn format_decimal<T: Scalar>(value: T) -> String {
    let value = value.to_f64().unwrap_or(f64::NAN);
    let mut s = format!("{value:.2}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".to_owned();
    }
    s
}

/// Rounds to the value `format_decimal` prints, so that rendering and
/// re-parsing is the identity on the result.
pub fn round2<T: Scalar>(value: T) -> T {
    let value = value.to_f64().unwrap_or(f64::NAN);
    let rounded: f64 = format!("{value:.2}").parse().unwrap_or(f64::NAN);
    T::from_f64(rounded).unwrap_or_else(T::nan)
}
