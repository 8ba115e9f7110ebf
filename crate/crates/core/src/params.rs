use serde::{Deserialize, Serialize};

use crate::ParamError;

/// Model constants of the two-species competition system.
///
/// Species 1 (`u`) diffuses with `d1`, grows at rate `r1` and is inhibited by
/// species 2 with strength `k`; species 2 (`v`) has `d2`, `r2` and `h`. The
/// fronts move with `s_i' = -mu_i * (gradient at the front)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub d1: f64,
    pub d2: f64,
    pub r1: f64,
    pub r2: f64,
    pub k: f64,
    pub h: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl Params {
    pub const FIELDS: [&'static str; 8] = ["d1", "d2", "r1", "r2", "k", "h", "mu1", "mu2"];

    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value) in self.named() {
            if !value.is_finite() {
                return Err(ParamError::new(name, "must be finite"));
            }
            let nonneg = name == "k" || name == "h";
            if nonneg && value < 0.0 {
                return Err(ParamError::new(name, "must be >= 0"));
            }
            if !nonneg && value <= 0.0 {
                return Err(ParamError::new(name, "must be > 0"));
            }
        }
        Ok(())
    }

    pub fn named(&self) -> [(&'static str, f64); 8] {
        [
            ("d1", self.d1),
            ("d2", self.d2),
            ("r1", self.r1),
            ("r2", self.r2),
            ("k", self.k),
            ("h", self.h),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.named()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| v)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ParamError> {
        let slot = match name {
            "d1" => &mut self.d1,
            "d2" => &mut self.d2,
            "r1" => &mut self.r1,
            "r2" => &mut self.r2,
            "k" => &mut self.k,
            "h" => &mut self.h,
            "mu1" => &mut self.mu1,
            "mu2" => &mut self.mu2,
            _ => {
                return Err(ParamError::new(
                    "params",
                    format!("unknown parameter `{name}`"),
                ))
            }
        };
        *slot = value;
        Ok(())
    }

    /// The same constants with the roles of the two species exchanged.
    pub fn swapped(&self) -> Params {
        Params {
            d1: self.d2,
            d2: self.d1,
            r1: self.r2,
            r2: self.r1,
            k: self.h,
            h: self.k,
            mu1: self.mu2,
            mu2: self.mu1,
        }
    }
}

impl Default for Params {
    fn default() -> Self {
        Params {
            d1: 1.0,
            d2: 1.0,
            r1: 1.0,
            r2: 1.0,
            k: 0.5,
            h: 0.5,
            mu1: 1.0,
            mu2: 1.0,
        }
    }
}
