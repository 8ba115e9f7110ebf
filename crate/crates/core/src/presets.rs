//! Named scenarios exercising the long-time results.

use serde::{Deserialize, Serialize};

use crate::analysis::critical_length;
use crate::fbsolver::{GridSpec, InitialData, SampledProfile, SingleSpeciesSpec};
use crate::Params;

/// Initial profile shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum Family {
    /// `amp cos(pi x / (2 s0))`
    Cosine,
    /// `amp (1 - (x/s0)^2)`
    Bump,
    /// Tabulated profiles, sampled on `[0, s0]`.
    CustomTable {
        u0: SampledProfile,
        v0: SampledProfile,
    },
}

/// Compact description of two-species initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub family: Family,
    pub s1_0: f64,
    pub s2_0: f64,
    pub u_amp: f64,
    pub v_amp: f64,
}

pub const PROFILE_SAMPLES: usize = 1024;

impl InitSpec {
    pub fn cosine(s1_0: f64, s2_0: f64) -> Self {
        InitSpec {
            family: Family::Cosine,
            s1_0,
            s2_0,
            u_amp: 1.0,
            v_amp: 1.0,
        }
    }

    pub fn build(&self) -> InitialData {
        let (s1, s2, n) = (self.s1_0, self.s2_0, PROFILE_SAMPLES);
        let (u0, v0) = match &self.family {
            Family::Cosine => (
                SampledProfile::cosine(s1, self.u_amp, n),
                SampledProfile::cosine(s2, self.v_amp, n),
            ),
            Family::Bump => (
                SampledProfile::bump(s1, self.u_amp, n),
                SampledProfile::bump(s2, self.v_amp, n),
            ),
            Family::CustomTable { u0, v0 } => (u0.clone(), v0.clone()),
        };
        InitialData {
            s1_0: s1,
            s2_0: s2,
            u0,
            v0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupled {
    pub params: Params,
    pub init: InitSpec,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Single {
    pub spec: SingleSpeciesSpec,
    pub grid: GridSpec,
    /// Right end of the interval where persistence is checked, if any.
    pub persistence_window: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Scenario {
    Coupled(Coupled),
    Single(Single),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub scenario: Scenario,
}

fn grid(n_xi: usize, dt: f64, t_end: f64) -> GridSpec {
    let mut g = GridSpec {
        n_xi,
        dt,
        t_end,
        snapshot_stride: 1,
        profile_stride: 1,
    };
    g.fit_strides();
    g
}

/// Both species spread with `k = h = 1/2` from equal fronts.
pub fn coexistence() -> Coupled {
    Coupled {
        params: Params {
            k: 0.5,
            h: 0.5,
            ..Params::default()
        },
        init: InitSpec::cosine(2.0, 2.0),
        grid: grid(256, 5e-3, 200.0),
    }
}

/// Fast strong first species, slow weak second species.
pub fn fast_strong() -> Coupled {
    Coupled {
        params: Params {
            k: 0.3,
            h: 1.5,
            mu1: 5.0,
            mu2: 0.05,
            ..Params::default()
        },
        init: InitSpec::cosine(2.5, 2.0),
        grid: grid(512, 5e-3, 200.0),
    }
}

/// Slow strong first species well behind the second one.
pub fn slow_strong() -> Coupled {
    Coupled {
        params: Params {
            k: 0.5,
            h: 2.0,
            mu1: 0.05,
            mu2: 2.0,
            ..Params::default()
        },
        init: InitSpec::cosine(1.0, 7.0),
        grid: grid(256, 5e-3, 100.0),
    }
}

/// First species starts below its critical length with a sluggish front.
pub fn first_vanishes() -> Coupled {
    Coupled {
        params: Params {
            k: 0.5,
            h: 0.5,
            mu1: 0.05,
            ..Params::default()
        },
        init: InitSpec::cosine(0.5, 2.0),
        grid: grid(256, 5e-3, 200.0),
    }
}

/// Second species starts small and slow; the first takes over.
pub fn exclusion() -> Coupled {
    Coupled {
        params: Params {
            k: 0.5,
            h: 0.5,
            mu2: 0.05,
            ..Params::default()
        },
        init: InitSpec::cosine(2.0, 0.5),
        grid: grid(256, 5e-3, 200.0),
    }
}

/// Unit single-species problem started from a front at `g0` with speed coefficient `mu`.
pub fn single(g0: f64, mu: f64, n_xi: usize, t_end: f64) -> Single {
    Single {
        spec: SingleSpeciesSpec::cosine(1.0, 1.0, 1.0, mu, g0, 1.0),
        grid: grid(n_xi, 5e-3, t_end),
        persistence_window: None,
    }
}

/// Logistic growth on a fixed interval four times the critical length.
pub fn persistence() -> Single {
    let (d, r, a) = (1.0, 1.0, 1.0);
    let l = 4.0 * critical_length(d, r * a);
    let mut spec = SingleSpeciesSpec::cosine(d, r, a, 0.0, l, 0.1);
    spec.w0 = SampledProfile::cosine(l, 0.1, PROFILE_SAMPLES);
    Single {
        spec,
        grid: grid(256, 5e-3, 60.0),
        persistence_window: Some(0.25 * l),
    }
}

pub fn all() -> Vec<Preset> {
    vec![
        Preset {
            name: "thm1-vanish",
            summary: "species 1 starts below its critical length with a slow front and dies out",
            scenario: Scenario::Coupled(first_vanishes()),
        },
        Preset {
            name: "thm2-exclusion",
            summary: "species 2 vanishes, species 1 spreads and u -> 1",
            scenario: Scenario::Coupled(exclusion()),
        },
        Preset {
            name: "thm3-coexist",
            summary: "k = h = 0.5: both spread and u, v -> 2/3",
            scenario: Scenario::Coupled(coexistence()),
        },
        Preset {
            name: "thm5-fast-strong",
            summary: "fast strong competitor drives the slow weak one extinct",
            scenario: Scenario::Coupled(fast_strong()),
        },
        Preset {
            name: "thm6-slow-strong",
            summary: "slow strong competitor cannot catch the weak one",
            scenario: Scenario::Coupled(slow_strong()),
        },
        Preset {
            name: "prop21-persistence",
            summary: "logistic growth on a fixed interval settles near the carrying capacity",
            scenario: Scenario::Single(persistence()),
        },
        Preset {
            name: "single-spreading",
            summary: "single species from g0 = 2, mu = 1",
            scenario: Scenario::Single(single(2.0, 1.0, 512, 150.0)),
        },
        Preset {
            name: "single-vanishing",
            summary: "single species from g0 = 0.5, mu = 0.05",
            scenario: Scenario::Single(single(0.5, 0.05, 128, 200.0)),
        },
        Preset {
            name: "blowup-injection",
            summary: "absurd mu1 that makes the solver fail",
            scenario: Scenario::Coupled(Coupled {
                params: Params {
                    mu1: 1e308,
                    ..Params::default()
                },
                init: InitSpec::cosine(2.0, 2.0),
                grid: grid(64, 1e-3, 1.0),
            }),
        },
        Preset {
            name: "short-indeterminate",
            summary: "run too short to decide either species",
            scenario: Scenario::Coupled(Coupled {
                params: Params::default(),
                init: InitSpec::cosine(1.0, 1.0),
                grid: grid(64, 1e-3, 0.5),
            }),
        },
    ]
}

pub fn find(name: &str) -> Option<Preset> {
    all().into_iter().find(|p| p.name == name)
}
