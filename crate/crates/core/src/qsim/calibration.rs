//! Calibration of the walk-search schedule constants on small Johnson
//! graphs, stored as a versioned key/value fixture.

use std::fmt::Write as _;

use super::johnson::{Chain, JohnsonChain};
use super::walk::{mnrs_run, MnrsSchedule, WalkSystem};
use super::QsimError;

pub const CALIBRATION_FIXTURE: &str = include_str!("../../fixtures/mnrs_calibration.txt");
const FIXTURE_VERSION: u32 = 1;

/// `J(n, r)` with vertices marked when they contain both ends of some pair.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMember {
    pub n: usize,
    pub r: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl FamilyMember {
    pub fn chain(&self) -> Result<JohnsonChain, QsimError> {
        JohnsonChain::new(self.n, self.r)
    }

    pub fn system(&self) -> Result<(JohnsonChain, WalkSystem<f64>), QsimError> {
        let j = self.chain()?;
        let ws = WalkSystem::new(&j, |v| {
            let s = j.subset(v);
            self.pairs.iter().any(|&(a, b)| s >> a & 1 == 1 && s >> b & 1 == 1)
        })?;
        Ok((j, ws))
    }

    /// Schedule for the given constants, exact `ε` and `δ`.
    pub fn schedule(&self, c_w: f64, c_o: f64) -> Result<MnrsSchedule, QsimError> {
        let (j, ws) = self.system()?;
        let gap = j.spectral_gap();
        let delta = *gap.numer() as f64 / *gap.denom() as f64;
        Ok(MnrsSchedule::from_constants(c_w, c_o, ws.marked_fraction(), delta))
    }

    pub fn success(&self, c_w: f64, c_o: f64) -> Result<f64, QsimError> {
        let s = self.schedule(c_w, c_o)?;
        let (_, mut ws) = self.system()?;
        Ok(mnrs_run(&mut ws, s.t_walk, s.t_outer))
    }

    /// `t_walk·t_outer / ((1/√ε)(1/√δ))`.
    pub fn length_ratio(&self, c_w: f64, c_o: f64) -> Result<f64, QsimError> {
        let s = self.schedule(c_w, c_o)?;
        let (j, ws) = self.system()?;
        let gap = j.spectral_gap();
        let delta = *gap.numer() as f64 / *gap.denom() as f64;
        Ok(s.length() as f64 * (ws.marked_fraction() * delta).sqrt())
    }

    pub fn label(&self) -> String {
        let pairs: Vec<String> = self.pairs.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        format!("J({},{}) pairs {}", self.n, self.r, pairs.join(","))
    }
}

/// `J(6,3)` and `J(8,4)`, one planted pair each.
pub fn fixture_family() -> Vec<FamilyMember> {
    vec![FamilyMember { n: 6, r: 3, pairs: vec![(0, 1)] }, FamilyMember { n: 8, r: 4, pairs: vec![(0, 1)] }]
}

#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub version: u32,
    pub c_w: f64,
    pub c_o: f64,
    pub threshold: f64,
    pub min_success: f64,
    pub max_length_ratio: f64,
    pub instances: Vec<String>,
}

impl Calibration {
    pub fn parse(text: &str) -> Result<Self, QsimError> {
        let mut kv = std::collections::HashMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line.split_once('=').ok_or_else(|| QsimError::Fixture(format!("no '=' in {line:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| kv.get(k).ok_or_else(|| QsimError::Fixture(format!("missing key {k}")));
        let num = |k: &str| -> Result<f64, QsimError> {
            get(k)?.parse().map_err(|_| QsimError::Fixture(format!("bad number for {k}")))
        };
        let version: u32 = get("version")?.parse().map_err(|_| QsimError::Fixture("bad version".into()))?;
        if version != FIXTURE_VERSION {
            return Err(QsimError::Fixture(format!("unsupported version {version}")));
        }
        Ok(Self {
            version,
            c_w: num("c_w")?,
            c_o: num("c_o")?,
            threshold: num("threshold")?,
            min_success: num("min_success")?,
            max_length_ratio: num("max_length_ratio")?,
            instances: get("instances")?.split(';').map(|s| s.trim().to_string()).collect(),
        })
    }

    pub fn fixture() -> Self {
        Self::parse(CALIBRATION_FIXTURE).expect("bundled fixture parses")
    }

    pub fn render(&self) -> String {
        let mut s = String::from("# walk-search schedule constants: t_walk = ceil(c_w/sqrt(delta)), t_outer = ceil(c_o/sqrt(eps))\n");
        writeln!(s, "version = {}", self.version).unwrap();
        writeln!(s, "c_w = {}", self.c_w).unwrap();
        writeln!(s, "c_o = {}", self.c_o).unwrap();
        writeln!(s, "threshold = {}", self.threshold).unwrap();
        writeln!(s, "min_success = {:.6}", self.min_success).unwrap();
        writeln!(s, "max_length_ratio = {:.6}", self.max_length_ratio).unwrap();
        writeln!(s, "instances = {}", self.instances.join("; ")).unwrap();
        s
    }
}

/// Grid search over constant pairs whose schedule length stays within 4× of
/// `(1/√ε)(1/√δ)` on every family member. Returns the pair with the largest
/// worst-case success, breaking ties by shorter schedule, then larger `c_w`,
/// then smaller `c_o`; fails when that success is below `threshold`.
pub fn calibrate(c_w_grid: &[f64], c_o_grid: &[f64], threshold: f64) -> Result<Calibration, QsimError> {
    let family = fixture_family();
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for &c_o in c_o_grid {
        for &c_w in c_w_grid {
            let mut min_success = f64::INFINITY;
            let mut max_ratio: f64 = 0.0;
            for m in &family {
                min_success = min_success.min(m.success(c_w, c_o)?);
                max_ratio = max_ratio.max(m.length_ratio(c_w, c_o)?);
            }
            if max_ratio > 4.0 {
                continue;
            }
            let better = best.is_none_or(|(s, r, w, o)| {
                let tol = 1e-12;
                if (min_success - s).abs() > tol {
                    return min_success > s;
                }
                if (max_ratio - r).abs() > tol {
                    return max_ratio < r;
                }
                c_w > w || (c_w == w && c_o < o)
            });
            if better {
                best = Some((min_success, max_ratio, c_w, c_o));
            }
        }
    }
    let (min_success, max_length_ratio, c_w, c_o) =
        best.filter(|b| b.0 >= threshold).ok_or_else(|| QsimError::Fixture("no grid point reaches the threshold".into()))?;
    Ok(Calibration {
        version: FIXTURE_VERSION,
        c_w,
        c_o,
        threshold,
        min_success,
        max_length_ratio,
        instances: family.iter().map(FamilyMember::label).collect(),
    })
}

/// Constants scanned by [`calibrate`] for the bundled fixture.
pub fn default_grid() -> (Vec<f64>, Vec<f64>) {
    let c_w = (1..=10).map(|k| k as f64 / 10.0).collect();
    let c_o = (2..=12).map(|k| k as f64 / 4.0).collect();
    (c_w, c_o)
}
