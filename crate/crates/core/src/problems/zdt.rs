use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mop::{Problem, ProblemSpec};

/// Smallest reachable first objective of ZDT6 (the front starts here).
pub const ZDT6_F1_MIN: f64 = 0.280_775_319_1;

/// Non-dominated `f1` intervals of the disconnected ZDT3 front.
pub const ZDT3_REGIONS: [(f64, f64); 5] = [
    (0.0, 0.083_001_534_9),
    (0.182_228_780_0, 0.257_762_363_4),
    (0.409_313_674_8, 0.453_882_104_1),
    (0.618_396_794_4, 0.652_511_703_8),
    (0.823_331_798_3, 0.851_832_865_4),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZdtVariant {
    Zdt1,
    Zdt2,
    Zdt3,
    Zdt4,
    Zdt6,
}

impl ZdtVariant {
    pub fn from_index(i: u8) -> Option<Self> {
        Some(match i {
            1 => Self::Zdt1,
            2 => Self::Zdt2,
            3 => Self::Zdt3,
            4 => Self::Zdt4,
            6 => Self::Zdt6,
            _ => return None,
        })
    }

    pub fn index(self) -> u8 {
        match self {
            Self::Zdt1 => 1,
            Self::Zdt2 => 2,
            Self::Zdt3 => 3,
            Self::Zdt4 => 4,
            Self::Zdt6 => 6,
        }
    }
}

/// Bi-objective ZDT benchmark with `d` decision variables.
#[derive(Debug, Clone)]
pub struct Zdt {
    variant: ZdtVariant,
    spec: ProblemSpec,
}

impl Zdt {
    pub fn new(variant: ZdtVariant, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidSpec(format!("ZDT needs d >= 2, got {d}")));
        }
        let mut lower = vec![0.0; d];
        let mut upper = vec![1.0; d];
        if variant == ZdtVariant::Zdt4 {
            lower[1..].fill(-5.0);
            upper[1..].fill(5.0);
        }
        let spec = ProblemSpec::new(format!("zdt{}", variant.index()), 2, lower, upper, 0)?;
        Ok(Self { variant, spec })
    }

    pub fn variant(&self) -> ZdtVariant {
        self.variant
    }
}

impl Problem for Zdt {
    fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    fn objectives(&self, x: &[f64]) -> Vec<f64> {
        zdt_objectives(self.variant, x)
    }
}

/// Bounds-checked ZDT evaluation.
pub fn evaluate_zdt(variant: ZdtVariant, x: &[f64]) -> Result<Vec<f64>> {
    let problem = Zdt::new(variant, x.len())?;
    problem.spec().check_decision(x)?;
    Ok(zdt_objectives(variant, x))
}

fn zdt_objectives(variant: ZdtVariant, x: &[f64]) -> Vec<f64> {
    let tail = &x[1..];
    let k = tail.len() as f64;
    match variant {
        ZdtVariant::Zdt1 | ZdtVariant::Zdt2 | ZdtVariant::Zdt3 => {
            let f1 = x[0];
            let g = 1.0 + 9.0 * tail.iter().sum::<f64>() / k;
            let r = f1 / g;
            let h = match variant {
                ZdtVariant::Zdt1 => 1.0 - r.sqrt(),
                ZdtVariant::Zdt2 => 1.0 - r * r,
                _ => 1.0 - r.sqrt() - r * (10.0 * PI * f1).sin(),
            };
            vec![f1, g * h]
        }
        ZdtVariant::Zdt4 => {
            let f1 = x[0];
            let g = 1.0 + 10.0 * k + tail.iter().map(|v| v * v - 10.0 * (4.0 * PI * v).cos()).sum::<f64>();
            vec![f1, g * (1.0 - (f1 / g).sqrt())]
        }
        ZdtVariant::Zdt6 => {
            let f1 = 1.0 - (-4.0 * x[0]).exp() * (6.0 * PI * x[0]).sin().powi(6);
            let g = 1.0 + 9.0 * (tail.iter().sum::<f64>() / k).powf(0.25);
            let r = f1 / g;
            vec![f1, g * (1.0 - r * r)]
        }
    }
}
