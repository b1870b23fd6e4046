use std::fmt;

use serde::{Deserialize, Serialize};

use super::Jet2;

/// The unipotent-type families `((±1, d), (0, ±1))` and the kernel of the
/// jet map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum JetTag {
    /// `((1, d), (0, 1))`
    APlus,
    /// `((-1, d), (0, -1))`
    AMinus,
    /// `((1, d), (0, -1))`
    APrimePlus,
    /// `((-1, d), (0, 1))`
    APrimeMinus,
    /// The identity matrix; also the `d = 0` member of `APlus`.
    Kernel,
    Other,
}

impl fmt::Display for JetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JetClass {
    pub tag: JetTag,
    /// Upper-right entry when the matrix lies in one of the families.
    pub d: Option<f64>,
}

impl JetClass {
    /// Whether the matrix is in `A⁺`, counting the kernel.
    pub fn in_a_plus(&self) -> bool {
        matches!(self.tag, JetTag::APlus | JetTag::Kernel)
    }
}

pub const DEFAULT_CLASS_TOL: f64 = 1e-5;

/// Matches `j` entrywise, within `tol`, against the four families.
pub fn classify_jet(j: &Jet2, tol: f64) -> JetClass {
    let m = j.0;
    let near = |v: f64, target: f64| (v - target).abs() <= tol;
    let other = JetClass { tag: JetTag::Other, d: None };
    if !j.is_finite() || !near(m[1][0], 0.0) {
        return other;
    }
    let sign = |v: f64| {
        if near(v, 1.0) {
            Some(1)
        } else if near(v, -1.0) {
            Some(-1)
        } else {
            None
        }
    };
    let tag = match (sign(m[0][0]), sign(m[1][1])) {
        (Some(1), Some(1)) if near(m[0][1], 0.0) => JetTag::Kernel,
        (Some(1), Some(1)) => JetTag::APlus,
        (Some(-1), Some(-1)) => JetTag::AMinus,
        (Some(1), Some(-1)) => JetTag::APrimePlus,
        (Some(-1), Some(1)) => JetTag::APrimeMinus,
        _ => return other,
    };
    JetClass { tag, d: Some(m[0][1]) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::jet_of_flow_map;

    #[test]
    fn examples() {
        let c = classify_jet(&Jet2::new(1.0, 5.0, 0.0, 1.0), DEFAULT_CLASS_TOL);
        assert_eq!((c.tag, c.d), (JetTag::APlus, Some(5.0)));
        let c = classify_jet(&Jet2::new(-1.0, 3.0, 0.0, -1.0), DEFAULT_CLASS_TOL);
        assert_eq!((c.tag, c.d), (JetTag::AMinus, Some(3.0)));
        assert_eq!(classify_jet(&Jet2::new(2.0, 0.0, 0.0, 2.0), DEFAULT_CLASS_TOL).tag, JetTag::Other);
        assert_eq!(classify_jet(&Jet2::new(1.0, 2.0, 0.0, -1.0), DEFAULT_CLASS_TOL).tag, JetTag::APrimePlus);
        assert_eq!(classify_jet(&Jet2::new(-1.0, 0.5, 0.0, 1.0), DEFAULT_CLASS_TOL).tag, JetTag::APrimeMinus);
        let k = classify_jet(&Jet2::new(1.0 + 1e-7, 1e-7, 0.0, 1.0), DEFAULT_CLASS_TOL);
        assert!(k.tag == JetTag::Kernel && k.in_a_plus());
        assert_eq!(classify_jet(&Jet2::new(1.0, 0.0, 0.1, 1.0), DEFAULT_CLASS_TOL).tag, JetTag::Other);
    }

    #[test]
    fn flow_maps_of_nilpotent_part_are_a_plus() {
        for (a, tau) in [(1.0, 2.0), (-3.0, 0.25), (0.5, -4.0)] {
            let j = jet_of_flow_map(&Jet2::new(0.0, a, 0.0, 0.0), tau);
            let c = classify_jet(&j, DEFAULT_CLASS_TOL);
            assert_eq!(c.tag, JetTag::APlus);
            assert!((c.d.unwrap() - a * tau).abs() <= 1e-12);
        }
    }
}
