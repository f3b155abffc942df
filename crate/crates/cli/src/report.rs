//! Report types and their JSON/CSV/text renderings.

use std::fmt;

use serde::de::Deserializer;
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

/// A float written with 17 significant digits, so it reads back bit-exact.
/// Non-finite values are written as `null`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Num(pub f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return ser.serialize_none();
        }
        let raw = RawValue::from_string(self.to_string()).map_err(S::Error::custom)?;
        raw.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        Ok(Num(Option::<f64>::deserialize(de)?.unwrap_or(f64::NAN)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnclosureReport {
    pub which: String,
    pub r_lo: Num,
    pub r_hi: Num,
    pub iterations: usize,
    pub converged: bool,
    /// Eigenvector lies in the cone `K_M` with `M` one above the oscillation rate.
    pub in_cone: bool,
}

/// Sufficient conditions for cone invariance at this mesh width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    /// Lipschitz constant of the individual maps.
    pub c: Num,
    pub m1: Num,
    pub m2: Num,
    pub m: Num,
    pub contraction_ok: bool,
    pub width_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub family: String,
    pub domain: String,
    pub s: Num,
    pub h: Num,
    pub dim: usize,
    /// Interpolation-error constants are closed-form rather than sampled.
    pub rigorous_bounds: bool,
    pub enclosures: Vec<EnclosureReport>,
    pub cone: ConeReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimReport {
    pub family: String,
    pub domain: String,
    pub h: Num,
    pub dim: usize,
    pub s_lower: Num,
    pub s_upper: Num,
    pub width: Num,
    pub evals: usize,
    pub certified: bool,
    pub decreasing_certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub h: Num,
    pub s_lower: Num,
    pub s_upper: Num,
    pub width: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub family: String,
    pub rows: Vec<StudyRow>,
    pub order: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub h: Num,
    /// Computed value(s): a bracket, or a single estimate in both slots.
    pub lower: Num,
    pub upper: Num,
    pub reference_lower: Num,
    pub reference_upper: Num,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub table: String,
    pub scale: Num,
    pub criterion: String,
    pub rows: Vec<TableRow>,
    pub all_pass: bool,
}

pub trait Render {
    fn csv(&self) -> String;
    fn text(&self) -> String;
}

impl Render for RadiusReport {
    fn csv(&self) -> String {
        let mut out = String::from("which,r_lo,r_hi,iterations,converged,in_cone\n");
        for e in &self.enclosures {
            out += &format!("{},{},{},{},{},{}\n", e.which, e.r_lo, e.r_hi, e.iterations, e.converged, e.in_cone);
        }
        out
    }

    fn text(&self) -> String {
        let mut out = format!(
            "{} on {} with h = {}, s = {} ({} nodes)\n",
            self.family, self.domain, self.h.0, self.s.0, self.dim
        );
        for e in &self.enclosures {
            out += &format!(
                "  r({}) in [{}, {}]  iterations {}{}{}\n",
                e.which,
                e.r_lo,
                e.r_hi,
                e.iterations,
                if e.converged { "" } else { "  (not converged)" },
                if e.in_cone { "" } else { "  (eigenvector outside cone)" }
            );
        }
        out += &format!(
            "  cone hypotheses: contraction {} (c = {:.4}), width {}\n",
            yes_no(self.cone.contraction_ok),
            self.cone.c.0,
            yes_no(self.cone.width_ok)
        );
        out
    }
}

impl Render for DimReport {
    fn csv(&self) -> String {
        format!(
            "family,h,s_lower,s_upper,width,evals,certified\n{},{},{},{},{},{},{}\n",
            self.family, self.h, self.s_lower, self.s_upper, self.width, self.evals, self.certified
        )
    }

    fn text(&self) -> String {
        format!(
            "{} (h = {}, {} nodes, {} domain)\n  s in [{}, {}]  width {:.3e}\n  {} matrices assembled, {}\n",
            self.family,
            self.h.0,
            self.dim,
            self.domain,
            self.s_lower,
            self.s_upper,
            self.width.0,
            self.evals,
            if self.certified { "certified" } else { "NOT certified" }
        )
    }
}

impl Render for StudyReport {
    fn csv(&self) -> String {
        let mut out = String::from("h,s_lower,s_upper,width\n");
        for r in &self.rows {
            out += &format!("{},{},{},{}\n", r.h, r.s_lower, r.s_upper, r.width);
        }
        match self.order {
            Some(p) => out += &format!("# fitted order {:.4}\n", p.0),
            None => out += "# fitted order n/a\n",
        }
        out
    }

    fn text(&self) -> String {
        let mut out = format!("{}\n", self.family);
        for r in &self.rows {
            out += &format!("  h = {:<10} [{}, {}]  width {:.3e}\n", r.h.0, r.s_lower, r.s_upper, r.width.0);
        }
        if let Some(p) = self.order {
            out += &format!("  width ~ h^{:.3}\n", p.0);
        }
        out
    }
}

impl Render for TableReport {
    fn csv(&self) -> String {
        let mut out = String::from("label,h,lower,upper,reference_lower,reference_upper,pass\n");
        for r in &self.rows {
            out += &format!(
                "{},{},{},{},{},{},{}\n",
                r.label, r.h, r.lower, r.upper, r.reference_lower, r.reference_upper, r.pass
            );
        }
        out
    }

    fn text(&self) -> String {
        let mut out = format!("{} (scale {}; {})\n", self.table, self.scale.0, self.criterion);
        for r in &self.rows {
            out += &format!(
                "  {:<22} h = {:<8} computed [{:.15}, {:.15}]  reference [{:.15}, {:.15}]  {}\n",
                r.label,
                r.h.0,
                r.lower.0,
                r.upper.0,
                r.reference_lower.0,
                r.reference_upper.0,
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
        out += &format!("{}\n", if self.all_pass { "all rows pass" } else { "some rows FAIL" });
        out
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip<T: Serialize + for<'de> Deserialize<'de> + PartialEq + fmt::Debug>(x: &T) {
        let text = serde_json::to_string(x).unwrap();
        let back: T = serde_json::from_str(&text).unwrap();
        assert_eq!(&back, x, "{text}");
    }

    #[test]
    fn numbers_keep_every_bit() {
        for v in [0.1, 1.0 / 3.0, 0.531_280_505_098_904, 2f64.sqrt() * 1e-300, -7.5e12, 0.0] {
            let text = serde_json::to_string(&Num(v)).unwrap();
            let back: Num = serde_json::from_str(&text).unwrap();
            assert_eq!(back.0.to_bits(), v.to_bits(), "{text}");
        }
        assert_eq!(serde_json::to_string(&Num(f64::INFINITY)).unwrap(), "null");
        assert_eq!(serde_json::to_string(&Num(0.5)).unwrap(), "5.0000000000000000e-1");
    }

    #[test]
    fn reports_round_trip() {
        let enc = EnclosureReport {
            which: "B".into(),
            r_lo: Num(0.999_999_999_1),
            r_hi: Num(1.000_000_000_3),
            iterations: 17,
            converged: true,
            in_cone: true,
        };
        round_trip(&RadiusReport {
            family: "cf[1,2]".into(),
            domain: "full".into(),
            s: Num(0.5),
            h: Num(0.01),
            dim: 101,
            rigorous_bounds: true,
            enclosures: vec![enc.clone(), EnclosureReport { which: "A".into(), ..enc }],
            cone: ConeReport {
                c: Num(1.0),
                m1: Num(1.505),
                m2: Num(2.505),
                m: Num(69.3),
                contraction_ok: false,
                width_ok: true,
            },
        });
        round_trip(&DimReport {
            family: "cantor[0.5]".into(),
            domain: "reduced:3".into(),
            h: Num(1e-3),
            dim: 1001,
            s_lower: Num(0.733_472_896_921_328),
            s_upper: Num(0.733_475_325_610_593),
            width: Num(2.428_689_265e-6),
            evals: 18,
            certified: true,
            decreasing_certified: true,
        });
        round_trip(&StudyReport {
            family: "cf[1,2]".into(),
            rows: vec![StudyRow { h: Num(0.004), s_lower: Num(0.53), s_upper: Num(0.54), width: Num(0.01) }],
            order: None,
        });
        round_trip(&TableReport {
            table: "table3".into(),
            scale: Num(10.0),
            criterion: "brackets intersect".into(),
            rows: vec![TableRow {
                label: "a=0.25".into(),
                h: Num(0.001),
                lower: Num(0.69),
                upper: Num(0.70),
                reference_lower: Num(0.691_029_100_877_742),
                reference_upper: Num(0.691_029_110_502_742),
                pass: true,
            }],
            all_pass: true,
        });
    }

    #[test]
    fn study_csv_header() {
        let r = StudyReport { family: "x".into(), rows: vec![], order: Some(Num(2.0)) };
        assert!(r.csv().starts_with("h,s_lower,s_upper,width\n"));
    }
}
