//! Approximant files.
//!
//! JSON layout:
//!
//! ```text
//! {
//!   "header": {"kernel", "params", "n", "n_c", "precision_bits", "reduced", "quadrature"},
//!   "terms":  [{"w", "t"}, ...]                              (ladder)
//!             [{"w_re", "w_im", "t_re", "t_im"}, ...]        (reduced)
//!   "footer": {"constant_term", "s_min", "w_max", "eps_inf", "hankel_bound"}
//! }
//! ```
//!
//! Every high-precision number is a decimal string with enough digits to
//! parse back to the same bits at `precision_bits`. For a ladder the
//! `j = 0` term is the constant; a reduced file stores it in the footer.

use std::fs;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;
use crate::error::{Result, SogError};
use crate::numerics::{Complex, HiPrec};
use crate::reduction::{ReducedSog, ReducedTerm};
use crate::vp::{KernelDescriptor, Precision, Quadrature, SogApproximant, VpConfig};

#[derive(Clone, Debug)]
pub enum ApproximantFile {
    Ladder(SogApproximant),
    Reduced(ReducedSog),
}

impl ApproximantFile {
    pub fn precision_bits(&self) -> u32 {
        match self {
            ApproximantFile::Ladder(a) => a.precision_bits(),
            ApproximantFile::Reduced(r) => r.precision_bits,
        }
    }

    pub fn kernel(&self) -> &KernelDescriptor {
        match self {
            ApproximantFile::Ladder(a) => &a.kernel,
            ApproximantFile::Reduced(r) => &r.kernel,
        }
    }

    pub fn evaluate(&self, x: &HiPrec) -> HiPrec {
        match self {
            ApproximantFile::Ladder(a) => a.evaluate(x),
            ApproximantFile::Reduced(r) => r.evaluate(x),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    kernel: String,
    params: Vec<(String, Decimal)>,
    n: usize,
    n_c: Decimal,
    precision_bits: u32,
    reduced: bool,
    #[serde(default = "adaptive")]
    quadrature: String,
}

fn adaptive() -> String {
    "adaptive".into()
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Term {
    Real { w: String, t: String },
    Complex { w_re: String, w_im: String, t_re: String, t_im: String },
}

#[derive(Serialize, Deserialize)]
struct Footer {
    constant_term: Option<String>,
    s_min: String,
    w_max: String,
    eps_inf: Option<f64>,
    hankel_bound: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct FileRepr {
    header: Header,
    terms: Vec<Term>,
    footer: Footer,
}

fn quadrature_name(q: Quadrature) -> String {
    match q {
        Quadrature::Adaptive => adaptive(),
        Quadrature::Fixed(n) => format!("fixed:{n}"),
    }
}

fn parse_quadrature(s: &str) -> Result<Quadrature> {
    if s == "adaptive" {
        return Ok(Quadrature::Adaptive);
    }
    s.strip_prefix("fixed:")
        .and_then(|v| v.parse().ok())
        .map(Quadrature::Fixed)
        .ok_or_else(|| SogError::Format(format!("unknown quadrature '{s}'")))
}

fn dec(v: &HiPrec) -> String {
    v.to_decimal_string()
}

pub fn to_json(file: &ApproximantFile) -> String {
    let repr = match file {
        ApproximantFile::Ladder(a) => FileRepr {
            header: Header {
                kernel: a.kernel.name.clone(),
                params: a.kernel.params.clone(),
                n: a.n(),
                n_c: a.n_c().clone(),
                precision_bits: a.precision_bits(),
                reduced: false,
                quadrature: quadrature_name(a.config.quadrature),
            },
            terms: a.terms().map(|(w, t)| Term::Real { w: dec(w), t: dec(t) }).collect(),
            footer: Footer {
                constant_term: None,
                s_min: dec(&a.s_min()),
                w_max: dec(&a.w_max()),
                eps_inf: a.eps_inf,
                hankel_bound: None,
            },
        },
        ApproximantFile::Reduced(r) => FileRepr {
            header: Header {
                kernel: r.kernel.name.clone(),
                params: r.kernel.params.clone(),
                n: r.source_n,
                n_c: r.n_c.clone(),
                precision_bits: r.precision_bits,
                reduced: true,
                quadrature: adaptive(),
            },
            terms: r
                .terms
                .iter()
                .map(|t| Term::Complex {
                    w_re: dec(&t.w.re),
                    w_im: dec(&t.w.im),
                    t_re: dec(&t.t.re),
                    t_im: dec(&t.t.im),
                })
                .collect(),
            footer: Footer {
                constant_term: Some(dec(&r.constant_term)),
                s_min: dec(&r.s_min_modulus()),
                w_max: dec(&r.w_max()),
                eps_inf: r.eps_inf,
                hankel_bound: Some(dec(&r.hankel_bound)),
            },
        },
    };
    let mut s = serde_json::to_string_pretty(&repr).expect("approximant serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<ApproximantFile> {
    let repr: FileRepr = serde_json::from_str(text).map_err(|e| SogError::Format(e.to_string()))?;
    let h = repr.header;
    let prec = h.precision_bits;
    let kernel = KernelDescriptor {
        name: h.kernel,
        params: h.params,
    };
    let num = |s: &str| HiPrec::parse(s, prec).map_err(|e| SogError::Format(e.to_string()));
    if !h.reduced {
        let config = VpConfig::new(h.n, h.n_c)?
            .with_precision(Precision::Bits(prec))
            .with_quadrature(parse_quadrature(&h.quadrature)?);
        let mut weights = Vec::with_capacity(repr.terms.len());
        let mut exponents = Vec::with_capacity(repr.terms.len());
        for term in &repr.terms {
            match term {
                Term::Real { w, t } => {
                    weights.push(num(w)?);
                    exponents.push(num(t)?);
                }
                Term::Complex { .. } => return Err(SogError::Format("complex term in a ladder file".into())),
            }
        }
        let mut approx = SogApproximant::from_weights(kernel, config, weights)?;
        approx.exponents = exponents;
        approx.eps_inf = repr.footer.eps_inf;
        return Ok(ApproximantFile::Ladder(approx));
    }
    let mut terms = Vec::with_capacity(repr.terms.len());
    for term in &repr.terms {
        match term {
            Term::Complex { w_re, w_im, t_re, t_im } => terms.push(ReducedTerm {
                w: Complex::new(num(w_re)?, num(w_im)?),
                t: Complex::new(num(t_re)?, num(t_im)?),
            }),
            Term::Real { w, t } => terms.push(ReducedTerm {
                w: Complex::from_real(num(w)?),
                t: Complex::from_real(num(t)?),
            }),
        }
    }
    let constant_term = match &repr.footer.constant_term {
        Some(s) => num(s)?,
        None => HiPrec::zero(prec),
    };
    let hankel_bound = match &repr.footer.hankel_bound {
        Some(s) => num(s)?,
        None => return Err(SogError::Format("reduced file without hankel_bound".into())),
    };
    Ok(ApproximantFile::Reduced(ReducedSog {
        kernel,
        source_n: h.n,
        n_c: h.n_c,
        precision_bits: prec,
        terms,
        constant_term,
        hankel_bound,
        eps_inf: repr.footer.eps_inf,
    }))
}

pub fn write_file(path: &Path, file: &ApproximantFile) -> Result<()> {
    fs::write(path, to_json(file)).map_err(|e| SogError::Io(format!("{}: {e}", path.display())))
}

pub fn read_file(path: &Path) -> Result<ApproximantFile> {
    let text = fs::read_to_string(path).map_err(|e| SogError::Io(format!("{}: {e}", path.display())))?;
    from_json(&text)
}

/// Flat CSV of the terms in 64-bit floats. Columns `w,t` for a ladder and
/// `w_re,w_im,t_re,t_im` for a reduced approximant, whose first row is the
/// constant term (`t = 0`). The flag is true when some value did not
/// survive the conversion exactly.
pub fn to_csv(file: &ApproximantFile) -> (String, bool) {
    let mut lossy = false;
    let mut f = |v: &HiPrec| {
        let d = v.to_f64();
        if !d.is_finite() || HiPrec::from_f64(d, v.prec()) != *v {
            lossy = true;
        }
        format!("{d:e}")
    };
    let mut out = String::new();
    match file {
        ApproximantFile::Ladder(a) => {
            out.push_str("w,t\n");
            for (w, t) in a.terms() {
                out.push_str(&format!("{},{}\n", f(w), f(t)));
            }
        }
        ApproximantFile::Reduced(r) => {
            out.push_str("w_re,w_im,t_re,t_im\n");
            out.push_str(&format!("{},0e0,0e0,0e0\n", f(&r.constant_term)));
            for t in &r.terms {
                out.push_str(&format!("{},{},{},{}\n", f(&t.w.re), f(&t.w.im), f(&t.t.re), f(&t.t.im)));
            }
        }
    }
    if lossy {
        warn!("CSV export rounds {}-bit values to 64-bit floats", file.precision_bits());
    }
    (out, lossy)
}

/// Reads back a CSV written by [`to_csv`] as rows of floats.
pub fn parse_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| SogError::Parse(format!("'{v}': {e}"))))
                .collect()
        })
        .collect()
}
