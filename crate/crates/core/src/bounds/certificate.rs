//! End-to-end proof driver and JSON certificates.

use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffGrid, IndexPair, Weights, LAYOUT_TAG};
use crate::dft::{enclose_all, AnalyticityParams};
use crate::interval::decimal::{fmt_down, fmt_up, parse_up};
use crate::problem::{assemble_DF, OperatorA, ProblemParams, TruncationSet};
use crate::scalar::Scalar;

use super::{bound_W_hat, bound_Y, bound_Z, find_rstar, verify_radii, BoundError, Radii};

pub const CERT_FORMAT: &str = "bridgewave-certificate/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofInputs {
    pub c: f64,
    pub q: [f64; 2],
    pub trunc: TruncationSet,
    pub nu: [f64; 2],
    pub rho_bar: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "reason")]
pub enum Status {
    Proven,
    Failed(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub enclose_s: f64,
    pub jacobian_s: f64,
    pub y_s: f64,
    pub z_s: f64,
    pub w_s: f64,
    pub total_s: f64,
}

/// Bounds are decimal strings rounded away from the direction that could
/// make a check pass spuriously.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub format: String,
    pub layout: String,
    pub inputs: ProofInputs,
    pub scalar: String,
    #[serde(rename = "Y")]
    pub y: String,
    #[serde(rename = "Z")]
    pub z: String,
    pub z_col: String,
    pub z_est: String,
    #[serde(rename = "W_hat")]
    pub w_hat: String,
    #[serde(rename = "W")]
    pub w: Option<String>,
    pub norm_a: String,
    /// `Ĉ` for `g`, `g′` and `g″`.
    pub c_hat: [String; 3],
    pub r_star: String,
    pub r_min: Option<String>,
    pub r_max: Option<String>,
    pub a_bar_digest: String,
    pub status: Status,
    pub timing: Timings,
}

impl Certificate {
    pub fn is_proven(&self) -> bool {
        self.status == Status::Proven
    }

    pub fn r_min_value(&self) -> Option<f64> {
        self.r_min.as_deref().and_then(parse_up)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

fn up<T: Scalar>(x: T) -> String {
    fmt_up(x.to_f64_exact())
}

/// Runs the whole proof for `abar` and reports the outcome as a certificate.
///
/// Errors are returned only when a bound cannot be evaluated at all; failed
/// inequalities yield a certificate with status `failed`.
pub fn prove<T: Scalar>(inputs: &ProofInputs, abar: &CoeffGrid<T>) -> Result<Certificate, BoundError> {
    let t0 = Instant::now();
    let tr = &inputs.trunc;
    let p = ProblemParams::<T>::new(inputs.c, inputs.q)?;
    for w in tr.validate(&p)? {
        log::warn!("{w}");
    }
    let abar = abar.resized(tr.n_gal);
    let span = tr.n_row.plus(tr.n_col).max(tr.n_alias).max(tr.n_tail);
    let w = Weights::new([T::lit(inputs.nu[0]), T::lit(inputs.nu[1])], span);
    let ap = AnalyticityParams::new([T::lit(inputs.rho_bar[0]), T::lit(inputs.rho_bar[1])])?;
    super::nu_ratio(&w, &Weights::from_intervals(ap.nu_bar, IndexPair::ZERO))?;
    let mut timing = Timings::default();

    let t = Instant::now();
    let [b, bp, bpp] = enclose_all(&abar, &ap, tr.n_alias, tr.n_fft)?;
    timing.enclose_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let bmid = CoeffGrid::from_fn(tr.n_jac.plus(tr.n_jac), |a, c| bp.get(a, c).mid());
    let df = assemble_DF(&p, &bmid, tr.n_jac);
    let a = OperatorA::from_jacobian(tr.n_jac, &df)?;
    timing.jacobian_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let y = bound_Y(&p, &abar, &a, &b, tr, &w)?;
    timing.y_s = t.elapsed().as_secs_f64();
    info!("Y = {:e}", y.to_f64_exact());

    let t = Instant::now();
    let z = bound_Z(&p, &a, &bp, tr, &w)?;
    timing.z_s = t.elapsed().as_secs_f64();
    info!("Z = {:e} (Z^Col {:e}, Z^Est {:e})", z.z.to_f64_exact(), z.z_col.to_f64_exact(), z.z_est.to_f64_exact());

    let t = Instant::now();
    let (w_hat, norm_a) = bound_W_hat(&p, &a, &bpp, &w)?;
    timing.w_s = t.elapsed().as_secs_f64();
    info!("W_hat = {:e}, |A| = {:e}", w_hat.to_f64_exact(), norm_a.to_f64_exact());

    let r_star = find_rstar(y.to_f64_exact(), z.z.to_f64_exact(), w_hat.to_f64_exact());
    let radii = verify_radii(y, z.z, w_hat, T::lit(r_star));
    timing.total_s = t0.elapsed().as_secs_f64();

    let digest = abar.map(|x| x.to_f64_exact()).digest();
    let (status, r_min, r_max, wv) = match radii {
        Ok(r) => (Status::Proven, Some(up(r.r_min)), Some(fmt_down(r.r_max.to_f64_exact())), Some(up(r.w))),
        Err(BoundError::Condition(name, detail)) => {
            info!("verification failed: {name}: {detail}");
            (Status::Failed(name.to_string()), None, None, None)
        }
        Err(e) => return Err(e),
    };
    Ok(Certificate {
        format: CERT_FORMAT.into(),
        layout: LAYOUT_TAG.into(),
        inputs: inputs.clone(),
        scalar: std::any::type_name::<T>().into(),
        y: up(y),
        z: up(z.z),
        z_col: up(z.z_col),
        z_est: up(z.z_est),
        w_hat: up(w_hat),
        w: wv,
        norm_a: up(norm_a),
        c_hat: [up(b.c_hat), up(bp.c_hat), up(bpp.c_hat)],
        r_star: format!("{r_star:e}"),
        r_min,
        r_max,
        a_bar_digest: digest,
        status,
        timing,
    })
}

/// Re-verifies the radii polynomial from the recorded bounds.
///
/// The recorded `r_min` must not undercut the recomputed one.
pub fn check_certificate(cert: &Certificate) -> Result<Radii<f64>, BoundError> {
    let bad = |field: &str| BoundError::Condition("certificate fields", format!("cannot parse {field}"));
    if cert.format != CERT_FORMAT {
        return Err(BoundError::Condition("certificate fields", format!("unknown format {:?}", cert.format)));
    }
    let y = parse_up(&cert.y).ok_or_else(|| bad("Y"))?;
    let z = parse_up(&cert.z).ok_or_else(|| bad("Z"))?;
    let w_hat = parse_up(&cert.w_hat).ok_or_else(|| bad("W_hat"))?;
    let r_star: f64 = cert.r_star.parse().map_err(|_| bad("r_star"))?;
    let r = verify_radii(y, z, w_hat, r_star)?;
    if let Some(claimed) = cert.r_min_value() {
        if claimed < r.r_min {
            return Err(BoundError::Condition(
                "recorded r_min",
                format!("recorded {claimed:e} is below recomputed {:e}", r.r_min),
            ));
        }
    }
    Ok(r)
}
