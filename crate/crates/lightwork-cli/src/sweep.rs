//! Grid evaluation of one scheme over axes declared in a config file.
//!
//! Axes vary in lexicographic name order with the last name fastest, so the
//! row order is the sorted tuple order of the grid. Rows whose parameters a
//! scheme rejects are kept, with the message in the `error` column and the
//! value cells blank. Output bytes are a pure function of the config and
//! seed.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use serde_json::Value;

use lightwork::coarse::{self, CoarseGrainConfig, Resolution};
use lightwork::erasure::{self, ErasureScheme};
use lightwork::homodyne;
use lightwork::nsm::nsm_cycle;
use lightwork::photocount;
use lightwork::reversible::{extract, ModeEnsemble};

use crate::config::{FileConfig, NsmSection, SweepSection};
use crate::output::{num, text, Format, Table};
use crate::SweepArgs;

const MAX_ROWS: usize = 1_000_000;

#[derive(Copy, Clone, PartialEq, Eq)]
enum Scheme {
    Reversible,
    Photocount,
    Homodyne,
    Sign,
    Coarse,
    Erasure,
    Nsm,
}

impl Scheme {
    fn parse(name: &str) -> Result<Scheme> {
        Ok(match name {
            "reversible" => Scheme::Reversible,
            "photocount" => Scheme::Photocount,
            "homodyne" => Scheme::Homodyne,
            "sign" => Scheme::Sign,
            "coarse" => Scheme::Coarse,
            "erasure" => Scheme::Erasure,
            "nsm" => Scheme::Nsm,
            other => bail!(
                "unknown sweep scheme {other:?}; expected reversible, photocount, \
                 homodyne, sign, coarse, erasure, or nsm"
            ),
        })
    }

    fn accepted_params(self) -> &'static [&'static str] {
        match self {
            Scheme::Reversible => &["nbar", "nbar_cold", "modes"],
            Scheme::Photocount => &["nbar", "kappa_sq"],
            Scheme::Homodyne | Scheme::Sign => &["nbar", "beta", "kappa_sq"],
            Scheme::Coarse => &["nbar", "beta", "kappa_sq", "resolution"],
            Scheme::Erasure => &["nbar", "nbar_d"],
            Scheme::Nsm => &["theta_c", "theta_m"],
        }
    }

    fn value_columns(self) -> &'static [&'static str] {
        match self {
            Scheme::Reversible => &["nbar_final", "work", "efficiency"],
            Scheme::Photocount => &[
                "average_work",
                "efficiency",
                "mutual_information",
                "record_entropy",
            ],
            Scheme::Homodyne => &[
                "xi",
                "epsilon",
                "net_work",
                "efficiency",
                "mutual_information",
                "record_entropy",
            ],
            Scheme::Sign => &["xi", "epsilon", "net_work", "efficiency", "mutual_information"],
            Scheme::Coarse => &["coarse_work", "fine_work", "ratio_to_fine"],
            Scheme::Erasure => &[
                "bound_entire",
                "bound_photocount_small",
                "bound_homodyne_small",
                "bound_entire_field",
                "nbar_min",
            ],
            Scheme::Nsm => &["w_i", "w_ii", "q_m", "eta", "delta_w_bound", "eta_max"],
        }
    }
}

struct Params(BTreeMap<String, f64>);

impl Params {
    fn get(&self, key: &str) -> Option<f64> {
        self.0.get(key).copied()
    }

    fn req(&self, key: &str) -> Result<f64> {
        self.get(key)
            .with_context(|| format!("sweep needs parameter {key:?} as an axis or fixed value"))
    }
}

/// Operating point rule shared with the single-point commands: both beta
/// and kappa_sq present selects that point, otherwise the scheme optimum.
fn point_or_optimum(
    p: &Params,
    nbar: f64,
    optimum: impl Fn(f64) -> lightwork::Result<homodyne::OptimalParams>,
) -> Result<(f64, f64)> {
    match (p.get("beta"), p.get("kappa_sq")) {
        (Some(b), Some(k)) => Ok((2.0 * b * b, 1.0 - k)),
        _ => {
            let opt = optimum(nbar)?;
            Ok((opt.xi, opt.epsilon))
        }
    }
}

fn evaluate(scheme: Scheme, p: &Params, nsm_section: Option<&NsmSection>) -> Result<Vec<Value>> {
    match scheme {
        Scheme::Reversible => {
            let modes = p.req("modes")?;
            if modes.fract() != 0.0 || !(1.0..=u32::MAX as f64).contains(&modes) {
                bail!("modes must be a positive integer, got {modes}");
            }
            let ens = ModeEnsemble::new(modes as u32, p.req("nbar")?, p.req("nbar_cold")?)?;
            let out = extract(&ens)?;
            Ok(vec![
                num(out.nbar_final),
                num(out.work),
                num(out.efficiency),
            ])
        }
        Scheme::Photocount => {
            let nbar = p.req("nbar")?;
            let kappa_sq = p.get("kappa_sq").unwrap_or(0.9);
            let w = photocount::average_work(nbar, kappa_sq)?;
            Ok(vec![
                num(w),
                num(w / nbar),
                num(photocount::mutual_information_photocount(nbar, kappa_sq)?),
                num(photocount::detector_entropy_photocount(nbar, kappa_sq)?),
            ])
        }
        Scheme::Homodyne => {
            let nbar = p.req("nbar")?;
            let (xi, epsilon) = point_or_optimum(p, nbar, homodyne::optimize)?;
            let net = homodyne::gross_work(nbar, xi, epsilon)?;
            Ok(vec![
                num(xi),
                num(epsilon),
                num(net),
                num(net / nbar),
                num(homodyne::mutual_information(nbar, xi, epsilon)?),
                num(homodyne::detector_entropy(nbar, xi, epsilon)?),
            ])
        }
        Scheme::Sign => {
            let nbar = p.req("nbar")?;
            let (xi, epsilon) = point_or_optimum(p, nbar, coarse::optimize_sign)?;
            let quad = coarse::sign_work(nbar, xi, epsilon)?;
            Ok(vec![
                num(xi),
                num(epsilon),
                num(quad.net),
                num(quad.net / nbar),
                num(coarse::sign_mutual_information(nbar, xi, epsilon)?),
            ])
        }
        Scheme::Coarse => {
            let nbar = p.req("nbar")?;
            let (xi, epsilon) = point_or_optimum(p, nbar, homodyne::optimize)?;
            let resolution = match p.get("resolution") {
                Some(r) => r,
                None => homodyne::HomodyneStats::new(nbar, xi, epsilon)?
                    .sigma_dn_sq
                    .sqrt()
                    / 10.0,
            };
            let grain = CoarseGrainConfig::new(Resolution::Width(resolution), None)?;
            let coarse_net = coarse::coarse_work(nbar, xi, epsilon, &grain)?;
            let fine = homodyne::displacement_work(nbar, xi, epsilon)?;
            Ok(vec![
                num(coarse_net),
                num(fine - xi),
                num(if fine > xi {
                    (coarse_net + xi) / fine
                } else {
                    0.0
                }),
            ])
        }
        Scheme::Erasure => {
            let nbar = p.req("nbar")?;
            let bounds = [
                ErasureScheme::EntireEnergy,
                ErasureScheme::PhotocountSmallFraction,
                ErasureScheme::HomodyneSmallFraction,
                ErasureScheme::HomodyneEntireField,
            ];
            let mut row = Vec::with_capacity(5);
            for scheme in bounds {
                row.push(num(erasure::td_bound(scheme, nbar)?));
            }
            let nbar_d = p.get("nbar_d").unwrap_or(2.0);
            row.push(num(erasure::nbar_threshold_form(nbar_d)?));
            Ok(row)
        }
        Scheme::Nsm => {
            let section =
                nsm_section.context("sweep scheme \"nsm\" needs an [nsm] section too")?;
            let theta_c = p.get("theta_c").unwrap_or(section.theta_c);
            let theta_m = p.get("theta_m").unwrap_or(section.theta_m);
            let problem = section.build(Some((theta_c, theta_m)))?;
            let report = nsm_cycle(
                &problem.h_i,
                &problem.h_f,
                &problem.p_eq,
                &problem.kraus,
                theta_c,
                theta_m,
            )?;
            Ok(vec![
                num(report.w_i),
                num(report.w_ii),
                num(report.q_m),
                report.eta.map(num).unwrap_or(Value::Null),
                num(report.delta_w_bound),
                report.eta_max.map(num).unwrap_or(Value::Null),
            ])
        }
    }
}

pub fn run(args: SweepArgs) -> Result<()> {
    let cfg = FileConfig::load(Some(&args.config))?;
    let section: SweepSection = cfg
        .sweep
        .clone()
        .context("config file needs a [sweep] section for this command")?;
    let scheme = Scheme::parse(&section.scheme)?;

    let accepted = scheme.accepted_params();
    for name in section.axes.keys().chain(section.fixed.keys()) {
        if !accepted.contains(&name.as_str()) {
            bail!(
                "parameter {name:?} is not used by scheme {:?}; accepted: {}",
                section.scheme,
                accepted.join(", ")
            );
        }
    }
    for name in section.axes.keys() {
        if section.fixed.contains_key(name) {
            bail!("parameter {name:?} is both an axis and a fixed value");
        }
    }

    let mut axes: Vec<(String, Vec<f64>)> = Vec::new();
    for (name, spec) in &section.axes {
        let values = spec
            .values()
            .with_context(|| format!("axis {name:?}"))?;
        axes.push((name.clone(), values));
    }
    if axes.is_empty() {
        bail!("sweep needs at least one axis");
    }
    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    if total > MAX_ROWS {
        bail!("sweep grid has {total} rows; the cap is {MAX_ROWS}");
    }

    let mut columns: Vec<&str> = axes.iter().map(|(n, _)| n.as_str()).collect();
    columns.extend(scheme.value_columns());
    columns.push("error");

    let seed = args.seed.or(section.seed).unwrap_or(0);
    let mut table = Table::new("sweep", &columns);
    table.meta("scheme", &section.scheme);
    table.meta("seed", seed);
    table.meta("rows", total);

    let n_values = scheme.value_columns().len();
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..total {
        let mut params = Params(section.fixed.clone());
        let mut row: Vec<Value> = Vec::with_capacity(columns.len());
        for (slot, (name, values)) in idx.iter().zip(&axes) {
            let v = values[*slot];
            params.0.insert(name.clone(), v);
            row.push(num(v));
        }
        match evaluate(scheme, &params, cfg.nsm.as_ref()) {
            Ok(values) => {
                debug_assert_eq!(values.len(), n_values);
                row.extend(values);
                row.push(text(""));
            }
            Err(err) => {
                row.extend(std::iter::repeat(Value::Null).take(n_values));
                row.push(text(format!("{err:#}")));
            }
        }
        table.push(row);

        // odometer increment, last axis fastest
        for pos in (0..idx.len()).rev() {
            idx[pos] += 1;
            if idx[pos] < axes[pos].1.len() {
                break;
            }
            idx[pos] = 0;
        }
    }

    let format = match args.format {
        Some(f) => f,
        None => match section.format.as_deref() {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => bail!("unknown sweep format {other:?}; expected csv or json"),
        },
    };
    let out = args.out.or(section.output);
    table.write(format, out.as_deref())
}
