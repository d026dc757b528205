//! Single-point subcommands and the Monte Carlo verifier.

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::json;

use lightwork::coarse::{self, CoarseGrainConfig, Resolution};
use lightwork::erasure::{self, ErasureScheme};
use lightwork::homodyne::{self, CostMode, OptimalParams, WorkBudget};
use lightwork::mc::{self, MiScheme, SignBinning};
use lightwork::nsm::nsm_cycle;
use lightwork::photocount;
use lightwork::reversible::{extract, strokes, ModeEnsemble};

use crate::config::FileConfig;
use crate::output::{num, write_json, Table};
use crate::{
    CoarseArgs, ErasureArgs, HomodyneArgs, McVerifyArgs, NsmArgs, PhotocountArgs, ReversibleArgs,
    SignArgs,
};

fn pick<T: Copy>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn opt_num(v: Option<f64>) -> serde_json::Value {
    v.map(num).unwrap_or(serde_json::Value::Null)
}

/// Operating point of the homodyne family: evaluate the given (beta,
/// kappa_sq) pair when both are known, otherwise take the scheme optimum.
fn operating_point(
    nbar: f64,
    beta: Option<f64>,
    kappa_sq: Option<f64>,
    optimum: impl Fn(f64) -> lightwork::Result<OptimalParams>,
) -> Result<(f64, f64, &'static str)> {
    match (beta, kappa_sq) {
        (Some(b), Some(k)) => Ok((2.0 * b * b, 1.0 - k, "point")),
        _ => {
            let opt = optimum(nbar)?;
            Ok((opt.xi, opt.epsilon, "optimum"))
        }
    }
}

pub fn reversible(args: ReversibleArgs) -> Result<()> {
    let cfg = FileConfig::load(args.io.config.as_deref())?;
    let nbar = pick(args.nbar, cfg.reversible.nbar, 20.0);
    let nbar_cold = pick(args.nbar_cold, cfg.reversible.nbar_cold, 1.0);
    let modes = pick(args.modes, cfg.reversible.modes, 2);

    let ensemble = ModeEnsemble::new(modes, nbar, nbar_cold)?;
    let outcome = extract(&ensemble)?;
    let ledger = strokes(&ensemble, 1.0)?;

    let mut table = Table::new(
        "reversible",
        &[
            "modes",
            "nbar",
            "nbar_cold",
            "nbar_final",
            "work",
            "efficiency",
            "omega_hot",
            "omega_cold",
            "theta_final",
            "heat_hot",
            "heat_cold",
        ],
    );
    table.push(vec![
        json!(modes),
        num(nbar),
        num(nbar_cold),
        num(outcome.nbar_final),
        num(outcome.work),
        num(outcome.efficiency),
        num(ledger.omega_hot),
        num(ledger.omega_cold),
        num(ledger.theta_final),
        num(ledger.heat_hot),
        num(ledger.heat_cold),
    ]);
    table.write(args.io.format, args.io.out.as_deref())
}

pub fn photocount(args: PhotocountArgs) -> Result<()> {
    let cfg = FileConfig::load(args.io.config.as_deref())?;
    let nbar = pick(args.nbar, cfg.photocount.nbar, 20.0);
    let kappa_sq = pick(args.kappa_sq, cfg.photocount.kappa_sq, 0.9);

    let work = photocount::average_work(nbar, kappa_sq)?;
    let info = photocount::mutual_information_photocount(nbar, kappa_sq)?;
    let record = photocount::detector_entropy_photocount(nbar, kappa_sq)?;

    let mut table = Table::new(
        "photocount",
        &[
            "nbar",
            "kappa_sq",
            "transmitted_energy",
            "average_work",
            "efficiency",
            "mutual_information",
            "record_entropy",
        ],
    );
    table.push(vec![
        num(nbar),
        num(kappa_sq),
        num(kappa_sq * nbar),
        num(work),
        num(work / nbar),
        num(info),
        num(record),
    ]);
    table.write(args.io.format, args.io.out.as_deref())
}

pub fn homodyne(args: HomodyneArgs) -> Result<()> {
    let cfg = FileConfig::load(args.io.config.as_deref())?;
    let nbar = pick(args.nbar, cfg.homodyne.nbar, 20.0);
    let theta_d = pick(args.theta_d, cfg.homodyne.theta_d, 1.0);
    let beta = args.beta.or(cfg.homodyne.beta);
    let kappa_sq = args.kappa_sq.or(cfg.homodyne.kappa_sq);
    let (xi, epsilon, mode) = operating_point(nbar, beta, kappa_sq, homodyne::optimize)?;

    let budget = WorkBudget::new(nbar, xi, epsilon, theta_d)?;
    let info = homodyne::mutual_information(nbar, xi, epsilon)?;
    let record = homodyne::detector_entropy(nbar, xi, epsilon)?;

    let mut table = Table::new(
        "homodyne",
        &[
            "nbar",
            "xi",
            "epsilon",
            "displacement_work",
            "lo_cost",
            "net_work",
            "efficiency",
            "mutual_information",
            "record_entropy",
            "feedforward_bound",
            "erasure_heat",
            "net_with_feedforward",
            "net_with_erasure",
        ],
    );
    table.meta("operating_point", mode);
    table.meta("theta_d", theta_d);
    table.push(vec![
        num(nbar),
        num(xi),
        num(epsilon),
        num(budget.gross_work),
        num(budget.lo_cost),
        num(budget.net_work(CostMode::LocalOscillatorOnly)),
        num(budget.efficiency(CostMode::LocalOscillatorOnly)),
        num(info),
        num(record),
        num(budget.feedforward_bound),
        num(budget.erasure_heat),
        num(budget.net_work(CostMode::WithFeedforward)),
        num(budget.net_work(CostMode::WithErasure)),
    ]);
    table.write(args.io.format, args.io.out.as_deref())
}

pub fn sign(args: SignArgs) -> Result<()> {
    let cfg = FileConfig::load(args.io.config.as_deref())?;
    let nbar = pick(args.nbar, cfg.sign.nbar, 20.0);
    let beta = args.beta.or(cfg.sign.beta);
    let kappa_sq = args.kappa_sq.or(cfg.sign.kappa_sq);
    let (xi, epsilon, mode) = operating_point(nbar, beta, kappa_sq, coarse::optimize_sign)?;

    let quad = coarse::sign_work(nbar, xi, epsilon)?;
    let fine = homodyne::displacement_work(nbar, xi, epsilon)?;
    let info = coarse::sign_mutual_information(nbar, xi, epsilon)?;

    let mut table = Table::new(
        "sign",
        &[
            "nbar",
            "xi",
            "epsilon",
            "gross_work",
            "lo_cost",
            "net_work",
            "efficiency",
            "ratio_to_fine",
            "mutual_information",
            "record_entropy",
        ],
    );
    table.meta("operating_point", mode);
    table.push(vec![
        num(nbar),
        num(xi),
        num(epsilon),
        num(quad.total_gross),
        num(quad.lo_cost),
        num(quad.net),
        num(quad.net / nbar),
        num(if fine > 0.0 { quad.total_gross / fine } else { 0.0 }),
        num(info),
        num(coarse::sign_detector_entropy()),
    ]);
    table.write(args.io.format, args.io.out.as_deref())
}

pub fn coarse(args: CoarseArgs) -> Result<()> {
    let cfg = FileConfig::load(args.io.config.as_deref())?;
    let nbar = pick(args.nbar, cfg.coarse.nbar, 20.0);
    let beta = args.beta.or(cfg.coarse.beta);
    let kappa_sq = args.kappa_sq.or(cfg.coarse.kappa_sq);
    let (xi, epsilon, mode) = operating_point(nbar, beta, kappa_sq, homodyne::optimize)?;

    let stats = homodyne::HomodyneStats::new(nbar, xi, epsilon)?;
    let sigma = stats.sigma_dn_sq.sqrt();
    let resolution = pick(args.resolution, cfg.coarse.resolution, sigma / 10.0);

    let grain = CoarseGrainConfig::new(Resolution::Width(resolution), None)?;
    let coarse_net = coarse::coarse_work(nbar, xi, epsilon, &grain)?;
    let fine = homodyne::displacement_work(nbar, xi, epsilon)?;
    let sign_net = coarse::sign_work(nbar, xi, epsilon)?.net;

    let mut table = Table::new(
        "coarse",
        &[
            "nbar",
            "xi",
            "epsilon",
            "resolution",
            "resolution_sigmas",
            "coarse_work",
            "fine_work",
            "ratio_to_fine",
            "sign_work",
        ],
    );
    table.meta("operating_point", mode);
    table.push(vec![
        num(nbar),
        num(xi),
        num(epsilon),
        num(resolution),
        num(resolution / sigma),
        num(coarse_net),
        num(fine - xi),
        num(if fine > xi {
            (coarse_net + xi) / fine
        } else {
            0.0
        }),
        num(sign_net),
    ]);
    table.write(args.io.format, args.io.out.as_deref())
}

pub fn erasure(args: ErasureArgs) -> Result<()> {
    let cfg = FileConfig::load(args.io.config.as_deref())?;
    let nbar = pick(args.nbar, cfg.erasure.nbar, 20.0);
    let theta_d = pick(args.theta_d, cfg.erasure.theta_d, 1.0);
    let nbar_d = pick(args.nbar_d, cfg.erasure.nbar_d, 2.0);
    let kappa_sq = pick(args.kappa_sq, cfg.erasure.kappa_sq, 0.9);
    let beta = pick(args.beta, cfg.erasure.beta, 1.0);

    // the temperature ceilings are undefined at small nbar; report blanks
    let bounds = [
        ErasureScheme::EntireEnergy,
        ErasureScheme::PhotocountSmallFraction,
        ErasureScheme::HomodyneSmallFraction,
        ErasureScheme::HomodyneEntireField,
    ]
    .map(|s| erasure::td_bound(s, nbar).ok());

    let delta = erasure::detector_heating(nbar, kappa_sq, beta)?;
    let ds = erasure::entropy_increase(nbar_d, delta)?;
    let reset = erasure::optimal_reset(nbar_d, 1.0, theta_d)?;
    let breakeven = erasure::reset_breakeven(1.0, theta_d)?;

    let mut table = Table::new(
        "erasure",
        &[
            "nbar",
            "theta_d",
            "nbar_d",
            "kappa_sq",
            "beta",
            "bound_entire",
            "bound_photocount_small",
            "bound_homodyne_small",
            "bound_entire_field",
            "nbar_min",
            "delta_nbar_d",
            "entropy_increase",
            "omega_prime",
            "w_reset",
            "q_dump",
            "breakeven_nbar_d",
        ],
    );
    table.push(vec![
        num(nbar),
        num(theta_d),
        num(nbar_d),
        num(kappa_sq),
        num(beta),
        opt_num(bounds[0]),
        opt_num(bounds[1]),
        opt_num(bounds[2]),
        opt_num(bounds[3]),
        opt_num(erasure::nbar_threshold_form(nbar_d).ok()),
        num(delta),
        num(ds),
        num(reset.omega_prime),
        num(reset.w_r),
        num(reset.q_d),
        num(breakeven),
    ]);
    table.write(args.io.format, args.io.out.as_deref())
}

pub fn nsm(args: NsmArgs) -> Result<()> {
    let cfg = FileConfig::load(Some(&args.config))?;
    let section = cfg
        .nsm
        .context("config file needs an [nsm] section for this command")?;
    let problem = section.build(None)?;
    let report = nsm_cycle(
        &problem.h_i,
        &problem.h_f,
        &problem.p_eq,
        &problem.kraus,
        problem.theta_c,
        problem.theta_m,
    )?;

    let dim = problem.h_i.dim();
    let mut columns = vec![
        "dim",
        "theta_c",
        "theta_m",
        "w_i",
        "w_ii",
        "q_m",
        "eta",
        "eta_carnot",
        "eta_max",
        "s_von_neumann",
        "theta_prime",
        "delta_w_bound",
        "driven",
    ]
    .into_iter()
    .map(String::from)
    .collect::<Vec<_>>();
    let p_cols: Vec<String> = (0..dim).map(|i| format!("p_nsm_{i}")).collect();
    columns.extend(p_cols);

    let mut row = vec![
        json!(dim),
        num(problem.theta_c),
        num(problem.theta_m),
        num(report.w_i),
        num(report.w_ii),
        num(report.q_m),
        opt_num(report.eta),
        num(1.0 - problem.theta_c / problem.theta_m),
        opt_num(report.eta_max),
        num(report.s_von_neumann),
        num(report.theta_prime),
        num(report.delta_w_bound),
        json!(report.is_driven()),
    ];
    row.extend(report.p_nsm.iter().map(|&p| num(p)));

    let col_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new("nsm", &col_refs);
    table.push(row);
    table.write(args.format, args.out.as_deref())
}

/// Closed forms checkable by `mc-verify`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    PhotocountWork,
    HomodyneWork,
    SignWork,
    CoarseWork,
    PhotocountInformation,
    HomodyneInformation,
    SignInformation,
    PhotocountEntropy,
    HomodyneEntropy,
    SignEntropy,
}

impl Quantity {
    fn name(self) -> &'static str {
        match self {
            Quantity::PhotocountWork => "photocount-work",
            Quantity::HomodyneWork => "homodyne-work",
            Quantity::SignWork => "sign-work",
            Quantity::CoarseWork => "coarse-work",
            Quantity::PhotocountInformation => "photocount-information",
            Quantity::HomodyneInformation => "homodyne-information",
            Quantity::SignInformation => "sign-information",
            Quantity::PhotocountEntropy => "photocount-entropy",
            Quantity::HomodyneEntropy => "homodyne-entropy",
            Quantity::SignEntropy => "sign-entropy",
        }
    }

    fn uses_sign_optimum(self) -> bool {
        matches!(
            self,
            Quantity::SignWork | Quantity::SignInformation | Quantity::SignEntropy
        )
    }
}

pub fn mc_verify(args: McVerifyArgs) -> Result<()> {
    let cfg = FileConfig::load(args.config.as_deref())?;
    let nbar = args.nbar.unwrap_or(20.0);
    let samples = pick(args.samples, cfg.mc.samples, 1_000_000);
    let seed = pick(args.seed, cfg.mc.seed, 0);
    let workers = pick(args.workers, cfg.mc.workers, 4);
    let q = args.quantity;

    // photocount quantities run on (nbar, kappa_sq); the rest on (xi, eps)
    let kappa_default = args.kappa_sq.unwrap_or(0.9);
    let optimizer = if q.uses_sign_optimum() {
        coarse::optimize_sign
    } else {
        homodyne::optimize
    };
    let (xi, epsilon, _) = operating_point(nbar, args.beta, args.kappa_sq, optimizer)?;

    let mut params = json!({ "nbar": nbar });
    let mut extra: Option<(f64, bool)> = None;

    let (closed_form, estimate) = match q {
        Quantity::PhotocountWork => {
            params["kappa_sq"] = num(kappa_default);
            (
                photocount::average_work(nbar, kappa_default)?,
                mc::estimate_work_photocount(nbar, kappa_default, samples, seed, workers)?,
            )
        }
        Quantity::PhotocountEntropy => {
            params["kappa_sq"] = num(kappa_default);
            let report = mc::estimate_record_entropy_photocount(
                nbar,
                kappa_default,
                samples,
                seed,
                workers,
            )?;
            extra = Some((report.bias_bound, report.undersampled));
            (
                photocount::detector_entropy_photocount(nbar, kappa_default)?,
                report.estimate,
            )
        }
        Quantity::PhotocountInformation => {
            params["kappa_sq"] = num(kappa_default);
            let scheme = MiScheme::Photocount {
                nbar,
                kappa_sq: kappa_default,
            };
            let report = mc::estimate_mutual_information(&scheme, samples, seed, workers)?;
            extra = Some((report.bias_bound, report.undersampled));
            (
                photocount::mutual_information_photocount(nbar, kappa_default)?,
                report.estimate,
            )
        }
        Quantity::HomodyneWork => {
            params["xi"] = num(xi);
            params["epsilon"] = num(epsilon);
            (
                homodyne::gross_work(nbar, xi, epsilon)?,
                mc::estimate_work_homodyne(nbar, xi, epsilon, samples, seed, workers)?,
            )
        }
        Quantity::HomodyneInformation => {
            params["xi"] = num(xi);
            params["epsilon"] = num(epsilon);
            (
                homodyne::mutual_information(nbar, xi, epsilon)?,
                mc::estimate_mi_homodyne(nbar, xi, epsilon, samples, seed, workers)?,
            )
        }
        Quantity::HomodyneEntropy => {
            params["xi"] = num(xi);
            params["epsilon"] = num(epsilon);
            (
                homodyne::detector_entropy(nbar, xi, epsilon)?,
                mc::estimate_record_entropy_homodyne(nbar, xi, epsilon, samples, seed, workers)?,
            )
        }
        Quantity::SignWork => {
            params["xi"] = num(xi);
            params["epsilon"] = num(epsilon);
            (
                coarse::sign_work(nbar, xi, epsilon)?.net,
                mc::estimate_work_sign(nbar, xi, epsilon, samples, seed, workers)?,
            )
        }
        Quantity::SignInformation => {
            params["xi"] = num(xi);
            params["epsilon"] = num(epsilon);
            let binning = SignBinning::default();
            let scheme = MiScheme::Sign {
                nbar,
                xi,
                epsilon,
                binning,
            };
            let report = mc::estimate_mutual_information(&scheme, samples, seed, workers)?;
            extra = Some((report.bias_bound, report.undersampled));
            (
                mc::sign_binned_mi_reference(nbar, xi, epsilon, &binning)?,
                report.estimate,
            )
        }
        Quantity::SignEntropy => {
            params["xi"] = num(xi);
            params["epsilon"] = num(epsilon);
            let report =
                mc::estimate_record_entropy_sign(nbar, xi, epsilon, samples, seed, workers)?;
            extra = Some((report.bias_bound, report.undersampled));
            (coarse::sign_detector_entropy(), report.estimate)
        }
        Quantity::CoarseWork => {
            let stats = homodyne::HomodyneStats::new(nbar, xi, epsilon)?;
            let resolution = args
                .resolution
                .unwrap_or_else(|| stats.sigma_dn_sq.sqrt() / 10.0);
            params["xi"] = num(xi);
            params["epsilon"] = num(epsilon);
            params["resolution"] = num(resolution);
            let grain = CoarseGrainConfig::new(Resolution::Width(resolution), None)?;
            (
                coarse::coarse_work(nbar, xi, epsilon, &grain)?,
                mc::estimate_work_coarse(nbar, xi, epsilon, resolution, samples, seed, workers)?,
            )
        }
    };

    let mut doc = json!({
        "tool": "lightwork",
        "version": env!("CARGO_PKG_VERSION"),
        "quantity": q.name(),
        "params": params,
        "n_samples": estimate.n_samples,
        "seed": seed,
        "closed_form": closed_form,
        "mc_mean": estimate.mean,
        "mc_std_error": estimate.std_error,
        "z_score": estimate.z_score(closed_form),
    });
    if let Some((bias, under)) = extra {
        doc["bias_bound"] = num(bias);
        doc["undersampled"] = json!(under);
    }
    write_json(&doc, args.out.as_deref())
}
