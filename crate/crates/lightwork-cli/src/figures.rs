//! Datasets behind the standard plots, as plain tables.

use anyhow::Result;
use clap::ValueEnum;
use serde_json::json;

use lightwork::coarse;
use lightwork::erasure;
use lightwork::homodyne::{self, CostMode, WorkBudget};
use lightwork::photocount;
use lightwork::reversible::{extract, ModeEnsemble};
use lightwork::thermo;

use crate::output::{num, text, Table};
use crate::FigureArgs;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    /// Reversible efficiency against mode count and hot occupation.
    CarnotEfficiency,
    /// Conditional photon distributions after a counted tap.
    PhotocountDist,
    /// Extraction efficiency of the measurement schemes against nbar.
    EfficiencyCompare,
    /// Sign-record efficiency approaching its 1/(2 pi) ceiling.
    SignEfficiency,
    /// Net work against the information and erasure costs at the optimum.
    CostCurves,
    /// State-space path of the optimal three-step detector reset.
    ResetPath,
}

pub fn run(args: FigureArgs) -> Result<()> {
    let theta_d = args.theta_d.unwrap_or(1.0);
    let nbar_d = args.nbar_d.unwrap_or(2.0);
    let table = match args.id {
        FigureId::CarnotEfficiency => carnot_efficiency()?,
        FigureId::PhotocountDist => photocount_dist()?,
        FigureId::EfficiencyCompare => efficiency_compare()?,
        FigureId::SignEfficiency => sign_efficiency()?,
        FigureId::CostCurves => cost_curves(theta_d)?,
        FigureId::ResetPath => reset_path(nbar_d, theta_d)?,
    };
    table.write(args.format, args.out.as_deref())
}

fn log_grid(from: f64, to: f64, points: usize) -> Vec<f64> {
    let (lf, lt) = (from.ln(), to.ln());
    (0..points)
        .map(|i| (lf + (lt - lf) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn carnot_efficiency() -> Result<Table> {
    let mut table = Table::new(
        "figure-carnot-efficiency",
        &[
            "modes",
            "nbar",
            "nbar_cold",
            "nbar_final",
            "work",
            "efficiency",
            "eta_carnot",
        ],
    );
    let nbar_cold = 1.0;
    let theta_cold = thermo::temperature(nbar_cold, 1.0)?;
    for &modes in &[2u32, 3, 5, 10, 100] {
        for &nbar in &[5.0, 20.0, 100.0] {
            let out = extract(&ModeEnsemble::new(modes, nbar, nbar_cold)?)?;
            let eta_carnot = 1.0 - theta_cold / thermo::temperature(nbar, 1.0)?;
            table.push(vec![
                json!(modes),
                num(nbar),
                num(nbar_cold),
                num(out.nbar_final),
                num(out.work),
                num(out.efficiency),
                num(eta_carnot),
            ]);
        }
    }
    Ok(table)
}

fn photocount_dist() -> Result<Table> {
    let (nbar, kappa_sq) = (20.0, 0.9);
    let mut table = Table::new("figure-photocount-dist", &["m", "n", "probability"]);
    table.meta("nbar", nbar);
    table.meta("kappa_sq", kappa_sq);
    for &m in &[0u32, 1, 5, 10] {
        let cond = photocount::conditional_distribution(nbar, kappa_sq, m, None)?;
        let mut cumulative = 0.0;
        for (n, &p) in cond.probs().iter().enumerate() {
            table.push(vec![json!(m), json!(n), num(p)]);
            cumulative += p;
            if 1.0 - cumulative < 1e-6 {
                break;
            }
        }
    }
    Ok(table)
}

fn efficiency_compare() -> Result<Table> {
    let mut table = Table::new(
        "figure-efficiency-compare",
        &[
            "nbar",
            "eta_photocount",
            "eta_homodyne",
            "eta_sign",
            "eta_reversible_pair",
        ],
    );
    // the photocount tap uses the same 1/sqrt(nbar) fraction the homodyne
    // optimum settles on, so the curves are comparable
    table.meta("photocount_kappa_sq", "1 - 1/sqrt(nbar)");
    table.meta("reversible", "two modes, nbar_cold = 1");
    for nbar in log_grid(2.0, 1000.0, 13) {
        let kappa_sq = 1.0 - nbar.sqrt().recip();
        let w_pc = photocount::average_work(nbar, kappa_sq)?;
        let hom = homodyne::optimize(nbar)?;
        let sgn = coarse::optimize_sign(nbar)?;
        let rev = extract(&ModeEnsemble::new(2, nbar, 1.0)?)?;
        table.push(vec![
            num(nbar),
            num(w_pc / nbar),
            num(hom.w_max / nbar),
            num(sgn.w_max / nbar),
            num(rev.efficiency),
        ]);
    }
    Ok(table)
}

fn sign_efficiency() -> Result<Table> {
    let ceiling = 1.0 / std::f64::consts::TAU;
    let mut table = Table::new(
        "figure-sign-efficiency",
        &[
            "nbar",
            "xi",
            "epsilon",
            "net_work",
            "efficiency",
            "efficiency_over_ceiling",
            "ceiling",
        ],
    );
    table.meta("threshold_nbar", std::f64::consts::TAU);
    for nbar in log_grid(10.0, 1e6, 25) {
        let opt = coarse::optimize_sign(nbar)?;
        let eta = opt.w_max / nbar;
        table.push(vec![
            num(nbar),
            num(opt.xi),
            num(opt.epsilon),
            num(opt.w_max),
            num(eta),
            num(eta / ceiling),
            num(ceiling),
        ]);
    }
    Ok(table)
}

fn cost_curves(theta_d: f64) -> Result<Table> {
    let mut table = Table::new(
        "figure-cost-curves",
        &[
            "nbar",
            "net_work",
            "feedforward_bound",
            "erasure_heat",
            "net_with_feedforward",
            "net_with_erasure",
        ],
    );
    table.meta("theta_d", theta_d);
    for nbar in log_grid(2.0, 1e4, 25) {
        let opt = homodyne::optimize(nbar)?;
        let budget = WorkBudget::new(nbar, opt.xi, opt.epsilon, theta_d)?;
        table.push(vec![
            num(nbar),
            num(budget.net_work(CostMode::LocalOscillatorOnly)),
            num(budget.feedforward_bound),
            num(budget.erasure_heat),
            num(budget.net_work(CostMode::WithFeedforward)),
            num(budget.net_work(CostMode::WithErasure)),
        ]);
    }
    Ok(table)
}

fn reset_path(nbar_d: f64, theta_d: f64) -> Result<Table> {
    let reset = erasure::optimal_reset(nbar_d, 1.0, theta_d)?;
    let mut table = Table::new(
        "figure-reset-path",
        &["phase", "omega", "nbar", "work_recovered", "heat_dumped"],
    );
    table.meta("nbar_d", nbar_d);
    table.meta("theta_d", theta_d);
    table.meta("omega_prime", reset.omega_prime);
    table.meta("w_reset", reset.w_r);
    table.meta("q_dump", reset.q_d);

    // adiabatic stroke: occupation frozen, work 4 nbar_d per unit frequency
    let steps = 9;
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let omega = 1.0 + t * (reset.omega_prime - 1.0);
        table.push(vec![
            text("adiabatic"),
            num(omega),
            num(nbar_d),
            num(4.0 * nbar_d * (1.0 - omega)),
            num(0.0),
        ]);
    }

    // isothermal stroke at theta_d: sweep the occupation down four decades
    let s_start = thermo::entropy(nbar_d)?;
    let w1 = 4.0 * nbar_d * (1.0 - reset.omega_prime);
    for nbar in log_grid(nbar_d, nbar_d * 1e-4, 21) {
        let omega = theta_d * (1.0 + 1.0 / nbar).ln();
        let invested = 4.0 * theta_d * ((1.0 + nbar_d).ln() - (1.0 + nbar).ln());
        let dumped = 4.0 * theta_d * (s_start - thermo::entropy(nbar)?);
        table.push(vec![
            text("isothermal"),
            num(omega),
            num(nbar),
            num(w1 - invested),
            num(dumped),
        ]);
    }

    // return stroke: the empty mode comes back to omega = 1 for free
    let omega_max = theta_d * (1.0 + 1e4 / nbar_d).ln();
    let w_final = w1 - 4.0 * theta_d * ((1.0 + nbar_d).ln() - (1.0 + nbar_d * 1e-4).ln());
    let q_final = 4.0 * theta_d * (s_start - thermo::entropy(nbar_d * 1e-4)?);
    for omega in [omega_max, 1.0] {
        table.push(vec![
            text("return"),
            num(omega),
            num(0.0),
            num(w_final),
            num(q_final),
        ]);
    }
    Ok(table)
}
