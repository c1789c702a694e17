use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use anyhow::{bail, Context, Result};
use scert_core::miqp::{export_lp, BbOptions};
use scert_core::scenario::{a_posteriori_from_summary, dominance_tally};
use scert_core::sizing::{run_incremental_with_schedule, SetSource, XiSolver};
use scert_core::support::{greedy_support, reduction_oracle, EqualityTol, SupportResult};
use scert_core::ucp::{
    synth_demand, to_additive, DemandData, SynthStream, UcInstance, UcSolver, UcSupportOracle,
};
use scert_core::{
    empirical_risk, eps_based_size, eps_n_beta, incremental_schedule, one_shot_size, reduce,
    Decision, EpsParams, Error, IncrementalOutcome, ReducedSolver, ScenarioSet, ScenarioSource,
    SizingSpec,
};

use crate::{
    CertifyArgs, GenArgs, RiskArgs, RunArgs, RunSolver, SizeArgs, SizeMode, SupportArgs,
    SupportMode, UcArgs,
};

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn read_set(path: &Path) -> Result<ScenarioSet> {
    ScenarioSet::read_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn read_demand(path: &Path) -> Result<DemandData> {
    DemandData::read_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn one_based(indices: &[usize]) -> String {
    indices
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn certify(a: &CertifyArgs) -> Result<()> {
    let set = read_set(&a.scenarios)?;
    let summary = reduce(&set);
    let cert = a_posteriori_from_summary(set.n(), &summary, a.beta)?;
    let dominant = one_based(&summary.distinct_indices());
    println!("scenarios N        {}", set.n());
    println!("constraints q      {}", set.q());
    println!("complexity         {}", summary.distinct_count);
    println!("beta               {}", a.beta);
    println!("epsilon            {:.6}", cert.epsilon);
    println!("dominant scenarios {dominant}");
    if let Some(path) = &a.csv {
        write_csv(
            path,
            &[
                "n",
                "q",
                "complexity",
                "beta",
                "epsilon",
                "dominant_indices",
            ],
            &[vec![
                set.n().to_string(),
                set.q().to_string(),
                summary.distinct_count.to_string(),
                a.beta.to_string(),
                cert.epsilon.to_string(),
                dominant,
            ]],
        )?;
    }
    Ok(())
}

pub fn size(a: &SizeArgs) -> Result<()> {
    let specs = a
        .eps
        .iter()
        .map(|&eps| SizingSpec::new(a.q, eps, a.beta))
        .collect::<Result<Vec<_>, _>>()?;
    let (header, rows): (Vec<&str>, Vec<Vec<String>>) = match a.mode {
        SizeMode::Oneshot => {
            println!("{:>10} {:>10}", "eps", "N");
            let rows = specs
                .iter()
                .map(|s| {
                    let n = one_shot_size(s);
                    println!("{:>10} {:>10}", s.eps_bar(), n);
                    vec![
                        a.q.to_string(),
                        s.eps_bar().to_string(),
                        a.beta.to_string(),
                        n.to_string(),
                    ]
                })
                .collect();
            (vec!["q", "eps", "beta", "n"], rows)
        }
        SizeMode::Epsbased => {
            println!(
                "{:>10} {:>10} {:>10} {:>8}",
                "eps", "oneshot", "epsbased", "delta"
            );
            let rows = specs
                .iter()
                .map(|s| {
                    let (n1, n2) = (one_shot_size(s), eps_based_size(s));
                    let delta = n2 as i64 - n1 as i64;
                    println!("{:>10} {:>10} {:>10} {:>8}", s.eps_bar(), n1, n2, delta);
                    vec![
                        a.q.to_string(),
                        s.eps_bar().to_string(),
                        a.beta.to_string(),
                        n1.to_string(),
                        n2.to_string(),
                        delta.to_string(),
                    ]
                })
                .collect();
            (
                vec!["q", "eps", "beta", "n_oneshot", "n_epsbased", "delta_n"],
                rows,
            )
        }
        SizeMode::IncrementalSchedule => {
            let [spec] = specs.as_slice() else {
                bail!("incremental-schedule takes a single --eps value");
            };
            let s = incremental_schedule(spec);
            let rows: Vec<Vec<String>> = (0..=a.q)
                .map(|j| {
                    vec![
                        j.to_string(),
                        s.m_bar[j].to_string(),
                        s.beta_j[j].to_string(),
                        s.n_j[j].to_string(),
                    ]
                })
                .collect();
            let mut out = csv::Writer::from_writer(std::io::stdout());
            out.write_record(["j", "m_bar", "beta_j", "n_j"])?;
            for row in &rows {
                out.write_record(row)?;
            }
            out.flush()?;
            (vec!["j", "m_bar", "beta_j", "n_j"], rows)
        }
    };
    if let Some(path) = &a.csv {
        write_csv(path, &header, &rows)?;
    }
    Ok(())
}

fn instance(uc: &UcArgs, hint: Option<usize>) -> Result<UcInstance> {
    let horizon = uc.horizon.or(hint);
    let inst = match &uc.units {
        Some(path) => UcInstance::read_toml(path, horizon)
            .with_context(|| format!("reading {}", path.display()))?,
        None => UcInstance::new(UcInstance::four_unit().units, horizon.unwrap_or(24))?,
    };
    if let Some(h) = hint {
        if inst.horizon != h {
            bail!(
                "horizon {} does not match the {h} columns of the demand file",
                inst.horizon
            );
        }
    }
    Ok(inst)
}

fn uc_solver(uc: &UcArgs, inst: UcInstance) -> Result<UcSolver> {
    if uc.gap_tol.is_nan() || uc.gap_tol < 0.0 {
        bail!("--gap-tol must be >= 0");
    }
    if !uc.backoff.is_finite() || uc.backoff < 0.0 {
        bail!("--backoff must be finite and >= 0");
    }
    let opts = BbOptions {
        gap_tol: uc.gap_tol,
        node_limit: uc.node_limit,
        ..BbOptions::default()
    };
    Ok(UcSolver::new(inst)
        .with_options(opts)
        .with_backoff(uc.backoff))
}

pub fn run_incremental(a: &RunArgs) -> Result<()> {
    if a.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let demand = a.demand.as_deref().map(read_demand).transpose()?;
    if demand.is_some() && a.runs > 1 {
        bail!("--runs > 1 needs synthetic demand; drop --demand");
    }
    if a.solver == RunSolver::Export && a.runs > 1 {
        bail!("export mode writes a single LP file; use --runs 1");
    }
    let inst = instance(&a.uc, demand.as_ref().map(DemandData::horizon))?;
    let horizon = inst.horizon;
    let spec = SizingSpec::new(horizon, a.eps, a.beta)?;
    let sched = incremental_schedule(&spec);
    let params = a.synth.params();
    params.validate()?;
    let mut uc = match a.solver {
        RunSolver::Bb => Some(uc_solver(&a.uc, inst.clone())?),
        _ => None,
    };

    let mut outcomes: Vec<(u64, IncrementalOutcome)> = Vec::with_capacity(a.runs);
    for r in 0..a.runs {
        let seed = a.seed.unwrap_or(0).wrapping_add(r as u64);
        let additive;
        let mut file_source;
        let mut synth_source;
        let source: &mut dyn ScenarioSource = match &demand {
            Some(d) => {
                additive = to_additive(d)?;
                file_source = SetSource::new(&additive);
                &mut file_source
            }
            None => {
                synth_source = SynthStream::new(seed, horizon, params)?;
                &mut synth_source
            }
        };
        let solver: &mut dyn ReducedSolver = match &mut uc {
            Some(s) => s,
            None => &mut XiSolver,
        };
        let out = run_incremental_with_schedule(&sched, source, solver)?;
        outcomes.push((seed, out));
    }

    let objective = |o: &IncrementalOutcome| match a.solver {
        RunSolver::Export => String::new(),
        _ => o.objective.to_string(),
    };
    if let [(_, out)] = outcomes.as_slice() {
        println!("j_stop     {}", out.j_stop);
        println!("n_used     {} (N_q = {})", out.n_used, sched.n_j[horizon]);
        match a.solver {
            RunSolver::Bb => println!("objective  {:.6}", out.objective),
            RunSolver::Reduction => println!("objective  {:.6} (reduction only)", out.objective),
            RunSolver::Export => {}
        }
        println!("{:>4} {:>8} {:>6}", "j", "N_j", "sigma");
        for rec in &out.trace {
            println!("{:>4} {:>8} {:>6}", rec.j, rec.n_j, rec.sigma);
        }
    } else {
        println!(
            "{:>5} {:>20} {:>6} {:>7}",
            "run", "seed", "j_stop", "n_used"
        );
        for (r, (seed, out)) in outcomes.iter().enumerate() {
            println!(
                "{:>5} {:>20} {:>6} {:>7}",
                r + 1,
                seed,
                out.j_stop,
                out.n_used
            );
        }
        let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
        for (_, out) in &outcomes {
            *hist.entry(out.n_used).or_default() += 1;
        }
        println!("n_used histogram (N_q = {}):", sched.n_j[horizon]);
        for (n, count) in hist {
            println!("{n:>8} {count:>5}");
        }
    }

    if a.solver == RunSolver::Export {
        let out = &outcomes[0].1;
        let model = UcSolver::new(inst)
            .with_backoff(a.uc.backoff)
            .model(&out.summary.xi_star)?;
        std::fs::write(&a.lp_out, export_lp(&model))
            .with_context(|| format!("cannot write {}", a.lp_out.display()))?;
        println!(
            "wrote {} ({} binaries); no solve attempted",
            a.lp_out.display(),
            model.n_bin
        );
    }

    if let Some(path) = &a.csv {
        let rows: Vec<Vec<String>> = outcomes
            .iter()
            .enumerate()
            .map(|(r, (seed, out))| {
                vec![
                    (r + 1).to_string(),
                    seed.to_string(),
                    out.j_stop.to_string(),
                    out.n_used.to_string(),
                    objective(out),
                    out.summary.distinct_count.to_string(),
                ]
            })
            .collect();
        write_csv(
            path,
            &["run", "seed", "j_stop", "n_used", "objective", "complexity"],
            &rows,
        )?;
    }
    if let Some(path) = &a.trace_csv {
        let mut rows = Vec::new();
        for (r, (_, out)) in outcomes.iter().enumerate() {
            for rec in &out.trace {
                rows.push(vec![
                    (r + 1).to_string(),
                    rec.j.to_string(),
                    rec.n_j.to_string(),
                    rec.sigma.to_string(),
                ]);
            }
        }
        write_csv(path, &["run", "j", "n_j", "sigma"], &rows)?;
    }
    Ok(())
}

fn negated(s: &ScenarioSet) -> Result<ScenarioSet> {
    Ok(ScenarioSet::from_flat(
        s.q(),
        s.as_flat().iter().map(|v| -v).collect(),
    )?)
}

pub fn risk(a: &RiskArgs) -> Result<()> {
    let flip = |s: ScenarioSet| if a.demand_form { negated(&s) } else { Ok(s) };
    let dec = flip(read_set(&a.decision)?)?;
    if dec.n() != 1 {
        bail!(
            "{}: expected a single decision row, found {}",
            a.decision.display(),
            dec.n()
        );
    }
    let decision = Decision::new(dec.row(0).to_vec())?;
    let validation = flip(read_set(&a.validation)?)?;
    let v_hat = empirical_risk(&decision, &validation)?;
    println!("validation rows     {}", validation.n());
    println!("risk of decision    {v_hat:.6}");
    let mut row = vec![validation.n().to_string(), v_hat.to_string()];
    let mut header = vec!["validation_rows", "risk_decision"];
    if let Some(path) = &a.training {
        let training = flip(read_set(path)?)?;
        let summary = reduce(&training);
        let xi = Decision::from_summary(&summary);
        let v_xi = empirical_risk(&xi, &validation)?;
        println!("risk of xi*         {v_xi:.6}");
        header.extend([
            "risk_xi_star",
            "decision_violations",
            "xi_star_violations",
            "exceptions",
        ]);
        row.push(v_xi.to_string());
        match dominance_tally(&decision, &summary, &validation) {
            Ok(t) => {
                println!("rows violated by decision {}", t.decision_violations);
                println!("rows violated by xi*      {}", t.reduction_violations);
                println!("dominance exceptions      {}", t.exceptions);
                row.extend(
                    [t.decision_violations, t.reduction_violations, t.exceptions]
                        .map(|v| v.to_string()),
                );
            }
            Err(Error::Contract(msg)) => {
                println!("dominance check skipped: {msg}");
                row.extend([String::new(), String::new(), String::new()]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(path) = &a.csv {
        write_csv(path, &header, &[row])?;
    }
    Ok(())
}

pub fn support(a: &SupportArgs) -> Result<()> {
    let demand = read_demand(&a.demand)?;
    if demand.n() == 0 {
        bail!("{}: no demand rows", a.demand.display());
    }
    let set = to_additive(&demand)?;
    let sigma = reduce(&set).distinct_count;
    let tol = EqualityTol {
        continuous: a.tol_cont,
        objective_rel: a.tol_obj,
    };
    let res: SupportResult = match a.mode {
        SupportMode::Uc => {
            let inst = instance(&a.uc, Some(demand.horizon()))?;
            let mut solver = uc_solver(&a.uc, inst)?;
            let mut oracle = UcSupportOracle::new(&mut solver, &demand);
            greedy_support(demand.n(), &mut oracle, tol).map_err(|e| {
                let hint = match e.source {
                    Error::Solver(_) => "; raise --node-limit or export the model with `run-incremental --solver export`",
                    _ => "",
                };
                anyhow::anyhow!("{e}{hint}")
            })?
        }
        SupportMode::Reduction => greedy_support(demand.n(), &mut reduction_oracle(&set), tol)?,
    };
    let eps = |k: usize| EpsParams::new(demand.n(), a.beta, k).map(eps_n_beta);
    let (eps_s, eps_sigma) = (eps(res.s_star)?, eps(sigma)?);
    let gap = sigma as i64 - res.s_star as i64;
    println!("scenarios N        {}", demand.n());
    println!("greedy s*          {}", res.s_star);
    println!("complexity         {sigma}");
    println!("gap                {gap}");
    println!("solve count        {}", res.solve_count);
    println!("support list       {}", one_based(&res.kept_indices));
    println!("epsilon at s*      {eps_s:.6}");
    println!("epsilon at sigma   {eps_sigma:.6}");
    if let Some(path) = &a.csv {
        write_csv(
            path,
            &[
                "n",
                "s_star",
                "complexity",
                "gap",
                "solve_count",
                "beta",
                "eps_s_star",
                "eps_complexity",
                "support_list",
            ],
            &[vec![
                demand.n().to_string(),
                res.s_star.to_string(),
                sigma.to_string(),
                gap.to_string(),
                res.solve_count.to_string(),
                a.beta.to_string(),
                eps_s.to_string(),
                eps_sigma.to_string(),
                one_based(&res.kept_indices),
            ]],
        )?;
    }
    Ok(())
}

pub fn gen_demand(a: &GenArgs) -> Result<()> {
    let d = synth_demand(a.seed, a.days, a.horizon, &a.synth.params())?;
    let file =
        File::create(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    d.write_csv(file)
        .with_context(|| format!("cannot write {}", a.out.display()))?;
    println!(
        "wrote {} days x {} slots to {}",
        d.n(),
        d.horizon(),
        a.out.display()
    );
    if d.n() > 0 {
        println!("{:>5} {:>8} {:>8} {:>8}", "slot", "min", "mean", "max");
        for (t, s) in d.column_stats().iter().enumerate() {
            println!("{:>5} {:>8.3} {:>8.3} {:>8.3}", t + 1, s.min, s.mean, s.max);
        }
    }
    Ok(())
}
