//! The five pipelines. Each returns its artifacts in memory; writing is done
//! separately, in order, on one thread.

use num_complex::Complex;
use rayon::prelude::*;
use serde_json::{json, Value};
use susy_ep::ep::{jordan_check, rigidity_sweep, scaling_exponent, ControlAxis};
use susy_ep::linalg::{eigenvalues, spectral_order, ComplexDense, LinalgError, SortKey};
use susy_ep::perturbation::{
    classify_order, puiseux_fit, splitting_sweep, Channel, PerturbationError, PerturbationPlan,
};
use susy_ep::scalar::{to_c64, Extended, Real};
use susy_ep::synthesis::{
    analytic_spectrum, build_chain, build_chain_in, chain_couplings, fock_two_site, hermitian_chain, pt_residual,
    spin_operators, susy_step_up,
};
use susy_ep::{ChainSpec, Precision};

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::table::{Cell, Table, FITS_HEADER, RIGIDITY_HEADER, SPECTRUM_HEADER, SPLITTING_HEADER};

type C64 = Complex<f64>;

/// Artifacts of one run, keyed by file stem.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub tables: Vec<(&'static str, Table)>,
    pub documents: Vec<(&'static str, Value)>,
    /// Non-fatal findings, such as a fit that could not be made.
    pub notes: Vec<String>,
}

/// Run a resolved, validated configuration.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    match cfg.command {
        Command::Synthesize => synthesize(cfg),
        Command::SpectrumSweep => spectrum_sweep(cfg),
        Command::RigiditySweep => rigidity(cfg),
        Command::PerturbationSweep => perturbation(cfg),
        Command::JordanCheck => jordan(cfg),
    }
}

pub fn matrix_json(m: &ComplexDense<f64>) -> Value {
    let n = m.dim();
    let part = |f: fn(C64) -> f64| -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| f(m[(i, j)])).collect()).collect()
    };
    json!({ "re": part(|z| z.re), "im": part(|z| z.im) })
}

fn complex_list(values: &[C64]) -> Value {
    Value::Array(values.iter().map(|z| json!([z.re, z.im])).collect())
}

fn synthesize(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let spec = cfg.chain;
    spec.validate()?;
    let n = spec.n;
    let j = spec.coupling;
    let tol = cfg.tolerance.unwrap_or(susy_ep::ep::JORDAN_DEFAULT_TOL);

    let mut steps = vec![ComplexDense::<f64>::zeros(1)];
    for _ in 1..n {
        let next = susy_step_up(steps.last().expect("seeded"), j)?;
        steps.push(next);
    }
    let h_n = steps.last().expect("seeded").clone();
    let w0 = Complex::new(spec.omega0, 0.0);
    let hermitian = build_chain(&ChainSpec { gamma: 0.0, delta: 0.0, ..spec })?;
    let chain = build_chain(&spec)?;
    let spin = spin_operators(n)?.hamiltonian(&spec);
    let fock = if spec.delta == 0.0 {
        Some(fock_two_site(n, j, spec.gamma)?.shift(w0))
    } else {
        None
    };

    let scale = 1.0 + chain.max_abs();
    let triangle_spin = chain.max_abs_diff(&spin) / scale;
    let triangle_fock = fock.as_ref().map(|f| chain.max_abs_diff(f) / scale);
    let step_up = h_n.max_abs_diff(&hermitian_chain(n, j)) / (1.0 + h_n.max_abs());
    let herm_shifted = h_n.shift(Complex::new(spec.omega0 - (n - 1) as f64 * j, 0.0));
    let herm_structure = herm_shifted.max_abs_diff(&hermitian) / scale;

    let want = analytic_spectrum(&spec);
    let want_herm = analytic_spectrum(&ChainSpec { gamma: 0.0, delta: 0.0, ..spec });
    let herm_values = sorted(eigenvalues(&hermitian)?, hermitian.norm());
    let herm_error = multiset_distance(&herm_values, &want_herm) / scale;
    let ext = build_chain_in::<Extended>(&spec, Extended::from(spec.gamma), Extended::from(spec.delta));
    let chain_values: Vec<C64> = eigenvalues(&ext)?.into_iter().map(to_c64).collect();
    let chain_values = sorted(chain_values, chain.norm());
    let chain_error = multiset_distance(&chain_values, &want) / scale;
    let pt = pt_residual(&chain);

    let gated = [
        triangle_spin,
        triangle_fock.unwrap_or(0.0),
        step_up,
        herm_structure,
        herm_error,
    ];
    let passed = gated.iter().all(|&r| r <= tol) && pt <= tol;

    let couplings = chain_couplings(&spec);
    let mut table = Table::new(&["bond", "coupling"]);
    for (k, c) in couplings.iter().enumerate() {
        table.push(vec![Cell::Int(k + 1), Cell::Float(*c)]);
    }

    let doc = json!({
        "chain": spec,
        "couplings": couplings,
        "step_up": steps[1..].iter().map(matrix_json).collect::<Vec<_>>(),
        "hermitian": matrix_json(&hermitian),
        "non_hermitian": matrix_json(&chain),
        "spin_form": matrix_json(&spin),
        "fock_form": fock.as_ref().map(matrix_json),
        "analytic_spectrum": complex_list(&want),
        "numerical_spectrum": complex_list(&chain_values),
        "verification": {
            "tolerance": tol,
            "representation_spin": triangle_spin,
            "representation_fock": triangle_fock,
            "step_up_vs_closed_form": step_up,
            "hermitian_structure": herm_structure,
            "hermitian_spectrum": herm_error,
            "spectrum_vs_closed_form": chain_error,
            "pt_residual": pt,
            "passed": passed,
        },
    });
    let mut notes = Vec::new();
    if fock.is_none() {
        notes.push("fock form omitted: it carries no detuning".to_string());
    }
    Ok(RunOutput {
        tables: vec![("couplings", table)],
        documents: vec![("synthesis", doc)],
        notes,
    })
}

fn sorted(values: Vec<C64>, norm: f64) -> Vec<C64> {
    let order = spectral_order(&values, 1e-8 * norm.max(1.0), SortKey::RealFirst);
    order.into_iter().map(|k| values[k]).collect()
}

fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("equal lengths");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

fn spectrum_at<T: Real>(spec: &ChainSpec, gamma: f64) -> Result<Vec<C64>, LinalgError> {
    let h = build_chain_in::<T>(spec, T::from_f64(gamma), T::from_f64(spec.delta));
    let values: Vec<C64> = eigenvalues(&h)?.into_iter().map(to_c64).collect();
    Ok(sorted(values, h.norm().to_f64()))
}

fn spectrum_sweep(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let spec = cfg.chain;
    spec.validate()?;
    let grid = cfg.sweep.expect("resolved").points();
    let solved: Vec<_> = grid
        .par_iter()
        .map(|&g| match cfg.precision {
            Precision::Double => spectrum_at::<f64>(&spec, g),
            Precision::Extended => spectrum_at::<Extended>(&spec, g),
        })
        .collect();
    let mut table = Table::new(&SPECTRUM_HEADER);
    for (r, &g) in solved.into_iter().zip(&grid) {
        let values = r.map_err(|e| CliError::Numerical {
            reason: format!("eigensolver failed at gamma {g}: {e}"),
        })?;
        for (level, z) in values.iter().enumerate() {
            table.push(vec![Cell::Float(g), Cell::Int(level), Cell::Float(z.re), Cell::Float(z.im)]);
        }
    }
    Ok(RunOutput {
        tables: vec![("spectrum", table)],
        ..Default::default()
    })
}

fn fit_row(quantity: String, f: &susy_ep::fit::PowerLawFit) -> Vec<Cell> {
    vec![
        Cell::Text(quantity),
        Cell::Float(f.slope),
        Cell::Float(f.intercept),
        Cell::Float(f.r_squared),
        Cell::Float(f.window.0),
        Cell::Float(f.window.1),
    ]
}

fn rigidity(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let spec = cfg.chain;
    let axis = cfg.axis.unwrap_or(ControlAxis::Gamma);
    let grid = cfg.sweep.expect("resolved").points();
    let records = rigidity_sweep(&spec, axis, &grid, cfg.precision)?;
    let mut table = Table::new(&RIGIDITY_HEADER);
    for r in &records {
        table.push(vec![Cell::Float(r.control), Cell::Int(r.level_index), Cell::Float(r.rigidity)]);
    }
    let mut fits = Table::new(&FITS_HEADER);
    let mut notes = Vec::new();
    for level in 0..spec.n {
        match scaling_exponent(&records, level) {
            Ok(f) => fits.push(fit_row(format!("abs_r_level_{level}"), &f)),
            Err(e) => notes.push(format!("abs_r_level_{level}: no fit ({e})")),
        }
    }
    Ok(RunOutput {
        tables: vec![("rigidity", table), ("fits", fits)],
        documents: Vec::new(),
        notes,
    })
}

fn perturbation(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let spec = cfg.chain;
    let p = cfg.perturbation.expect("resolved");
    let pair = p.pair.expect("resolved");
    let plan = PerturbationPlan {
        kind: p.kind,
        bond_index: p.bond_index,
        epsilon_grid: cfg.sweep.expect("resolved").points(),
    };
    let records = splitting_sweep(&spec, &plan, pair, cfg.precision)?;
    let mut table = Table::new(&SPLITTING_HEADER);
    for r in &records {
        table.push(vec![
            Cell::Float(r.epsilon),
            Cell::Int(r.branch_pair.0),
            Cell::Int(r.branch_pair.1),
            Cell::Float(r.split_real),
            Cell::Float(r.split_imag),
        ]);
    }
    let mut fits = Table::new(&FITS_HEADER);
    let mut notes = Vec::new();
    for (name, channel) in [("split_re", Channel::Real), ("split_im", Channel::Imag)] {
        match puiseux_fit(&records, channel) {
            Ok(f) => {
                notes.push(format!("{name}: order {:?}", classify_order(f.slope, spec.n)));
                fits.push(fit_row(name.to_string(), &f));
            }
            Err(e @ PerturbationError::ZeroChannel { .. }) => notes.push(format!("{name}: {e}")),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(RunOutput {
        tables: vec![("splitting", table), ("fits", fits)],
        documents: Vec::new(),
        notes,
    })
}

fn jordan(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let spec = cfg.chain;
    let h = build_chain(&spec)?;
    let tol = cfg.tolerance.unwrap_or(susy_ep::ep::JORDAN_DEFAULT_TOL);
    let report = jordan_check(&h, spec.omega0, tol)?;
    Ok(RunOutput {
        tables: Vec::new(),
        documents: vec![("jordan", serde_json::to_value(&report).expect("serializable"))],
        notes: Vec::new(),
    })
}
