//! Closed-form fidelity model, optimal period, constraint checks and sweep drivers.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    mean_and_error, monte_carlo_curve, summarize, trace_curves, FreePropagator, PulseErrorModel, Reference,
    StabilizerFrame, TraceMethod, TraceSettings,
};
use crate::hamiltonian::{
    free_hamiltonian, quarter_block, quarter_operators, second_order_closed_form, zeroth_order_closed_form,
    CavityFactor, OperatorSum,
};
use crate::lattice::{Geometry, StabilizerSet};
use crate::sequences::{build_full_symmetric_sequence, build_prep_sequence};
use crate::{dynamics, Error};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ModelParams {
    #[serde(rename = "L")]
    pub l: usize,
    pub delta_gap: f64,
    pub delta: f64,
    pub omega0: f64,
    #[serde(rename = "T")]
    pub period: f64,
    pub sigma_theta: f64,
    pub alpha: f64,
    pub t: f64,
    pub n_fock: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            l: 3,
            delta_gap: 1.0,
            delta: 0.1,
            omega0: 1.0,
            period: 0.125,
            sigma_theta: 0.0,
            alpha: 1.5,
            t: 100.0,
            n_fock: 3,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.l < 2 {
            return bad("L must be at least 2");
        }
        if !(self.delta_gap > 0.0 && self.omega0 > 0.0) {
            return bad("Δ and ω₀ must be positive");
        }
        if !(self.delta >= 0.0) {
            return bad("δ must be non-negative");
        }
        if !(self.period > 0.0) {
            return bad("T must be positive");
        }
        if !(self.sigma_theta >= 0.0) {
            return bad("σ_θ must be non-negative");
        }
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return bad("α must lie in (1, 2)");
        }
        if !(self.t >= 0.0) {
            return bad("t must be non-negative");
        }
        if self.n_fock == 0 {
            return bad("n_F must be at least 1");
        }
        Ok(())
    }

    fn lf(&self) -> f64 {
        self.l as f64
    }
}

/// `c_av = (1/3)(5ω₀L(L−1)δΔ/16)² T⁴`.
pub fn c_av(p: &ModelParams) -> f64 {
    let l = p.lf();
    let x = 5.0 * p.omega0 * l * (l - 1.0) * p.delta * p.delta_gap / 16.0;
    x * x * p.period.powi(4) / 3.0
}

/// Quadratic coefficient obtained from the Frobenius norm of the cavity-averaged
/// second-order term: `180 a² Δ⁴ n(2n − 1)` with `a = δ²ω₀T²/(48Δ²)` and
/// `n = L(L−1)/2` stabilizers per quarter.
pub fn c_av_derived(p: &ModelParams) -> f64 {
    let l = p.lf();
    let a = p.delta * p.delta * p.omega0 * p.period * p.period / (48.0 * p.delta_gap * p.delta_gap);
    let n = l * (l - 1.0) / 2.0;
    180.0 * a * a * p.delta_gap.powi(4) * n * (2.0 * n - 1.0)
}

/// Elementary pulses per period counted for the error model, `36L² − 20L + 14`.
pub fn n_pulses_model(l: usize) -> usize {
    36 * l * l + 14 - 20 * l
}

/// `c_err = (18L² − 10L + 7)σ_θ²/(2T)`.
pub fn c_err(p: &ModelParams) -> f64 {
    let l = p.lf();
    (18.0 * l * l - 10.0 * l + 7.0) * p.sigma_theta * p.sigma_theta / (2.0 * p.period)
}

/// Period minimizing `c_err t + α c_av t²`.
pub fn t_opt(p: &ModelParams) -> Result<f64, Error> {
    if !(p.delta > 0.0) {
        return Err(Error::InvalidParameter("δ = 0 has no finite optimal period".into()));
    }
    if !(p.t > 0.0) {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    let l = p.lf();
    let num = 96.0 * (2.0 * l * (9.0 * l - 5.0) + 7.0) * p.sigma_theta * p.sigma_theta;
    let den = (5.0 * l * (l - 1.0) * p.delta * p.omega0 * p.delta_gap).powi(2) * p.alpha * p.t;
    Ok((num / den).powf(0.2))
}

/// `c_err t + α c_av t²`.
pub fn deviation(p: &ModelParams, t: f64) -> f64 {
    c_err(p) * t + p.alpha * c_av(p) * t * t
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FidelityModel {
    /// `1 − c_err t − α c_av t²`, clamped at 0.
    pub value: f64,
    pub unclamped: f64,
    /// `c_err t ≤ 0.1`.
    pub small_error_regime: bool,
}

pub fn fidelity_model(p: &ModelParams, t: f64) -> FidelityModel {
    let unclamped = 1.0 - deviation(p, t);
    FidelityModel { value: unclamped.max(0.0), unclamped, small_error_regime: c_err(p) * t <= 0.1 }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub ls: Vec<usize>,
    pub t_opt: Vec<f64>,
    pub deviation: Vec<f64>,
    pub exponent: f64,
    pub log_prefactor: f64,
    pub residuals: Vec<f64>,
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Deviation at the optimal period across `ls`, with a log-log power-law fit.
pub fn scaling_report(p: &ModelParams, ls: &[usize]) -> Result<ScalingReport, Error> {
    let ls: Vec<usize> = ls.iter().copied().filter(|&l| l >= 2).collect();
    if ls.len() < 2 {
        return Err(Error::InvalidParameter("scaling fit needs at least two sizes L ≥ 2".into()));
    }
    let mut t_opts = Vec::new();
    let mut devs = Vec::new();
    for &l in &ls {
        let mut q = p.clone();
        q.l = l;
        q.period = t_opt(&q)?;
        t_opts.push(q.period);
        devs.push(deviation(&q, q.t));
    }
    let x: Vec<f64> = ls.iter().map(|&l| (l as f64).ln()).collect();
    let y: Vec<f64> = devs.iter().map(|d| d.ln()).collect();
    let (exponent, log_prefactor) = linear_fit(&x, &y);
    let residuals = x.iter().zip(&y).map(|(a, b)| b - (exponent * a + log_prefactor)).collect();
    Ok(ScalingReport { ls, t_opt: t_opts, deviation: devs, exponent, log_prefactor, residuals })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Marginal,
    Fail,
    NotEvaluated,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub small: f64,
    pub large: Option<f64>,
    pub ratio: Option<f64>,
    pub status: CheckStatus,
}

/// Coherence and temperature scales supplied by the user.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct DeviceScales {
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub thermal_energy: Option<f64>,
}

fn check(name: &str, small: f64, large: Option<f64>, threshold: f64) -> ConstraintCheck {
    let ratio = large.map(|b| small / b);
    let status = match ratio {
        None => CheckStatus::NotEvaluated,
        Some(r) if (r - threshold).abs() <= 1e-9 * threshold => CheckStatus::Marginal,
        Some(r) if r < threshold => CheckStatus::Pass,
        Some(_) => CheckStatus::Fail,
    };
    ConstraintCheck { name: name.into(), small, large, ratio, status }
}

/// Evaluates every `a ≪ b` of the operating constraints as `a/b` against `threshold`.
pub fn validate_constraints(p: &ModelParams, scales: DeviceScales, threshold: f64) -> Vec<ConstraintCheck> {
    vec![
        check("delta << Delta", p.delta, Some(p.delta_gap), threshold),
        check("delta << omega0", p.delta, Some(p.omega0), threshold),
        check("T << T1", p.period, scales.t1, threshold),
        check("T << T2", p.period, scales.t2, threshold),
        check("1/beta << Delta", scales.thermal_energy.unwrap_or(f64::NAN), scales.thermal_energy.map(|_| p.delta_gap), threshold),
    ]
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SweepRecord {
    pub series: String,
    pub variable: String,
    pub value: f64,
    pub fidelity: f64,
    pub std_error: f64,
    pub model: f64,
    pub seed: u64,
    pub samples: usize,
    pub method: String,
}

pub const CSV_HEADER: [&str; 9] =
    ["series", "variable", "value", "fidelity", "std_error", "model", "seed", "samples", "method"];

/// Scientific notation with 12 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_csv<W: Write>(out: W, records: &[SweepRecord]) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.series.clone(),
            r.variable.clone(),
            fmt_float(r.value),
            fmt_float(r.fidelity),
            fmt_float(r.std_error),
            fmt_float(r.model),
            r.seed.to_string(),
            r.samples.to_string(),
            r.method.clone(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

fn method_name(m: TraceMethod) -> &'static str {
    match m {
        TraceMethod::ExactDense => "exact_dense",
        TraceMethod::StochasticTrace => "stochastic_trace",
    }
}

/// Physical system of one experiment.
pub struct System {
    pub geom: Geometry,
    pub stabs: StabilizerSet,
    pub quarters: [OperatorSum; 4],
}

impl System {
    pub fn new(l: usize, delta_gap: f64) -> Result<Self, Error> {
        let geom = Geometry::new(l)?;
        let stabs = StabilizerSet::new(&geom);
        let quarters = quarter_operators(&stabs, geom.n_qubits, delta_gap);
        Ok(Self { geom, stabs, quarters })
    }

    pub fn zeroth_order(&self, p: &ModelParams) -> OperatorSum {
        zeroth_order_closed_form(&self.stabs, self.geom.n_qubits, p.delta_gap, p.delta, p.omega0)
    }

    pub fn second_order(&self, p: &ModelParams) -> Result<OperatorSum, Error> {
        Ok(self.zeroth_order(p).add(&second_order_closed_form(
            &self.quarters,
            p.period,
            p.delta,
            p.omega0,
            p.delta_gap,
        )?))
    }

    pub fn frame(&self, h: &OperatorSum, n_fock: usize) -> Result<StabilizerFrame, Error> {
        StabilizerFrame::new(&self.geom, &self.stabs, h, n_fock)
    }

    /// `H⁽⁰⁾ + H⁽²⁾` on the truncated cavity.
    ///
    /// The `Q_k Q_l` terms of `H⁽²⁾` come from `[x, p] = 2i`, which on `n_F` levels
    /// is `2i [b, b†] = 2i diag(1, …, 1, 1 − n_F)`; that matrix replaces the unit
    /// cavity factor so the reference matches the truncated dynamics.
    pub fn second_order_truncated_frame(&self, p: &ModelParams) -> Result<StabilizerFrame, Error> {
        let nf = p.n_fock;
        let b = crate::dense::annihilation(nf);
        let unit = &b * b.adjoint() - b.adjoint() * &b;
        let h2 = second_order_closed_form(&self.quarters, p.period, p.delta, p.omega0, p.delta_gap)?;
        let terms = self
            .zeroth_order(p)
            .terms()
            .map(|(q, f, c)| (q.clone(), f.matrix(nf) * c))
            .chain(h2.terms().map(|(q, f, c)| {
                let m = if f == CavityFactor::Identity { unit.clone() } else { f.matrix(nf) };
                (q.clone(), m * c)
            }))
            .collect::<Vec<_>>();
        StabilizerFrame::from_terms(&self.geom, &self.stabs, terms, nf)
    }

    pub fn quarter_blocks(&self, p: &ModelParams) -> [OperatorSum; 4] {
        std::array::from_fn(|k| quarter_block(&self.quarters[k], p.delta_gap, p.delta, p.omega0))
    }
}

/// Period counts of `T` at which `t ≤ t_max` is sampled, `count` roughly even steps.
pub fn checkpoints(period: f64, t_max: f64, count: usize) -> Vec<usize> {
    let total = (t_max / period).round() as usize;
    let count = count.clamp(1, total.max(1));
    let mut c: Vec<usize> = (1..=count).map(|k| (k * total).div_ceil(count)).filter(|&m| m > 0).collect();
    c.dedup();
    c
}

fn checkpoints_checked(period: f64, t_max: f64, count: usize) -> Result<Vec<usize>, Error> {
    let c = checkpoints(period, t_max, count);
    if c.is_empty() {
        return Err(Error::InvalidParameter(format!("t_max = {t_max} is shorter than one period {period}")));
    }
    Ok(c)
}

/// `F^(2)(t) = |Tr[exp(i t H⁽⁰⁾) exp(−i t (H⁽⁰⁾ + H⁽²⁾))]| / (2^N n_F)`, exact, on the truncated cavity.
pub fn f2_curve(p: &ModelParams, times: &[f64]) -> Result<Vec<f64>, Error> {
    let sys = System::new(p.l, p.delta_gap)?;
    let a = sys.frame(&sys.zeroth_order(p), p.n_fock)?;
    let b = sys.second_order_truncated_frame(p)?;
    Ok(times.iter().map(|&t| StabilizerFrame::trace_overlap(&a, &b, t).norm()).collect())
}

/// Pulsed dynamics against the zeroth- and second-order average Hamiltonians.
///
/// Series `zeroth_order`, `second_order` (gate fidelities, model column
/// `1 − c_av t²`) and `f2` (exact `F^(2)`).
pub fn fidelity_curve(
    p: &ModelParams,
    t_max: f64,
    n_points: usize,
    method: TraceMethod,
    probes: usize,
    seed: u64,
) -> Result<Vec<SweepRecord>, Error> {
    p.validate()?;
    let sys = System::new(p.l, p.delta_gap)?;
    let n = sys.geom.n_qubits;
    let schedule = build_full_symmetric_sequence(&sys.geom, p.period)?;
    let mut free = FreePropagator::new(n, p.n_fock, p.delta_gap, p.delta, p.omega0);
    let mut refs = vec![
        Reference::Stabilizer(sys.frame(&sys.zeroth_order(p), p.n_fock)?),
        Reference::Stabilizer(sys.second_order_truncated_frame(p)?),
    ];
    let cps = checkpoints_checked(p.period, t_max, n_points)?;
    let settings = TraceSettings { method, probes, seed };
    let mut err = PulseErrorModel::perfect().stream(0);
    let curves = trace_curves(&schedule, &mut free, &mut refs, &cps, settings, &mut err)?;
    let times: Vec<f64> = cps.iter().map(|&m| m as f64 * p.period).collect();
    let f2 = f2_curve(p, &times)?;
    let cav = c_av(p);
    let mut out = Vec::new();
    for (k, name) in ["zeroth_order", "second_order"].iter().enumerate() {
        for (c, &t) in times.iter().enumerate() {
            let e = summarize(&curves[k][c], method);
            out.push(SweepRecord {
                series: (*name).into(),
                variable: "t".into(),
                value: t,
                fidelity: e.value,
                std_error: e.std_error,
                model: 1.0 - cav * t * t,
                seed,
                samples: e.samples,
                method: method_name(method).into(),
            });
        }
    }
    for (t, f) in times.iter().zip(f2) {
        out.push(SweepRecord {
            series: "f2".into(),
            variable: "t".into(),
            value: *t,
            fidelity: f,
            std_error: 0.0,
            model: 1.0 - cav * t * t,
            seed,
            samples: 1,
            method: "exact_diagonal".into(),
        });
    }
    Ok(out)
}

/// Monte Carlo pulse-error runs; one record per time checkpoint, with the model `1 − c_err t − α c_av t²`.
pub fn error_sweep_time(
    p: &ModelParams,
    t_max: f64,
    n_points: usize,
    samples: usize,
    method: TraceMethod,
    probes: usize,
    seed: u64,
) -> Result<Vec<SweepRecord>, Error> {
    p.validate()?;
    let sys = System::new(p.l, p.delta_gap)?;
    let schedule = build_full_symmetric_sequence(&sys.geom, p.period)?;
    let mut free = FreePropagator::new(sys.geom.n_qubits, p.n_fock, p.delta_gap, p.delta, p.omega0);
    let mut reference = Reference::Stabilizer(sys.frame(&sys.zeroth_order(p), p.n_fock)?);
    let cps = checkpoints_checked(p.period, t_max, n_points)?;
    let err = PulseErrorModel { sigma_theta: p.sigma_theta, seed };
    let settings = TraceSettings { method, probes, seed: seed ^ 0x5eed };
    let est = monte_carlo_curve(&schedule, &mut free, &mut reference, &cps, err, samples, settings)?;
    Ok(cps
        .iter()
        .zip(est)
        .map(|(&m, e)| {
            let t = m as f64 * p.period;
            SweepRecord {
                series: "gate_fidelity".into(),
                variable: "t".into(),
                value: t,
                fidelity: e.value,
                std_error: e.std_error,
                model: fidelity_model(p, t).value,
                seed,
                samples,
                method: method_name(method).into(),
            }
        })
        .collect())
}

/// Monte Carlo gate fidelity at time `t` for each `σ_θ`.
#[allow(clippy::too_many_arguments)]
pub fn error_sweep_sigma(
    p: &ModelParams,
    sigmas: &[f64],
    t: f64,
    samples: usize,
    method: TraceMethod,
    probes: usize,
    seed: u64,
) -> Result<Vec<SweepRecord>, Error> {
    p.validate()?;
    let sys = System::new(p.l, p.delta_gap)?;
    let schedule = build_full_symmetric_sequence(&sys.geom, p.period)?;
    let mut free = FreePropagator::new(sys.geom.n_qubits, p.n_fock, p.delta_gap, p.delta, p.omega0);
    let mut reference = Reference::Stabilizer(sys.frame(&sys.zeroth_order(p), p.n_fock)?);
    let m = dynamics::stroboscopic_count(t, p.period)?;
    let mut out = Vec::new();
    for (i, &s) in sigmas.iter().enumerate() {
        let q = ModelParams { sigma_theta: s, ..p.clone() };
        let err = PulseErrorModel { sigma_theta: s, seed: seed.wrapping_add(i as u64) };
        let settings = TraceSettings { method, probes, seed: seed ^ 0x5eed };
        let e = monte_carlo_curve(&schedule, &mut free, &mut reference, &[m], err, samples, settings)?[0];
        out.push(SweepRecord {
            series: "gate_fidelity".into(),
            variable: "sigma_theta".into(),
            value: s,
            fidelity: e.value,
            std_error: e.std_error,
            model: fidelity_model(&q, t).value,
            seed,
            samples,
            method: method_name(method).into(),
        });
    }
    Ok(out)
}

/// Codeword preparation fidelity `⟨F_C⟩` for each `σ_θ`, model `1 − k σ_θ²` with `k` fitted.
pub fn prep_fidelity_sweep(
    l: usize,
    delta_gap: f64,
    sigmas: &[f64],
    samples: usize,
    seed: u64,
) -> Result<(Vec<SweepRecord>, f64), Error> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let sys = System::new(l, delta_gap)?;
    let n = sys.geom.n_qubits;
    let steps = build_prep_sequence(&sys.geom, &sys.stabs, delta_gap)?;
    let target = dynamics::reference_codeword(n, &sys.stabs);
    let mut rows = Vec::new();
    for (i, &s) in sigmas.iter().enumerate() {
        let model = PulseErrorModel { sigma_theta: s, seed: seed.wrapping_add(i as u64) };
        let mut fs = Vec::with_capacity(samples);
        for k in 0..samples {
            let psi = dynamics::prepare_codeword(n, &steps, delta_gap, &mut model.stream(k as u64));
            fs.push(dynamics::codeword_fidelity(&psi, &target)?);
        }
        let (mu, se) = mean_and_error(&fs);
        rows.push((s, mu, se));
    }
    let k = fit_quadratic_loss(&rows.iter().map(|r| (r.0, 1.0 - r.1)).collect::<Vec<_>>());
    let records = rows
        .into_iter()
        .map(|(s, mu, se)| SweepRecord {
            series: "codeword_fidelity".into(),
            variable: "sigma_theta".into(),
            value: s,
            fidelity: mu,
            std_error: se,
            model: 1.0 - k * s * s,
            seed,
            samples,
            method: "state_vector".into(),
        })
        .collect();
    Ok((records, k))
}

/// Least-squares `k` in `loss ≈ k σ²`, weighting each point by `1/σ⁴`.
pub fn fit_quadratic_loss(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<_> = points.iter().filter(|p| p.0 > 0.0).collect();
    pts.iter().map(|(s, d)| d / (s * s)).sum::<f64>() / pts.len().max(1) as f64
}

/// Exact ground-state shifts of a single star coupled to the cavity, per stabilizer sector.
///
/// Returns `(sector eigenvalue w, shift)` where the shift is the lowest level of
/// `−(Δ + δ x) w + ω₀ n` (truncated) minus `−Δ w`.
pub fn single_star_shifts(delta_gap: f64, delta: f64, omega0: f64, n_fock: usize) -> Result<Vec<(f64, f64)>, Error> {
    use crate::hamiltonian::CavityFactor;
    if n_fock == 0 {
        return Err(Error::InvalidParameter("n_fock must be positive".into()));
    }
    let x = CavityFactor::Position.matrix(n_fock);
    let num = CavityFactor::Number.matrix(n_fock);
    let mut out = Vec::new();
    for w in [1.0, -1.0] {
        let h = crate::dense::CMatrix::identity(n_fock, n_fock) * Complex64::new(-delta_gap * w, 0.0)
            + &x * Complex64::new(-delta * w, 0.0)
            + &num * Complex64::new(omega0, 0.0);
        let ground = crate::dense::eigenvalues_hermitian(&h)[0];
        out.push((w, ground + delta_gap * w));
    }
    Ok(out)
}

/// Free Hamiltonian for the given parameters.
pub fn free_model(p: &ModelParams, n: usize) -> Result<OperatorSum, Error> {
    free_hamiltonian(n, p.delta_gap, p.delta, p.omega0)
}
