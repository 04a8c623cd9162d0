//! Scenario configuration: the JSON schema and the parameter relations each
//! scenario checks before it runs.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use workbench::geometry::{Cube, GridFunction};
use workbench::operators::{
    check_first_moments, check_mean_zero, Interpolation, KernelSpec, SphereSymbol, MOMENT_TOL,
};
use workbench::weights::Weight;

use crate::HarnessError;

/// Tolerance on exponent relations such as `1/q = 1/p - α/n`.
pub const RELATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    Cor4_2,
    Cor4_7,
    Cor4_8,
    Cor4_12,
    Cor4_15,
    Cor4_17,
    Cor4_19,
    Cor4_21,
    KernelAdmit,
    Embeddings,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 10] = [
        ScenarioId::Cor4_2,
        ScenarioId::Cor4_7,
        ScenarioId::Cor4_8,
        ScenarioId::Cor4_12,
        ScenarioId::Cor4_15,
        ScenarioId::Cor4_17,
        ScenarioId::Cor4_19,
        ScenarioId::Cor4_21,
        ScenarioId::KernelAdmit,
        ScenarioId::Embeddings,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioId::Cor4_2 => "cor4_2",
            ScenarioId::Cor4_7 => "cor4_7",
            ScenarioId::Cor4_8 => "cor4_8",
            ScenarioId::Cor4_12 => "cor4_12",
            ScenarioId::Cor4_15 => "cor4_15",
            ScenarioId::Cor4_17 => "cor4_17",
            ScenarioId::Cor4_19 => "cor4_19",
            ScenarioId::Cor4_21 => "cor4_21",
            ScenarioId::KernelAdmit => "kernel_admit",
            ScenarioId::Embeddings => "embeddings",
        }
    }

    pub fn parse(s: &str) -> Option<ScenarioId> {
        ScenarioId::ALL.into_iter().find(|id| id.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OmegaSelector {
    /// `Ω(±1) = ±1` in dimension one.
    Sign,
    OneDim {
        plus: f64,
        minus: f64,
    },
    /// Values at the angles `2πk/M`.
    Table {
        values: Vec<f64>,
        #[serde(default)]
        interpolation: InterpolationSelector,
    },
    /// `cos(kθ)` tabulated at `samples` angles, linear interpolation.
    Cosine {
        #[serde(default = "one_u32")]
        frequency: u32,
        #[serde(default = "default_samples")]
        samples: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationSelector {
    #[default]
    Linear,
    Nearest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default = "default_omega")]
    pub omega: OmegaSelector,
    #[serde(default)]
    pub alpha: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            omega: OmegaSelector::Sign,
            alpha: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolSelector {
    /// `log|x|`, with `|x|` floored at half a cell width.
    LogAbs,
    /// `|x|^β`.
    Power {
        beta: f64,
    },
    /// `χ_{x₁ >= 0}`.
    Step,
    /// Piecewise constant on `pieces` equal slabs per axis, values uniform in `[-1, 1]`.
    Random {
        seed: u64,
        pieces: usize,
    },
    Constant {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSelector {
    Unit,
    /// `|x|^exponent`.
    Power {
        exponent: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    #[serde(default = "unit")]
    pub omega: WeightSelector,
    #[serde(default = "unit")]
    pub lambda: WeightSelector,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            omega: WeightSelector::Unit,
            lambda: WeightSelector::Unit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    #[serde(default = "one_usize")]
    pub dim: usize,
    /// Cells per axis of the grid of `b` over `[-1, 1]^n`.
    pub resolution: usize,
    /// Depth of the dyadic family over `[-1, 1]^n`.
    pub depth: usize,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default = "default_symbol")]
    pub symbol: SymbolSelector,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    /// Morrey index.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Lipschitz order.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub weights: WeightConfig,
    #[serde(default = "default_eps_xi")]
    pub eps_xi: f64,
    #[serde(default = "default_h_max")]
    pub h_max: f64,
    /// Seed for sampled inputs; every report row carries it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn one_u32() -> u32 {
    1
}

fn one_usize() -> usize {
    1
}

fn default_samples() -> usize {
    64
}

fn default_omega() -> OmegaSelector {
    OmegaSelector::Sign
}

fn default_symbol() -> SymbolSelector {
    SymbolSelector::LogAbs
}

fn unit() -> WeightSelector {
    WeightSelector::Unit
}

fn default_eps_xi() -> f64 {
    0.5
}

fn default_h_max() -> f64 {
    64.0
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ScenarioConfig {
    /// A config with defaults for everything but the identifiers.
    pub fn new(scenario: ScenarioId, dim: usize, resolution: usize, depth: usize) -> Self {
        ScenarioConfig {
            scenario,
            dim,
            resolution,
            depth,
            kernel: KernelConfig::default(),
            symbol: default_symbol(),
            p: None,
            q: None,
            lambda: None,
            beta: None,
            weights: WeightConfig::default(),
            eps_xi: default_eps_xi(),
            h_max: default_h_max(),
            seed: 0,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| config_err(format!("invalid config JSON: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        ScenarioConfig::from_json(&text)
    }

    /// `[-1, 1]^n`.
    pub fn root(&self) -> Cube {
        Cube::new(self.dim, [0.0; 2], 2.0).expect("unit cube is valid")
    }

    pub fn symbol_of_kernel(&self) -> Result<SphereSymbol, HarnessError> {
        let s = match &self.kernel.omega {
            OmegaSelector::Sign => SphereSymbol::sign(),
            OmegaSelector::OneDim { plus, minus } => {
                SphereSymbol::one_dim(*plus, *minus).map_err(|e| config_err(e.to_string()))?
            }
            OmegaSelector::Table {
                values,
                interpolation,
            } => {
                let interp = match interpolation {
                    InterpolationSelector::Linear => Interpolation::Linear,
                    InterpolationSelector::Nearest => Interpolation::Nearest,
                };
                SphereSymbol::two_dim(values.clone(), interp)
                    .map_err(|e| config_err(e.to_string()))?
            }
            OmegaSelector::Cosine { frequency, samples } => {
                let k = *frequency as f64;
                SphereSymbol::from_angle_fn(*samples, Interpolation::Linear, |t| (k * t).cos())
                    .map_err(|e| config_err(e.to_string()))?
            }
        };
        if s.dim() != self.dim {
            return Err(config_err(format!(
                "kernel symbol lives in dimension {}, config dim is {}",
                s.dim(),
                self.dim
            )));
        }
        if s.max_abs() == 0.0 {
            return Err(config_err("kernel symbol must be nonzero"));
        }
        Ok(s)
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec, HarnessError> {
        KernelSpec::new(self.symbol_of_kernel()?, self.kernel.alpha)
            .map_err(|e| config_err(e.to_string()))
    }

    pub fn weight(&self, sel: &WeightSelector) -> Result<Weight, HarnessError> {
        match sel {
            WeightSelector::Unit => Ok(Weight::unit(self.dim)),
            WeightSelector::Power { exponent } => {
                Weight::power(self.dim, *exponent, [0.0; 2]).map_err(|e| config_err(e.to_string()))
            }
        }
    }

    /// The symbol `b` sampled on `[-1, 1]^n` at the configured resolution.
    pub fn build_b(&self) -> Result<GridFunction, HarnessError> {
        let root = self.root();
        let n = self.resolution;
        let w = root.side() / n as f64;
        let dim = self.dim;
        let radius = move |x: &[f64; 2]| {
            if dim == 1 {
                x[0].abs()
            } else {
                x[0].hypot(x[1])
            }
        };
        let g = match &self.symbol {
            SymbolSelector::LogAbs => {
                GridFunction::from_fn(root, n, |x| radius(x).max(w / 2.0).ln())
            }
            SymbolSelector::Power { beta } => {
                GridFunction::from_fn(root, n, |x| radius(x).powf(*beta))
            }
            SymbolSelector::Step => {
                GridFunction::from_fn(root, n, |x| if x[0] >= 0.0 { 1.0 } else { 0.0 })
            }
            SymbolSelector::Random { seed, pieces } => {
                let m = *pieces;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let values: Vec<f64> = (0..m.pow(dim as u32))
                    .map(|_| rng.gen_range(-1.0..=1.0))
                    .collect();
                let slab = |t: f64| (((t + 1.0) / 2.0 * m as f64) as usize).min(m - 1);
                GridFunction::from_fn(root, n, |x| {
                    let j = if dim == 2 { slab(x[1]) } else { 0 };
                    values[j * m + slab(x[0])]
                })
            }
            SymbolSelector::Constant { value } => GridFunction::constant(root, n, *value),
        };
        g.map_err(|e| config_err(format!("symbol: {e}")))
    }

    fn need(&self, name: &str, v: Option<f64>) -> Result<f64, HarnessError> {
        v.ok_or_else(|| config_err(format!("{} needs parameter {name}", self.scenario.as_str())))
    }

    /// The checks every pipeline needs: dimension, grid, depth and search limits.
    pub fn validate_grid(&self) -> Result<(), HarnessError> {
        if self.dim != 1 && self.dim != 2 {
            return Err(config_err(format!("dim must be 1 or 2, got {}", self.dim)));
        }
        if !self.resolution.is_power_of_two() || self.resolution < 2 {
            return Err(config_err(format!(
                "resolution must be a power of two, got {}",
                self.resolution
            )));
        }
        if self.depth == 0 || self.resolution < 1 << (self.depth + 1) {
            return Err(config_err(format!(
                "depth {} needs depth >= 1 and resolution >= 2^(depth+1) so every dyadic cube holds two cells",
                self.depth
            )));
        }
        if !(self.eps_xi > 0.0) || !(self.h_max > 2.0) {
            return Err(config_err("eps_xi must be positive and h_max above 2"));
        }
        if let SymbolSelector::Random { pieces, .. } = self.symbol {
            if pieces == 0 {
                return Err(config_err("random symbol needs at least one piece"));
            }
        }
        self.build_b().map(|_| ())
    }

    /// Checks the parameter relations of the scenario and returns the
    /// resolved exponents.
    pub fn validate(&self) -> Result<Resolved, HarnessError> {
        self.validate_grid()?;
        let id = self.scenario.as_str();
        let n = self.dim as f64;
        let alpha = self.kernel.alpha;
        let mut r = Resolved {
            p: f64::NAN,
            q: f64::NAN,
            lambda: f64::NAN,
            beta: f64::NAN,
            nu: f64::NAN,
        };
        let p_gt_one = |p: f64| {
            if p > 1.0 && p.is_finite() {
                Ok(p)
            } else {
                Err(config_err(format!("{id}: p must lie in (1, inf), got {p}")))
            }
        };
        // `q` from `1/q = 1/p - s/n`, or a check of the given value.
        let relate_q =
            |p: f64, s: f64, given: Option<f64>, label: &str| -> Result<f64, HarnessError> {
                let inv = 1.0 / p - s / n;
                if !(inv > 0.0) {
                    return Err(config_err(format!(
                        "{id}: 1/q = 1/p - {label}/n = {inv} must be positive"
                    )));
                }
                match given {
                    Some(q) if (1.0 / q - inv).abs() > RELATION_TOL => Err(config_err(format!(
                        "{id}: 1/q = {} violates 1/q = 1/p - {label}/n = {inv}",
                        1.0 / q
                    ))),
                    _ => Ok(1.0 / inv),
                }
            };
        let kernel_needs_mean_zero = |s: &SphereSymbol| {
            if check_mean_zero(s).abs() > MOMENT_TOL * s.max_abs().max(1.0) {
                Err(config_err(format!(
                    "{id}: kernel symbol must have mean zero on the sphere"
                )))
            } else {
                Ok(())
            }
        };
        let kernel_needs_moments = |s: &SphereSymbol| {
            let m = check_first_moments(s);
            if m[0].abs().max(m[1].abs()) > MOMENT_TOL * s.max_abs().max(1.0) {
                Err(config_err(format!(
                    "{id}: kernel symbol must have vanishing first moments"
                )))
            } else {
                Ok(())
            }
        };
        let kernel_continuous = |s: &SphereSymbol| match s {
            SphereSymbol::TwoDim { .. } if s.lipschitz_modulus().is_none() => Err(config_err(
                format!("{id}: kernel symbol must be continuous (use linear interpolation)"),
            )),
            _ => Ok(()),
        };
        let a1_weight = |sel: &WeightSelector| match sel {
            WeightSelector::Unit => Ok(()),
            WeightSelector::Power { exponent } if *exponent > -n && *exponent <= 0.0 => Ok(()),
            WeightSelector::Power { exponent } => Err(config_err(format!(
                "{id}: |x|^{exponent} is not an A_1 weight in dimension {n}"
            ))),
        };
        let ap_weight = |sel: &WeightSelector, p: f64| match sel {
            WeightSelector::Unit => Ok(()),
            WeightSelector::Power { exponent } if *exponent > -n && *exponent < n * (p - 1.0) => {
                Ok(())
            }
            WeightSelector::Power { exponent } => Err(config_err(format!(
                "{id}: |x|^{exponent} is not an A_p weight for p = {p}"
            ))),
        };
        let morrey_lambda = |p: f64, lambda: f64| {
            if lambda >= -n / p - RELATION_TOL && lambda < 0.0 {
                Ok(lambda)
            } else {
                Err(config_err(format!(
                    "{id}: Morrey index lambda = {lambda} outside [-n/p, 0)"
                )))
            }
        };
        let alpha_exactly = |want: f64| {
            if (alpha - want).abs() <= RELATION_TOL {
                Ok(())
            } else {
                Err(config_err(format!(
                    "{id}: kernel alpha must be {want}, got {alpha}"
                )))
            }
        };

        match self.scenario {
            ScenarioId::Cor4_2 => {
                let s = self.symbol_of_kernel()?;
                if !(0.0..n).contains(&alpha) {
                    return Err(config_err(format!(
                        "{id}: alpha must lie in [0, n), got {alpha}"
                    )));
                }
                let p = p_gt_one(self.need("p", self.p)?)?;
                if alpha > 0.0 && p >= n / alpha {
                    return Err(config_err(format!(
                        "{id}: p must be below n/alpha = {}",
                        n / alpha
                    )));
                }
                if alpha == 0.0 {
                    kernel_needs_mean_zero(&s)?;
                }
                r.p = p;
                r.q = relate_q(p, alpha, self.q, "alpha")?;
            }
            ScenarioId::Cor4_7 => {
                let s = self.symbol_of_kernel()?;
                alpha_exactly(0.0)?;
                kernel_needs_mean_zero(&s)?;
                kernel_continuous(&s)?;
                r.p = p_gt_one(self.p.unwrap_or(2.0))?;
                a1_weight(&self.weights.omega)?;
            }
            ScenarioId::Cor4_8 => {
                let s = self.symbol_of_kernel()?;
                alpha_exactly(0.0)?;
                kernel_needs_mean_zero(&s)?;
                kernel_continuous(&s)?;
                let p = p_gt_one(self.need("p", self.p)?)?;
                ap_weight(&self.weights.omega, p)?;
                ap_weight(&self.weights.lambda, p)?;
                r.p = p;
                r.q = p;
            }
            ScenarioId::Cor4_12 => {
                if !(alpha > 0.0 && alpha < 2.0 * n) {
                    return Err(config_err(format!(
                        "{id}: bilinear alpha must lie in (0, 2n), got {alpha}"
                    )));
                }
                let p = p_gt_one(self.need("p", self.p)?)?;
                let inv = 2.0 / p - alpha / n;
                if !(inv > 0.0) {
                    return Err(config_err(format!(
                        "{id}: 1/q = 2/p - alpha/n = {inv} must be positive"
                    )));
                }
                if let Some(q) = self.q {
                    if (1.0 / q - inv).abs() > RELATION_TOL {
                        return Err(config_err(format!(
                            "{id}: 1/q = {} violates 1/q = 2/p - alpha/n = {inv}",
                            1.0 / q
                        )));
                    }
                }
                r.p = p;
                r.q = 1.0 / inv;
            }
            ScenarioId::Cor4_15 => {
                let s = self.symbol_of_kernel()?;
                alpha_exactly(-1.0)?;
                kernel_needs_mean_zero(&s)?;
                kernel_needs_moments(&s)?;
                r.p = p_gt_one(self.need("p", self.p)?)?;
                r.q = r.p;
                r.beta = 1.0;
            }
            ScenarioId::Cor4_17 => {
                let s = self.symbol_of_kernel()?;
                let beta = self.need("beta", self.beta)?;
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(config_err(format!(
                        "{id}: beta must lie in (0, 1), got {beta}"
                    )));
                }
                if !(0.0..n).contains(&alpha) || !(alpha + beta < n) {
                    return Err(config_err(format!(
                        "{id}: needs 0 <= alpha < n and 0 < alpha + beta < n"
                    )));
                }
                kernel_continuous(&s)?;
                if alpha == 0.0 {
                    kernel_needs_mean_zero(&s)?;
                }
                let p = p_gt_one(self.need("p", self.p)?)?;
                let q = relate_q(p, alpha + beta, self.q, "(alpha+beta)")?;
                if !(q > 1.0) {
                    return Err(config_err(format!("{id}: q must exceed 1, got {q}")));
                }
                a1_weight(&self.weights.omega)?;
                r.p = p;
                r.q = q;
                r.beta = beta;
            }
            ScenarioId::Cor4_19 => {
                let s = self.symbol_of_kernel()?;
                let beta = self.need("beta", self.beta)?;
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(config_err(format!(
                        "{id}: beta must lie in (0, 1), got {beta}"
                    )));
                }
                if !(0.0..n).contains(&alpha) || !(alpha + beta < n) {
                    return Err(config_err(format!(
                        "{id}: needs 0 <= alpha < n and alpha + beta < n"
                    )));
                }
                if alpha == 0.0 {
                    kernel_needs_mean_zero(&s)?;
                }
                let p = p_gt_one(self.need("p", self.p)?)?;
                let q = relate_q(p, alpha + beta, self.q, "(alpha+beta)")?;
                if !(q > 1.0) {
                    return Err(config_err(format!("{id}: q must exceed 1, got {q}")));
                }
                let lambda = morrey_lambda(p, self.need("lambda", self.lambda)?)?;
                let nu = alpha + beta + lambda;
                if !(nu < 0.0) {
                    return Err(config_err(format!(
                        "{id}: alpha + beta + lambda = {nu} must be negative"
                    )));
                }
                r.p = p;
                r.q = q;
                r.beta = beta;
                r.lambda = lambda;
                r.nu = nu;
            }
            ScenarioId::Cor4_21 => {
                let s = self.symbol_of_kernel()?;
                let beta = self.need("beta", self.beta)?;
                if !(beta > 0.0 && beta <= 1.0) {
                    return Err(config_err(format!(
                        "{id}: beta must lie in (0, 1], got {beta}"
                    )));
                }
                alpha_exactly(-beta)?;
                kernel_needs_mean_zero(&s)?;
                if beta == 1.0 {
                    kernel_needs_moments(&s)?;
                }
                let p = p_gt_one(self.need("p", self.p)?)?;
                r.p = p;
                r.q = p;
                r.beta = beta;
                r.lambda = morrey_lambda(p, self.need("lambda", self.lambda)?)?;
                r.nu = r.lambda;
            }
            ScenarioId::KernelAdmit => {
                self.symbol_of_kernel()?;
            }
            ScenarioId::Embeddings => {
                let p = p_gt_one(self.need("p", self.p)?)?;
                let q = self.q.unwrap_or(f64::INFINITY);
                if !(q > 0.0) {
                    return Err(config_err(format!(
                        "{id}: Lorentz index q must be positive, got {q}"
                    )));
                }
                r.p = p;
                r.q = q;
                r.lambda = morrey_lambda(p, self.need("lambda", self.lambda)?)?;
            }
        }
        Ok(r)
    }
}

/// Exponents after the scenario's relations are applied; `NaN` where unused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub beta: f64,
    /// Target Morrey index.
    pub nu: f64,
}

/// A step function on `[0, 1]^dim` at resolution `m`, with 1 to 11 pieces per
/// axis and values in `[-4, 4]`, a quarter of them zero.
pub fn random_steps(rng: &mut ChaCha8Rng, dim: usize, m: usize) -> GridFunction {
    let pieces = rng.gen_range(1..12usize);
    let values: Vec<f64> = (0..pieces.pow(dim as u32))
        .map(|_| {
            if rng.gen_bool(0.25) {
                0.0
            } else {
                rng.gen_range(-4.0..4.0)
            }
        })
        .collect();
    let dom = Cube::new(dim, [0.5; 2], 1.0).expect("unit cube");
    let slab = |t: f64| ((t * pieces as f64) as usize).min(pieces - 1);
    GridFunction::from_fn(dom, m, |x| {
        let j = if dim == 2 { slab(x[1]) } else { 0 };
        values[j * pieces + slab(x[0])]
    })
    .expect("finite samples")
}
