//! Grand-canonical sums over fixed-M sectors.
//!
//! Xi = 1 + sum_M e^{beta mu M} sum_j e^{-beta E_j^M}, truncated when a
//! geometric bound on the neglected tail drops below tolerance. Observables
//! are weighted eigen-sums over the same terms (not numerical derivatives);
//! the gauged basis keeps all eigenvector arithmetic real and realizes
//! J/W = gamma structurally.
//!
//! Near the divergence curve the sums need tens of thousands of sectors, of
//! which only the thermally occupied bottom of each spectrum matters. Every
//! sector up to `dense_limit` is computed exactly; beyond that, sectors are
//! computed exactly on a fixed geometric grid and the per-sector reductions
//! (which vary slowly and smoothly in ln M once the mean-field slope is
//! removed) are cubically interpolated between grid nodes. The sum itself
//! still runs over every integer M in ascending order, so truncation,
//! ordering and determinism are unchanged; the interpolation accuracy is
//! pinned by tests against fully exact summation.

use std::sync::RwLock;

use rayon::prelude::*;

use crate::boundary::classify;
use crate::eigen::visit_window;
use crate::error::{Error, Result};
use crate::meanfield::{ground_energy_per_particle, ModeAngles};
use crate::model::{build_tridiagonal, ModelParams};

/// Per-eigenstate thermal cutoff: states more than WINDOW_LOG / beta above
/// the sector ground state carry weight below ~1e-20 and are dropped.
const WINDOW_LOG: f64 = 46.0;

/// Bath couplings of the open system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    beta: f64,
    mu: f64,
}

impl BathParams {
    pub fn new(beta: f64, mu: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and > 0, got {beta}"
            )));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu must be finite, got {mu}")));
        }
        Ok(Self { beta, mu })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Truncated log grand partition function.
#[derive(Debug, Clone, Copy)]
pub struct XiResult {
    /// log Xi >= 0 (the empty sector contributes 1).
    pub log_xi: f64,
    /// Largest sector actually summed.
    pub m_ax: usize,
    /// Bound on the neglected absolute contribution to Xi; <= the requested
    /// tolerance on success.
    pub tail_estimate: f64,
}

/// Thermal means at one (beta, mu) point.
#[derive(Debug, Clone, Copy)]
pub struct ThermoObservables {
    /// Mean total particle number <m1 + m2>.
    pub m_mean: f64,
    /// Mean energy <H>.
    pub energy: f64,
    /// Mean interaction <(m1^2 + m2^2)/M>.
    pub interaction: f64,
    /// Mean antisymmetric current J = -i<a1'a2 - a2'a1>.
    pub current: f64,
    /// Mean symmetric hopping W = <a1'a2 + a2'a1>.
    pub hop: f64,
    /// Mean imbalance <m1 - m2>; zero by inversion symmetry.
    pub imbalance: f64,
}

/// Occupation data of the dominant single-particle mode.
#[derive(Debug, Clone, Copy)]
pub struct ModeOccupation {
    pub theta_max: f64,
    pub phi_max: f64,
    /// Occupation of the dominant mode: M/2 + sqrt(W^2 + J^2)/2.
    pub n_max: f64,
    /// Dominant fraction n = n_max / m_mean, in [1/2, 1].
    pub n: f64,
    /// Perpendicular fraction 1 - n; its vanishing signals condensation.
    pub n_perp: f64,
    /// J/W, defined when W != 0; equals gamma identically here.
    pub t: Option<f64>,
    /// Set when W = J = 0 leaves the maximizing phi undetermined (phi_max is
    /// then reported as 0).
    pub degenerate_direction: bool,
}

/// Knobs of the sector sum.
#[derive(Debug, Clone, Copy)]
pub struct SumOptions {
    /// Absolute bound on the neglected tail of Xi (per-observable numerator
    /// tails are held to tol relative to their running magnitude).
    pub tol: f64,
    /// Hard cap on the number of sectors.
    pub sector_cap: usize,
    /// Every sector up to this size is computed exactly.
    pub dense_limit: usize,
    /// Geometric spacing of exact sectors beyond `dense_limit`.
    pub grid_ratio: f64,
}

impl Default for SumOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            sector_cap: 20_000,
            dense_limit: 512,
            grid_ratio: 1.06,
        }
    }
}

impl SumOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Canonical (fixed-M) thermal reductions of one sector, beta baked in.
#[derive(Debug, Clone, Copy)]
struct SectorMoments {
    /// ln z_M + beta e0 M, with z_M = sum_j e^{-beta E_j} and e0 the
    /// mean-field energy per particle: slowly varying in ln M.
    zeta: f64,
    /// <E>_M / M
    e_ratio: f64,
    /// <(m1^2 + m2^2)/M>_M / M
    i_ratio: f64,
    /// <S>_M / M, S the gauged-basis bond sum giving W = 2S/lambda_c.
    s_ratio: f64,
    /// <m1 - m2>_M / M
    d_ratio: f64,
}

struct TableData {
    /// Exact moments for M = 1..=dense_limit (index 0 unused).
    dense: Vec<Option<SectorMoments>>,
    /// Exact moments on the sparse grid, aligned with `SectorTable::grid`.
    sparse: Vec<Option<SectorMoments>>,
}

/// Reusable per-(params, beta) sector store: sweeps that vary only mu share
/// all of their spectral work through one table.
pub struct SectorTable {
    params: ModelParams,
    beta: f64,
    e0: f64,
    opts: SumOptions,
    /// Fixed sparse schedule; independent of fill order so results never
    /// depend on which caller extended the table first.
    grid: Vec<usize>,
    data: RwLock<TableData>,
}

impl SectorTable {
    pub fn new(params: ModelParams, beta: f64, opts: SumOptions) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and > 0, got {beta}"
            )));
        }
        if !(opts.tol.is_finite() && opts.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol must be finite and > 0, got {}",
                opts.tol
            )));
        }
        if opts.grid_ratio <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "grid_ratio must exceed 1, got {}",
                opts.grid_ratio
            )));
        }
        let dense_limit = opts.dense_limit.max(16);
        let mut grid = Vec::new();
        if dense_limit < opts.sector_cap {
            let mut m = dense_limit;
            let mut past_cap = 0;
            while past_cap < 4 {
                grid.push(m);
                if m >= opts.sector_cap {
                    past_cap += 1;
                }
                m = (m + 1).max((m as f64 * opts.grid_ratio).floor() as usize);
            }
        }
        Ok(Self {
            params,
            beta,
            e0: ground_energy_per_particle(params),
            opts: SumOptions {
                dense_limit,
                ..opts
            },
            grid,
            data: RwLock::new(TableData {
                dense: vec![None; dense_limit + 1],
                sparse: vec![None; 0],
            }),
        })
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Exact canonical reductions of sector `m`.
    fn compute_sector(&self, m: usize) -> Result<SectorMoments> {
        let t = build_tridiagonal(self.params, m)?;
        let window = WINDOW_LOG / self.beta;
        let mf = m as f64;
        let mut e0_sector = 0.0;
        let mut w_sum = 0.0;
        let mut e_acc = 0.0;
        let mut i_acc = 0.0;
        let mut s_acc = 0.0;
        let mut d_acc = 0.0;
        let summary = visit_window(&t, window, |j, ev, v| {
            if j == 0 {
                e0_sector = ev;
            }
            let w = (-self.beta * (ev - e0_sector)).exp();
            w_sum += w;
            e_acc += w * ev;
            let mut i_v = 0.0;
            let mut d_v = 0.0;
            for (k, &a) in v.iter().enumerate() {
                let p = a * a;
                let k1 = k as f64;
                let k2 = (m - k) as f64;
                i_v += p * (k1 * k1 + k2 * k2);
                d_v += p * (k1 - k2);
            }
            let mut s_v = 0.0;
            for k in 0..v.len() - 1 {
                s_v += v[k + 1] * v[k] * (((k + 1) * (m - k)) as f64).sqrt();
            }
            i_acc += w * (i_v / mf);
            s_acc += w * s_v;
            d_acc += w * d_v;
        })?;
        debug_assert!(summary.states >= 1);
        let ln_z = -self.beta * summary.e0 + w_sum.ln();
        Ok(SectorMoments {
            zeta: ln_z + self.beta * self.e0 * mf,
            e_ratio: e_acc / w_sum / mf,
            i_ratio: i_acc / w_sum / mf,
            s_ratio: s_acc / w_sum / mf,
            d_ratio: d_acc / w_sum / mf,
        })
    }

    /// Extend the table so every sector up to `target` can be evaluated
    /// (dense sectors plus enough sparse nodes for the cubic stencil).
    fn ensure(&self, target: usize) -> Result<()> {
        let dense_top = target.min(self.opts.dense_limit);
        let sparse_needed = if target > self.opts.dense_limit && !self.grid.is_empty() {
            let first_at_or_past = self.grid.partition_point(|&g| g < target);
            (first_at_or_past + 3).min(self.grid.len())
        } else {
            0
        };

        let mut missing: Vec<(bool, usize, usize)> = Vec::new();
        {
            let data = self.data.read().unwrap();
            for m in 1..=dense_top {
                if data.dense[m].is_none() {
                    missing.push((true, m, m));
                }
            }
            for (k, &g) in self.grid.iter().enumerate().take(sparse_needed) {
                if k >= data.sparse.len() || data.sparse[k].is_none() {
                    // Grid node 0 aliases the last dense sector.
                    if g <= self.opts.dense_limit {
                        continue;
                    }
                    missing.push((false, k, g));
                }
            }
        }
        if missing.is_empty() {
            return Ok(());
        }
        let computed: Result<Vec<(bool, usize, SectorMoments)>> = missing
            .par_iter()
            .map(|&(is_dense, slot, m)| Ok((is_dense, slot, self.compute_sector(m)?)))
            .collect();
        let computed = computed?;
        let mut data = self.data.write().unwrap();
        if data.sparse.len() < sparse_needed {
            data.sparse.resize(sparse_needed, None);
        }
        for (is_dense, slot, moments) in computed {
            if is_dense {
                data.dense[slot] = Some(moments);
            } else {
                data.sparse[slot] = Some(moments);
            }
        }
        Ok(())
    }

    /// Moments of sector `m`: exact if stored, otherwise cubic interpolation
    /// in ln M between sparse grid nodes. Returns None when the table has
    /// not been extended far enough yet.
    fn moments_at(&self, data: &TableData, m: usize) -> Option<SectorMoments> {
        if m <= self.opts.dense_limit {
            return data.dense[m];
        }
        if self.grid.is_empty() {
            return None;
        }
        let i = self.grid.partition_point(|&g| g <= m) - 1;
        if self.grid.get(i) == Some(&m) {
            if let Some(Some(exact)) = data.sparse.get(i) {
                return Some(*exact);
            }
        }
        let lo = i.saturating_sub(1).min(self.grid.len().saturating_sub(4));
        let mut nodes = [(0.0, SectorMoments {
            zeta: 0.0,
            e_ratio: 0.0,
            i_ratio: 0.0,
            s_ratio: 0.0,
            d_ratio: 0.0,
        }); 4];
        for (slot, k) in (lo..lo + 4).enumerate() {
            let g = *self.grid.get(k)?;
            let moments = if g <= self.opts.dense_limit {
                data.dense[g]?
            } else {
                (*data.sparse.get(k)?)?
            };
            nodes[slot] = ((g as f64).ln(), moments);
        }
        let u = (m as f64).ln();
        let pick = |f: fn(&SectorMoments) -> f64| {
            let mut acc = 0.0;
            for a in 0..4 {
                let mut w = 1.0;
                for b in 0..4 {
                    if a != b {
                        w *= (u - nodes[b].0) / (nodes[a].0 - nodes[b].0);
                    }
                }
                acc += w * f(&nodes[a].1);
            }
            acc
        };
        Some(SectorMoments {
            zeta: pick(|s| s.zeta),
            e_ratio: pick(|s| s.e_ratio),
            i_ratio: pick(|s| s.i_ratio),
            s_ratio: pick(|s| s.s_ratio),
            d_ratio: pick(|s| s.d_ratio),
        })
    }

    /// Grand-canonical sum at chemical potential `mu`.
    pub fn ensemble(&self, mu: f64) -> Result<(XiResult, ThermoObservables)> {
        let region = classify(self.params, mu);
        if !region.label.is_equilibrium() {
            return Err(Error::DivergentParameters {
                lambda: self.params.lambda(),
                mu,
                gamma: self.params.gamma(),
                region: region.label.as_str(),
            });
        }
        // mu - e0 equals the case-appropriate F* exactly.
        let f_star = mu - self.e0;
        debug_assert!(f_star < 0.0);

        let est = ((1.0 / self.opts.tol).ln() + 30.0) / (self.beta * (-f_star));
        let mut target = (est.ceil() as usize).max(64).min(self.opts.sector_cap);
        loop {
            self.ensure(target)?;
            let data = self.data.read().unwrap();
            match self.scan(&data, f_star)? {
                ScanOutcome::Done(xi, obs) => return Ok((xi, obs)),
                ScanOutcome::NeedMore(available) => {
                    if available >= self.opts.sector_cap {
                        unreachable!("scan reports cap exhaustion as an error");
                    }
                    target = (available * 2).min(self.opts.sector_cap);
                }
            }
        }
    }

    /// One deterministic ascending pass: terms, stop rule, final reduction.
    fn scan(&self, data: &TableData, f_star: f64) -> Result<ScanOutcome> {
        let beta = self.beta;
        let gamma = self.params.gamma();
        let lambda_c = self.params.critical_lambda();
        let ln_tol = self.opts.tol.ln();

        let mut log_terms: Vec<f64> = Vec::with_capacity(1024);
        let mut moments: Vec<SectorMoments> = Vec::with_capacity(1024);
        let mut num_m = RunningLse::new();

        let mut checkpoint: Option<(usize, f64)> = None;
        let mut slopes: Vec<f64> = Vec::new();

        let mut m = 1usize;
        let (m_ax, ln_tail) = loop {
            let Some(sm) = self.moments_at(data, m) else {
                let available = if m <= self.opts.dense_limit {
                    m.saturating_sub(1).max(16)
                } else {
                    m.saturating_sub(1)
                };
                return Ok(ScanOutcome::NeedMore(available.max(64)));
            };
            let l = beta * f_star * m as f64 + sm.zeta;
            log_terms.push(l);
            moments.push(sm);
            num_m.push(l + (m as f64).ln());

            let is_checkpoint = m <= self.opts.dense_limit
                || self.grid.binary_search(&m).is_ok();
            if is_checkpoint {
                if let Some((m_prev, l_prev)) = checkpoint {
                    let slope = (l - l_prev) / (m - m_prev) as f64;
                    slopes.push(slope);
                    if slopes.len() > 8 {
                        slopes.remove(0);
                    }
                    if slopes.len() == 8 && slopes.iter().all(|&s| s < 0.0) {
                        let r = slopes.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)).exp();
                        if r < 1.0 {
                            let geo = (r / (1.0 - r)).ln();
                            let ln_tail_xi = l + geo;
                            let ln_tail_num =
                                l + geo + ((m as f64 + 1.0) + 1.0 / (1.0 - r)).ln();
                            let c_obs = 1.0f64
                                .max(sm.e_ratio.abs())
                                .max(sm.i_ratio.abs())
                                .max(sm.s_ratio.abs() * 2.0 * (1.0 + gamma) / lambda_c);
                            let num_ok = ln_tail_num + c_obs.ln()
                                <= ln_tol + num_m.value().max(0.0);
                            if ln_tail_xi <= ln_tol && num_ok {
                                break (m, ln_tail_xi);
                            }
                        }
                    }
                }
                checkpoint = Some((m, l));
            }
            if m >= self.opts.sector_cap {
                let tail = slopes
                    .last()
                    .map(|&s| (l + (s.exp() / (1.0 - s.exp().min(1.0 - 1e-12))).ln()).exp())
                    .unwrap_or(f64::INFINITY);
                return Err(Error::TruncationOverflow {
                    cap: self.opts.sector_cap,
                    tol: self.opts.tol,
                    tail,
                    reached: m,
                });
            }
            m += 1;
        };

        // Two-pass max-then-sum reduction, ascending M, with the empty
        // sector's 1 included.
        let shift = log_terms.iter().fold(0.0f64, |a, &b| a.max(b));
        let mut denom = (-shift).exp();
        let mut n_m = 0.0;
        let mut n_e = 0.0;
        let mut n_i = 0.0;
        let mut n_s = 0.0;
        let mut n_d = 0.0;
        for (idx, (&l, sm)) in log_terms.iter().zip(&moments).enumerate() {
            let w = (l - shift).exp();
            let mf = (idx + 1) as f64;
            denom += w;
            n_m += w * mf;
            n_e += w * mf * sm.e_ratio;
            n_i += w * mf * sm.i_ratio;
            n_s += w * mf * sm.s_ratio;
            n_d += w * mf * sm.d_ratio;
        }
        let s_mean = n_s / denom;
        let xi = XiResult {
            log_xi: shift + denom.ln(),
            m_ax,
            tail_estimate: ln_tail.exp(),
        };
        let obs = ThermoObservables {
            m_mean: n_m / denom,
            energy: n_e / denom,
            interaction: n_i / denom,
            current: 2.0 * gamma * s_mean / lambda_c,
            hop: 2.0 * s_mean / lambda_c,
            imbalance: n_d / denom,
        };
        Ok(ScanOutcome::Done(xi, obs))
    }
}

enum ScanOutcome {
    Done(XiResult, ThermoObservables),
    NeedMore(usize),
}

/// Streaming log-sum-exp of positive terms given by their logs.
struct RunningLse {
    max: f64,
    sum: f64,
}

impl RunningLse {
    fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    fn push(&mut self, x: f64) {
        if x > self.max {
            self.sum = if self.max.is_finite() {
                self.sum * (self.max - x).exp() + 1.0
            } else {
                1.0
            };
            self.max = x;
        } else {
            self.sum += (x - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        if self.max.is_finite() {
            self.max + self.sum.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// log Xi with the default summation engine at the given tolerance.
pub fn log_grand_partition(params: ModelParams, bath: BathParams, tol: f64) -> Result<XiResult> {
    ensemble(params, bath, SumOptions::with_tol(tol)).map(|(xi, _)| xi)
}

/// Thermal observables as weighted eigen-sums at the given tolerance.
pub fn thermal_observables(
    params: ModelParams,
    bath: BathParams,
    tol: f64,
) -> Result<ThermoObservables> {
    ensemble(params, bath, SumOptions::with_tol(tol)).map(|(_, obs)| obs)
}

/// One-shot grand-canonical sum (builds a fresh sector table).
pub fn ensemble(
    params: ModelParams,
    bath: BathParams,
    opts: SumOptions,
) -> Result<(XiResult, ThermoObservables)> {
    SectorTable::new(params, bath.beta(), opts)?.ensemble(bath.mu())
}

/// Mean occupation of the mode at the given angles:
/// N(theta, phi) = M/2 - sin(2 theta)/2 (W cos phi + J sin phi).
pub fn mode_occupation(obs: &ThermoObservables, angles: ModeAngles) -> f64 {
    0.5 * obs.m_mean
        - 0.5
            * (2.0 * angles.theta()).sin()
            * (obs.hop * angles.phi().cos() + obs.current * angles.phi().sin())
}

/// Angles and occupation of the maximally occupied mode.
pub fn dominant_mode(obs: &ThermoObservables) -> Result<ModeOccupation> {
    if obs.m_mean.is_nan() || obs.m_mean <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "dominant mode undefined for mean particle number {}",
            obs.m_mean
        )));
    }
    let degenerate = obs.hop == 0.0 && obs.current == 0.0;
    let phi_max = if degenerate {
        0.0
    } else {
        let raw = (-obs.current).atan2(-obs.hop);
        if raw < 0.0 {
            raw + 2.0 * std::f64::consts::PI
        } else {
            raw
        }
    };
    let n_max = 0.5 * obs.m_mean + 0.5 * obs.hop.hypot(obs.current);
    let n = n_max / obs.m_mean;
    Ok(ModeOccupation {
        theta_max: std::f64::consts::FRAC_PI_4,
        phi_max,
        n_max,
        n,
        n_perp: 1.0 - n,
        t: if obs.hop != 0.0 {
            Some(obs.current / obs.hop)
        } else {
            None
        },
        degenerate_direction: degenerate,
    })
}

/// Compressibility d<M>/d mu by central finite difference.
pub fn compressibility(
    params: ModelParams,
    bath: BathParams,
    tol: f64,
    step: f64,
) -> Result<f64> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step must be finite and > 0, got {step}"
        )));
    }
    for mu in [bath.mu() + step, bath.mu() - step] {
        let region = classify(params, mu);
        if !region.label.is_equilibrium() {
            return Err(Error::DivergentParameters {
                lambda: params.lambda(),
                mu,
                gamma: params.gamma(),
                region: region.label.as_str(),
            });
        }
    }
    let table = SectorTable::new(params, bath.beta(), SumOptions::with_tol(tol))?;
    let plus = table.ensemble(bath.mu() + step)?.1.m_mean;
    let minus = table.ensemble(bath.mu() - step)?.1.m_mean;
    Ok((plus - minus) / (2.0 * step))
}
