//! Replays the covering proof of the kinetic energy inequality on one
//! ensemble and records every intermediate quantity.
//!
//! Total mass at most the target: `Tr(−Δγ) >= ∫|∇√ρ|²` followed by the
//! measured Sobolev quotient of `√ρ`. Otherwise every support cell gets a
//! mass-`target` ball, the greedy covering picks a sub-family of multiplicity
//! `b`, and each selected ball is checked with the local exclusion and
//! uncertainty bounds combined through `ε`. The chain
//!
//! ```text
//! b·Tr(−Δγ) >= Σ_B Tr(−Δ_B γ) >= r·Σ_B ∫_B ρ^{1+2/d} >= r·∫ρ^{1+2/d}
//! ```
//!
//! with `r` the smallest per-ball ratio yields the constant `r / b`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::covering::{besicovitch_select, candidates_from_index, support, MassIndex};
use crate::fields::{
    density_values, family_quotient, local_kinetic_energy, lt_integral, lt_quotient, mass,
    neumann_energy_real, Ball, Ensemble, Field, Mask, ORTHONORMALITY_TOL,
};
use crate::spectral::{
    hoffmann_ostenhof_check, mask_gap, pow_two_over_d, sobolev_quotient_real, sqrt_density,
    uncertainty_from_modulus_sq, EigenConfig, EigenMethod, UncertaintyReport,
};
use crate::{Error, Result};

/// `lhs >= rhs` up to `slack` relative to the larger magnitude, with an
/// absolute floor of `slack`.
fn holds(lhs: f64, rhs: f64, slack: f64) -> bool {
    lhs >= rhs - slack * lhs.abs().max(rhs.abs()).max(1.0)
}

/// Accepted range of `∫_B ρ` for a ball passed to the local lemma.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassWindow {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateConfig {
    /// Ball mass target and the small-mass threshold. Must exceed 1.
    pub target_mass: f64,
    /// Fixed window. When absent the window is `[target, target + s]` with
    /// `s` the mass the outermost shell of the ball could hold at `max ρ`.
    pub window: Option<MassWindow>,
    pub eigen: EigenConfig,
    /// Relative slack of every numeric inequality.
    pub slack: f64,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        CertificateConfig {
            target_mass: crate::covering::DEFAULT_TARGET_MASS,
            window: None,
            eigen: EigenConfig::default(),
            slack: 1e-9,
        }
    }
}

impl CertificateConfig {
    fn validate(&self) -> Result<()> {
        if !(self.target_mass.is_finite() && self.target_mass > 1.0) {
            return Err(Error::BadTargetMass(self.target_mass));
        }
        if let Some(w) = self.window {
            if !(w.lo > 1.0 && w.hi >= w.lo) {
                return Err(Error::BadConfig("mass window must satisfy 1 < lo <= hi"));
            }
        }
        if !(self.slack >= 0.0) {
            return Err(Error::BadConfig("slack must be nonnegative"));
        }
        Ok(())
    }
}

/// `Tr(−Δ_B γ) >= gap·(∫_B ρ − 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExclusionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub mass: f64,
    pub holds: bool,
}

/// Everything measured on one ball.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallReport {
    pub ball: Ball,
    pub center: Vec<f64>,
    pub cells: usize,
    pub volume: f64,
    /// `M = ∫_B ρ`.
    pub mass: f64,
    /// `Tr(−Δ_B γ)`.
    pub local_kinetic: f64,
    /// `∫_B ρ^{1+2/d}`.
    pub local_lhs_lemma: f64,
    /// `∫_B |∇√ρ|²`.
    pub sqrt_density_energy: f64,
    pub gap: f64,
    pub gap_method: EigenMethod,
    pub gap_iterations: usize,
    pub exclusion: ExclusionCheck,
    pub uncertainty: UncertaintyReport,
    pub epsilon: f64,
    /// `(1+ε)·Tr(−Δ_B γ)`.
    pub combination_lhs: f64,
    /// `ε/C_u · ∫_Bρ^{1+2/d}/M^{2/d} + gap·(M−1) − ε·C_u·M/|B|^{2/d}`.
    pub combination_rhs: f64,
    pub combination_holds: bool,
    /// `ε / ((1+ε)·C_u·M^{2/d})`.
    pub a_priori_constant: f64,
    /// `Tr(−Δ_B γ) / ∫_B ρ^{1+2/d}`.
    pub ratio: f64,
    pub verdict: bool,
}

/// Density data shared by the per-ball checks.
struct Prepared<'a> {
    e: &'a Ensemble,
    rho: Vec<f64>,
    sqrt_rho: Vec<f64>,
    index: MassIndex,
}

impl<'a> Prepared<'a> {
    fn new(e: &'a Ensemble) -> Result<Self> {
        let rho = density_values(e.weights(), e.fields());
        let sqrt_rho = sqrt_density(&rho);
        let index = MassIndex::new(e.grid(), &rho)?;
        Ok(Prepared { e, rho, sqrt_rho, index })
    }

    fn exclusion(&self, mask: &Mask, eigen: &EigenConfig) -> Result<(ExclusionCheck, EigenMethod, usize)> {
        let grid = self.e.grid();
        let spectrum = mask_gap(grid, mask, eigen)?;
        let lhs = local_kinetic_energy(self.e, mask);
        let m = mass(&self.rho, grid, Some(mask));
        let rhs = spectrum.gap * (m - 1.0);
        let check = ExclusionCheck { lhs, rhs, gap: spectrum.gap, mass: m, holds: holds(lhs, rhs, 1e-9) };
        Ok((check, spectrum.method, spectrum.iterations))
    }

    fn window(&self, ball: &Ball, cfg: &CertificateConfig) -> MassWindow {
        cfg.window.unwrap_or_else(|| {
            let shell = self.index.shell_cells(ball) as f64;
            let cell_mass = self.index.max_density() * self.e.grid().cell_volume();
            MassWindow { lo: cfg.target_mass, hi: cfg.target_mass + shell * cell_mass }
        })
    }

    fn ball_lemma(&self, ball: &Ball, cfg: &CertificateConfig) -> Result<BallReport> {
        let grid = self.e.grid();
        let dim = grid.dim();
        let mask = ball.mask(grid);
        let m = mass(&self.rho, grid, Some(&mask));
        let w = self.window(ball, cfg);
        let tol = cfg.slack * w.hi.abs().max(1.0);
        if !(m >= w.lo - tol && m <= w.hi + tol) {
            return Err(Error::MassOutOfWindow { mass: m, lo: w.lo, hi: w.hi });
        }

        let (exclusion, gap_method, gap_iterations) = self.exclusion(&mask, &cfg.eigen)?;
        let gap = exclusion.gap;
        let local_kinetic = exclusion.lhs;
        let local_lhs_lemma = lt_integral(&self.rho, grid, Some(&mask));
        let sqrt_density_energy = neumann_energy_real(&self.sqrt_rho, grid, &mask);
        let uncertainty =
            uncertainty_from_modulus_sq(ball, grid, &mask, &self.rho, sqrt_density_energy)?;
        let c_u = uncertainty.fitted_constant;
        let volume = uncertainty.volume;
        let vol_pow = pow_two_over_d(volume, dim);
        let m_pow = pow_two_over_d(m, dim);

        let epsilon = ((m - 1.0) * gap * vol_pow / (c_u * m)).max(0.0);
        let combination_lhs = (1.0 + epsilon) * local_kinetic;
        let combination_rhs = epsilon / c_u * local_lhs_lemma / m_pow + gap * (m - 1.0)
            - epsilon * c_u * m / vol_pow;
        let combination_holds = holds(combination_lhs, combination_rhs, cfg.slack);
        let a_priori_constant = epsilon / ((1.0 + epsilon) * c_u * m_pow);
        let ratio = if local_lhs_lemma > 0.0 { local_kinetic / local_lhs_lemma } else { 0.0 };
        let ho_holds = holds(local_kinetic, sqrt_density_energy, cfg.slack);
        let verdict = ratio > 0.0
            && epsilon > 0.0
            && exclusion.holds
            && ho_holds
            && combination_holds
            && holds(local_kinetic, a_priori_constant * local_lhs_lemma, cfg.slack);

        Ok(BallReport {
            ball: ball.clone(),
            center: ball.center_point(grid),
            cells: mask.len(),
            volume,
            mass: m,
            local_kinetic,
            local_lhs_lemma,
            sqrt_density_energy,
            gap,
            gap_method,
            gap_iterations,
            exclusion,
            uncertainty,
            epsilon,
            combination_lhs,
            combination_rhs,
            combination_holds,
            a_priori_constant,
            ratio,
            verdict,
        })
    }
}

/// Local exclusion bound on a ball, with the kinetic energy measured in the
/// Neumann form of the ball mask.
pub fn verify_exclusion(e: &Ensemble, ball: &Ball, eigen: &EigenConfig) -> Result<ExclusionCheck> {
    let mask = ball.mask(e.grid());
    if mask.len() < 2 {
        return Err(Error::GapUndefined);
    }
    Ok(Prepared::new(e)?.exclusion(&mask, eigen)?.0)
}

/// Local kinetic energy bound on one ball.
pub fn verify_ball_lemma(e: &Ensemble, ball: &Ball, cfg: &CertificateConfig) -> Result<BallReport> {
    cfg.validate()?;
    Prepared::new(e)?.ball_lemma(ball, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMode {
    SmallMass,
    Covering,
}

/// One inequality `lhs >= rhs` of the chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChainLink {
    pub relation: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl ChainLink {
    fn new(relation: &'static str, lhs: f64, rhs: f64, slack: f64) -> Self {
        ChainLink { relation, lhs, rhs, holds: holds(lhs, rhs, slack) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub mode: CertificateMode,
    pub config: CertificateConfig,
    pub dim: usize,
    pub members: usize,
    pub total_mass: f64,
    /// `Tr(−Δγ)`.
    pub global_kinetic: f64,
    /// `∫ρ^{1+2/d}`.
    pub global_rhs: f64,
    /// `∫|∇√ρ|²`.
    pub sqrt_density_energy: f64,
    /// `Tr(−Δγ) / ∫ρ^{1+2/d}` computed directly.
    pub direct_quotient: f64,
    /// Sobolev quotient of `√ρ` (small-mass mode).
    pub sobolev_quotient: Option<f64>,
    pub support_cells: usize,
    pub candidates: usize,
    pub ball_reports: Vec<BallReport>,
    /// Covering multiplicity `b` over the support.
    pub multiplicity: Option<usize>,
    pub covered: Option<bool>,
    pub min_ratio: Option<f64>,
    /// Smallest per-ball a-priori constant divided by `b`.
    pub a_priori_constant: Option<f64>,
    pub chain: Vec<ChainLink>,
    /// Constant `C` with `Tr(−Δγ) >= C·∫ρ^{1+2/d}` certified by the chain.
    pub effective_constant: f64,
    /// `effective_constant / direct_quotient`.
    pub sharpness: f64,
    pub verdict: bool,
}

/// Builds the certificate for one ensemble.
pub fn build_certificate(e: &Ensemble, cfg: &CertificateConfig) -> Result<Certificate> {
    cfg.validate()?;
    e.verify_orthonormal()?;
    let grid = e.grid();
    let dim = grid.dim();
    let prep = Prepared::new(e)?;
    let total_mass = mass(&prep.rho, grid, None);
    if !(total_mass > 0.0) {
        return Err(Error::ZeroDensity);
    }
    let global_kinetic = crate::fields::kinetic_energy(e, None);
    let global_rhs = lt_integral(&prep.rho, grid, None);
    let ho = hoffmann_ostenhof_check(e, None);
    let direct_quotient = lt_quotient(e)?;
    let slack = cfg.slack;

    let mut cert = Certificate {
        mode: CertificateMode::SmallMass,
        config: *cfg,
        dim,
        members: e.len(),
        total_mass,
        global_kinetic,
        global_rhs,
        sqrt_density_energy: ho.lhs,
        direct_quotient,
        sobolev_quotient: None,
        support_cells: 0,
        candidates: 0,
        ball_reports: Vec::new(),
        multiplicity: None,
        covered: None,
        min_ratio: None,
        a_priori_constant: None,
        chain: Vec::new(),
        effective_constant: 0.0,
        sharpness: 0.0,
        verdict: false,
    };

    if total_mass <= cfg.target_mass {
        let s = sobolev_quotient_real(&prep.sqrt_rho, grid)?;
        let bound = s / pow_two_over_d(total_mass, dim) * global_rhs;
        let floor = s / pow_two_over_d(cfg.target_mass, dim) * global_rhs;
        cert.chain = alloc::vec![
            ChainLink::new("Tr(-Δγ) >= ∫|∇√ρ|²", global_kinetic, ho.lhs, slack),
            ChainLink::new("∫|∇√ρ|² >= S·M^(-2/d)·∫ρ^(1+2/d)", ho.lhs, bound, slack),
            ChainLink::new("S·M^(-2/d)·∫ρ^(1+2/d) >= S·target^(-2/d)·∫ρ^(1+2/d)", bound, floor, slack),
        ];
        cert.sobolev_quotient = Some(s);
        cert.effective_constant = s / pow_two_over_d(total_mass, dim);
    } else {
        cert.mode = CertificateMode::Covering;
        let supp = support(&prep.rho, grid);
        let candidates = candidates_from_index(&prep.index, &supp, cfg.target_mass)?;
        let balls: Vec<Ball> = candidates.into_iter().map(|c| c.ball).collect();
        let covering = besicovitch_select(grid, &balls, &supp)?;
        let reports = per_ball(&prep, &covering.balls, cfg)?;
        let b = covering.multiplicity as f64;
        let sum_local: f64 = reports.iter().map(|r| r.local_kinetic).sum();
        let sum_rhs: f64 = reports.iter().map(|r| r.local_lhs_lemma).sum();
        let min_ratio = reports.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let min_a_priori = reports.iter().map(|r| r.a_priori_constant).fold(f64::INFINITY, f64::min);
        cert.chain = alloc::vec![
            ChainLink::new("b·Tr(-Δγ) >= Σ_B Tr(-Δ_B γ)", b * global_kinetic, sum_local, slack),
            ChainLink::new(
                "Σ_B Tr(-Δ_B γ) >= r·Σ_B ∫_B ρ^(1+2/d)",
                sum_local,
                min_ratio * sum_rhs,
                slack
            ),
            ChainLink::new(
                "r·Σ_B ∫_B ρ^(1+2/d) >= r·∫ρ^(1+2/d)",
                min_ratio * sum_rhs,
                min_ratio * global_rhs,
                slack
            ),
        ];
        cert.support_cells = supp.len();
        cert.candidates = balls.len();
        cert.multiplicity = Some(covering.multiplicity);
        cert.covered = Some(covering.covered);
        cert.min_ratio = Some(min_ratio);
        cert.a_priori_constant = Some(min_a_priori / b);
        cert.effective_constant = min_ratio / b;
        cert.ball_reports = reports;
    }

    cert.sharpness = cert.effective_constant / direct_quotient;
    cert.verdict = cert.chain.iter().all(|l| l.holds)
        && cert.ball_reports.iter().all(|r| r.verdict)
        && cert.covered.unwrap_or(true)
        && (global_rhs <= 0.0 || cert.effective_constant > 0.0);
    Ok(cert)
}

fn per_ball(prep: &Prepared<'_>, balls: &[Ball], cfg: &CertificateConfig) -> Result<Vec<BallReport>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        balls.par_iter().map(|b| prep.ball_lemma(b, cfg)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        balls.iter().map(|b| prep.ball_lemma(b, cfg)).collect()
    }
}

/// Quotient of a normalized family against `N` copies of its first member.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyBound {
    pub members: usize,
    pub orthogonal_quotient: f64,
    pub copies_quotient: f64,
    /// `orthogonal_quotient / copies_quotient`.
    pub ratio: f64,
}

/// `Σ∫|∇u_n|² / ∫(Σ|u_n|²)^{1+2/d}` for the family and for `N` copies of
/// `u_1`. Orthogonality is not required, only unit norms.
pub fn normalized_family_bound(fields: &[Field]) -> Result<FamilyBound> {
    let first = fields.first().ok_or(Error::Empty)?;
    for (index, f) in fields.iter().enumerate() {
        f.same_grid(first)?;
        let norm_sq = f.norm_sq();
        if norm_sq == 0.0 {
            return Err(Error::ZeroField);
        }
        if (norm_sq - 1.0).abs() > ORTHONORMALITY_TOL {
            return Err(Error::NotNormalized { index, norm_sq });
        }
    }
    let ones = alloc::vec![1.0; fields.len()];
    let orthogonal_quotient = family_quotient(&ones, fields)?;
    let copies = alloc::vec![first.clone(); fields.len()];
    let copies_quotient = family_quotient(&ones, &copies)?;
    Ok(FamilyBound {
        members: fields.len(),
        orthogonal_quotient,
        copies_quotient,
        ratio: orthogonal_quotient / copies_quotient,
    })
}

#[cfg(test)]
mod tests;
