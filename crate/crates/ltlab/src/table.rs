//! Plain-text rendering of a certificate, one line per proof step.

use std::fmt::Write;

use ltlab_core::certificate::{Certificate, CertificateMode};

fn yes(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILS"
    }
}

pub fn certificate_table(c: &Certificate) -> String {
    let mut s = String::new();
    let mode = match c.mode {
        CertificateMode::SmallMass => "small_mass",
        CertificateMode::Covering => "covering",
    };
    let _ = writeln!(s, "mode                 {mode}");
    let _ = writeln!(s, "dimension            {}", c.dim);
    let _ = writeln!(s, "members              {}", c.members);
    let _ = writeln!(s, "total mass           {:.10}", c.total_mass);
    let _ = writeln!(s, "Tr(-Δγ)              {:.10e}", c.global_kinetic);
    let _ = writeln!(s, "∫ρ^(1+2/d)           {:.10e}", c.global_rhs);
    let _ = writeln!(s, "∫|∇√ρ|²              {:.10e}", c.sqrt_density_energy);
    let _ = writeln!(s, "direct quotient      {:.10}", c.direct_quotient);
    if let Some(q) = c.sobolev_quotient {
        let _ = writeln!(s, "Sobolev quotient √ρ  {q:.10}");
    }
    if c.mode == CertificateMode::Covering {
        let _ = writeln!(s, "support cells        {}", c.support_cells);
        let _ = writeln!(s, "candidate balls      {}", c.candidates);
        let _ = writeln!(s, "selected balls       {}", c.ball_reports.len());
        if let Some(b) = c.multiplicity {
            let _ = writeln!(s, "multiplicity b       {b}");
        }
        if let Some(cov) = c.covered {
            let _ = writeln!(s, "support covered      {cov}");
        }
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:>4} {:>28} {:>10} {:>10} {:>7} {:>12} {:>10} {:>10} {:>10} {:>7}",
            "ball", "center", "radius", "mass", "cells", "gap", "C_u", "epsilon", "ratio", "lemma"
        );
        for (i, r) in c.ball_reports.iter().enumerate() {
            let center: Vec<String> = r.center.iter().map(|x| format!("{x:.4}")).collect();
            let _ = writeln!(
                s,
                "{:>4} {:>28} {:>10.5} {:>10.6} {:>7} {:>12.5e} {:>10.4} {:>10.4e} {:>10.5} {:>7}",
                i,
                center.join(","),
                r.ball.radius(),
                r.mass,
                r.cells,
                r.gap,
                r.uncertainty.fitted_constant,
                r.epsilon,
                r.ratio,
                yes(r.verdict)
            );
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "chain");
    for link in &c.chain {
        let _ = writeln!(s, "  {:<56} {:>18.10e} {:>18.10e}  {}", link.relation, link.lhs, link.rhs, yes(link.holds));
    }
    let _ = writeln!(s);
    if let Some(r) = c.min_ratio {
        let _ = writeln!(s, "min ball ratio r     {r:.10}");
    }
    if let Some(a) = c.a_priori_constant {
        let _ = writeln!(s, "a-priori constant    {a:.10e}");
    }
    let _ = writeln!(s, "effective constant   {:.10}", c.effective_constant);
    let _ = writeln!(s, "effective / direct   {:.6}", c.sharpness);
    let _ = writeln!(s, "verdict              {}", c.verdict);
    s
}
