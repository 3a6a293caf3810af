//! Verification batteries run by `heis verify`.
//!
//! Each check produces a [`DefectReport`] whose name is `<suite>.<check>`.
//! Tolerances default to the values below and can be overridden per name
//! or per class through [`RunConfig::tolerances`].

use super::*;
use crate::config::RunConfig;
use crate::error::Error;
use crate::grids::{Field, GridSpec1D, PlaneField, SampledLine, TorusField};
use crate::group::{character, decompose, is_member, HeisenbergElement as G, SubgroupTag, MEMBERSHIP_TOLERANCE};
use crate::ladders::{
    creation, hermite_state, vacuum_gaussian, vacuum_theta_closed_form, vacuum_theta_with, VACUUM_AMPLITUDE,
};
use crate::phase::cis_turns;
use crate::representations::*;
use crate::special::{jacobi_theta_series, ThetaTruncation};
use crate::transforms::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::str::FromStr;
use std::time::Instant;

/// Phase slope of the perturbed kernels used as negative controls.
pub const CONTROL_PHASE: f64 = 0.01;

/// Default half-width of the numerically meaningful window of peeled
/// plane fields, as a bound on the peeling exponent.
pub const PEEL_WINDOW_DMAX: f64 = 10.0;

/// Number of seeded group elements per intertwining check.
pub const INTERTWINING_SAMPLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Group,
    Representations,
    Ladders,
    Zak,
    Fsb,
    Theta,
    Peeling,
    Contravariant,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::Group,
        Suite::Representations,
        Suite::Ladders,
        Suite::Zak,
        Suite::Fsb,
        Suite::Theta,
        Suite::Peeling,
        Suite::Contravariant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Group => "group",
            Suite::Representations => "representations",
            Suite::Ladders => "ladders",
            Suite::Zak => "zak",
            Suite::Fsb => "fsb",
            Suite::Theta => "theta",
            Suite::Peeling => "peeling",
            Suite::Contravariant => "contravariant",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s}")))
    }
}

/// Runs a suite and returns its reports in a fixed order.
pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Result<Vec<DefectReport>> {
    cfg.validate()?;
    if suite == Suite::All {
        let mut all = Vec::new();
        for s in Suite::EACH {
            all.extend(run_suite(s, cfg)?);
        }
        return Ok(all);
    }
    let start = Instant::now();
    let mut cx = Ctx::new(cfg, suite);
    match suite {
        Suite::Group => group_suite(&mut cx)?,
        Suite::Representations => representations_suite(&mut cx)?,
        Suite::Ladders => ladders_suite(&mut cx)?,
        Suite::Zak => zak_suite(&mut cx)?,
        Suite::Fsb => fsb_suite(&mut cx)?,
        Suite::Theta => theta_suite(&mut cx)?,
        Suite::Peeling => peeling_suite(&mut cx)?,
        Suite::Contravariant => contravariant_suite(&mut cx)?,
        Suite::All => unreachable!(),
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(cx
        .reports
        .into_iter()
        .map(|r| r.with("suite_runtime_s", elapsed))
        .collect())
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    suite: Suite,
    rng: ChaCha8Rng,
    reports: Vec<DefectReport>,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a RunConfig, suite: Suite) -> Self {
        Self { cfg, suite, rng: ChaCha8Rng::seed_from_u64(cfg.seed), reports: Vec::new() }
    }

    /// Records a check; `check` is the suffix after the suite name.
    fn record(&mut self, check: &str, class: &str, value: f64, default_tol: f64) -> &mut DefectReport {
        let name = format!("{}.{}", self.suite.name(), check);
        let tol = self.cfg.tolerance(&name, class, default_tol);
        let report = DefectReport::new(name, value, tol)
            .with("class", class)
            .with("seed", self.cfg.seed);
        self.reports.push(report);
        self.reports.last_mut().expect("just pushed")
    }

    fn push(&mut self, report: DefectReport, class: &str) {
        let tol = self.cfg.tolerance(&report.name, class, report.tolerance);
        let mut r = DefectReport::new(report.name, report.value, tol);
        r.metadata = report.metadata;
        self.reports.push(r.with("class", class).with("seed", self.cfg.seed));
    }

    fn line(&self) -> Result<GridSpec1D> {
        self.cfg.line_grid()
    }

    fn plane(&self) -> Result<(GridSpec1D, GridSpec1D)> {
        self.cfg.plane_grids()
    }
}

/// The off-centre test function `e^{−2π(t−0.3)²} e^{2πi·0.5t}`.
pub fn squeezed_gaussian(grid: GridSpec1D) -> Result<SampledLine> {
    SampledLine::sample(grid, |t| cis_turns(0.5 * t) * (-2.0 * PI * (t - 0.3) * (t - 0.3)).exp())
}

fn phase_perturbed(f: &SampledLine) -> SampledLine {
    let mut out = f.clone();
    for (k, t) in f.grid.points().enumerate() {
        out.values[k] *= Complex64::new(0.0, CONTROL_PHASE * t).exp();
    }
    out
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random data on the central half of the line, zero elsewhere.
fn random_line(rng: &mut ChaCha8Rng, grid: GridSpec1D) -> SampledLine {
    let half = -grid.origin / 2.0;
    let values = grid
        .points()
        .map(|t| if t.abs() < half { random_complex(rng) } else { Complex64::new(0.0, 0.0) })
        .collect();
    SampledLine { grid, values }
}

fn random_plane(rng: &mut ChaCha8Rng, gx: GridSpec1D, gy: GridSpec1D) -> PlaneField {
    let (hx, hy) = (-gx.origin / 2.0, -gy.origin / 2.0);
    let mut values = Vec::with_capacity(gx.count * gy.count);
    for x in gx.points() {
        for y in gy.points() {
            values.push(if x.abs() < hx && y.abs() < hy { random_complex(rng) } else { Complex64::new(0.0, 0.0) });
        }
    }
    PlaneField { gx, gy, values }
}

fn random_torus(rng: &mut ChaCha8Rng, nu: usize, nv: usize, m: u32) -> TorusField {
    TorusField { nu, nv, m, values: (0..nu * nv).map(|_| random_complex(rng)).collect() }
}

/// A multiple of `grid.step` of modulus at most `reach`.
fn aligned(rng: &mut ChaCha8Rng, grid: &GridSpec1D, reach: f64) -> f64 {
    let k = (reach / grid.step).floor() as i64;
    rng.gen_range(-k..=k) as f64 * grid.step
}

fn torus_aligned(rng: &mut ChaCha8Rng, n: usize, periods: i64) -> f64 {
    rng.gen_range(-periods * n as i64..=periods * n as i64) as f64 / n as f64
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`.
fn rel_distance<F: Field>(a: &F, b: &F) -> Result<f64> {
    Ok(relative(a.distance(b)?, a.norm().max(b.norm())))
}

/// Max-norm distance relative to the max-norm of `b`.
fn rel_max(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let scale = b.iter().map(|y| y.norm()).fold(0.0, f64::max);
    relative(diff, scale)
}

fn weighted_norm(values: &[Complex64], weights: impl Iterator<Item = f64>) -> f64 {
    values.iter().zip(weights).map(|(v, w)| v.norm_sqr() * w).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------

fn group_suite(cx: &mut Ctx) -> Result<()> {
    let rng = &mut cx.rng;
    let el = |rng: &mut ChaCha8Rng| G::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
    let (mut assoc, mut inv, mut recon, mut auto) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut violations = 0usize;
    for _ in 0..1000 {
        let (a, b, c) = (el(rng), el(rng), el(rng));
        assoc = assoc.max(((a * b) * c).max_abs_diff(&(a * (b * c))));
        inv = inv
            .max((a * a.inverse()).max_abs_diff(&G::IDENTITY))
            .max((a.inverse() * a).max_abs_diff(&G::IDENTITY))
            .max(a.inverse().inverse().max_abs_diff(&a));
        auto = auto.max((a * b).automorphism().max_abs_diff(&(a.automorphism() * b.automorphism())));
        for tag in SubgroupTag::ALL {
            let d = decompose(&a, tag);
            recon = recon.max((d.section * d.remainder).max_abs_diff(&a));
            let exact_ints = tag != SubgroupTag::Lattice
                || (d.remainder.x.fract() == 0.0 && d.remainder.y.fract() == 0.0);
            if !is_member(tag, &d.remainder, 0.0) || !exact_ints {
                violations += 1;
            }
        }
    }
    let (hbar, m) = (cx.cfg.hbar, cx.cfg.m as f64);
    let mut chi: f64 = 0.0;
    for _ in 0..1000 {
        for tag in SubgroupTag::ALL {
            let pick = |rng: &mut ChaCha8Rng| {
                let s = rng.gen_range(-10.0..10.0);
                match tag {
                    SubgroupTag::Centre => G::central(s),
                    SubgroupTag::AbelianX => G::new(s, 0.0, rng.gen_range(-10.0..10.0)),
                    SubgroupTag::AbelianY => G::new(s, rng.gen_range(-10.0..10.0), 0.0),
                    SubgroupTag::Lattice => G::new(s, rng.gen_range(-10..=10) as f64, rng.gen_range(-10..=10) as f64),
                }
            };
            let (h1, h2) = (pick(rng), pick(rng));
            let param = if tag == SubgroupTag::Lattice { m } else { hbar };
            debug_assert!(is_member(tag, &(h1 * h2), MEMBERSHIP_TOLERANCE));
            let lhs = character(tag, param, &(h1 * h2))?;
            let rhs = character(tag, param, &h1)? * character(tag, param, &h2)?;
            chi = chi.max((lhs - rhs).norm()).max((lhs.norm() - 1.0).abs());
        }
    }
    cx.record("associativity", "group", assoc, 1e-12).note("samples", 1000);
    cx.record("inverse", "group", inv, 1e-12).note("samples", 1000);
    cx.record("reconstruction", "group", recon, 1e-12).note("samples", 1000);
    cx.record("remainder_membership", "group", violations as f64, 0.0);
    cx.record("automorphism", "group", auto, 1e-12);
    cx.record("character_homomorphism", "group", chi, 1e-12);
    Ok(())
}

// ---------------------------------------------------------------------------

const PAIRS: usize = 5;

fn representations_suite(cx: &mut Ctx) -> Result<()> {
    let p = cx.cfg.repr()?;
    let lp = cx.cfg.lattice()?;
    let line = cx.line()?;
    let (gx, gy) = cx.plane()?;
    let (nu, nv) = (cx.cfg.torus_nu, cx.cfg.torus_nv);
    let (ll, lx, ly) = (cx.cfg.line_l, cx.cfg.plane_lx, cx.cfg.plane_ly);
    let rng = &mut cx.rng;

    let f_line = random_line(rng, line);
    let f_plane = random_plane(rng, gx, gy);
    let f_torus = random_torus(rng, nu, nv, lp.m);

    let line_g = |rng: &mut ChaCha8Rng, shift_x: bool| {
        let (a, b) = (aligned(rng, &line, ll / 4.0), rng.gen_range(-2.0..2.0));
        let s = rng.gen_range(-1.0..1.0);
        if shift_x { G::new(s, a, b) } else { G::new(s, b, a) }
    };
    let line_pairs = |rng: &mut ChaCha8Rng, shift_x| (0..PAIRS).map(|_| (line_g(rng, shift_x), line_g(rng, shift_x))).collect::<Vec<_>>();
    let schr_pairs = line_pairs(rng, true);
    let mom_pairs = line_pairs(rng, false);
    let plane_pairs: Vec<(G, G)> = (0..PAIRS)
        .map(|_| {
            let g = |rng: &mut ChaCha8Rng| G::new(rng.gen_range(-1.0..1.0), aligned(rng, &gx, lx / 4.0), aligned(rng, &gy, ly / 4.0));
            (g(rng), g(rng))
        })
        .collect();
    let torus_pairs: Vec<(G, G)> = (0..PAIRS)
        .map(|_| {
            let g = |rng: &mut ChaCha8Rng| G::new(rng.gen_range(-1.0..1.0), torus_aligned(rng, nu, 2), torus_aligned(rng, nv, 2));
            (g(rng), g(rng))
        })
        .collect();

    fn homomorphism<F: Field>(pairs: &[(G, G)], f: &F, act: impl Fn(&G, &F) -> Result<F>) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (a, b) in pairs {
            let lhs = act(a, &act(b, f)?)?;
            let rhs = act(&(*a * *b), f)?;
            worst = worst.max(rel_distance(&lhs, &rhs)?);
        }
        Ok(worst)
    }
    fn unitarity<F: Field>(pairs: &[(G, G)], f: &F, act: impl Fn(&G, &F) -> Result<F>, norm: impl Fn(&F) -> f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (a, b) in pairs {
            for g in [a, b] {
                let n = norm(&act(g, f)?);
                worst = worst.max((n - norm(f)).abs() / norm(f));
            }
        }
        Ok(worst)
    }

    let schr = |g: &G, f: &SampledLine| act_schrodinger(&p, g, f);
    let mom = |g: &G, f: &SampledLine| act_schrodinger_momentum(&p, g, f);
    let left = |g: &G, f: &PlaneField| act_quasi_regular_left(&p, g, f);
    let right = |g: &G, f: &PlaneField| act_quasi_regular_right(&p, g, f);
    let lat = |g: &G, f: &TorusField| act_lattice(&lp, g, f);
    let lat_t = |g: &G, f: &TorusField| act_lattice_torus(&lp, g, f);
    let fsb = |g: &G, f: &PlaneField| act_fsb(&p, g, f);
    let schr_peeled = |g: &G, f: &SampledLine| act_schrodinger_peeled(&p, g, f);
    let lat_peeled = |g: &G, f: &TorusField| act_lattice_peeled(&lp, g, f);

    // weighted norms in which the peeled actions are unitary
    let fsb_norm = |f: &PlaneField| {
        let w = (0..f.values.len()).map(|idx| {
            let (x, y) = (f.gx.point(idx / f.gy.count), f.gy.point(idx % f.gy.count));
            (-2.0 * fsb_peel_exponent(&p, x, y).re).exp()
        });
        weighted_norm(&f.values, w)
    };
    let schr_peeled_norm = |f: &SampledLine| weighted_norm(&f.values, f.grid.points().map(|t| (-2.0 * PI * p.hbar * t * t / p.kappa).exp()));
    let lat_peeled_norm = |f: &TorusField| {
        let w = (0..f.values.len()).map(|idx| (-2.0 * PI * lp.m as f64 * f.u(idx / f.nv).powi(2) / lp.kappa).exp());
        weighted_norm(&f.values, w)
    };

    // peeled data: random values pushed through the forward peeling
    let fp_plane = peel_fsb(&p, &f_plane, PeelDirection::Forward)?;
    let fp_line = peel_schrodinger(&p, &f_line, PeelDirection::Forward)?;
    let fp_torus = peel_lattice(&lp, &f_torus, PeelDirection::Forward)?;

    let hom = [
        ("schrodinger", homomorphism(&schr_pairs, &f_line, schr)?),
        ("schrodinger_momentum", homomorphism(&mom_pairs, &f_line, mom)?),
        ("quasi_regular_left", homomorphism(&plane_pairs, &f_plane, left)?),
        ("quasi_regular_right", homomorphism(&plane_pairs, &f_plane, right)?),
        ("lattice", homomorphism(&torus_pairs, &f_torus, lat)?),
        ("lattice_torus", homomorphism(&torus_pairs, &f_torus, lat_t)?),
        ("fsb", homomorphism(&plane_pairs, &fp_plane, fsb)?),
        ("schrodinger_peeled", homomorphism(&schr_pairs, &fp_line, schr_peeled)?),
        ("lattice_peeled", homomorphism(&torus_pairs, &fp_torus, lat_peeled)?),
    ];
    let uni = [
        ("schrodinger", unitarity(&schr_pairs, &f_line, schr, |f| f.norm())?),
        ("schrodinger_momentum", unitarity(&mom_pairs, &f_line, mom, |f| f.norm())?),
        ("quasi_regular_left", unitarity(&plane_pairs, &f_plane, left, |f| f.norm())?),
        ("quasi_regular_right", unitarity(&plane_pairs, &f_plane, right, |f| f.norm())?),
        ("lattice", unitarity(&torus_pairs, &f_torus, lat, |f| f.norm())?),
        ("lattice_torus", unitarity(&torus_pairs, &f_torus, lat_t, |f| f.norm())?),
        ("fsb", unitarity(&plane_pairs, &fp_plane, fsb, fsb_norm)?),
        ("schrodinger_peeled", unitarity(&schr_pairs, &fp_line, schr_peeled, schr_peeled_norm)?),
        ("lattice_peeled", unitarity(&torus_pairs, &fp_torus, lat_peeled, lat_peeled_norm)?),
    ];

    let mut commute: f64 = 0.0;
    for (g, h) in &plane_pairs {
        let a = right(h, &left(g, &f_plane)?)?;
        let b = left(g, &right(h, &f_plane)?)?;
        commute = commute.max(rel_distance(&a, &b)?);
    }
    let mut forms: f64 = 0.0;
    for (g, h) in &torus_pairs {
        for e in [g, h] {
            forms = forms.max(rel_distance(&lat(e, &f_torus)?, &lat_t(e, &f_torus)?)?);
        }
    }
    // peeled actions against the conjugated unpeeled ones
    let mut conj_fsb: f64 = 0.0;
    let mut conj_schr: f64 = 0.0;
    let mut conj_lat: f64 = 0.0;
    for i in 0..PAIRS {
        let g = plane_pairs[i].0;
        let direct = fsb(&g, &fp_plane)?;
        let via = peel_fsb(&p, &left(&g, &peel_fsb(&p, &fp_plane, PeelDirection::Inverse)?)?, PeelDirection::Forward)?;
        conj_fsb = conj_fsb.max(rel_distance(&direct, &via)?);
        let g = schr_pairs[i].0;
        let direct = schr_peeled(&g, &fp_line)?;
        let via = peel_schrodinger(&p, &schr(&g, &peel_schrodinger(&p, &fp_line, PeelDirection::Inverse)?)?, PeelDirection::Forward)?;
        conj_schr = conj_schr.max(rel_distance(&direct, &via)?);
        let g = torus_pairs[i].0;
        let direct = lat_peeled(&g, &fp_torus)?;
        let via = peel_lattice(&lp, &lat(&g, &peel_lattice(&lp, &fp_torus, PeelDirection::Inverse)?)?, PeelDirection::Forward)?;
        conj_lat = conj_lat.max(rel_distance(&direct, &via)?);
    }

    for (name, v) in hom {
        cx.record(&format!("homomorphism.{name}"), "homomorphism", v, 1e-10).note("pairs", PAIRS);
    }
    for (name, v) in uni {
        cx.record(&format!("unitarity.{name}"), "unitarity", v, 1e-10);
    }
    cx.record("left_right_commute", "homomorphism", commute, 1e-10);
    cx.record("lattice_forms_agree", "homomorphism", forms, 1e-12);
    cx.record("peeled_conjugate.fsb", "conjugation", conj_fsb, 1e-10);
    cx.record("peeled_conjugate.schrodinger", "conjugation", conj_schr, 1e-10);
    cx.record("peeled_conjugate.lattice", "conjugation", conj_lat, 1e-10);
    Ok(())
}

// ---------------------------------------------------------------------------

fn interior_max(f: &SampledLine) -> f64 {
    crate::diff::interior(f.grid.count).map(|k| f.values[k].norm()).fold(0.0, f64::max)
}

fn commutator_error(p: &ReprParams, grid: GridSpec1D) -> Result<f64> {
    let f = SampledLine::sample(grid, |t| {
        cis_turns(0.2 * t) * (1.0 + 0.3 * t) * (-PI * (t - 0.5) * (t - 0.5)).exp()
    })?;
    let ab = annihilation(p, &creation(p, &f));
    let ba = creation(p, &annihilation(p, &f));
    let comm = ab.axpy(Complex64::new(-1.0, 0.0), &ba)?.axpy(Complex64::new(-1.0, 0.0), &f)?;
    let scale = interior_max(&f);
    Ok(interior_max(&comm) / scale)
}

fn ladders_suite(cx: &mut Ctx) -> Result<()> {
    let p = cx.cfg.repr()?;
    let line = cx.line()?;
    let coarse = GridSpec1D::centered(cx.cfg.line_l, cx.cfg.line_n / 2)?;
    let phi = vacuum_gaussian(&p, line);
    let opts = ResidualOptions { tolerance: 1e-8, dmax: None };
    let fine = annihilation_residual("ladders.vacuum_annihilation", AnnihilationKind::SchrodingerLadder, &p, FieldRef::Line(&phi), opts)?;
    let phi_c = vacuum_gaussian(&p, coarse);
    let coarse_r = annihilation_residual("c", AnnihilationKind::SchrodingerLadder, &p, FieldRef::Line(&phi_c), opts)?;
    let fine_v = fine.value;
    cx.push(fine.with("n", line.count), "annihilation");
    let r = cx.record("vacuum_annihilation_refinement", "refinement", fine_v / coarse_r.value, 1.0 / 8.0);
    r.note("coarse", coarse_r.value);
    r.note("fine", fine_v);

    let comm = commutator_error(&p, line)?;
    let comm_c = commutator_error(&p, coarse)?;
    cx.record("commutator", "commutator", comm, 1e-6);
    let r = cx.record("commutator_refinement", "refinement", comm / comm_c, 1.0 / 8.0);
    r.note("coarse", comm_c);
    r.note("fine", comm);

    // adjointness on a pair of windowed functions
    let f = squeezed_gaussian(line)?;
    let g = SampledLine::sample(line, |t| Complex64::new(1.0 - t, 0.5 * t) * (-PI * (t + 0.4).powi(2)).exp())?;
    let lhs = creation(&p, &f).inner(&g)?;
    let rhs = f.inner(&annihilation(&p, &g))?;
    cx.record("adjointness", "adjointness", (lhs - rhs).norm() / (f.norm() * g.norm()), 1e-8);

    let states: Vec<SampledLine> = (0..=6).map(|n| hermite_state(&p, n, line)).collect::<Result<_>>()?;
    // ‖φ₀‖² = √(κ/ℏ); normalise the Gram matrix by it
    let n0 = states[0].norm().powi(2);
    let mut gram: f64 = 0.0;
    for a in 0..=5 {
        for b in 0..=5 {
            let ip = states[a].inner(&states[b])? / n0;
            let delta = if a == b { 1.0 } else { 0.0 };
            gram = gram.max((ip - delta).norm());
        }
    }
    cx.record("hermite_gram", "orthonormality", gram, 1e-6).note("max_order", 5);
    let (mut raise, mut lower): (f64, f64) = (0.0, 0.0);
    for n in 0..=5 {
        let up = creation(&p, &states[n]);
        let want = states[n + 1].clone().scale(Complex64::new(((n + 1) as f64).sqrt(), 0.0));
        raise = raise.max(rel_distance(&up, &want)?);
        if n > 0 {
            let down = annihilation(&p, &states[n]);
            let want = states[n - 1].clone().scale(Complex64::new((n as f64).sqrt(), 0.0));
            lower = lower.max(rel_distance(&down, &want)?);
        }
    }
    cx.record("raising", "ladder", raise, 1e-5);
    cx.record("lowering", "ladder", lower, 1e-5);
    Ok(())
}

// ---------------------------------------------------------------------------

fn zak_suite(cx: &mut Ctx) -> Result<()> {
    let lp = cx.cfg.lattice()?;
    let p = lp.as_repr();
    let line = cx.line()?;
    let (nu, nv, nt) = (cx.cfg.torus_nu, cx.cfg.torus_nv, cx.cfg.ntrunc);
    let trunc = cx.cfg.theta_truncation()?;
    let zak = |f: &SampledLine| covariant_zak(&lp, f, nu, nv, nt);
    let izak = |g: &TorusField| contravariant_zak_inverse(&lp, g, line);

    let phi = vacuum_gaussian(&p, line);
    let h3 = hermite_state(&p, 3, line)?;
    for (label, f) in [("gaussian", &phi), ("hermite3", &h3)] {
        let r = unitarity_defect(&format!("zak.unitarity.{label}"), zak, f, 1e-6)?;
        cx.push(r, "unitarity");
    }
    let z_phi = zak(&phi)?;
    let theta = vacuum_theta_with(&lp, nu, nv, trunc)?;
    cx.record("vacuum_is_theta", "pointwise", rel_max(&z_phi.values, &theta.values), 1e-8);

    let f = squeezed_gaussian(line)?;
    let rng = &mut cx.rng;
    let gs: Vec<G> = (0..INTERTWINING_SAMPLES)
        .map(|_| G::new(rng.gen_range(-1.0..1.0), torus_aligned(rng, nu, 2), torus_aligned(rng, nv, 2)))
        .collect();
    let src = |g: &G, f: &SampledLine| act_schrodinger(&p, g, f);
    let dst = |g: &G, f: &TorusField| act_lattice(&lp, g, f);
    let (mut worst, mut worst_g): (f64, G) = (0.0, G::IDENTITY);
    for g in &gs {
        let r = intertwining_defect("zak.intertwining", g, src, zak, dst, &f, 1e-5)?;
        if r.value >= worst {
            worst = r.value;
            worst_g = *g;
        }
    }
    let rep = cx.record("intertwining", "intertwining", worst, 1e-5).note("samples", INTERTWINING_SAMPLES);
    rep.note("worst_g", vec![worst_g.s, worst_g.x, worst_g.y]);

    // negative control: a position-dependent phase in the kernel
    let perturbed = |f: &SampledLine| zak(&phase_perturbed(f));
    let mut control: f64 = 0.0;
    for g in &gs {
        control = control.max(intertwining_defect("c", g, src, perturbed, dst, &f, 1e-5)?.value);
    }
    let tol = cx.cfg.tolerance("zak.intertwining", "intertwining", 1e-5);
    cx.record("negative_control.intertwining", "negative_control", tol / control, 1.0)
        .note("perturbed_defect", control);

    for (label, f) in [("gaussian", &phi), ("hermite3", &h3)] {
        let r = roundtrip_error(&format!("zak.inverse_roundtrip.{label}"), zak, izak, f, 1e-6)?;
        cx.push(r, "roundtrip");
    }
    let r = roundtrip_error("zak.forward_roundtrip", izak, zak, &z_phi, 1e-6)?;
    cx.push(r, "roundtrip");

    // covariance of the image, evaluated through the defining sum
    let qp = z_phi.quasi_periodicity_defect(|u, v| zak_value(&lp, &phi, u, v), 2)?;
    cx.record("quasi_periodicity", "quasi_periodicity", qp, 1e-12);

    let indicator = SampledLine::sample_real(line, |t| if (0.0..1.0).contains(&t) { 1.0 } else { 0.0 })?;
    let zi = zak(&indicator)?;
    let dev = zi.values.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    cx.record("indicator_modulus", "pointwise", dev, 1e-12);
    Ok(())
}

// ---------------------------------------------------------------------------

fn fsb_suite(cx: &mut Ctx) -> Result<()> {
    let p = cx.cfg.repr()?;
    let line = cx.line()?;
    let (gx, gy) = cx.plane()?;
    let (cgx, cgy) = (
        GridSpec1D::centered(cx.cfg.plane_lx, cx.cfg.plane_nx / 2)?,
        GridSpec1D::centered(cx.cfg.plane_ly, cx.cfg.plane_ny / 2)?,
    );
    let dmax = cx.cfg.tolerances.get("peel_window_dmax").copied().unwrap_or(PEEL_WINDOW_DMAX);
    let pre = |f: &SampledLine, gx, gy| covariant_pre_fsb(&p, &FiducialSpec::Gaussian, f, gx, gy);

    let phi = vacuum_gaussian(&p, line);
    let f = squeezed_gaussian(line)?;
    let w_phi = pre(&phi, gx, gy)?;
    let w_f = pre(&f, gx, gy)?;
    let w_f_c = pre(&f, cgx, cgy)?;

    let lie = ResidualOptions { tolerance: 1e-4, dmax: None };
    let r = annihilation_residual("fsb.lie_annihilation.vacuum", AnnihilationKind::PreFsbLie, &p, FieldRef::Plane(&w_phi), lie)?;
    cx.push(r, "annihilation");
    let fine = annihilation_residual("fsb.lie_annihilation.squeezed", AnnihilationKind::PreFsbLie, &p, FieldRef::Plane(&w_f), lie)?;
    let coarse = annihilation_residual("c", AnnihilationKind::PreFsbLie, &p, FieldRef::Plane(&w_f_c), lie)?;
    let fine_v = fine.value;
    cx.push(fine, "annihilation");
    let r = cx.record("lie_annihilation_refinement", "refinement", fine_v / coarse.value, 1.0 / 8.0);
    r.note("coarse", coarse.value);
    r.note("fine", fine_v);

    let cr = ResidualOptions { tolerance: 1e-4, dmax: Some(dmax) };
    let peeled_f = peel_fsb(&p, &w_f, PeelDirection::Forward)?;
    let peeled_f_c = peel_fsb(&p, &w_f_c, PeelDirection::Forward)?;
    let fine = annihilation_residual("fsb.cauchy_riemann", AnnihilationKind::CrAfterPeel, &p, FieldRef::Plane(&peeled_f), cr)?;
    let coarse = annihilation_residual("c", AnnihilationKind::CrAfterPeel, &p, FieldRef::Plane(&peeled_f_c), cr)?;
    let fine_v = fine.value;
    cx.push(fine.with("dmax", dmax), "annihilation");
    let r = cx.record("cauchy_riemann_refinement", "refinement", fine_v / coarse.value, 1.0 / 8.0);
    r.note("coarse", coarse.value);
    r.note("fine", fine_v);

    let peeled_vac = fsb_transform(&p, &phi, gx, gy)?;
    let (mean, sd) = modulus_spread(&peeled_vac.values, &peel_window(&p, &peeled_vac, dmax));
    cx.record("vacuum_constancy", "constancy", sd / mean, 1e-4).note("mean", mean).note("dmax", dmax);
    let composed = peel_fsb(&p, &w_phi, PeelDirection::Forward)?;
    cx.record("transform_composition", "composition", rel_distance(&peeled_vac, &composed)?, 1e-12);

    // sesqui-unitarity of matrix coefficients
    let h: Vec<SampledLine> = (0..3).map(|n| hermite_state(&p, n, line)).collect::<Result<_>>()?;
    let mix = |a: Complex64, b: Complex64, c: Complex64| -> Result<SampledLine> {
        h[0].clone().scale(a).axpy(b, &h[1])?.axpy(c, &h[2])
    };
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let quads = [
        (mix(c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0))?, h[0].clone(), mix(c(1.0, 0.0), c(0.0, 0.0), c(0.0, -0.3))?, mix(c(1.0, 0.0), c(0.2, 0.0), c(0.0, 0.0))?),
        (f.clone(), h[1].clone(), h[2].clone(), mix(c(0.3, 0.1), c(1.0, 0.0), c(0.0, 0.0))?),
    ];
    let mut sesq: f64 = 0.0;
    for (f1, p1, f2, p2) in &quads {
        let w1 = matrix_coefficient(&p, f1, p1, gx, gy)?;
        let w2 = matrix_coefficient(&p, f2, p2, gx, gy)?;
        let lhs = w1.inner(&w2)?;
        let rhs = f1.inner(f2)? * p1.inner(p2)?.conj() / p.hbar;
        let scale = f1.norm() * f2.norm() * p1.norm() * p2.norm() / p.hbar;
        sesq = sesq.max((lhs - rhs).norm() / scale);
    }
    cx.record("sesqui_unitarity", "unitarity", sesq, 1e-4).note("quadruples", quads.len());

    // M_ψ ∘ W_φ with ψ = φ = φ₀ is ℏ⁻¹·I
    let back = contravariant_pre_fsb_inverse(&p, &ReconstructionSpec::Gaussian, &w_f, line)?
        .scale(Complex64::new(p.hbar, 0.0));
    cx.record("roundtrip", "roundtrip", relative(back.distance(&f)?, f.norm()), 1e-4);

    let rng = &mut cx.rng;
    let gs: Vec<G> = (0..INTERTWINING_SAMPLES)
        .map(|_| G::new(rng.gen_range(-1.0..1.0), aligned(rng, &gx, 1.0), aligned(rng, &gy, 1.0)))
        .collect();
    let src = |g: &G, f: &SampledLine| act_schrodinger(&p, g, f);
    let dst = |g: &G, f: &PlaneField| act_quasi_regular_left(&p, g, f);
    let w = |f: &SampledLine| pre(f, gx, gy);
    let mut worst: f64 = 0.0;
    for g in &gs {
        worst = worst.max(intertwining_defect("c", g, src, w, dst, &f, 1e-5)?.value);
    }
    cx.record("intertwining", "intertwining", worst, 1e-5).note("samples", INTERTWINING_SAMPLES);
    let perturbed = |f: &SampledLine| pre(&phase_perturbed(f), gx, gy);
    let mut control: f64 = 0.0;
    for g in &gs {
        control = control.max(intertwining_defect("c", g, src, perturbed, dst, &f, 1e-5)?.value);
    }
    let tol = cx.cfg.tolerance("fsb.intertwining", "intertwining", 1e-5);
    cx.record("negative_control.intertwining", "negative_control", tol / control, 1.0)
        .note("perturbed_defect", control);
    Ok(())
}

// ---------------------------------------------------------------------------

fn dbar_residual(lp: &LatticeParams, nu: usize, nv: usize, trunc: ThetaTruncation) -> Result<DefectReport> {
    let vac = vacuum_theta_with(lp, nu, nv, trunc)?;
    let peeled = peel_lattice(lp, &vac, PeelDirection::Forward)?;
    let opts = ResidualOptions { tolerance: 1e-4, dmax: None };
    annihilation_residual("theta.dbar_residual", AnnihilationKind::LatticeAfterPeel, &lp.as_repr(), FieldRef::Torus(&peeled), opts)
}

fn theta_suite(cx: &mut Ctx) -> Result<()> {
    let lp = cx.cfg.lattice()?;
    let p = lp.as_repr();
    let line = cx.line()?;
    let (gx, gy) = cx.plane()?;
    let (nu, nv, nt) = (cx.cfg.torus_nu, cx.cfg.torus_nv, cx.cfg.ntrunc);
    let trunc = cx.cfg.theta_truncation()?;
    let eps = cx.cfg.theta_eps;
    let m = lp.m as f64;

    // series sanity
    let t11 = ThetaTruncation::new(1, 1.0, eps)?;
    let theta3 = jacobi_theta_series(1, 1.0, Complex64::new(0.0, 0.0), t11)?;
    cx.record("series_theta3_at_i", "series", (theta3.re - 1.086_434_811_213_308).abs(), 1e-12);
    let (mut period, mut quasi, mut cert): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..100 {
        let w = Complex64::new(-1.0 + 0.02 * i as f64, 0.0);
        let a = jacobi_theta_series(lp.m, lp.kappa, w, trunc)?;
        period = period.max((jacobi_theta_series(lp.m, lp.kappa, w + 1.0, trunc)? - a).norm());
        cert = cert.max((jacobi_theta_series(lp.m, lp.kappa, w, trunc.with_nmax(2 * trunc.nmax))? - a).norm());
        let shifted = jacobi_theta_series(lp.m, lp.kappa, w + Complex64::new(0.0, m / lp.kappa), trunc)?;
        let factor = (Complex64::new(PI * m / lp.kappa, 0.0) - Complex64::i() * 2.0 * PI * w).exp();
        quasi = quasi.max((shifted - factor * a).norm() / (factor * a).norm());
    }
    cx.record("series_periodicity", "series", period, 2.0 * eps);
    cx.record("series_truncation", "series", cert, eps);
    cx.record("series_quasi_period", "series", quasi, 1e-10);

    // vacuum quasi-periodicity through the closed form
    let mut qp: f64 = 0.0;
    for j in (0..nu).step_by((nu / 16).max(1)) {
        for k in (0..nv).step_by((nv / 16).max(1)) {
            let (u, v) = (j as f64 / nu as f64, k as f64 / nv as f64);
            let base = vacuum_theta_closed_form(&lp, u, v, trunc)?;
            for (n, l) in [(1, 0), (0, 1), (-1, 1), (1, -1)] {
                let s = vacuum_theta_closed_form(&lp, u + n as f64, v + l as f64, trunc)?;
                qp = qp.max((s - cis_turns(m * u * l as f64) * base).norm() / VACUUM_AMPLITUDE);
            }
        }
    }
    cx.record("vacuum_quasi_periodicity", "quasi_periodicity", qp, 1e-8);

    // lattice peeling of Φ = Z(φ₀) gives 2^{1/4}·Θ
    let phi = covariant_zak(&lp, &vacuum_gaussian(&p, line), nu, nv, nt)?;
    let peeled = peel_lattice(&lp, &phi, PeelDirection::Forward)?;
    let mut series = Vec::with_capacity(nu * nv);
    for j in 0..nu {
        for k in 0..nv {
            let w = Complex64::new(k as f64 / nv as f64, j as f64 / (nu as f64 * lp.kappa)) * m;
            series.push(jacobi_theta_series(lp.m, lp.kappa, w, trunc)? * VACUUM_AMPLITUDE);
        }
    }
    cx.record("peel_vacuum", "pointwise", rel_max(&peeled.values, &series), 1e-10);

    let fine = dbar_residual(&lp, nu, nv, trunc)?;
    let coarse = dbar_residual(&lp, nu / 2, nv / 2, trunc)?;
    let fine_v = fine.value;
    cx.push(fine, "annihilation");
    let r = cx.record("dbar_refinement", "refinement", fine_v / coarse.value, 1.0 / 8.0);
    r.note("coarse", coarse.value);
    r.note("fine", fine_v);

    // intertwining (ρ_m, pre-theta, Λ_m)
    let f_line = squeezed_gaussian(line)?;
    let f = covariant_zak(&lp, &f_line, nu, nv, nt)?;
    let pre = |f: &TorusField| covariant_pre_theta_eps(&lp, f, gx, gy, eps);
    let rng = &mut cx.rng;
    let gs: Vec<G> = (0..INTERTWINING_SAMPLES)
        .map(|_| G::new(rng.gen_range(-1.0..1.0), aligned(rng, &gx, 1.0), aligned(rng, &gy, 1.0)))
        .collect();
    let src = |g: &G, f: &TorusField| act_lattice(&lp, g, f);
    let dst = |g: &G, f: &PlaneField| act_quasi_regular_left(&p, g, f);
    let w_f = pre(&f)?;
    let mut worst: f64 = 0.0;
    for g in &gs {
        let lhs = pre(&src(g, &f)?)?;
        let rhs = dst(g, &w_f)?;
        worst = worst.max(relative(lhs.distance(&rhs)?, f.norm()));
    }
    cx.record("pretheta_intertwining", "intertwining", worst, 1e-6).note("samples", INTERTWINING_SAMPLES);

    let tt = theta_transform(&lp, &f, gx, gy)?;
    let composed = peel_fsb(&p, &w_f, PeelDirection::Forward)?;
    cx.record("transform_composition", "composition", rel_distance(&tt, &composed)?, 1e-12);

    // inverse pre-theta round trip on a 64² torus
    let (ru, rv) = (64, 64);
    let vac64 = vacuum_theta_with(&lp, ru, rv, trunc)?;
    let norm2 = vac64.norm().powi(2);
    let scale = Complex64::new(m / norm2, 0.0);
    let f64_ = covariant_zak(&lp, &f_line, ru, rv, nt)?;
    for (label, g) in [("vacuum", &vac64), ("squeezed", &f64_)] {
        let w = covariant_pre_theta_eps(&lp, g, gx, gy, eps)?;
        let back = contravariant_pre_theta_inverse_eps(&lp, &ReconstructionSpec::ThetaVacuum, &w, ru, rv, eps)?.scale(scale);
        cx.record(&format!("inverse_roundtrip.{label}"), "roundtrip", relative(back.distance(g)?, g.norm()), 1e-3)
            .note("torus", vec![ru, rv]);
    }

    // the inverse image is quasi-periodic: evaluate the defining integral
    // off the fundamental domain and compare with the covariance rule
    let w = covariant_pre_theta_eps(&lp, &vac64, gx, gy, eps)?;
    let mut qp: f64 = 0.0;
    let mut scale_ref: f64 = 0.0;
    for (j, k) in [(0usize, 0usize), (5, 9), (17, 40), (33, 2), (50, 61)] {
        let (u, v) = (j as f64 / ru as f64, k as f64 / rv as f64);
        let base = contravariant_lattice_at(&lp, &vac64, &w, u, v)?;
        scale_ref = scale_ref.max(base.norm());
        for (n, l) in [(1, 0), (0, 1), (-1, -1)] {
            let s = contravariant_lattice_at(&lp, &vac64, &w, u + n as f64, v + l as f64)?;
            qp = qp.max((s - cis_turns(m * u * l as f64) * base).norm());
        }
    }
    cx.record("inverse_quasi_periodicity", "quasi_periodicity", relative(qp, scale_ref), 1e-8);
    Ok(())
}

// ---------------------------------------------------------------------------

/// Weighted least-squares fit of `F ≈ c·Hₙ(ξ)` with `ξ = √(2πℏ/κ)t` over the
/// interior, in the norm of `L²(e^{−2πℏt²/κ})`.
pub fn hermite_ratio_defect(p: &ReprParams, n: usize, grid: GridSpec1D) -> Result<f64> {
    let peeled = peel_schrodinger(p, &hermite_state(p, n, grid)?, PeelDirection::Forward)?;
    let a = PI * p.hbar / p.kappa;
    let scale = (2.0 * a).sqrt();
    let nodes: Vec<(f64, f64, Complex64)> = crate::diff::interior(grid.count)
        .map(|k| {
            let t = grid.point(k);
            ((-2.0 * a * t * t).exp(), hermite_polynomial(n, scale * t), peeled.values[k])
        })
        .collect();
    let num: Complex64 = nodes.iter().map(|(w, h, f)| f * (w * h)).sum();
    let den: f64 = nodes.iter().map(|(w, h, _)| w * h * h).sum();
    let c = num / den;
    let res: f64 = nodes.iter().map(|(w, h, f)| w * (f - c * *h).norm_sqr()).sum();
    let tot: f64 = nodes.iter().map(|(w, _, f)| w * f.norm_sqr()).sum();
    Ok((res / tot).sqrt())
}

fn peeling_suite(cx: &mut Ctx) -> Result<()> {
    let p = cx.cfg.repr()?;
    let lp = cx.cfg.lattice()?;
    let line = cx.line()?;
    let (gx, gy) = cx.plane()?;
    let (nu, nv) = (cx.cfg.torus_nu, cx.cfg.torus_nv);
    let trunc = cx.cfg.theta_truncation()?;

    for n in 0..=4 {
        let d = hermite_ratio_defect(&p, n, line)?;
        cx.record(&format!("schrodinger_hermite.{n}"), "hermite", d, 1e-6);
    }
    let vac = peel_schrodinger(&p, &vacuum_gaussian(&p, line), PeelDirection::Forward)?;
    let dev = vac.values.iter().map(|z| (z - VACUUM_AMPLITUDE).norm()).fold(0.0, f64::max);
    cx.record("schrodinger_vacuum", "pointwise", dev / VACUUM_AMPLITUDE, 1e-12);

    let rng = &mut cx.rng;
    let f_line = random_line(rng, line);
    let f_plane = random_plane(rng, gx, gy);
    let f_torus = random_torus(rng, nu, nv, lp.m);
    let r1 = rel_distance(&peel_schrodinger(&p, &peel_schrodinger(&p, &f_line, PeelDirection::Forward)?, PeelDirection::Inverse)?, &f_line)?;
    let r2 = rel_distance(&peel_fsb(&p, &peel_fsb(&p, &f_plane, PeelDirection::Forward)?, PeelDirection::Inverse)?, &f_plane)?;
    let r3 = rel_distance(&peel_lattice(&lp, &peel_lattice(&lp, &f_torus, PeelDirection::Forward)?, PeelDirection::Inverse)?, &f_torus)?;
    cx.record("roundtrip.schrodinger", "roundtrip", r1, 1e-12);
    cx.record("roundtrip.fsb", "roundtrip", r2, 1e-12);
    cx.record("roundtrip.lattice", "roundtrip", r3, 1e-12);

    let vac = vacuum_theta_with(&lp, nu, nv, trunc)?;
    let peeled = peel_lattice(&lp, &vac, PeelDirection::Forward)?;
    let m = lp.m as f64;
    let mut series = Vec::with_capacity(nu * nv);
    for j in 0..nu {
        for k in 0..nv {
            let w = Complex64::new(k as f64 / nv as f64, j as f64 / (nu as f64 * lp.kappa)) * m;
            series.push(jacobi_theta_series(lp.m, lp.kappa, w, trunc)? * VACUUM_AMPLITUDE);
        }
    }
    cx.record("lattice_vacuum", "pointwise", rel_max(&peeled.values, &series), 1e-10);
    Ok(())
}

// ---------------------------------------------------------------------------

fn contravariant_suite(cx: &mut Ctx) -> Result<()> {
    let p = cx.cfg.repr()?;
    let lp = cx.cfg.lattice()?;
    let line = cx.line()?;
    let w = |f: &SampledLine| covariant_fourier_inverse(&p, f, line);
    let mm = |f: &SampledLine| contravariant_fourier(&p, f, line);

    // ∫ e^{−πt²} e^{±2πiℏyt} dt = e^{−πℏ²y²}
    let g = SampledLine::sample_real(line, |t| (-PI * t * t).exp())?;
    let want = SampledLine::sample_real(line, |y| (-PI * p.hbar * p.hbar * y * y).exp())?;
    let wg = w(&g)?;
    let mg = mm(&g)?;
    cx.record("fourier_self_duality", "pointwise", rel_max(&wg.values, &want.values).max(rel_max(&mg.values, &want.values)), 1e-8);
    let imag = wg.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    cx.record("fourier_real_even", "pointwise", imag, 1e-10);

    let f = squeezed_gaussian(line)?;
    let back = mm(&w(&f)?)?.scale(Complex64::new(p.hbar, 0.0));
    cx.record("fourier_roundtrip", "roundtrip", relative(back.distance(&f)?, f.norm()), 1e-7);

    let rng = &mut cx.rng;
    let gs: Vec<G> = (0..INTERTWINING_SAMPLES)
        .map(|_| G::new(rng.gen_range(-1.0..1.0), aligned(rng, &line, 1.0), aligned(rng, &line, 1.0)))
        .collect();
    let src = |g: &G, f: &SampledLine| act_schrodinger(&p, g, f);
    let dst = |g: &G, f: &SampledLine| act_schrodinger_momentum(&p, g, f);
    let mut worst: f64 = 0.0;
    for g in &gs {
        worst = worst.max(intertwining_defect("c", g, src, w, dst, &f, 1e-6)?.value);
    }
    cx.record("fourier_intertwining", "intertwining", worst, 1e-6).note("samples", INTERTWINING_SAMPLES);
    let perturbed = |f: &SampledLine| w(&phase_perturbed(f));
    let mut control: f64 = 0.0;
    for g in &gs {
        control = control.max(intertwining_defect("c", g, src, perturbed, dst, &f, 1e-6)?.value);
    }
    let tol = cx.cfg.tolerance("contravariant.fourier_intertwining", "intertwining", 1e-6);
    cx.record("negative_control.fourier_intertwining", "negative_control", tol / control, 1.0)
        .note("perturbed_defect", control);

    // a smooth reconstruction vector cannot satisfy the lattice condition
    let psi = vacuum_gaussian(&p, line);
    let x = (0.5 / line.step).round() * line.step;
    let residual = lattice_condition_residual(&lp, &psi, x, 1.0)?;
    cx.record("lattice_condition_violated", "negative_control", 1e-2 / residual, 1.0)
        .note("residual", residual)
        .note("x", x);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn group_suite_passes_and_is_deterministic() {
        let cfg = RunConfig::default();
        let a = run_suite(Suite::Group, &cfg).unwrap();
        let b = run_suite(Suite::Group, &cfg).unwrap();
        assert!(a.iter().all(|r| r.pass), "{a:#?}");
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.value.to_bits(), y.value.to_bits());
        }
    }

    #[test]
    fn tolerance_overrides_apply_by_class() {
        let mut cfg = RunConfig::default();
        cfg.tolerances.insert("group".into(), 0.0);
        cfg.tolerances.insert("group.remainder_membership".into(), 5.0);
        let reports = run_suite(Suite::Group, &cfg).unwrap();
        let membership = reports.iter().find(|r| r.name == "group.remainder_membership").unwrap();
        assert_eq!(membership.tolerance, 5.0);
        assert!(reports.iter().filter(|r| r.name != "group.remainder_membership").all(|r| r.tolerance == 0.0));
    }
}
