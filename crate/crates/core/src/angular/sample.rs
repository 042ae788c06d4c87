//! Rejection sampling from an angular measure, for simulation support.
//!
//! Interior (and asymmetric-logistic face) draws use a uniform-on-simplex
//! proposal with a numerically estimated density bound inflated by 1.2.
//! Densities that blow up toward the boundary (detected by a log-log slope
//! probe) switch to a Dirichlet envelope whose exponents match the estimated
//! boundary behavior. Atoms are drawn with their exact masses.

use crate::angular::{AngularModel, AsymLogisticParams};
use crate::error::{Error, Result};
use crate::simplex::uniform_simplex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::ln_gamma;

enum Envelope {
    Uniform,
    Dirichlet { gamma: Vec<f64>, ln_norm: f64 },
}

struct FaceSampler<'a> {
    k: usize,
    target: Box<dyn Fn(&[f64]) -> f64 + 'a>,
    envelope: Envelope,
    /// log bound on target minus log proposal density (up to constants).
    ln_m: f64,
}

enum Component<'a> {
    Atom(usize),
    Face { members: Vec<usize>, sampler: FaceSampler<'a> },
}

const PROBE_POINTS: usize = 2048;
const ENVELOPE_POINTS: usize = 4096;
const MAX_ATTEMPTS_PER_DRAW: usize = 500_000;

impl<'a> FaceSampler<'a> {
    fn build(
        target: Box<dyn Fn(&[f64]) -> f64 + 'a>,
        k: usize,
        rng: &mut ChaCha12Rng,
    ) -> Result<Self> {
        let mut ln_max = f64::NEG_INFINITY;
        let center = vec![1.0 / k as f64; k];
        ln_max = ln_max.max(target(&center));
        for _ in 0..PROBE_POINTS {
            let w = uniform_simplex(rng, k);
            ln_max = ln_max.max(target(&w));
        }

        // boundary slope probe per coordinate
        let mut kappa = vec![0.0; k];
        let mut unbounded = false;
        for pos in 0..k {
            let probe = |eps: f64| -> f64 {
                let mut w = vec![(1.0 - eps) / (k as f64 - 1.0); k];
                w[pos] = eps;
                target(&w)
            };
            let (e1, e2) = (1e-3, 1e-6);
            let (l1, l2) = (probe(e1), probe(e2));
            if l1.is_finite() && l2.is_finite() {
                kappa[pos] = (l2 - l1) / (e2.ln() - e1.ln());
                ln_max = ln_max.max(l1).max(l2);
                if kappa[pos] < -0.02 {
                    unbounded = true;
                }
            }
        }

        if !ln_max.is_finite() {
            return Err(Error::Sampling("density evaluates to zero everywhere probed".into()));
        }

        if !unbounded {
            return Ok(Self { k, target, envelope: Envelope::Uniform, ln_m: ln_max + 1.2f64.ln() });
        }

        let gamma: Vec<f64> =
            kappa.iter().map(|&c| (1.0 + c).clamp(0.05, 1.0)).collect();
        let ln_norm = ln_gamma(gamma.iter().sum::<f64>())
            - gamma.iter().map(|&g| ln_gamma(g)).sum::<f64>();
        let env = Envelope::Dirichlet { gamma: gamma.clone(), ln_norm };
        // bound the log ratio over proposal draws and the boundary probes
        let mut ln_m = f64::NEG_INFINITY;
        for _ in 0..ENVELOPE_POINTS {
            let w = draw_dirichlet(&gamma, rng);
            let lr = target(&w) - dirichlet_ln_pdf(&gamma, ln_norm, &w);
            if lr.is_finite() {
                ln_m = ln_m.max(lr);
            }
        }
        for pos in 0..k {
            for eps in [1e-3, 1e-5, 1e-8] {
                let mut w = vec![(1.0 - eps) / (k as f64 - 1.0); k];
                w[pos] = eps;
                let lr = target(&w) - dirichlet_ln_pdf(&gamma, ln_norm, &w);
                if lr.is_finite() {
                    ln_m = ln_m.max(lr);
                }
            }
        }
        if !ln_m.is_finite() {
            return Err(Error::Sampling("could not bound the density envelope".into()));
        }
        Ok(Self { k, target, envelope: env, ln_m: ln_m + 1.2f64.ln() })
    }

    fn draw(&mut self, rng: &mut ChaCha12Rng) -> Result<Vec<f64>> {
        for _ in 0..MAX_ATTEMPTS_PER_DRAW {
            let (w, ln_g) = match &self.envelope {
                Envelope::Uniform => (uniform_simplex(rng, self.k), 0.0),
                Envelope::Dirichlet { gamma, ln_norm } => {
                    let w = draw_dirichlet(gamma, rng);
                    let g = dirichlet_ln_pdf(gamma, *ln_norm, &w);
                    (w, g)
                }
            };
            let ln_ratio = (self.target)(&w) - ln_g - self.ln_m;
            if ln_ratio > 0.0 {
                // estimated bound was violated; inflate and keep going
                self.ln_m += ln_ratio + 1.2f64.ln();
                continue;
            }
            if rng.gen_range(1e-300..1.0f64).ln() < ln_ratio {
                return Ok(w);
            }
        }
        Err(Error::Sampling(format!(
            "no acceptance within {MAX_ATTEMPTS_PER_DRAW} proposals"
        )))
    }
}

fn draw_dirichlet(gamma: &[f64], rng: &mut ChaCha12Rng) -> Vec<f64> {
    let mut g: Vec<f64> = gamma
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("valid shape").sample(rng).max(1e-290))
        .collect();
    let s: f64 = g.iter().sum();
    for v in &mut g {
        *v /= s;
    }
    g
}

fn dirichlet_ln_pdf(gamma: &[f64], ln_norm: f64, w: &[f64]) -> f64 {
    ln_norm + gamma.iter().zip(w).map(|(&a, &x)| (a - 1.0) * x.ln()).sum::<f64>()
}

pub(crate) fn sample_angular(model: &AngularModel, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let d = model.d();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    // probability-scale component decomposition
    let mut probs: Vec<f64> = Vec::new();
    let mut comps: Vec<Component<'_>> = Vec::new();
    match model {
        AngularModel::TiltedDirichlet(_)
        | AngularModel::PairwiseBeta(_)
        | AngularModel::HuslerReiss(_) => {
            probs.push(1.0);
            comps.push(Component::Face {
                members: (0..d).collect(),
                sampler: FaceSampler::build(Box::new(move |w| model.ln_interior(w)), d, &mut rng)?,
            });
        }
        AngularModel::ExtremalT(_) => {
            if d >= 3 {
                return Err(Error::Sampling(
                    "extremal-t sampling requires the full face decomposition, which is only available for d = 2"
                        .into(),
                ));
            }
            let mut atom_total = 0.0;
            for j in 0..d {
                let mass = model.vertex_mass(j)? / d as f64;
                atom_total += mass;
                probs.push(mass);
                comps.push(Component::Atom(j));
            }
            probs.push((1.0 - atom_total).max(0.0));
            comps.push(Component::Face {
                members: (0..d).collect(),
                sampler: FaceSampler::build(Box::new(move |w| model.ln_interior(w)), d, &mut rng)?,
            });
        }
        AngularModel::AsymLogistic(p) => {
            for block in p.blocks() {
                let mass = AsymLogisticParams::block_mass(block) / d as f64;
                if mass <= 0.0 {
                    continue;
                }
                probs.push(mass);
                if block.members.len() == 1 {
                    comps.push(Component::Atom(block.members[0]));
                } else {
                    let members = block.members.clone();
                    let m2 = members.clone();
                    comps.push(Component::Face {
                        members,
                        sampler: FaceSampler::build(
                            Box::new(move |w| p.ln_face_density(&m2, w)),
                            block.members.len(),
                            &mut rng,
                        )?,
                    });
                }
            }
        }
    }

    let total: f64 = probs.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Sampling("no component carries mass".into()));
    }

    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut u = rng.gen_range(0.0..total);
        let mut pick = comps.len() - 1;
        for (i, &p) in probs.iter().enumerate() {
            if u < p {
                pick = i;
                break;
            }
            u -= p;
        }
        match &mut comps[pick] {
            Component::Atom(j) => {
                let mut w = vec![0.0; d];
                w[*j] = 1.0;
                out.push(w);
            }
            Component::Face { members, sampler } => {
                let face = sampler.draw(&mut rng)?;
                let mut w = vec![0.0; d];
                for (pos, &j) in members.iter().enumerate() {
                    w[j] = face[pos];
                }
                out.push(w);
            }
        }
    }
    Ok(out)
}
