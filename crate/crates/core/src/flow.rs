//! Negative gradient flow of `|m[mu]|^2` on the unit sphere of brackets.
//!
//! The flow is discretized as gradient descent with a backtracking line
//! search, stepping along the group action so iterates never leave the
//! orbit. Only the limit matters: the flow from `g . v` ends in `K . v`
//! whenever `v` is distinguished, so `|m|^2` at the limit is an orbit
//! invariant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie_core::{self, BracketTensor};
use crate::linalg::{self, LinearMap};
use crate::moment::{
    self, moment_act, moment_bracket, ActionBasis, BracketRepresentation, SymmetricMatrix,
};

/// Smallest trial step before the line search gives up.
const MIN_STEP: f64 = 1e-16;

/// Relative singular-value cutoff when solving for the step generator.
const GENERATOR_RTOL: f64 = 1e-2;

/// The flow stops unconverged once the accumulated group element is this
/// ill-conditioned; rounding errors transverse to the orbit are no longer
/// under control beyond it.
const MAX_GROUP_CONDITION: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepRule {
    Fixed {
        step: f64,
    },
    Backtracking {
        initial_step: f64,
        shrink: f64,
        sufficient_decrease: f64,
    },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Backtracking {
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub max_steps: usize,
    pub step_rule: StepRule,
    pub grad_tol: f64,
    pub renormalize_every: usize,
    /// Record `(step, |m|^2, |grad|)` every this many steps; `None` disables.
    pub sample_every: Option<usize>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            max_steps: 200_000,
            step_rule: StepRule::default(),
            grad_tol: 1e-9,
            renormalize_every: 1,
            sample_every: None,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let positive_step = match self.step_rule {
            StepRule::Fixed { step } => step > 0.0,
            StepRule::Backtracking {
                initial_step,
                shrink,
                sufficient_decrease,
            } => {
                initial_step > 0.0
                    && shrink > 0.0
                    && shrink < 1.0
                    && (0.0..1.0).contains(&sufficient_decrease)
            }
        };
        if !positive_step || self.grad_tol.is_nan() || self.grad_tol <= 0.0 || self.renormalize_every == 0 {
            return Err(Error::Parse(format!("invalid flow configuration: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowVerdict {
    /// Converged with `c ~ 0`: a zero of the moment map, closed-orbit candidate.
    DistinguishedMinimal,
    DistinguishedNonminimal,
    NotConverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub step: usize,
    pub moment_norm_sq: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowReport {
    /// Unit-norm limit point.
    pub final_point: BracketTensor,
    pub steps_taken: usize,
    pub final_grad_norm: f64,
    /// `|m[mu]|^2` at the limit, always for the full moment map.
    pub final_moment_norm_sq: f64,
    /// The objective actually descended; differs from the above for restricted flows.
    pub final_objective: f64,
    /// `c` with `m(mu) . mu = c mu` at the unit-norm limit.
    pub critical_constant: Option<f64>,
    /// The same constant at the norm of the starting point, `c |mu0|^2`.
    pub scaled_critical_constant: Option<f64>,
    /// `|m(mu) . mu - c mu|` at the unit-norm limit.
    pub criticality_residual: f64,
    pub verdict: FlowVerdict,
    pub trajectory: Vec<TrajectorySample>,
}

struct Candidate {
    point: BracketTensor,
    value: f64,
    g: LinearMap,
    g_inv: LinearMap,
    step: f64,
}

/// The function being descended: `|P m[mu]|^2` for an orthogonal projection
/// `P` onto a space of symmetric generators (the identity when `None`).
struct Objective<'a> {
    basis: Option<&'a ActionBasis<BracketRepresentation>>,
}

impl Objective<'_> {
    /// Orthonormal symmetric maps the iterate is moved by: the generators plus
    /// the identity, whose action only rescales.
    fn step_basis(&self, n: usize) -> Vec<LinearMap> {
        match self.basis {
            None => linalg::symmetric_basis(n),
            Some(b) => {
                let mut maps = b.generators().to_vec();
                maps.push(LinearMap::identity(n, n));
                linalg::orthonormalize_maps(&maps)
            }
        }
    }

    fn projected_moment(&self, unit: &BracketTensor) -> Result<SymmetricMatrix> {
        let m = moment_bracket(unit);
        match self.basis {
            None => Ok(m),
            Some(b) => SymmetricMatrix::new(b.project(m.matrix())),
        }
    }

    fn value(&self, mu: &BracketTensor) -> Result<f64> {
        let unit = mu.normalized()?;
        Ok(self.projected_moment(&unit)?.norm_sq())
    }

    fn gradient(&self, unit: &BracketTensor) -> Result<BracketTensor> {
        match self.basis {
            None => moment::grad_norm_sq(unit),
            Some(b) => moment::grad_norm_sq_restricted(unit, b),
        }
    }
}

pub fn run_flow(mu0: &BracketTensor, config: &FlowConfig) -> Result<FlowReport> {
    descend(mu0, config, &Objective { basis: None })
}

/// Flow along the directions of a subgroup `H`: the descent direction is the
/// projection of `m[mu]` onto `span(generators)` acting on `mu`. Generators are
/// symmetrized and trace-orthonormalized first.
pub fn run_flow_restricted(
    mu0: &BracketTensor,
    generators: &[LinearMap],
    config: &FlowConfig,
) -> Result<FlowReport> {
    let symmetric: Vec<LinearMap> = generators
        .iter()
        .map(|g| (g + g.transpose()) * 0.5)
        .collect();
    let basis = ActionBasis::spanned_by(&symmetric, BracketRepresentation);
    descend(mu0, config, &Objective { basis: Some(&basis) })
}

/// Least-norm `A` in `span(basis)` with `A . unit` the projection of `target`
/// onto the well-conditioned part of the reachable directions. Directions
/// with singular value below [`GENERATOR_RTOL`] relative are dropped: near a
/// soliton they are almost stabilizing and would make `g` blow up.
fn min_norm_generator(
    unit: &BracketTensor,
    target: &BracketTensor,
    basis: &[LinearMap],
) -> Result<LinearMap> {
    let n = unit.dim();
    let system = lie_core::action_matrix(unit, basis)?;
    let rhs = nalgebra::DVector::from_column_slice(target.coeffs());
    let smax = linalg::max_singular_value(&system);
    let coeffs = system
        .svd(true, true)
        .solve(&rhs, GENERATOR_RTOL * smax)
        .map_err(|e| Error::Parse(e.to_string()))?;
    Ok(basis
        .iter()
        .zip(coeffs.iter())
        .fold(LinearMap::zeros(n, n), |acc, (e, &w)| acc + e * w))
}

fn descend(mu0: &BracketTensor, config: &FlowConfig, objective: &Objective) -> Result<FlowReport> {
    config.validate()?;
    let initial_norm = mu0.norm();
    let base = mu0.normalized()?;
    let n = base.dim();
    // The iterate is kept as g . base and rebuilt from base at every step.
    // Critical points are typically saddles of |m|^2 on all of V, so errors
    // transverse to the orbit would otherwise grow geometrically.
    let step_basis = objective.step_basis(n);
    let mut g = LinearMap::identity(n, n);
    let mut g_inv = LinearMap::identity(n, n);
    let mut x = base.clone();
    let mut f = objective.value(&x)?;
    let mut trajectory = Vec::new();
    let mut last_step = match config.step_rule {
        StepRule::Fixed { step } => step,
        StepRule::Backtracking { initial_step, .. } => initial_step,
    };
    let mut steps = 0;
    let mut unit = x.clone();
    let mut grad = objective.gradient(&unit)?;
    let mut grad_norm = grad.norm();

    while steps < config.max_steps && grad_norm > config.grad_tol {
        if let Some(every) = config.sample_every {
            if steps % every == 0 {
                trajectory.push(TrajectorySample {
                    step: steps,
                    moment_norm_sq: f,
                    grad_norm,
                });
            }
        }
        // Step along the group: x <- exp(-s A) . x where A is the least-norm
        // element of the step space with A . u = grad. To first order this is
        // x - s grad; taking the least-norm A keeps g bounded, since the
        // stabilizer of the limit (its symmetric derivations) is never entered.
        let r = x.norm();
        let generator = min_norm_generator(&unit, &grad, &step_basis)?;
        let scale = 1.0 / (r * r);
        let direction = lie_core::gl_infinitesimal_act(&generator, &unit)?;
        let slope = lie_core::inner_product_v(&direction, &grad)? * scale;
        // Rounding slack: below this level decreases of f are not measurable.
        // Errors in m are O(eps), so errors in |m|^2 are O(eps (f + sqrt f)).
        let slack = 16.0 * f64::EPSILON * (f + f.sqrt());
        let trial = |h: f64| -> Result<Candidate> {
            let (e, e_inv) = lie_core::symmetric_exp_pair(&generator, -h * scale);
            let g_next = e * &g;
            let g_inv_next = &g_inv * e_inv;
            let point = lie_core::act_with_inverse(&g_next, &g_inv_next, &base)?;
            let value = objective.value(&point)?;
            Ok(Candidate {
                point,
                value,
                g: g_next,
                g_inv: g_inv_next,
                step: h,
            })
        };

        let accepted = match config.step_rule {
            StepRule::Fixed { step } => Some(trial(step)?),
            StepRule::Backtracking {
                initial_step,
                shrink,
                sufficient_decrease,
            } => {
                let mut h = initial_step.min(2.0 * last_step);
                loop {
                    let cand = trial(h)?;
                    if cand.value <= f - sufficient_decrease * h * slope {
                        break Some(cand);
                    }
                    // Decrease below rounding level: accept only if the step
                    // has not passed the minimum along the search line.
                    if cand.value <= f + slack {
                        let g_cand = objective.gradient(&cand.point.normalized()?)?;
                        if lie_core::inner_product_v(&g_cand, &grad)? >= 0.0 {
                            break Some(cand);
                        }
                    }
                    h *= shrink;
                    if h < MIN_STEP {
                        break None;
                    }
                }
            }
        };
        // A stalled line search means no improvement is measurable any more.
        let Some(cand) = accepted else { break };
        if matches!(config.step_rule, StepRule::Backtracking { .. }) {
            assert!(
                cand.value <= f + slack,
                "objective increased from {f} to {} at step {steps}",
                cand.value
            );
        }
        last_step = cand.step;
        steps += 1;
        x = cand.point;
        f = cand.value;
        g = cand.g;
        g_inv = cand.g_inv;
        if steps % config.renormalize_every == 0 {
            // (t g) . mu = t^-1 (g . mu)
            let r = x.norm();
            x = x.scale(1.0 / r);
            g *= r;
            g_inv /= r;
        }
        unit = x.normalized()?;
        grad = objective.gradient(&unit)?;
        grad_norm = grad.norm();
        if linalg::condition_number(&g) > MAX_GROUP_CONDITION {
            break;
        }
    }

    let final_point = unit;
    let projected = objective.projected_moment(&final_point)?;
    let w = moment_act(&projected, &final_point)?;
    let c = lie_core::inner_product_v(&w, &final_point)?;
    let criticality_residual = w.add_scaled(-c, &final_point)?.norm();
    let final_moment_norm_sq = moment::moment_norm_sq(&final_point)?;

    let converged = grad_norm <= config.grad_tol;
    let verdict = if !converged {
        FlowVerdict::NotConverged
    } else if c.abs() <= 10.0 * config.grad_tol {
        FlowVerdict::DistinguishedMinimal
    } else {
        FlowVerdict::DistinguishedNonminimal
    };
    if config.sample_every.is_some() {
        trajectory.push(TrajectorySample {
            step: steps,
            moment_norm_sq: f,
            grad_norm,
        });
    }
    let critical_constant = converged.then_some(c);
    Ok(FlowReport {
        final_point,
        steps_taken: steps,
        final_grad_norm: grad_norm,
        final_moment_norm_sq,
        final_objective: projected.norm_sq(),
        critical_constant,
        scaled_critical_constant: critical_constant.map(|c| c * initial_norm * initial_norm),
        criticality_residual,
        verdict,
        trajectory,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolitonVerdict {
    /// `c` is reported at the norm of the input bracket.
    EinsteinNilradical {
        c: f64,
        soliton_point: BracketTensor,
    },
    /// Reserved: the flow alone never certifies a negative.
    NotEinsteinNilradical,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonAnalysis {
    pub verdict: SolitonVerdict,
    pub nilpotency_class: usize,
    pub flow: Option<FlowReport>,
    /// Why the verdict is `Undetermined`, when it is.
    pub reason: Option<String>,
}

impl SolitonAnalysis {
    pub fn is_einstein_nilradical(&self) -> bool {
        matches!(self.verdict, SolitonVerdict::EinsteinNilradical { .. })
    }

    pub fn critical_constant(&self) -> Option<f64> {
        match self.verdict {
            SolitonVerdict::EinsteinNilradical { c, .. } => Some(c),
            _ => None,
        }
    }
}

/// Runs the flow from a nilpotent bracket and reads off whether its metric
/// Lie algebra is an Einstein nilradical.
///
/// A converged limit is accepted as a soliton in the orbit only when its
/// derivation algebra has the same dimension as that of the start (equal
/// orbit dimension); a limit that dropped into the orbit boundary gives
/// `Undetermined`.
pub fn soliton_verdict(mu: &BracketTensor, config: &FlowConfig) -> Result<SolitonAnalysis> {
    let nilpotency_class = lie_core::nilpotency_class(mu)?;
    if mu.is_zero() {
        return Ok(SolitonAnalysis {
            verdict: SolitonVerdict::EinsteinNilradical {
                c: 0.0,
                soliton_point: mu.clone(),
            },
            nilpotency_class,
            flow: None,
            reason: None,
        });
    }
    let report = run_flow(mu, config)?;
    if report.verdict == FlowVerdict::NotConverged {
        return Ok(SolitonAnalysis {
            verdict: SolitonVerdict::Undetermined,
            nilpotency_class,
            reason: Some(format!(
                "flow did not converge: |grad| = {:e} after {} steps",
                report.final_grad_norm, report.steps_taken
            )),
            flow: Some(report),
        });
    }
    let start_der = lie_core::derivation_space(mu, false)?.len();
    let limit_der = lie_core::derivation_space(&report.final_point, false)?.len();
    if start_der != limit_der {
        return Ok(SolitonAnalysis {
            verdict: SolitonVerdict::Undetermined,
            nilpotency_class,
            reason: Some(format!(
                "flow limit left the orbit: dim Der changed from {start_der} to {limit_der}"
            )),
            flow: Some(report),
        });
    }
    let c = report
        .scaled_critical_constant
        .expect("converged flows carry a constant");
    Ok(SolitonAnalysis {
        verdict: SolitonVerdict::EinsteinNilradical {
            c,
            soliton_point: report.final_point.clone(),
        },
        nilpotency_class,
        flow: Some(report),
        reason: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::{gl_act, independent_dim, inner_product_v};
    use crate::linalg;
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn heisenberg_is_a_fixed_point() {
        let report = run_flow(&BracketTensor::heisenberg(), &FlowConfig::default()).unwrap();
        assert!(report.steps_taken <= 1);
        assert_eq!(report.verdict, FlowVerdict::DistinguishedNonminimal);
        assert!((report.scaled_critical_constant.unwrap() - 12.0).abs() < 1e-9);
        assert!((report.critical_constant.unwrap() - 6.0).abs() < 1e-9);
        assert!((report.final_moment_norm_sq - 12.0).abs() < 1e-12);
    }

    #[test]
    fn flow_from_deformed_heisenberg_returns_to_its_k_orbit() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = linalg::random_well_conditioned(&mut rng, 3, 10.0);
        let start = gl_act(&g, &BracketTensor::heisenberg()).unwrap();
        let config = FlowConfig {
            sample_every: Some(10),
            ..FlowConfig::default()
        };
        let report = run_flow(&start, &config).unwrap();
        assert_eq!(report.verdict, FlowVerdict::DistinguishedNonminimal);
        assert!((report.final_moment_norm_sq - 12.0).abs() < 1e-6);
        assert!(report.criticality_residual < 1e-6);
        assert!((report.final_point.norm() - 1.0).abs() < 1e-12);
        for pair in report.trajectory.windows(2) {
            assert!(pair[1].moment_norm_sq <= pair[0].moment_norm_sq + 1e-12);
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let g = linalg::random_well_conditioned(&mut rng, 5, 10.0);
        let start = gl_act(&g, &BracketTensor::filiform(5)).unwrap();
        let config = FlowConfig {
            max_steps: 2,
            ..FlowConfig::default()
        };
        let report = run_flow(&start, &config).unwrap();
        assert_eq!(report.verdict, FlowVerdict::NotConverged);
        assert!(report.final_grad_norm > config.grad_tol);
        assert_eq!(report.critical_constant, None);
    }

    #[test]
    fn fixed_step_and_lazy_renormalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let g = linalg::random_well_conditioned(&mut rng, 3, 3.0);
        let start = gl_act(&g, &BracketTensor::heisenberg()).unwrap();
        let config = FlowConfig {
            step_rule: StepRule::Fixed { step: 0.01 },
            renormalize_every: 5,
            ..FlowConfig::default()
        };
        let report = run_flow(&start, &config).unwrap();
        assert_eq!(report.verdict, FlowVerdict::DistinguishedNonminimal);
        assert!((report.final_moment_norm_sq - 12.0).abs() < 1e-6);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let config = FlowConfig {
            grad_tol: 0.0,
            ..FlowConfig::default()
        };
        assert!(run_flow(&BracketTensor::heisenberg(), &config).is_err());
        assert!(matches!(
            run_flow(&BracketTensor::zeros(3), &FlowConfig::default()),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn full_generators_reproduce_the_unrestricted_trajectory() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let g = linalg::random_well_conditioned(&mut rng, 3, 5.0);
        let start = gl_act(&g, &BracketTensor::heisenberg()).unwrap();
        let config = FlowConfig::default();
        let full = run_flow(&start, &config).unwrap();
        let restricted = run_flow_restricted(&start, &linalg::symmetric_basis(3), &config).unwrap();
        assert_eq!(full.steps_taken, restricted.steps_taken);
        assert!(full.final_point.max_abs_diff(&restricted.final_point) < 1e-10);
    }

    #[test]
    fn traceless_restricted_flow_reaches_a_zero_of_the_moment_map() {
        // SL(3) on a generic element of V: generic orbits are closed, so the
        // sl-moment map flows to zero.
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let v = linalg::gaussian_matrix(&mut rng, independent_dim(3), 1);
        let start = BracketTensor::from_independent(3, v.as_slice()).unwrap();
        let report =
            run_flow_restricted(&start, &linalg::traceless_symmetric_basis(3), &FlowConfig::default())
                .unwrap();
        assert_eq!(report.verdict, FlowVerdict::DistinguishedMinimal);
        assert!(report.final_objective < 1e-12);
    }

    #[test]
    fn soliton_examples() {
        let config = FlowConfig::default();
        let heis = soliton_verdict(&BracketTensor::heisenberg(), &config).unwrap();
        assert_eq!(heis.nilpotency_class, 2);
        assert!((heis.critical_constant().unwrap() - 12.0).abs() < 1e-8);

        let abelian = soliton_verdict(&BracketTensor::zeros(4), &config).unwrap();
        assert_eq!(abelian.critical_constant(), Some(0.0));
        assert!(abelian.flow.is_none());

        let fil = soliton_verdict(&BracketTensor::filiform(4), &config).unwrap();
        assert!(fil.is_einstein_nilradical(), "{:?}", fil.reason);
        let SolitonVerdict::EinsteinNilradical { soliton_point, .. } = &fil.verdict else {
            unreachable!()
        };
        // Criterion check at the limit: m(mu) . mu = c mu within 1e-8.
        let w = moment_act(&moment_bracket(soliton_point), soliton_point).unwrap();
        let c = inner_product_v(&w, soliton_point).unwrap();
        assert!(w.add_scaled(-c, soliton_point).unwrap().norm() < 1e-8);
    }

    #[test]
    fn soliton_rejects_non_nilpotent_input() {
        let solv = BracketTensor::from_constants(3, &[(0, 1, 2, 1.0), (0, 2, 1, 1.0)]).unwrap();
        assert!(matches!(
            soliton_verdict(&solv, &FlowConfig::default()),
            Err(Error::NotNilpotent { .. })
        ));
        let bad = BracketTensor::from_constants(3, &[(0, 1, 0, 1.0), (0, 2, 1, 1.0)]).unwrap();
        assert!(matches!(
            soliton_verdict(&bad, &FlowConfig::default()),
            Err(Error::JacobiViolation { .. })
        ));
    }

    #[test]
    fn restricted_flow_on_heisenberg_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let mut h = DMatrix::zeros(3, 3);
        h.view_mut((0, 0), (2, 2))
            .copy_from(&linalg::random_well_conditioned(&mut rng, 2, 5.0));
        h[(2, 2)] = 1.7;
        let start = gl_act(&h, &BracketTensor::heisenberg()).unwrap();
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 2.0]));
        assert!(lie_core::gl_infinitesimal_act(&d, &start).unwrap().norm() < 1e-12);
        let mut gens = linalg::symmetric_basis(2)
            .into_iter()
            .map(|s| {
                let mut e = DMatrix::zeros(3, 3);
                e.view_mut((0, 0), (2, 2)).copy_from(&s);
                e
            })
            .collect::<Vec<_>>();
        let mut last = DMatrix::zeros(3, 3);
        last[(2, 2)] = 1.0;
        gens.push(last);
        let config = FlowConfig::default();
        let restricted = run_flow_restricted(&start, &gens, &config).unwrap();
        let full = run_flow(&start, &config).unwrap();
        assert_eq!(restricted.verdict, full.verdict);
        assert!((restricted.final_moment_norm_sq - full.final_moment_norm_sq).abs() < 1e-6);
        assert!((restricted.final_objective - restricted.final_moment_norm_sq).abs() < 1e-9);
    }

    #[test]
    fn limit_value_is_an_orbit_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let config = FlowConfig::default();
        for n in [4, 5] {
            let base = BracketTensor::filiform(n);
            let reference = run_flow(&base, &config).unwrap();
            for _ in 0..3 {
                let g = linalg::random_well_conditioned(&mut rng, n, 10.0);
                let start = gl_act(&g, &base).unwrap();
                let analysis = soliton_verdict(&start, &config).unwrap();
                assert!(analysis.is_einstein_nilradical(), "{:?}", analysis.reason);
                let report = analysis.flow.unwrap();
                assert!(
                    (report.final_moment_norm_sq - reference.final_moment_norm_sq).abs() < 1e-8
                );
                assert!(lie_core::jacobi_residual(&report.final_point) < 1e-10);
            }
        }
    }
}
