use super::metrics::{compute_metrics, Checker, MetricOptions, MetricsRow};
use super::sweep::cell_seed;
use crate::error::{Error, Result};
use crate::model::IsingModel;
use crate::reduction::{AlmState, LinearConstraint};
use crate::sampling::Sampler;
use rayon::prelude::*;

/// A constrained problem rebuilt for a given `(lambda, eps)`.
#[derive(Debug, Clone)]
pub struct AlmProblem {
    pub model: IsingModel,
    pub constraints: Vec<LinearConstraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlmStep {
    /// State the iteration's model was built with.
    pub state: AlmState,
    pub epsilon: f64,
    /// Mean constraint residual of the best sample.
    pub residual: f64,
    pub row: MetricsRow,
}

#[derive(Clone, Copy)]
pub struct AlmRun<'a> {
    pub sampler: &'a dyn Sampler,
    pub reads: u64,
    pub seed: u64,
    pub options: MetricOptions,
    pub checker: Option<&'a dyn Checker>,
}

/// Iterates: build with `(lambda, eps = -u / 2 lambda)`, sample, take the
/// lowest-energy sample, update `u` and `lambda` from its residual. With
/// several constraints the residual is their mean, matching a single shared
/// `eps`.
pub fn alm_experiment<F>(build: F, state0: AlmState, iterations: usize, run: AlmRun) -> Result<Vec<AlmStep>>
where
    F: Fn(f64, f64) -> Result<AlmProblem>,
{
    if iterations == 0 {
        return Err(Error::param("at least one ALM iteration is required"));
    }
    let mut state = state0;
    let mut trace = Vec::with_capacity(iterations);
    for t in 0..iterations {
        let epsilon = state.epsilon();
        let problem = build(state.lambda, epsilon)?;
        let samples = run.sampler.sample(&problem.model, run.reads, cell_seed(run.seed, t as u64, 0))?;
        let best = samples.lowest().ok_or_else(|| Error::param("sampler returned no samples"))?;
        let assignment = samples.assignment(best);
        let residual = mean_residual(&problem.constraints, &assignment)?;
        let row = compute_metrics(&samples, &run.options, None, run.checker)?;
        trace.push(AlmStep {
            state,
            epsilon,
            residual,
            row,
        });
        state = state.update(residual);
    }
    Ok(trace)
}

fn mean_residual(constraints: &[LinearConstraint], a: &crate::model::SpinAssignment) -> Result<f64> {
    if constraints.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for c in constraints {
        sum += c.evaluate(a)?;
    }
    Ok(sum / constraints.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub lambda: f64,
    pub epsilon: f64,
    pub row: MetricsRow,
}

/// Non-iterative protocol: one sampling run per `(lambda, eps)` pair, in
/// parallel, rows ordered by lambda then eps as given.
pub fn epsilon_grid_sweep<F>(build: F, lambdas: &[f64], epsilons: &[f64], run: AlmRun) -> Result<Vec<GridCell>>
where
    F: Fn(f64, f64) -> Result<AlmProblem> + Sync,
{
    let jobs: Vec<(usize, usize)> = (0..lambdas.len())
        .flat_map(|l| (0..epsilons.len()).map(move |e| (l, e)))
        .collect();
    jobs.par_iter()
        .map(|&(l, e)| {
            let (lambda, epsilon) = (lambdas[l], epsilons[e]);
            let problem = build(lambda, epsilon)?;
            let samples = run
                .sampler
                .sample(&problem.model, run.reads, cell_seed(run.seed, l as u64, e))?;
            Ok(GridCell {
                lambda,
                epsilon,
                row: compute_metrics(&samples, &run.options, None, run.checker)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Var;
    use crate::reduction::perturbed_penalty;
    use crate::sampling::ExactSampler;

    fn one_hot_problem(lambda: f64, eps: f64) -> Result<AlmProblem> {
        let g = LinearConstraint::one_hot((0..3).map(Var))?;
        let mut q = perturbed_penalty(&g, lambda, eps)?;
        q.add_linear(Var(0), 0.5);
        Ok(AlmProblem {
            model: q.to_ising(),
            constraints: vec![g],
        })
    }

    fn run(sampler: &dyn Sampler) -> AlmRun<'_> {
        AlmRun {
            sampler,
            reads: 10,
            seed: 0,
            options: MetricOptions::default(),
            checker: None,
        }
    }

    #[test]
    fn lambda_grows_geometrically_and_u_stays_when_feasible() {
        let sampler = ExactSampler::zero_temperature();
        let state0 = AlmState::new(0.0, 1.0, 2.0).unwrap();
        let trace = alm_experiment(one_hot_problem, state0, 4, run(&sampler)).unwrap();
        for (t, step) in trace.iter().enumerate() {
            assert_eq!(step.state.lambda, 2f64.powi(t as i32));
            assert_eq!(step.residual, 0.0);
            assert_eq!(step.state.u, 0.0);
        }
    }

    #[test]
    fn three_iterations_multiply_lambda_by_eight() {
        let sampler = ExactSampler::zero_temperature();
        let state0 = AlmState::new(0.0, 0.5, 2.0).unwrap();
        let trace = alm_experiment(one_hot_problem, state0, 3, run(&sampler)).unwrap();
        assert_eq!(trace[2].state.update(trace[2].residual).lambda, 4.0);
    }

    #[test]
    fn zero_iterations_rejected() {
        let sampler = ExactSampler::zero_temperature();
        let state0 = AlmState::new(0.0, 1.0, 2.0).unwrap();
        assert!(alm_experiment(one_hot_problem, state0, 0, run(&sampler)).is_err());
    }

    #[test]
    fn grid_order() {
        let sampler = ExactSampler::zero_temperature();
        let cells = epsilon_grid_sweep(one_hot_problem, &[1.0, 2.0], &[0.0, 0.1, 0.2], run(&sampler)).unwrap();
        let keys: Vec<(f64, f64)> = cells.iter().map(|c| (c.lambda, c.epsilon)).collect();
        assert_eq!(keys, vec![(1.0, 0.0), (1.0, 0.1), (1.0, 0.2), (2.0, 0.0), (2.0, 0.1), (2.0, 0.2)]);
    }
}
