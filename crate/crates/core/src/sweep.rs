//! Dilation-path profiles and the concentration sweep
//!
//! Two instruments around the penalized solver. The path profile
//! samples the penalized energy along each well's dilation path
//! t -> W_t = cutoff * U_i(. / t); its maximum estimates the per-well
//! min-max level from above, and the t where it sinks below -2 is the
//! endpoint the mountain-pass construction needs. The sweep runs the
//! solver over a descending list of eps on one shared grid and records
//! the concentration diagnostics per eps: peak drift toward the well
//! bottoms, the penalty value, decay rates, the escaped mass, and the
//! distance of the rescaled profile to the limit state.

use crate::ansatz::AnsatzSpec;
use crate::energy::eval_penalized;
use crate::field::ScalarField;
use crate::nonlinearity::Nonlinearity;
use crate::ops::sample;
use crate::penalize::Penalization;
use crate::riesz::RieszOperator;
use crate::saddle::{rescaled_potential, solve_penalized, SaddleOptions, SemiclassicalSolution};
use crate::{CoreError, Result};

/// Samples of the penalized energy along one well's dilation path.
pub struct PathProfile {
    pub well: usize,
    pub t_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    /// Squared eps-norm (kinetic plus weighted mass) per sample; tends
    /// to 0 with t, which pins the left end of the path at the origin.
    pub norm_sq_values: Vec<f64>,
    /// First sampled t with Gamma < -2, the admissible path endpoint.
    pub crossing_t: f64,
    /// Path maximum: an upper bound for this well's min-max level.
    pub level_estimate: f64,
    pub argmax_t: f64,
}

/// Energy aggregates of the multi-bump construction.
#[derive(Debug, Clone, Copy)]
pub struct LevelAggregates {
    /// Sum of the per-well path maxima, the upper estimate of the
    /// combined min-max level.
    pub d_estimate: f64,
    /// Sum of the limit energies of all wells.
    pub limit_sum: f64,
    /// Largest drop-one sum of limit energies; strictly below
    /// `limit_sum` whenever every level is positive and there are at
    /// least two wells.
    pub drop_one_max: f64,
}

/// Sum and largest drop-one sum of the per-well limit energies.
pub fn limit_level_sums(levels: &[f64]) -> (f64, f64) {
    let total: f64 = levels.iter().sum();
    let drop_one = levels
        .iter()
        .map(|e| total - e)
        .fold(0.0f64, f64::max);
    (total, drop_one)
}

fn check_t_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(CoreError::InvalidParameter(
            "dilation grid must not be empty".into(),
        ));
    }
    if t_grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(CoreError::InvalidParameter(
            "dilation grid must be positive and finite".into(),
        ));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::InvalidParameter(
            "dilation grid must be strictly ascending".into(),
        ));
    }
    Ok(())
}

fn profile_one(
    op: &mut RieszOperator,
    nl: &dyn Nonlinearity,
    ansatz: &AnsatzSpec,
    pen: &Penalization,
    v_eps: &ScalarField,
    bump: usize,
    t_grid: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = op.grid();
    let eps = pen.epsilon();
    let mut gammas = Vec::with_capacity(t_grid.len());
    let mut norms = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let w = ansatz.bump_field(grid, eps, bump, t)?;
        let ev = eval_penalized(op, nl, v_eps, pen, &w)?;
        gammas.push(ev.energy.total);
        norms.push(ev.energy.kinetic + ev.energy.mass);
    }
    Ok((gammas, norms))
}

/// Sample every well's dilation path. Errors if any path fails to sink
/// below -2 within the sampled range; the profile for well i comes
/// with the shared level aggregates.
pub fn path_profiles(
    op: &mut RieszOperator,
    nl: &dyn Nonlinearity,
    ansatz: &AnsatzSpec,
    pen: &Penalization,
    t_grid: &[f64],
) -> Result<(Vec<PathProfile>, LevelAggregates)> {
    check_t_grid(t_grid)?;
    let v_eps = rescaled_potential(ansatz.potential(), op.grid(), pen.epsilon());
    let mut profiles = Vec::with_capacity(ansatz.bumps().len());
    let mut d_estimate = 0.0;
    for i in 0..ansatz.bumps().len() {
        let (gammas, norms) = profile_one(op, nl, ansatz, pen, &v_eps, i, t_grid)?;
        let mut level = f64::NEG_INFINITY;
        let mut argmax = t_grid[0];
        let mut crossing = None;
        for (k, &g) in gammas.iter().enumerate() {
            if g > level {
                level = g;
                argmax = t_grid[k];
            }
            if crossing.is_none() && g < -2.0 {
                crossing = Some(t_grid[k]);
            }
        }
        let Some(crossing_t) = crossing else {
            return Err(CoreError::PathLevelNotReached {
                level: -2.0,
                t_max: *t_grid.last().unwrap(),
            });
        };
        d_estimate += level;
        profiles.push(PathProfile {
            well: ansatz.bumps()[i].well,
            t_values: t_grid.to_vec(),
            gamma_values: gammas,
            norm_sq_values: norms,
            crossing_t,
            level_estimate: level,
            argmax_t: argmax,
        });
    }
    let levels: Vec<f64> = ansatz
        .bumps()
        .iter()
        .map(|b| b.state.energy.total)
        .collect();
    let (limit_sum, drop_one_max) = limit_level_sums(&levels);
    Ok((
        profiles,
        LevelAggregates {
            d_estimate,
            limit_sum,
            drop_one_max,
        },
    ))
}

/// Everything recorded about one sweep entry.
pub struct SweepRecord {
    pub solution: SemiclassicalSolution,
    /// L2 distance between the solution recentred at each well's peak
    /// and that well's limit state, sampled over the limit grid; None
    /// when the well lost its peak.
    pub profile_dists: Vec<Option<f64>>,
    /// Unweighted squared mass outside the rescaled wells.
    pub outside_mass: f64,
}

/// The sweep output: per-eps records (failures kept, not fatal) plus
/// the level aggregates measured at the smallest eps.
pub struct ConcentrationReport {
    pub entries: Vec<(f64, Result<SweepRecord>)>,
    pub aggregates: LevelAggregates,
}

/// Options for the sweep: solver knobs, the penalty exponent, and the
/// dilation grid for the level estimate.
#[derive(Clone)]
pub struct SweepOptions {
    pub saddle: SaddleOptions,
    pub mu: f64,
    pub t_grid: Vec<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            saddle: SaddleOptions::default(),
            mu: 2.0,
            t_grid: (1..=32).map(|k| 0.05 + 0.05 * k as f64).collect(),
        }
    }
}

/// Run the penalized solver over a descending eps list on one shared
/// grid, rebuilding the ansatz guess per entry.
pub fn sweep_epsilon(
    op: &mut RieszOperator,
    nl: &dyn Nonlinearity,
    ansatz: &AnsatzSpec,
    eps_list: &[f64],
    opts: &SweepOptions,
) -> Result<ConcentrationReport> {
    if eps_list.is_empty() {
        return Err(CoreError::InvalidParameter("empty eps list".into()));
    }
    if eps_list.iter().any(|&e| !(e > 0.0) || !e.is_finite())
        || eps_list.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(CoreError::InvalidParameter(
            "eps list must be positive and strictly descending".into(),
        ));
    }
    let grid = op.grid();
    let eps_min = *eps_list.last().unwrap();
    let reach = ansatz
        .bumps()
        .iter()
        .map(|b| b.anchor.iter().fold(0.0f64, |m, c| m.max(c.abs())))
        .fold(0.0f64, f64::max);
    let needed = 2.0 * reach / eps_min + 10.0;
    if grid.half_length() < needed - 1e-9 {
        return Err(CoreError::BoxTooSmall {
            needed,
            have: grid.half_length(),
        });
    }

    let mut entries = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let entry = run_entry(op, nl, ansatz, eps, opts);
        entries.push((eps, entry));
    }

    let pen_small = Penalization::new(ansatz.potential(), grid, eps_min, opts.mu)?;
    let v_eps = rescaled_potential(ansatz.potential(), grid, eps_min);
    let mut d_estimate = 0.0;
    for i in 0..ansatz.bumps().len() {
        let (gammas, _) = profile_one(op, nl, ansatz, &pen_small, &v_eps, i, &opts.t_grid)?;
        d_estimate += gammas.iter().fold(f64::NEG_INFINITY, |m, &g| m.max(g));
    }
    let levels: Vec<f64> = ansatz
        .bumps()
        .iter()
        .map(|b| b.state.energy.total)
        .collect();
    let (limit_sum, drop_one_max) = limit_level_sums(&levels);

    Ok(ConcentrationReport {
        entries,
        aggregates: LevelAggregates {
            d_estimate,
            limit_sum,
            drop_one_max,
        },
    })
}

fn run_entry(
    op: &mut RieszOperator,
    nl: &dyn Nonlinearity,
    ansatz: &AnsatzSpec,
    eps: f64,
    opts: &SweepOptions,
) -> Result<SweepRecord> {
    let grid = op.grid();
    let pen = Penalization::new(ansatz.potential(), grid, eps, opts.mu)?;
    let guess = ansatz.initial_guess(grid, eps)?;
    let solution = solve_penalized(op, nl, ansatz.potential(), &pen, &guess, &opts.saddle)?;
    let profile_dists = profile_distances(&solution, ansatz);
    let outside_mass = escaped_mass(&solution.field, ansatz, eps);
    Ok(SweepRecord {
        solution,
        profile_dists,
        outside_mass,
    })
}

/// L2 distance of the solution, recentred at the peak it formed in
/// each well, to that well's limit state, sampled over the limit
/// state's own grid.
pub fn profile_distances(solution: &SemiclassicalSolution, ansatz: &AnsatzSpec) -> Vec<Option<f64>> {
    ansatz
        .bumps()
        .iter()
        .map(|b| {
            let peak = solution.peaks.iter().find(|p| p.well == b.well)?;
            let lim = &b.state.field;
            let lg = lim.grid();
            let mut acc = 0.0;
            let nl2 = lg.n();
            for ix in 0..nl2 {
                let zx = lg.coord(ix);
                for iy in 0..nl2 {
                    let zy = lg.coord(iy);
                    for iz in 0..nl2 {
                        let zz = lg.coord(iz);
                        let here = sample(
                            &solution.field,
                            [
                                peak.grid_location[0] + zx,
                                peak.grid_location[1] + zy,
                                peak.grid_location[2] + zz,
                            ],
                        );
                        let d = here - lim.data()[lg.index(ix, iy, iz)];
                        acc += d * d;
                    }
                }
            }
            Some((acc * lg.cell_volume()).sqrt())
        })
        .collect()
}

/// Squared mass of the field outside the rescaled wells.
pub fn escaped_mass(u: &ScalarField, ansatz: &AnsatzSpec, eps: f64) -> f64 {
    let grid = u.grid();
    let n = grid.n();
    let pot = ansatz.potential();
    let mut acc = 0.0;
    for ix in 0..n {
        let x = grid.coord(ix);
        for iy in 0..n {
            let y = grid.coord(iy);
            for iz in 0..n {
                let z = grid.coord(iz);
                if !pot.inside_well([eps * x, eps * y, eps * z]) {
                    let v = u.data()[grid.index(ix, iy, iz)];
                    acc += v * v;
                }
            }
        }
    }
    acc * grid.cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::AnsatzSpec;
    use crate::energy::EnergyBreakdown;
    use crate::grid::GridSpec;
    use crate::limit::{GroundState, SolveMethod};
    use crate::nonlinearity::Power;
    use crate::potential::{MultiWell, Well};
    use crate::riesz::ZeroModeRule;
    use approx::assert_relative_eq;

    fn synthetic_state(grid: GridSpec, a: f64, energy: f64) -> GroundState {
        let rate = a.sqrt();
        let field = ScalarField::from_fn(grid, |x, y, z| {
            4.0 * (-rate * (x * x + y * y + z * z).sqrt()).exp()
        });
        GroundState {
            a,
            field,
            energy: EnergyBreakdown::assemble(2.0 * energy, 0.0, 0.0, 0.0),
            pohozaev_resid: 0.0,
            grad_resid: 0.0,
            method: SolveMethod::SourceIteration,
            iterations: 0,
        }
    }

    fn double_well_ansatz() -> AnsatzSpec {
        let grid = GridSpec::new(16, 12.0).unwrap();
        let pot = MultiWell::new(
            2.0,
            vec![
                Well {
                    center: [-4.5, 0.0, 0.0],
                    radius: 3.0,
                    depth: 1.0,
                },
                Well {
                    center: [4.5, 0.0, 0.0],
                    radius: 3.0,
                    depth: 1.2,
                },
            ],
        )
        .unwrap();
        let states = vec![
            (0, synthetic_state(grid, 1.0, 32.0)),
            (1, synthetic_state(grid, 1.2, 39.0)),
        ];
        AnsatzSpec::new(pot, states, Some(0.27)).unwrap()
    }

    #[test]
    fn level_sums_drop_the_largest_component() {
        let (total, drop) = limit_level_sums(&[32.0, 39.0]);
        assert_relative_eq!(total, 71.0);
        assert_relative_eq!(drop, 39.0);
        let (t1, d1) = limit_level_sums(&[5.0]);
        assert_relative_eq!(t1, 5.0);
        assert_relative_eq!(d1, 0.0);
        let (_, d3) = limit_level_sums(&[1.0, 2.0, 3.0]);
        assert_relative_eq!(d3, 5.0);
        assert!(d3 < 6.0);
    }

    #[test]
    fn sweep_validates_eps_list_and_box() {
        let ansatz = double_well_ansatz();
        let nl = Power::new(3.0).unwrap();
        let grid = GridSpec::new(16, 46.0).unwrap();
        let mut op = RieszOperator::new(grid, 2.0, ZeroModeRule::LatticeCorrected).unwrap();
        let opts = SweepOptions::default();

        assert!(sweep_epsilon(&mut op, &nl, &ansatz, &[], &opts).is_err());
        assert!(sweep_epsilon(&mut op, &nl, &ansatz, &[0.25, 0.35], &opts).is_err());
        assert!(sweep_epsilon(&mut op, &nl, &ansatz, &[0.5, -0.25], &opts).is_err());

        let tight = GridSpec::new(16, 30.0).unwrap();
        let mut op_tight =
            RieszOperator::new(tight, 2.0, ZeroModeRule::LatticeCorrected).unwrap();
        match sweep_epsilon(&mut op_tight, &nl, &ansatz, &[0.5, 0.25], &opts) {
            Err(CoreError::BoxTooSmall { needed, .. }) => {
                assert_relative_eq!(needed, 46.0);
            }
            Err(e) => panic!("expected BoxTooSmall, got {e}"),
            Ok(_) => panic!("expected BoxTooSmall, got a report"),
        }
    }

    #[test]
    fn dilation_grid_is_validated() {
        assert!(check_t_grid(&[]).is_err());
        assert!(check_t_grid(&[0.5, 0.5]).is_err());
        assert!(check_t_grid(&[0.5, 0.4]).is_err());
        assert!(check_t_grid(&[-0.1, 0.5]).is_err());
        assert!(check_t_grid(&[0.2, 0.4, 1.0]).is_ok());
    }

    #[test]
    fn escaped_mass_sees_only_the_outside() {
        let ansatz = double_well_ansatz();
        let grid = GridSpec::new(32, 23.0).unwrap();
        let eps = 0.5;
        let inside = ScalarField::from_fn(grid, |x, y, z| {
            let r2 = (x + 9.0).powi(2) + y * y + z * z;
            (-2.0 * r2).exp()
        });
        assert_eq!(escaped_mass(&inside, &ansatz, eps), 0.0);

        let outside = ScalarField::from_fn(grid, |x, y, z| {
            let r2 = x * x + y * y + z * z;
            (-2.0 * r2).exp()
        });
        let m = escaped_mass(&outside, &ansatz, eps);
        assert_relative_eq!(m, outside.l2_norm_sq(), max_relative = 1e-12);
    }
}
