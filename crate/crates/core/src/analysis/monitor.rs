//! Energy time series and random admissible initial data.

use crate::space::{Block, Discretization};
use crate::stepper::{SimState, StepRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;

pub fn write_energy_csv(records: &[StepRecord], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "t,E,E_p,E_f")?;
    for r in records {
        writeln!(w, "{:.10e},{:.16e},{:.16e},{:.16e}", r.t, r.energy, r.energy_p, r.energy_f)?;
    }
    Ok(())
}

/// First index k with E_k > E_{k-1} + slack·max(|E_{k-1}|, tiny), if any.
pub fn first_energy_increase(energy: &[f64], rel_slack: f64) -> Option<usize> {
    (1..energy.len()).find(|&k| energy[k] > energy[k - 1] + rel_slack * energy[k - 1].abs().max(f64::MIN_POSITIVE))
}

/// Uniform random coefficients in [-1, 1] for every block; the stress block
/// is made symmetric coefficient-wise so that it is orthogonal to rotations.
pub fn random_admissible_state(d: &Discretization, seed: u64) -> SimState {
    let l = &d.space.layout;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..l.ndof()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let s0 = l.range(Block::S).start;
    for c in d.mesh.cells_in(crate::mesh::Region::Fluid) {
        for i in 0..l.n_f {
            x[s0 + l.ften(c, 1, 0) + i] = x[s0 + l.ften(c, 0, 1) + i];
        }
    }
    SimState { t: 0.0, k: 0, x }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increase_detection() {
        assert_eq!(first_energy_increase(&[3.0, 2.0, 2.0, 1.0], 1e-10), None);
        assert_eq!(first_energy_increase(&[3.0, 2.0, 2.1, 1.0], 1e-10), Some(2));
        assert_eq!(first_energy_increase(&[1.0, 1.0 + 1e-12], 1e-10), None);
    }

    #[test]
    fn csv_header() {
        let r = StepRecord { k: 0, t: 0.0, energy: 1.0, energy_p: 0.5, energy_f: 0.5, weak_symmetry: 0.0 };
        let mut out = Vec::new();
        write_energy_csv(&[r], &mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("t,E,E_p,E_f\n0.0"));
    }
}
