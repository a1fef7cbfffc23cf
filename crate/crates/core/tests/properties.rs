mod common;

use common::*;
use proptest::prelude::*;
use sdeot::geometry::Vec2;
use sdeot::problem::Problem;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn slack_is_nonnegative_on_line(atoms in line_atoms(), seed in dual_vector(4), x in -3.0f64..3.0) {
        slack_nonnegative(&atoms, &seed[..atoms.len()], Vec2::on_line(x))?;
    }

    #[test]
    fn slack_is_nonnegative_in_plane(atoms in plane_atoms(), seed in dual_vector(4), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        slack_nonnegative(&atoms, &seed[..atoms.len()], Vec2::new(x, y))?;
    }

    #[test]
    fn facets_are_symmetric(atoms in plane_atoms(), seed in prop::collection::vec(-0.05f64..0.05, 4)) {
        facet_symmetric(&atoms, &seed[..atoms.len()], &unit_square())?;
    }

    #[test]
    fn facets_are_symmetric_on_line(atoms in line_atoms(), density in line_density(), seed in prop::collection::vec(-0.2f64..0.2, 4)) {
        facet_symmetric(&atoms, &seed[..atoms.len()], &density)?;
    }

    #[test]
    fn conditional_rows_sum_to_one(atoms in plane_atoms(), seed in dual_vector(4), eta in 0.01f64..5000.0, x in -1.0f64..2.0, y in -1.0f64..2.0) {
        rows_sum_to_one(&atoms, &seed[..atoms.len()], eta, Vec2::new(x, y))?;
    }

    #[test]
    fn cell_masses_sum_to_one(atoms in line_atoms(), density in line_density(), seed in dual_vector(4)) {
        mass_conserved(&atoms, &seed[..atoms.len()], &density)?;
    }

    #[test]
    fn cell_masses_sum_to_one_in_plane(atoms in plane_atoms(), seed in prop::collection::vec(-0.1f64..0.1, 4)) {
        mass_conserved(&atoms, &seed[..atoms.len()], &unit_square())?;
    }

    #[test]
    fn scalar_log_inequality(a in 0.0f64..1e6, b in 0.0f64..=1.0) {
        scalar_inequality(a, b)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solved_line_problems_satisfy_identities(atoms in line_atoms(), density in line_density(), eta in prop::sample::select(vec![0.5, 1.0, 2.0, 4.0])) {
        solved_identities(&Problem::new(density, atoms).unwrap(), eta)?;
    }
}

#[test]
fn scalar_inequality_grid() {
    for a in [0.5, 2.0, 10.0] {
        for b in [0.1, 0.5, 1.0] {
            scalar_inequality(a, b).unwrap();
        }
    }
}

#[test]
fn solved_square_satisfies_identities() {
    let atoms =
        sdeot::powercell::Atoms::plane(&[[0.2, 0.3], [0.7, 0.4], [0.5, 0.8]], &[0.3, 0.3, 0.4])
            .unwrap();
    solved_identities(&Problem::new(unit_square(), atoms).unwrap(), 4.0).unwrap();
}
