use std::sync::Arc;

use nsch::cli::io::{format_snapshot, parse_snapshot};
use nsch::cli::mms::{run_level, Manufactured, TimeLaw};
use nsch::cli::parse_config;
use nsch::mesh::{make_grid, FaceTag, ScalarField, VectorField};
use nsch::{LawParams, State, StepperConfig};
use proptest::prelude::*;

fn tag(k: u8) -> FaceTag {
    if k % 2 == 0 {
        FaceTag::Slip
    } else {
        FaceTag::NoSlip
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn config_display_round_trips(
        n in 4usize..200,
        m in 4usize..200,
        lx in 0.1f64..10.0,
        tags in prop::collection::vec(0u8..2, 4),
        eps in 1e-4f64..1.0,
        eta in 1e-3f64..10.0,
        dt0 in 1e-6f64..1e-2,
        c_bar in -0.9f64..0.9,
    ) {
        let faces: Vec<&str> = tags.iter().map(|k| if k % 2 == 0 { "slip" } else { "noslip" }).collect();
        let text = format!(
            "[grid]\nn_cells = {n}, {m}\nextents = {lx}, 1\nface_tags = {}\n\
             [material]\neps = {eps}\neta = {eta}\n[initial]\nscenario = equilibrium\nc_bar = {c_bar}\n\
             [stepper]\ndt0 = {dt0}\n",
            faces.join(", ")
        );
        let cfg = parse_config(&text).unwrap();
        prop_assert_eq!(cfg.grid.face_tags[1], tag(tags[1]));
        let again = parse_config(&cfg.to_string()).unwrap();
        prop_assert_eq!(again, cfg);
    }

    #[test]
    fn snapshot_round_trips(
        n in 4usize..9,
        m in 4usize..9,
        seed in prop::collection::vec(-1.0f64..1.0, 4),
        t in 0.0f64..10.0,
    ) {
        let g = make_grid(&[1.5, 0.7], &[n, m], &[FaceTag::Slip, FaceTag::NoSlip, FaceTag::Slip, FaceTag::Slip]).unwrap();
        let f = |k: usize, x: [f64; 2]| seed[k] * (3.0 * x[0] + x[1] * (k as f64 + 1.0)).sin();
        let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.5 * f(0, x).abs()).with_neumann();
        let u = VectorField::from_fn(&g, |x| [f(1, x), f(2, x)]).with_velocity_bc();
        let c = ScalarField::from_fn(&g, |x| f(3, x)).with_neumann();
        let mu = ScalarField::from_fn(&g, |x| f(0, x) - f(3, x)).with_neumann();
        let s = State::new(rho, u, c, mu, t).unwrap();
        let back = parse_snapshot(&format_snapshot(&s)).unwrap();
        prop_assert_eq!(back.t, s.t);
        for (i, j) in g.cells() {
            prop_assert_eq!(back.rho.get(i, j), s.rho.get(i, j));
            prop_assert_eq!(back.c.get(i, j), s.c.get(i, j));
            prop_assert_eq!(back.mu.get(i, j), s.mu.get(i, j));
            for a in 0..2 {
                prop_assert_eq!(back.u.comp(a).get(i, j), s.u.comp(a).get(i, j));
            }
        }
    }
}

#[test]
fn zero_amplitude_manufactured_solution_is_exact() {
    let law = LawParams { k: 0.0, beta: 1.0, eps: 0.01, gamma: 0.01, eta: 0.1, lambda: 0.0 };
    let m = Manufactured { rho_bar: 1.0, c_bar: 0.2, a_u: 0.0, a_c: 0.0, a_mu: 0.0, time: TimeLaw::Linear, law };
    let e = run_level(&m, 8, 4, 0.1, &StepperConfig::default()).unwrap();
    assert!(e.combined() <= 1e-12, "{e:?}");
    let g: Arc<_> = Manufactured::grid(8).unwrap();
    assert_eq!(g.cell_count(), 64);
}
