//! Frame conventions and the dead-reckoning step.
//!
//! cargo run --example dead_reckoning

use glidernav::frames::{dr_step, positioning_error, rot_body_to_ned, BodyVelocityRel, EulerAngles, NedPosition};

fn main() -> glidernav::Result<()> {
    let att = EulerAngles::new(0.05, -0.4, std::f64::consts::FRAC_PI_4);
    let r = rot_body_to_ned(&att)?;
    println!("R(Θ) =\n{r:.4}");

    let vel = BodyVelocityRel::new(1.0, 0.02, 0.03);
    let mut chi = NedPosition::new(0.0, 0.0, 10.0);
    for _ in 0..7200 {
        chi = dr_step(&chi, &att, &vel, 0.5)?;
    }
    println!("after 1 h at fixed attitude: N {:.1} m, E {:.1} m, D {:.1} m", chi.north, chi.east, chi.down);

    let truth = NedPosition::new(2_500.0, 2_600.0, chi.down);
    let e = positioning_error(&chi, &truth);
    println!("error vs a reference fix: N {:.1} m, E {:.1} m, horizontal {:.1} m", e.n_error, e.e_error, e.horizontal());

    // the pitch guard refuses attitudes near the singularity
    assert!(rot_body_to_ned(&EulerAngles::new(0.0, 1.55, 0.0)).is_err());
    Ok(())
}
